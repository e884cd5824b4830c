use beanrec_client::{Client, ClientError};
use beanrec_core::dataset::synthetic::{synthetic_records, SyntheticConfig};
use beanrec_core::recommender::build_space;
use beanrec_core::subjective::SubjectiveVector;
use beanrec_service::{serve, AppState};

#[tokio::test]
async fn talks_to_a_live_service() {
    let recs = synthetic_records(&SyntheticConfig {
        rows: 90,
        seed: 1,
        ..Default::default()
    });
    let state = AppState::from_space(build_space(&recs, &[], None).unwrap(), 3).unwrap();
    let (bound_tx, bound_rx) = tokio::sync::oneshot::channel();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(
        state,
        "127.0.0.1:0".parse().unwrap(),
        false,
        Some(bound_tx),
        async {
            let _ = stop_rx.await;
        },
    ));
    let addr = bound_rx.await.unwrap();
    let client = Client::new(format!("http://{addr}/"));

    let health = client.health().await.unwrap();
    assert_eq!(health.status, "ok");
    let meta = client.metadata().await.unwrap();
    assert_eq!(meta.default_k, 3);

    let r = client.recommend(recs[4].subjective, Some(1)).await.unwrap();
    assert_eq!(r.recommendations[0].bean_id, recs[4].id);
    assert_eq!(r.space_fingerprint, health.space_fingerprint);
    let r = client.recommend(SubjectiveVector::splat(7.0), None).await.unwrap();
    assert_eq!(r.recommendations.len(), 3);

    assert_eq!(client.bean(recs[2].id).await.unwrap().bean_id, recs[2].id);
    match client.bean(999_999).await {
        Err(ClientError::Api { status, code, .. }) => {
            assert_eq!(status, 404);
            assert_eq!(code, "not_found");
        }
        other => panic!("{other:?}"),
    }
    match client.recommend(SubjectiveVector::splat(11.0), None).await {
        Err(ClientError::Api { status, field, .. }) => {
            assert_eq!(status, 422);
            assert_eq!(field.as_deref(), Some("preferences.aroma"));
        }
        other => panic!("{other:?}"),
    }

    stop_tx.send(()).unwrap();
    server.await.unwrap().unwrap();
}

#[tokio::test]
async fn unreachable_service_is_a_transport_error() {
    let client = Client::new("http://127.0.0.1:9");
    assert!(matches!(client.health().await, Err(ClientError::Transport(_))));
}
