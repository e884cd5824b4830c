use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use beanrec_core::api::{ErrorBody, Health, Metadata, RecommendResponse};
use beanrec_core::dataset::synthetic::{synthetic_csv, synthetic_records, SyntheticConfig};
use beanrec_core::dataset::CoffeeRecord;
use beanrec_core::recommender::{build_space, SpaceEntry};
use beanrec_core::regressors::{ForestConfig, RegressorConfig, TrainedRegressor};
use beanrec_service::{router, AppState, ServiceConfig};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tower::ServiceExt;

fn records() -> Vec<CoffeeRecord> {
    synthetic_records(&SyntheticConfig {
        rows: 120,
        seed: 5,
        ..Default::default()
    })
}

fn app() -> (Router, Vec<CoffeeRecord>) {
    let recs = records();
    let space = build_space(&recs, &[], None).unwrap();
    (router(AppState::from_space(space, 5).unwrap(), false), recs)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> T {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn prefs(v: f64) -> Value {
    json!({
        "aroma": v, "flavour": v, "body": v, "sweetness": v,
        "acidity": v, "balance": v, "uniformity": v, "aftertaste": v
    })
}

#[tokio::test]
async fn health_and_metadata() {
    let (app, recs) = app();
    let (s, b) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(s, StatusCode::OK);
    let h: Health = parse(&b);
    assert_eq!(h.status, "ok");
    assert_eq!(h.space_fingerprint.len(), 64);

    let (s, b) = call(&app, Method::GET, "/metadata", None).await;
    assert_eq!(s, StatusCode::OK);
    let m: Metadata = parse(&b);
    let names: Vec<&str> = m.attributes.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(
        names,
        ["aroma", "flavour", "body", "sweetness", "acidity", "balance", "uniformity", "aftertaste"]
    );
    assert!(m.attributes.iter().all(|a| a.min == 0.0 && a.max == 10.0));
    assert_eq!(m.default_k, 5);
    assert_eq!(m.max_k, recs.len());
    assert_eq!(m.reviewed, recs.len());
    assert!(m.medians.is_valid_score());
}

#[tokio::test]
async fn exact_bean_is_first() {
    let (app, recs) = app();
    let target = &recs[17];
    let body = json!({ "preferences": serde_json::to_value(target.subjective).unwrap(), "k": 1 });
    let (s, b) = call(&app, Method::POST, "/recommend", Some(body)).await;
    assert_eq!(s, StatusCode::OK);
    let r: RecommendResponse = parse(&b);
    assert_eq!(r.recommendations.len(), 1);
    assert_eq!(r.recommendations[0].bean_id, target.id);
    assert_eq!(r.recommendations[0].rank, 1);
    assert_eq!(r.recommendations[0].distance, 0.0);
}

#[tokio::test]
async fn default_k_and_ordering() {
    let (app, _) = app();
    let (s, b) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": prefs(7.5) }))).await;
    assert_eq!(s, StatusCode::OK);
    let r: RecommendResponse = parse(&b);
    assert_eq!(r.k, 5);
    assert_eq!(r.recommendations.len(), 5);
    assert!(r.recommendations.windows(2).all(|w| w[0].distance <= w[1].distance));
    // Same request, same answer.
    let (_, again) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": prefs(7.5) }))).await;
    assert_eq!(b, again);
}

#[tokio::test]
async fn out_of_range_preference_names_attribute() {
    let (app, _) = app();
    let mut p = prefs(7.0);
    p["acidity"] = json!(12.0);
    let (s, b) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": p }))).await;
    assert!(s.is_client_error());
    let e: ErrorBody = parse(&b);
    assert_eq!(e.error.field.as_deref(), Some("preferences.acidity"));
    assert!(e.error.message.contains("acidity"));
}

#[tokio::test]
async fn unknown_and_missing_fields_rejected() {
    let (app, _) = app();
    let (s, b) = call(
        &app,
        Method::POST,
        "/recommend",
        Some(json!({ "preferences": prefs(7.0), "colour": "red" })),
    )
    .await;
    assert!(s.is_client_error());
    let e: ErrorBody = parse(&b);
    assert_eq!(e.error.field.as_deref(), Some("colour"));

    let mut p = prefs(7.0);
    p["sweet"] = json!(1.0);
    let (s, b) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": p }))).await;
    assert!(s.is_client_error());
    let e: ErrorBody = parse(&b);
    assert_eq!(e.error.field.as_deref(), Some("preferences.sweet"));

    let mut p = prefs(7.0);
    p.as_object_mut().unwrap().remove("body");
    let (s, b) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": p }))).await;
    assert!(s.is_client_error());
    let e: ErrorBody = parse(&b);
    assert!(e.error.message.contains("body"), "{}", e.error.message);
}

#[tokio::test]
async fn malformed_json_and_bad_k() {
    let (app, recs) = app();
    let req = Request::builder()
        .method(Method::POST)
        .uri("/recommend")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{\"preferences\": "))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);

    for k in [0, recs.len() + 1] {
        let (s, b) = call(&app, Method::POST, "/recommend", Some(json!({ "preferences": prefs(7.0), "k": k }))).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
        let e: ErrorBody = parse(&b);
        assert_eq!(e.error.field.as_deref(), Some("k"));
    }
}

#[tokio::test]
async fn beans_lookup() {
    let (app, recs) = app();
    let (s, b) = call(&app, Method::GET, &format!("/beans/{}", recs[3].id), None).await;
    assert_eq!(s, StatusCode::OK);
    let e: SpaceEntry = parse(&b);
    assert_eq!(e.subjective, recs[3].subjective);

    let (s, b) = call(&app, Method::GET, "/beans/999999", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let e: ErrorBody = parse(&b);
    assert_eq!(e.error.code, "not_found");

    let (s, _) = call(&app, Method::GET, "/beans/abc", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn cors_only_in_dev_mode() {
    let space = build_space(&records(), &[], None).unwrap();
    for dev in [false, true] {
        let app = router(AppState::from_space(space.clone(), 5).unwrap(), dev);
        let req = Request::builder()
            .uri("/health")
            .header(header::ORIGIN, "http://localhost:5173")
            .body(Body::empty())
            .unwrap();
        let resp = app.oneshot(req).await.unwrap();
        assert_eq!(resp.headers().contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN), dev);
    }
}

#[tokio::test]
async fn loads_from_config_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SyntheticConfig {
        rows: 150,
        seed: 9,
        ..Default::default()
    };
    std::fs::write(dir.path().join("reviews.csv"), synthetic_csv(&cfg)).unwrap();
    let recs = synthetic_records(&cfg);
    let model = TrainedRegressor::train(
        &recs,
        &RegressorConfig::Forest(ForestConfig {
            n_trees: 4,
            ..Default::default()
        }),
    )
    .unwrap();
    model.save(dir.path().join("model.json")).unwrap();
    let toml = "dataset = \"reviews.csv\"\nmodel = \"model.json\"\nhidden_fraction = 0.2\nseed = 3\n";
    std::fs::write(dir.path().join("service.toml"), toml).unwrap();

    let config = ServiceConfig::from_file(&dir.path().join("service.toml")).unwrap();
    let state = AppState::load(config).unwrap();
    let before = state.current();
    assert_eq!(before.reviewed + before.predicted, recs.len());
    assert_eq!(before.predicted, (0.2 * recs.len() as f64).round() as usize);
    let app = router(state.clone(), false);

    let fp = state.reload().await.unwrap();
    assert_eq!(fp, before.space.fingerprint);

    // A failed reload leaves the served space untouched.
    std::fs::write(dir.path().join("model.json"), "{}").unwrap();
    assert!(state.reload().await.is_err());
    let (s, b) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(parse::<Health>(&b).space_fingerprint, fp);
}
