//! Async client for the bean recommendation service.

use beanrec_core::api::{ErrorBody, Health, Metadata, RecommendRequest, RecommendResponse};
use beanrec_core::recommender::SpaceEntry;
use beanrec_core::subjective::SubjectiveVector;
use serde::de::DeserializeOwned;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service returned {status}: {message}{}", field.as_deref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Api {
        status: u16,
        code: String,
        field: Option<String>,
        message: String,
    },
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        Err(match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => ClientError::Api {
                status: status.as_u16(),
                code: body.error.code,
                field: body.error.field,
                message: body.error.message,
            },
            Err(_) => ClientError::Api {
                status: status.as_u16(),
                code: "unknown".into(),
                field: None,
                message: text,
            },
        })
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        Self::decode(self.http.get(format!("{}/health", self.base)).send().await?).await
    }

    pub async fn metadata(&self) -> Result<Metadata, ClientError> {
        Self::decode(self.http.get(format!("{}/metadata", self.base)).send().await?).await
    }

    pub async fn bean(&self, id: usize) -> Result<SpaceEntry, ClientError> {
        Self::decode(self.http.get(format!("{}/beans/{id}", self.base)).send().await?).await
    }

    pub async fn recommend(&self, preferences: SubjectiveVector, k: Option<usize>) -> Result<RecommendResponse, ClientError> {
        let body = RecommendRequest { preferences, k };
        Self::decode(
            self.http
                .post(format!("{}/recommend", self.base))
                .json(&body)
                .send()
                .await?,
        )
        .await
    }
}
