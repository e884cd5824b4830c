use axum::extract::rejection::{JsonRejection, PathRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use beanrec_core::api::{ErrorBody, ErrorDetail};

/// Failures while loading the service state.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] beanrec_core::Error),
    #[error("background task failed: {0}")]
    Task(String),
}

/// An HTTP error with a JSON body.
#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub detail: ErrorDetail,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, field: Option<String>, message: impl Into<String>) -> Self {
        Self {
            status,
            detail: ErrorDetail {
                code: code.into(),
                field,
                message: message.into(),
            },
        }
    }

    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_field", Some(field.into()), message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", None, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", None, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.detail })).into_response()
    }
}

/// Pulls the dotted field path out of a deserialization message such as
/// `Failed to deserialize ...: preferences.flavour: invalid type ...`.
fn field_from_message(msg: &str) -> Option<String> {
    let tail = msg.split_once("target type: ").map(|(_, t)| t)?;
    let (path, _) = tail.split_once(": ")?;
    if path == "." || path.contains(' ') {
        return None;
    }
    Some(path.to_string())
}

/// Fallback when the message carries no path prefix.
fn unknown_field(msg: &str) -> Option<String> {
    let rest = msg.split_once("unknown field `")?.1;
    Some(rest.split_once('`')?.0.to_string())
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let message = r.body_text();
        let code = match &r {
            JsonRejection::MissingJsonContentType(_) => "unsupported_media_type",
            JsonRejection::JsonSyntaxError(_) => "malformed_json",
            _ => "invalid_body",
        };
        let field = field_from_message(&message).or_else(|| unknown_field(&message));
        let status = if r.status().is_client_error() {
            r.status()
        } else {
            StatusCode::BAD_REQUEST
        };
        Self::new(status, code, field, message)
    }
}

impl From<PathRejection> for ApiError {
    fn from(r: PathRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_path", Some("id".into()), r.body_text())
    }
}
