//! JSON over HTTP. Elements and scalars travel as unpadded base64url of
//! their compressed encoding; proxy keys as base64url of codec bytes.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

use super::{Info, ProxyService};
use crate::algebra::{scalar_from_bytes, scalar_to_bytes, Scalar, G2};
use crate::attr::{AttrConversionBundle, AttrConversionRequest, LeafOutcome};
use crate::error::{Error, Result};
use crate::revocation::{ConversionBundle, ConversionRequest};

pub(crate) fn b64(bytes: &[u8]) -> String {
    URL_SAFE_NO_PAD.encode(bytes)
}

pub(crate) fn unb64(s: &str) -> Result<Vec<u8>> {
    URL_SAFE_NO_PAD
        .decode(s.trim().trim_end_matches('='))
        .map_err(|e| Error::MalformedInput(format!("base64: {e}")))
}

pub(crate) fn scalar_b64(s: &Scalar) -> String {
    b64(&scalar_to_bytes(s))
}

pub(crate) fn scalar_unb64(s: &str) -> Result<Scalar> {
    scalar_from_bytes(&unb64(s)?)
}

pub(crate) fn g2_b64(p: &G2) -> String {
    let mut out = Vec::new();
    p.serialize_compressed(&mut out).expect("writing to a Vec cannot fail");
    b64(&out)
}

pub(crate) fn g2_unb64(s: &str) -> Result<G2> {
    G2::deserialize_compressed(unb64(s)?.as_slice()).map_err(|e| Error::InvalidComponent(format!("G2: {e}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LeafIn {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attr: Option<String>,
    pub c_prime: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ConvertIn {
    pub user_id: String,
    pub leaves: Vec<LeafIn>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LeafOut {
    pub id: usize,
    pub c_dprime: String,
}

/// One coefficient in key mode, one per converted leaf in attribute mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Lambda {
    Single(String),
    PerLeaf(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ConvertOut {
    pub version: u64,
    pub lambda_k: Lambda,
    pub converted: Vec<LeafOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revoked_leaves: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unprovisioned_leaves: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ErrorOut {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offered: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct VersionOut {
    pub version: u64,
}

impl ConvertIn {
    pub fn from_request(req: &ConversionRequest) -> Self {
        ConvertIn {
            user_id: scalar_b64(&req.user_id),
            leaves: req
                .leaves
                .iter()
                .map(|(id, c)| LeafIn {
                    id: *id,
                    attr: None,
                    c_prime: g2_b64(c),
                })
                .collect(),
        }
    }

    pub fn from_attr_request(req: &AttrConversionRequest) -> Self {
        ConvertIn {
            user_id: scalar_b64(&req.user_id),
            leaves: req
                .leaves
                .iter()
                .map(|(id, a, c)| LeafIn {
                    id: *id,
                    attr: Some(a.clone()),
                    c_prime: g2_b64(c),
                })
                .collect(),
        }
    }

    fn to_request(&self) -> Result<ConversionRequest> {
        Ok(ConversionRequest {
            user_id: scalar_unb64(&self.user_id)?,
            leaves: self
                .leaves
                .iter()
                .map(|l| Ok((l.id, g2_unb64(&l.c_prime)?)))
                .collect::<Result<_>>()?,
        })
    }

    fn to_attr_request(&self) -> Result<AttrConversionRequest> {
        Ok(AttrConversionRequest {
            user_id: scalar_unb64(&self.user_id)?,
            leaves: self
                .leaves
                .iter()
                .map(|l| {
                    let attr = l
                        .attr
                        .clone()
                        .ok_or_else(|| Error::MalformedInput(format!("leaf {} has no attribute", l.id)))?;
                    Ok((l.id, attr, g2_unb64(&l.c_prime)?))
                })
                .collect::<Result<_>>()?,
        })
    }
}

impl ConvertOut {
    fn from_bundle(b: &ConversionBundle) -> Self {
        ConvertOut {
            version: b.version,
            lambda_k: Lambda::Single(scalar_b64(&b.lambda_k)),
            converted: b
                .converted
                .iter()
                .map(|(id, c)| LeafOut {
                    id: *id,
                    c_dprime: g2_b64(c),
                })
                .collect(),
            revoked_leaves: None,
            unprovisioned_leaves: None,
        }
    }

    fn from_attr_bundle(b: &AttrConversionBundle) -> Self {
        let mut lambdas = Vec::new();
        let mut converted = Vec::new();
        for (id, outcome) in &b.leaves {
            if let LeafOutcome::Converted { c_dprime, lambda_k } = outcome {
                lambdas.push(scalar_b64(lambda_k));
                converted.push(LeafOut {
                    id: *id,
                    c_dprime: g2_b64(c_dprime),
                });
            }
        }
        ConvertOut {
            version: b.version,
            lambda_k: Lambda::PerLeaf(lambdas),
            converted,
            revoked_leaves: Some(b.revoked_leaves()),
            unprovisioned_leaves: Some(b.unprovisioned_leaves()),
        }
    }

    pub fn to_bundle(&self) -> Result<ConversionBundle> {
        let Lambda::Single(l) = &self.lambda_k else {
            return Err(Error::ModeMismatch("attr".into()));
        };
        Ok(ConversionBundle {
            version: self.version,
            lambda_k: scalar_unb64(l)?,
            converted: self
                .converted
                .iter()
                .map(|c| Ok((c.id, g2_unb64(&c.c_dprime)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// Rebuilds the per-leaf outcomes in request order.
    pub fn to_attr_bundle(&self, requested: &[usize]) -> Result<AttrConversionBundle> {
        let Lambda::PerLeaf(ls) = &self.lambda_k else {
            return Err(Error::ModeMismatch("key".into()));
        };
        if ls.len() != self.converted.len() {
            return Err(Error::MalformedInput("lambda_k and converted differ in length".into()));
        }
        let revoked = self.revoked_leaves.clone().unwrap_or_default();
        let unprovisioned = self.unprovisioned_leaves.clone().unwrap_or_default();
        let mut leaves = Vec::with_capacity(requested.len());
        for id in requested {
            let outcome = if let Some(i) = self.converted.iter().position(|c| c.id == *id) {
                LeafOutcome::Converted {
                    c_dprime: g2_unb64(&self.converted[i].c_dprime)?,
                    lambda_k: scalar_unb64(&ls[i])?,
                }
            } else if revoked.contains(id) {
                LeafOutcome::Revoked
            } else if unprovisioned.contains(id) {
                LeafOutcome::Unprovisioned
            } else {
                return Err(Error::BundleMismatch(format!("leaf {id} missing from response")));
            };
            leaves.push((*id, outcome));
        }
        Ok(AttrConversionBundle {
            version: self.version,
            leaves,
        })
    }
}

struct ApiError(Error);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = match &self.0 {
            Error::RequesterRevoked => (StatusCode::FORBIDDEN, "revoked"),
            Error::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized"),
            Error::StaleKey { .. } => (StatusCode::CONFLICT, "stale_key"),
            _ => (StatusCode::BAD_REQUEST, "bad_request"),
        };
        let (offered, current) = match self.0 {
            Error::StaleKey { offered, current } => (Some(offered), Some(current)),
            _ => (None, None),
        };
        let body = ErrorOut {
            error: error.into(),
            detail: (status == StatusCode::BAD_REQUEST).then(|| self.0.to_string()),
            offered,
            current,
        };
        (status, Json(body)).into_response()
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::Transport(e.to_string())))?
        .map_err(ApiError)
}

async fn info(State(svc): State<Arc<ProxyService>>) -> Json<Info> {
    Json(svc.info())
}

async fn convert(State(svc): State<Arc<ProxyService>>, body: axum::body::Bytes) -> Result<Json<ConvertOut>, ApiError> {
    let input: ConvertIn =
        serde_json::from_slice(&body).map_err(|e| ApiError(Error::MalformedInput(e.to_string())))?;
    blocking(move || {
        let state = svc.snapshot();
        match state.mode() {
            super::Mode::Key => Ok(ConvertOut::from_bundle(&state.convert(&input.to_request()?)?)),
            super::Mode::Attr => Ok(ConvertOut::from_attr_bundle(&state.convert_attr(&input.to_attr_request()?)?)),
        }
    })
    .await
    .map(Json)
}

async fn rekey(
    State(svc): State<Arc<ProxyService>>,
    headers: HeaderMap,
    body: String,
) -> Result<Json<VersionOut>, ApiError> {
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::to_owned)
        .ok_or(ApiError(Error::Unauthorized))?;
    blocking(move || {
        let bytes = unb64(&body)?;
        svc.rekey(&token, &bytes).map(|version| VersionOut { version })
    })
    .await
    .map(Json)
}

pub fn router(service: Arc<ProxyService>) -> Router {
    Router::new()
        .route("/v1/info", get(info))
        .route("/v1/convert", post(convert))
        .route("/v1/rekey", post(rekey))
        .with_state(service)
}

/// Runs the service on the current thread until interrupted.
pub fn serve(service: Arc<ProxyService>, listen: &str) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(listen).await?;
        log::info!("proxy listening on {}", listener.local_addr()?);
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// A server running on a background thread; dropped or [`ServerHandle::stop`]ped to shut down.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Binds `listen` (port 0 picks a free port) and serves in the background.
pub fn spawn(service: Arc<ProxyService>, listen: &str) -> Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(listen)?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
            let _ = axum::serve(listener, router(service))
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(ServerHandle {
        addr,
        stop: Some(tx),
        thread: Some(thread),
    })
}
