use std::time::Duration;

use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;

use super::http::{b64, ConvertIn, ConvertOut, ErrorOut, VersionOut};
use super::Info;
use crate::attr::{AttrConversionBundle, AttrConversionRequest};
use crate::error::{Error, Result};
use crate::revocation::{ConversionBundle, ConversionRequest};

/// Blocking client for a running proxy.
#[derive(Debug, Clone)]
pub struct ProxyClient {
    base: String,
    http: Client,
}

fn transport(e: reqwest::Error) -> Error {
    Error::Transport(e.to_string())
}

fn check(resp: Response) -> Result<Response> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let body: Option<ErrorOut> = resp.json().ok();
    Err(match status {
        StatusCode::FORBIDDEN => Error::RequesterRevoked,
        StatusCode::UNAUTHORIZED => Error::Unauthorized,
        StatusCode::CONFLICT => Error::StaleKey {
            offered: body.as_ref().and_then(|b| b.offered).unwrap_or(0),
            current: body.as_ref().and_then(|b| b.current).unwrap_or(0),
        },
        _ => Error::Transport(format!(
            "{status}: {}",
            body.and_then(|b| b.detail.or(Some(b.error))).unwrap_or_default()
        )),
    })
}

impl ProxyClient {
    pub fn new(base_url: impl Into<String>) -> Result<Self> {
        let http = Client::builder().timeout(Duration::from_secs(60)).build().map_err(transport)?;
        Ok(ProxyClient {
            base: base_url.into().trim_end_matches('/').to_owned(),
            http,
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn info(&self) -> Result<Info> {
        check(self.http.get(self.url("/v1/info")).send().map_err(transport)?)?
            .json()
            .map_err(transport)
    }

    fn post_convert(&self, body: &ConvertIn) -> Result<ConvertOut> {
        check(self.http.post(self.url("/v1/convert")).json(body).send().map_err(transport)?)?
            .json()
            .map_err(transport)
    }

    pub fn convert(&self, req: &ConversionRequest) -> Result<ConversionBundle> {
        self.post_convert(&ConvertIn::from_request(req))?.to_bundle()
    }

    pub fn convert_attr(&self, req: &AttrConversionRequest) -> Result<AttrConversionBundle> {
        let ids: Vec<usize> = req.leaves.iter().map(|(id, _, _)| *id).collect();
        self.post_convert(&ConvertIn::from_attr_request(req))?.to_attr_bundle(&ids)
    }

    /// Pushes codec-encoded proxy key bytes of either kind.
    pub fn rekey(&self, token: &str, pxk_bytes: &[u8]) -> Result<u64> {
        let resp = self
            .http
            .post(self.url("/v1/rekey"))
            .bearer_auth(token)
            .body(b64(pxk_bytes))
            .send()
            .map_err(transport)?;
        Ok(check(resp)?.json::<VersionOut>().map_err(transport)?.version)
    }
}
