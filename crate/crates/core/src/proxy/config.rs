use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::{Mode, ProxyService, ServedState};
use crate::error::{Error, Result};

/// Service configuration. Environment variables override file values:
/// `PIRATTE_PROXY_LISTEN`, `PIRATTE_PROXY_MODE`, `PIRATTE_PROXY_ADMIN_TOKEN`,
/// `PIRATTE_PROXY_KEY_PATH`.
///
/// ```toml
/// listen = "127.0.0.1:8700"
/// mode = "key"
/// admin_token = "change-me"
/// proxy_key_path = "keys/proxy.pxk"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub admin_token: String,
    #[serde(default)]
    pub proxy_key_path: PathBuf,
}

fn default_listen() -> String {
    "127.0.0.1:8700".into()
}

fn default_mode() -> Mode {
    Mode::Key
}

impl ProxyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::MalformedInput(format!("config: {e}")))
    }

    /// Reads the file if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                let mut cfg = Self::parse(&text)?;
                if cfg.proxy_key_path.is_relative() && !cfg.proxy_key_path.as_os_str().is_empty() {
                    if let Some(dir) = p.parent() {
                        cfg.proxy_key_path = dir.join(&cfg.proxy_key_path);
                    }
                }
                cfg
            }
            None => Self::parse("")?,
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(v) = var("PIRATTE_PROXY_LISTEN") {
            self.listen = v;
        }
        if let Some(v) = var("PIRATTE_PROXY_MODE") {
            self.mode = v.parse()?;
        }
        if let Some(v) = var("PIRATTE_PROXY_ADMIN_TOKEN") {
            self.admin_token = v;
        }
        if let Some(v) = var("PIRATTE_PROXY_KEY_PATH") {
            self.proxy_key_path = v.into();
        }
        Ok(())
    }

    /// Loads the initial proxy key and checks it against the configured mode.
    pub fn build_service(&self) -> Result<Arc<ProxyService>> {
        if self.admin_token.is_empty() {
            return Err(Error::MalformedInput("admin_token must be set".into()));
        }
        let bytes = std::fs::read(&self.proxy_key_path)?;
        let state = ServedState::from_bytes(&bytes)?;
        if state.mode() != self.mode {
            return Err(Error::ModeMismatch(self.mode.to_string()));
        }
        Ok(Arc::new(ProxyService::new(state, self.admin_token.clone())))
    }
}
