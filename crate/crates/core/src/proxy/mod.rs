//! The conversion proxy.
//!
//! The service state is a proxy key and its precomputation, held in one
//! slot that rekeying replaces wholesale. A request reads the slot once and
//! works on that snapshot, so a rekey landing mid-request never mixes
//! points from two versions. Master keys and secret keys never enter this
//! module's API.

mod client;
mod config;
mod http;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use ark_ff::{batch_inversion, One};
use serde::{Deserialize, Serialize};

use crate::algebra::{Scalar, Share, SubproductTree, G2};
use crate::attr::{AttrConversionBundle, AttrConversionRequest, AttrProxyKey, LeafOutcome};
use crate::codec::{self, Tag};
use crate::error::{Error, Result};
use crate::revocation::{ConversionBundle, ConversionRequest, ProxyKey};

pub use client::ProxyClient;
pub use config::ProxyConfig;
pub use http::{router, serve, spawn, ServerHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Key,
    Attr,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Key => "key",
            Mode::Attr => "attr",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "key" => Ok(Mode::Key),
            "attr" => Ok(Mode::Attr),
            other => Err(Error::MalformedInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// `λ'_i = Π_{j≠i} u_j/(u_j−u_i)` and `l'_i = λ'_i·P(u_i)` for one share
/// list. A request then costs one batch inversion and a few products per
/// share: `l_i = l'_i·u_k/(u_k−u_i) = λ_i·P(u_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precomputed {
    xs: Vec<Scalar>,
    lambda_prime: Vec<Scalar>,
    l_prime: Vec<Scalar>,
    /// `Π u_j`
    product: Scalar,
}

impl Precomputed {
    pub fn new(shares: &[Share<Scalar>]) -> Self {
        let xs: Vec<Scalar> = shares.iter().map(|s| s.x).collect();
        let product: Scalar = xs.iter().product();
        // Π_{j≠i}(u_j − u_i) = (−1)^{t−1}·Q'(u_i) with Q = Π(x − u_j).
        let mut denoms = SubproductTree::new(&xs).derivative_values();
        if xs.len() % 2 == 0 {
            denoms.iter_mut().for_each(|d| *d = -*d);
        }
        // one batch inversion covers the denominators and the points
        denoms.extend(&xs);
        batch_inversion(&mut denoms);
        let (inv_denoms, inv_xs) = denoms.split_at(xs.len());
        let lambda_prime: Vec<Scalar> = inv_xs
            .iter()
            .zip(inv_denoms)
            .map(|(inv_x, inv)| product * inv_x * inv)
            .collect();
        let l_prime = lambda_prime.iter().zip(shares).map(|(l, s)| *l * s.y).collect();
        Precomputed {
            xs,
            lambda_prime,
            l_prime,
            product,
        }
    }

    pub fn lambda_prime(&self) -> &[Scalar] {
        &self.lambda_prime
    }

    pub fn l_prime(&self) -> &[Scalar] {
        &self.l_prime
    }

    /// `(Σ λ_i P(u_i), λ_k)` for requester `u_k`.
    pub fn exponent(&self, user_id: &Scalar) -> Result<(Scalar, Scalar)> {
        let mut inv: Vec<Scalar> = self.xs.iter().map(|x| *user_id - x).collect();
        if inv.iter().any(|d| d == &Scalar::from(0u64)) {
            return Err(Error::RequesterRevoked);
        }
        batch_inversion(&mut inv);
        let mut exponent = Scalar::from(0u64);
        let mut inv_product = Scalar::one();
        for (l, d) in self.l_prime.iter().zip(&inv) {
            exponent += *l * user_id * d;
            inv_product *= d;
        }
        // λ_k = Π u_i/(u_i − u_k) = Π u_i · (−1)^t / Π(u_k − u_i)
        let mut lambda_k = self.product * inv_product;
        if self.xs.len() % 2 == 1 {
            lambda_k = -lambda_k;
        }
        Ok((exponent, lambda_k))
    }
}

/// Fast-path conversion against precomputed state; output is identical to
/// [`crate::revocation::convert`].
pub fn convert_precomputed(
    version: u64,
    pre: &Precomputed,
    leaf_components: &[(usize, G2)],
    user_id: &Scalar,
) -> Result<ConversionBundle> {
    if leaf_components.is_empty() {
        return Err(Error::EmptyRequest);
    }
    let (exponent, lambda_k) = pre.exponent(user_id)?;
    Ok(ConversionBundle {
        version,
        lambda_k,
        converted: leaf_components.iter().map(|(id, c)| (*id, *c * exponent)).collect(),
    })
}

#[derive(Debug)]
pub enum ServedState {
    Key { pxk: ProxyKey, pre: Precomputed },
    Attr { pxk: AttrProxyKey, pre: BTreeMap<String, Precomputed> },
}

impl ServedState {
    pub fn from_key(pxk: ProxyKey) -> Self {
        let pre = Precomputed::new(pxk.shares());
        ServedState::Key { pxk, pre }
    }

    pub fn from_attr_key(pxk: AttrProxyKey) -> Self {
        let pre = pxk
            .shares()
            .iter()
            .map(|(a, s)| (a.clone(), Precomputed::new(s)))
            .collect();
        ServedState::Attr { pxk, pre }
    }

    /// Decodes a proxy key file of either kind.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match codec::peek_tag(bytes)? {
            Tag::ProxyKey => Ok(Self::from_key(codec::decode(bytes)?)),
            Tag::AttrProxyKey => Ok(Self::from_attr_key(codec::decode(bytes)?)),
            other => Err(Error::MalformedInput(format!("{other:?} is not a proxy key"))),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            ServedState::Key { .. } => Mode::Key,
            ServedState::Attr { .. } => Mode::Attr,
        }
    }

    pub fn version(&self) -> u64 {
        match self {
            ServedState::Key { pxk, .. } => pxk.version(),
            ServedState::Attr { pxk, .. } => pxk.version(),
        }
    }

    pub fn t(&self) -> usize {
        match self {
            ServedState::Key { pxk, .. } => pxk.t(),
            ServedState::Attr { pxk, .. } => pxk.t(),
        }
    }

    pub fn convert(&self, req: &ConversionRequest) -> Result<ConversionBundle> {
        match self {
            ServedState::Key { pxk, pre } => convert_precomputed(pxk.version(), pre, &req.leaves, &req.user_id),
            ServedState::Attr { .. } => Err(Error::ModeMismatch(Mode::Attr.to_string())),
        }
    }

    pub fn convert_attr(&self, req: &AttrConversionRequest) -> Result<AttrConversionBundle> {
        let ServedState::Attr { pxk, pre } = self else {
            return Err(Error::ModeMismatch(Mode::Key.to_string()));
        };
        if req.leaves.is_empty() {
            return Err(Error::EmptyRequest);
        }
        let mut cache: BTreeMap<&str, Option<(Scalar, Scalar)>> = BTreeMap::new();
        let mut leaves = Vec::with_capacity(req.leaves.len());
        for (id, attr, c_prime) in &req.leaves {
            let Some(p) = pre.get(attr) else {
                leaves.push((*id, LeafOutcome::Unprovisioned));
                continue;
            };
            let coeffs = match cache.get(attr.as_str()) {
                Some(c) => *c,
                None => {
                    let c = match p.exponent(&req.user_id) {
                        Ok(c) => Some(c),
                        Err(Error::RequesterRevoked) => None,
                        Err(e) => return Err(e),
                    };
                    cache.insert(attr, c);
                    c
                }
            };
            leaves.push((
                *id,
                match coeffs {
                    Some((e, lambda_k)) => LeafOutcome::Converted {
                        c_dprime: *c_prime * e,
                        lambda_k,
                    },
                    None => LeafOutcome::Revoked,
                },
            ));
        }
        Ok(AttrConversionBundle {
            version: pxk.version(),
            leaves,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Info {
    pub version: u64,
    pub t: usize,
    pub mode: Mode,
}

/// Holds the current state and the admin token.
#[derive(Debug)]
pub struct ProxyService {
    admin_token: String,
    slot: RwLock<Arc<ServedState>>,
}

impl ProxyService {
    pub fn new(initial: ServedState, admin_token: impl Into<String>) -> Self {
        ProxyService {
            admin_token: admin_token.into(),
            slot: RwLock::new(Arc::new(initial)),
        }
    }

    pub fn mode(&self) -> Mode {
        self.snapshot().mode()
    }

    /// The state a request should use from start to finish.
    pub fn snapshot(&self) -> Arc<ServedState> {
        self.slot.read().expect("state lock poisoned").clone()
    }

    pub fn info(&self) -> Info {
        let s = self.snapshot();
        Info {
            version: s.version(),
            t: s.t(),
            mode: s.mode(),
        }
    }

    pub fn convert(&self, req: &ConversionRequest) -> Result<ConversionBundle> {
        self.snapshot().convert(req)
    }

    pub fn convert_attr(&self, req: &AttrConversionRequest) -> Result<AttrConversionBundle> {
        self.snapshot().convert_attr(req)
    }

    /// Installs a new proxy key given as codec bytes. The precomputation
    /// happens before the swap; the version must strictly increase.
    pub fn rekey(&self, token: &str, pxk_bytes: &[u8]) -> Result<u64> {
        if !constant_time_eq(token.as_bytes(), self.admin_token.as_bytes()) {
            return Err(Error::Unauthorized);
        }
        let next = ServedState::from_bytes(pxk_bytes)?;
        let mode = self.mode();
        if next.mode() != mode {
            return Err(Error::ModeMismatch(mode.to_string()));
        }
        let mut slot = self.slot.write().expect("state lock poisoned");
        if next.version() <= slot.version() {
            return Err(Error::StaleKey {
                offered: next.version(),
                current: slot.version(),
            });
        }
        let version = next.version();
        *slot = Arc::new(next);
        log::info!("installed proxy key version {version}");
        Ok(version)
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}
