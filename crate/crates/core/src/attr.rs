//! Per-attribute revocation: one secret polynomial per attribute and one
//! revocation list per attribute, so a user can lose some attributes and
//! keep the rest.

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, RngCore};

use crate::algebra::{random_nonzero_scalar, random_scalar, scalar_to_bytes, BilinearContext, Gt, Polynomial, Scalar, Share, G2};
use crate::ciphertext::{self, Ciphertext, PublicKey};
use crate::error::{Error, Result};
use crate::policy::{normalize_attribute, normalize_attribute_set, select_satisfying_leaves, select_with, AccessTree};
use crate::revocation::{self, conversion_exponent, hex, leaf_factors, padded_shares, Registry, RevocationList, SecretKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrMasterKey {
    pub(crate) beta: Scalar,
    pub(crate) g2_alpha: G2,
    pub(crate) t: usize,
    pub(crate) polys: BTreeMap<String, Polynomial<Scalar>>,
    pub(crate) registry: Registry,
    pub(crate) revoked: BTreeMap<String, RevocationList>,
    pub(crate) version: u64,
}

impl AttrMasterKey {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn polynomials(&self) -> &BTreeMap<String, Polynomial<Scalar>> {
        &self.polys
    }

    pub fn attributes(&self) -> BTreeSet<String> {
        self.polys.keys().cloned().collect()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Current per-attribute revoked sets; attributes without an entry have
    /// no revocations.
    pub fn revoked(&self) -> &BTreeMap<String, RevocationList> {
        &self.revoked
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn identity(&self, user: &str) -> Result<Scalar> {
        self.registry
            .identity(user)
            .ok_or_else(|| Error::UnknownUser(user.to_string()))
    }

    /// Adds a polynomial for a new attribute; existing ones are kept.
    pub fn introduce_attribute<R: RngCore + CryptoRng>(&mut self, attribute: &str, rng: &mut R) -> Result<()> {
        let name = normalize_attribute(attribute)?;
        if !self.polys.contains_key(&name) {
            self.polys.insert(name, Polynomial::random(self.t, None, rng)?);
        }
        Ok(())
    }

    /// Builds per-attribute revocation lists from `(user, attribute)` pairs.
    pub fn revocation_map<'a, I>(&self, pairs: I) -> Result<BTreeMap<String, RevocationList>>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut grouped: BTreeMap<String, Vec<Scalar>> = BTreeMap::new();
        for (user, attribute) in pairs {
            let id = self.identity(user)?;
            let ids = grouped.entry(normalize_attribute(attribute)?).or_default();
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        grouped
            .into_iter()
            .map(|(a, ids)| Ok((a, RevocationList::new(ids)?)))
            .collect()
    }

    pub(crate) fn from_parts(
        beta: Scalar,
        g2_alpha: G2,
        t: usize,
        polys: BTreeMap<String, Polynomial<Scalar>>,
        registry: Registry,
        revoked: BTreeMap<String, RevocationList>,
        version: u64,
    ) -> Result<Self> {
        ciphertext::nonzero(beta).map_err(|_| Error::InvalidComponent("beta is zero".into()))?;
        if t < 1 {
            return Err(Error::InvalidDegree(t));
        }
        if polys.values().any(|p| p.degree() != t) {
            return Err(Error::InvalidComponent("attribute polynomials must share degree t".into()));
        }
        if let Some(rl) = revoked.values().find(|rl| rl.len() > t) {
            return Err(Error::RevocationCapacityExceeded {
                requested: rl.len(),
                capacity: t,
            });
        }
        Ok(AttrMasterKey {
            beta,
            g2_alpha,
            t,
            polys,
            registry,
            revoked,
            version,
        })
    }
}

/// `t` points of every provisioned attribute's polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrProxyKey {
    version: u64,
    shares: BTreeMap<String, Vec<Share<Scalar>>>,
}

impl AttrProxyKey {
    pub fn new(version: u64, shares: BTreeMap<String, Vec<Share<Scalar>>>) -> Result<Self> {
        let mut t = None;
        for (attr, list) in &shares {
            normalize_attribute(attr)?;
            revocation::ProxyKey::new(version, list.clone())?;
            if *t.get_or_insert(list.len()) != list.len() {
                return Err(Error::InvalidComponent("attribute share lists differ in length".into()));
            }
        }
        Ok(AttrProxyKey { version, shares })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Points per attribute (0 for an empty key).
    pub fn t(&self) -> usize {
        self.shares.values().next().map_or(0, Vec::len)
    }

    pub fn shares(&self) -> &BTreeMap<String, Vec<Share<Scalar>>> {
        &self.shares
    }

    pub fn attribute_shares(&self, attribute: &str) -> Option<&[Share<Scalar>]> {
        self.shares.get(attribute).map(Vec::as_slice)
    }
}

/// Proxy result for a single leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafOutcome {
    Converted { c_dprime: G2, lambda_k: Scalar },
    /// The requester is revoked for this leaf's attribute.
    Revoked,
    /// The proxy key holds no points for this leaf's attribute.
    Unprovisioned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrConversionBundle {
    pub version: u64,
    /// `(leaf id, outcome)` in request order.
    pub leaves: Vec<(usize, LeafOutcome)>,
}

impl AttrConversionBundle {
    pub fn get(&self, leaf: usize) -> Option<&LeafOutcome> {
        self.leaves.iter().find(|(id, _)| *id == leaf).map(|(_, o)| o)
    }

    pub fn revoked_leaves(&self) -> Vec<usize> {
        self.leaves_where(|o| matches!(o, LeafOutcome::Revoked))
    }

    pub fn unprovisioned_leaves(&self) -> Vec<usize> {
        self.leaves_where(|o| matches!(o, LeafOutcome::Unprovisioned))
    }

    fn leaves_where(&self, pred: impl Fn(&LeafOutcome) -> bool) -> Vec<usize> {
        self.leaves
            .iter()
            .filter(|(_, o)| pred(o))
            .map(|(id, _)| *id)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrConversionRequest {
    pub user_id: Scalar,
    /// `(leaf id, attribute, C'_y)`
    pub leaves: Vec<(usize, String, G2)>,
}

pub fn attr_setup<R, I, S>(
    _ctx: &BilinearContext,
    t: usize,
    initial_attrs: I,
    rng: &mut R,
) -> Result<(PublicKey, AttrMasterKey)>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if t < 1 {
        return Err(Error::InvalidDegree(t));
    }
    let attrs: Vec<String> = initial_attrs
        .into_iter()
        .map(|a| normalize_attribute(a.as_ref()))
        .collect::<Result<_>>()?;
    let alpha = random_scalar(rng);
    let beta = random_nonzero_scalar(rng);
    let (pk, g2_alpha) = PublicKey::from_secrets(alpha, beta);
    let mut mk = AttrMasterKey {
        beta,
        g2_alpha,
        t,
        polys: BTreeMap::new(),
        registry: Registry::default(),
        revoked: BTreeMap::new(),
        version: 0,
    };
    for a in attrs {
        mk.introduce_attribute(&a, rng)?;
    }
    Ok((pk, mk))
}

/// Issues a key whose attribute `j` is blinded by `P_j(0)` and bound through
/// `P_j(u_k)`. Unknown attributes get a polynomial on the spot.
pub fn attr_keygen<R, I, S>(mk: &mut AttrMasterKey, user: &str, attrs: I, rng: &mut R) -> Result<SecretKey>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let attrs = normalize_attribute_set(attrs)?;
    for a in &attrs {
        mk.introduce_attribute(a, rng)?;
    }
    let user_id = mk.registry.enroll(user, rng)?;
    let polys = &mk.polys;
    revocation::issue_key(
        &mk.beta,
        &mk.g2_alpha,
        user_id,
        attrs,
        |a, _| {
            let p = &polys[a];
            (p.constant(), p.evaluate(&user_id))
        },
        rng,
    )
}

pub fn attr_encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    message: &Gt,
    policy: &AccessTree,
    rng: &mut R,
) -> Result<Ciphertext> {
    ciphertext::encrypt(pk, message, policy, rng)
}

/// Builds the next proxy key. Every attribute known to the master key gets
/// exactly `t` points; attributes absent from `revocations` get only
/// dummies.
pub fn attr_proxy_rekey<R: RngCore + CryptoRng>(
    _pk: &PublicKey,
    mk: &mut AttrMasterKey,
    revocations: &BTreeMap<String, RevocationList>,
    rng: &mut R,
) -> Result<AttrProxyKey> {
    let mut normalized = BTreeMap::new();
    for (attr, rl) in revocations {
        if rl.len() > mk.t {
            return Err(Error::RevocationCapacityExceeded {
                requested: rl.len(),
                capacity: mk.t,
            });
        }
        if let Some(unknown) = rl.ids().iter().find(|u| !mk.registry.is_registered(u)) {
            return Err(Error::UnknownUser(hex(&scalar_to_bytes(unknown))));
        }
        if !rl.is_empty() {
            normalized.insert(normalize_attribute(attr)?, rl.clone());
        }
    }
    for attr in normalized.keys() {
        mk.introduce_attribute(attr, rng)?;
    }
    let empty = RevocationList::empty();
    let mut shares = BTreeMap::new();
    for (attr, poly) in &mk.polys {
        let rl = normalized.get(attr).unwrap_or(&empty);
        shares.insert(attr.clone(), padded_shares(poly, &mut mk.registry, rl.ids(), rng));
    }
    mk.version += 1;
    mk.revoked = normalized;
    Ok(AttrProxyKey {
        version: mk.version,
        shares,
    })
}

/// Converts each leaf against its own attribute's points. Revocation is
/// reported per leaf instead of failing the whole request.
pub fn attr_convert(
    pxk: &AttrProxyKey,
    leaf_components: &[(usize, String, G2)],
    user_id: &Scalar,
) -> Result<AttrConversionBundle> {
    if leaf_components.is_empty() {
        return Err(Error::EmptyRequest);
    }
    let mut cache: BTreeMap<&str, Option<(Scalar, Scalar)>> = BTreeMap::new();
    let mut leaves = Vec::with_capacity(leaf_components.len());
    for (id, attr, c_prime) in leaf_components {
        let Some(shares) = pxk.shares.get(attr.as_str()) else {
            leaves.push((*id, LeafOutcome::Unprovisioned));
            continue;
        };
        let coeffs = match cache.get(attr.as_str()) {
            Some(c) => *c,
            None => {
                let c = match conversion_exponent(shares, user_id) {
                    Ok(c) => Some(c),
                    Err(Error::RequesterRevoked) => None,
                    Err(e) => return Err(e),
                };
                cache.insert(attr.as_str(), c);
                c
            }
        };
        let outcome = match coeffs {
            Some((exponent, lambda_k)) => LeafOutcome::Converted {
                c_dprime: *c_prime * exponent,
                lambda_k,
            },
            None => LeafOutcome::Revoked,
        };
        leaves.push((*id, outcome));
    }
    Ok(AttrConversionBundle {
        version: pxk.version,
        leaves,
    })
}

/// Every leaf whose attribute the key holds, so the proxy's answer leaves
/// room to route around revoked attributes.
pub fn attr_conversion_request(ct: &Ciphertext, sk: &SecretKey) -> Result<Vec<(usize, String, G2)>> {
    let attrs = sk.attributes();
    if select_satisfying_leaves(ct.policy(), &attrs).is_none() {
        return Err(Error::NotSatisfied);
    }
    Ok(ct
        .policy()
        .leaves()
        .iter()
        .enumerate()
        .filter(|(_, a)| attrs.contains(*a))
        .map(|(id, a)| (id, a.clone(), ct.leaves()[id].c_prime))
        .collect())
}

/// Decrypts using only leaves the proxy converted. Fails with
/// `DecryptionFailed` when the key's attributes satisfy the policy but its
/// unrevoked ones do not.
pub fn attr_decrypt(ct: &Ciphertext, sk: &SecretKey, bundle: &AttrConversionBundle) -> Result<Gt> {
    let attrs = sk.attributes();
    if select_satisfying_leaves(ct.policy(), &attrs).is_none() {
        return Err(Error::NotSatisfied);
    }
    let selection = select_with(ct.policy(), |id, a| {
        attrs.contains(a) && matches!(bundle.get(id), Some(LeafOutcome::Converted { .. }))
    });
    let Some(selection) = selection else {
        let missing = ct
            .policy()
            .leaves()
            .iter()
            .enumerate()
            .any(|(id, a)| attrs.contains(a) && bundle.get(id).is_none());
        return Err(if missing {
            Error::BundleMismatch("bundle does not cover the key's leaves".into())
        } else {
            Error::DecryptionFailed
        });
    };
    let mut factors = Vec::with_capacity(3 * selection.len());
    for (leaf, w) in selection.leaf_weights::<Scalar>() {
        let comp = ct.leaf(leaf)?;
        let attr = ct.policy().attribute(leaf).expect("selected leaf exists");
        let key = &sk.components[attr];
        let Some(LeafOutcome::Converted { c_dprime, lambda_k }) = bundle.get(leaf) else {
            unreachable!("selection only admits converted leaves");
        };
        factors.extend(leaf_factors(
            &comp.c,
            &comp.c_prime,
            c_dprime,
            &key.d,
            &key.d_prime,
            &key.d_dprime,
            lambda_k,
            &w,
        ));
    }
    Ok(ct.unblind(&sk.d, factors))
}
