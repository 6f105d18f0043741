//! Whole-key revocation through a minimally trusted proxy.
//!
//! The authority blinds every attribute key with `P(0)` of a secret degree-`t`
//! polynomial and binds it to the holder's identity `u_k` through an extra
//! `D''_j = g1^{r_j·P(u_k)}` component. The proxy holds `t` points of `P`,
//! one per revoked user plus dummies, and raises each ciphertext leaf to
//! `Σ λ_i P(u_i)`. Together with the requester's own point this gives `t + 1`
//! points and the blinding cancels. A revoked requester's point is already
//! among the `t`, so only `t` distinct points exist and nothing cancels.

use std::collections::{BTreeMap, BTreeSet};

use ark_ec::PrimeGroup;
use ark_ff::Field;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::algebra::{
    hash_to_g2, lagrange_at, random_nonzero_scalar, random_scalar, scalar_to_bytes, BilinearContext, Gt,
    Polynomial, Scalar, Share, G1, G2,
};
use crate::ciphertext::{self, Ciphertext, PublicKey};
use crate::error::{Error, Result};
use crate::policy::{normalize_attribute_set, select_satisfying_leaves, AccessTree};

/// SHA-256 of a scalar's canonical encoding; how dummy points are remembered.
pub(crate) fn identity_digest(x: &Scalar) -> [u8; 32] {
    Sha256::digest(scalar_to_bytes(x)).into()
}

/// Map of user names to identities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    users: BTreeMap<String, Scalar>,
    /// Reverse of `users`.
    names: BTreeMap<Scalar, String>,
    dummies: BTreeSet<[u8; 32]>,
}

impl Registry {
    pub fn identity(&self, user: &str) -> Option<Scalar> {
        self.users.get(user).copied()
    }

    pub fn user_of(&self, identity: &Scalar) -> Option<&str> {
        self.names.get(identity).map(String::as_str)
    }

    pub fn users(&self) -> &BTreeMap<String, Scalar> {
        &self.users
    }

    pub fn dummy_digests(&self) -> &BTreeSet<[u8; 32]> {
        &self.dummies
    }

    pub fn is_registered(&self, identity: &Scalar) -> bool {
        self.names.contains_key(identity)
    }

    fn is_taken(&self, x: &Scalar) -> bool {
        self.is_registered(x) || self.dummies.contains(&identity_digest(x))
    }

    /// Returns the user's identity, sampling and recording a fresh one on
    /// first use.
    pub(crate) fn enroll<R: RngCore + CryptoRng>(&mut self, user: &str, rng: &mut R) -> Result<Scalar> {
        if user.is_empty() {
            return Err(Error::UnknownUser(String::new()));
        }
        if let Some(u) = self.users.get(user) {
            return Ok(*u);
        }
        let u = loop {
            let candidate = random_nonzero_scalar(rng);
            if !self.is_taken(&candidate) {
                break candidate;
            }
        };
        self.users.insert(user.to_string(), u);
        self.names.insert(u, user.to_string());
        Ok(u)
    }

    fn fresh_dummy<R: RngCore + CryptoRng>(&mut self, avoid: &BTreeSet<Scalar>, rng: &mut R) -> Scalar {
        loop {
            let x = random_nonzero_scalar(rng);
            if !self.is_taken(&x) && !avoid.contains(&x) {
                self.dummies.insert(identity_digest(&x));
                return x;
            }
        }
    }

    pub(crate) fn from_parts(users: BTreeMap<String, Scalar>, dummies: BTreeSet<[u8; 32]>) -> Result<Self> {
        let mut names = BTreeMap::new();
        for (name, u) in &users {
            if ciphertext::nonzero(*u).is_err() || names.insert(*u, name.clone()).is_some() {
                return Err(Error::InvalidComponent("registry identities must be distinct and nonzero".into()));
            }
        }
        Ok(Registry { users, names, dummies })
    }
}

/// The complete set of currently revoked identities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RevocationList {
    ids: Vec<Scalar>,
}

impl RevocationList {
    pub fn new(ids: Vec<Scalar>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for id in &ids {
            ciphertext::nonzero(*id).map_err(|_| Error::InvalidComponent("zero identity".into()))?;
            if !seen.insert(*id) {
                return Err(Error::DuplicatePoint);
            }
        }
        Ok(RevocationList { ids })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ids(&self) -> &[Scalar] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &Scalar) -> bool {
        self.ids.contains(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterKey {
    pub(crate) beta: Scalar,
    pub(crate) g2_alpha: G2,
    pub(crate) poly: Polynomial<Scalar>,
    pub(crate) registry: Registry,
    pub(crate) revoked: RevocationList,
    pub(crate) version: u64,
}

impl MasterKey {
    pub fn t(&self) -> usize {
        self.poly.degree()
    }

    pub fn polynomial(&self) -> &Polynomial<Scalar> {
        &self.poly
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn revoked(&self) -> &RevocationList {
        &self.revoked
    }

    /// Version of the most recently issued proxy key (0 before the first).
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn identity(&self, user: &str) -> Result<Scalar> {
        self.registry
            .identity(user)
            .ok_or_else(|| Error::UnknownUser(user.to_string()))
    }

    /// Builds a revocation list from registered user names.
    pub fn revocation_list<I, S>(&self, users: I) -> Result<RevocationList>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ids = users
            .into_iter()
            .map(|u| self.identity(u.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        RevocationList::new(ids)
    }

    pub(crate) fn from_parts(
        beta: Scalar,
        g2_alpha: G2,
        poly: Polynomial<Scalar>,
        registry: Registry,
        revoked: RevocationList,
        version: u64,
    ) -> Result<Self> {
        ciphertext::nonzero(beta).map_err(|_| Error::InvalidComponent("beta is zero".into()))?;
        if poly.degree() < 1 {
            return Err(Error::InvalidDegree(poly.degree()));
        }
        if revoked.len() > poly.degree() {
            return Err(Error::RevocationCapacityExceeded {
                requested: revoked.len(),
                capacity: poly.degree(),
            });
        }
        Ok(MasterKey {
            beta,
            g2_alpha,
            poly,
            registry,
            revoked,
            version,
        })
    }
}

/// Per-attribute key components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributeKey {
    /// `g2^r · H(j)^{r_j·P(0)}`
    pub d: G2,
    /// `g1^{r_j}`
    pub d_prime: G1,
    /// `g1^{r_j·P(u_k)}`
    pub d_dprime: G1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) user_id: Scalar,
    pub(crate) d: G2,
    pub(crate) components: BTreeMap<String, AttributeKey>,
}

impl SecretKey {
    pub fn new(user_id: Scalar, d: G2, components: BTreeMap<String, AttributeKey>) -> Result<Self> {
        ciphertext::nonzero(user_id).map_err(|_| Error::InvalidComponent("zero identity".into()))?;
        if components.is_empty() {
            return Err(Error::InvalidAttributeSet);
        }
        normalize_attribute_set(components.keys())?;
        Ok(SecretKey {
            user_id,
            d,
            components,
        })
    }

    pub fn user_id(&self) -> &Scalar {
        &self.user_id
    }

    pub fn d(&self) -> &G2 {
        &self.d
    }

    pub fn components(&self) -> &BTreeMap<String, AttributeKey> {
        &self.components
    }

    pub fn attributes(&self) -> BTreeSet<String> {
        self.components.keys().cloned().collect()
    }
}

/// `t` points of the master polynomial handed to the proxy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyKey {
    version: u64,
    shares: Vec<Share<Scalar>>,
}

impl ProxyKey {
    pub fn new(version: u64, shares: Vec<Share<Scalar>>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidDegree(0));
        }
        let mut seen = BTreeSet::new();
        for s in &shares {
            ciphertext::nonzero(s.x).map_err(|_| Error::InvalidComponent("share at x = 0".into()))?;
            if !seen.insert(s.x) {
                return Err(Error::DuplicatePoint);
            }
        }
        Ok(ProxyKey { version, shares })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn t(&self) -> usize {
        self.shares.len()
    }

    pub fn shares(&self) -> &[Share<Scalar>] {
        &self.shares
    }

    pub fn xs(&self) -> Vec<Scalar> {
        self.shares.iter().map(|s| s.x).collect()
    }

    pub fn contains_point(&self, x: &Scalar) -> bool {
        self.shares.iter().any(|s| s.x == *x)
    }
}

/// The proxy's answer to one conversion request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionBundle {
    pub version: u64,
    pub lambda_k: Scalar,
    /// `(leaf id, C''_y)` in request order.
    pub converted: Vec<(usize, G2)>,
}

impl ConversionBundle {
    pub fn get(&self, leaf: usize) -> Option<&G2> {
        self.converted.iter().find(|(id, _)| *id == leaf).map(|(_, c)| c)
    }

    pub(crate) fn require(&self, leaf: usize) -> Result<&G2> {
        self.get(leaf)
            .ok_or_else(|| Error::BundleMismatch(format!("bundle has no entry for leaf {leaf}")))
    }
}

/// What a key holder sends to the proxy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionRequest {
    pub user_id: Scalar,
    /// `(leaf id, C'_y)`
    pub leaves: Vec<(usize, G2)>,
}

pub fn setup<R: RngCore + CryptoRng>(_ctx: &BilinearContext, t: usize, rng: &mut R) -> Result<(PublicKey, MasterKey)> {
    let poly = Polynomial::random(t, None, rng)?;
    let alpha = random_scalar(rng);
    let beta = random_nonzero_scalar(rng);
    let (pk, g2_alpha) = PublicKey::from_secrets(alpha, beta);
    let mk = MasterKey {
        beta,
        g2_alpha,
        poly,
        registry: Registry::default(),
        revoked: RevocationList::empty(),
        version: 0,
    };
    Ok((pk, mk))
}

/// Blinded key body shared by both revocation modes: `blind(j)` gives the
/// pair `(P_j(0), P_j(u_k))` for attribute `j`.
pub(crate) fn issue_key<R, B>(
    beta: &Scalar,
    g2_alpha: &G2,
    user_id: Scalar,
    attrs: BTreeSet<String>,
    mut blind: B,
    rng: &mut R,
) -> Result<SecretKey>
where
    R: RngCore + CryptoRng,
    B: FnMut(&str, &mut R) -> (Scalar, Scalar),
{
    let g1 = G1::generator();
    let g2 = G2::generator();
    let r = random_scalar(rng);
    let d = (*g2_alpha + g2 * r) * beta.inverse().expect("beta is nonzero");
    let g2_r = g2 * r;
    let mut components = BTreeMap::new();
    for attr in attrs {
        let (at_zero, at_user) = blind(&attr, rng);
        let r_j = random_scalar(rng);
        let key = AttributeKey {
            d: g2_r + hash_to_g2(&attr)? * (r_j * at_zero),
            d_prime: g1 * r_j,
            d_dprime: g1 * (r_j * at_user),
        };
        components.insert(attr, key);
    }
    Ok(SecretKey {
        user_id,
        d,
        components,
    })
}

/// Issues a key to `user`. Re-issuing to a known user keeps its identity.
pub fn keygen<R, I, S>(mk: &mut MasterKey, user: &str, attrs: I, rng: &mut R) -> Result<SecretKey>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let attrs = normalize_attribute_set(attrs)?;
    let user_id = mk.registry.enroll(user, rng)?;
    let at_zero = mk.poly.constant();
    let at_user = mk.poly.evaluate(&user_id);
    issue_key(&mk.beta, &mk.g2_alpha, user_id, attrs, |_, _| (at_zero, at_user), rng)
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    message: &Gt,
    policy: &AccessTree,
    rng: &mut R,
) -> Result<Ciphertext> {
    ciphertext::encrypt(pk, message, policy, rng)
}

/// Pads `revoked` with fresh dummy points to exactly `t` and evaluates the
/// polynomial at all of them.
pub(crate) fn padded_shares<R: RngCore + CryptoRng>(
    poly: &Polynomial<Scalar>,
    registry: &mut Registry,
    revoked: &[Scalar],
    rng: &mut R,
) -> Vec<Share<Scalar>> {
    let t = poly.degree();
    let mut xs = revoked.to_vec();
    let mut avoid: BTreeSet<Scalar> = xs.iter().copied().collect();
    while xs.len() < t {
        let x = registry.fresh_dummy(&avoid, rng);
        avoid.insert(x);
        xs.push(x);
    }
    let ys = poly.evaluate_many(&xs);
    xs.into_iter().zip(ys).map(|(x, y)| Share { x, y }).collect()
}

/// Builds the next proxy key from the complete revoked set.
pub fn proxy_rekey<R: RngCore + CryptoRng>(
    _pk: &PublicKey,
    mk: &mut MasterKey,
    revoked: &RevocationList,
    rng: &mut R,
) -> Result<ProxyKey> {
    let t = mk.t();
    if revoked.len() > t {
        return Err(Error::RevocationCapacityExceeded {
            requested: revoked.len(),
            capacity: t,
        });
    }
    if let Some(unknown) = revoked.ids().iter().find(|u| !mk.registry.is_registered(u)) {
        return Err(Error::UnknownUser(hex(&scalar_to_bytes(unknown))));
    }
    let shares = padded_shares(&mk.poly, &mut mk.registry, revoked.ids(), rng);
    mk.version += 1;
    mk.revoked = revoked.clone();
    Ok(ProxyKey {
        version: mk.version,
        shares,
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// `(λ_1..λ_t, λ_k)`: Lagrange coefficients at zero over the proxy points
/// followed by the requester's identity.
pub fn conversion_coefficients(xs: &[Scalar], user_id: &Scalar) -> Result<(Vec<Scalar>, Scalar)> {
    if xs.contains(user_id) {
        return Err(Error::RequesterRevoked);
    }
    let mut points = xs.to_vec();
    points.push(*user_id);
    let mut lambdas = lagrange_at(&points, Scalar::from(0u64))?;
    let lambda_k = lambdas.pop().expect("nonempty");
    Ok((lambdas, lambda_k))
}

/// `Σ λ_i P(x_i)` and `λ_k` by the direct formula.
pub fn conversion_exponent(shares: &[Share<Scalar>], user_id: &Scalar) -> Result<(Scalar, Scalar)> {
    let xs: Vec<Scalar> = shares.iter().map(|s| s.x).collect();
    let (lambdas, lambda_k) = conversion_coefficients(&xs, user_id)?;
    let exponent = lambdas.iter().zip(shares).map(|(l, s)| *l * s.y).sum();
    Ok((exponent, lambda_k))
}

/// Raises each submitted `C'_y` to `Σ λ_i P(u_i)`.
pub fn convert(pxk: &ProxyKey, leaf_components: &[(usize, G2)], user_id: &Scalar) -> Result<ConversionBundle> {
    if leaf_components.is_empty() {
        return Err(Error::EmptyRequest);
    }
    let (exponent, lambda_k) = conversion_exponent(&pxk.shares, user_id)?;
    Ok(ConversionBundle {
        version: pxk.version,
        lambda_k,
        converted: leaf_components.iter().map(|(id, c)| (*id, *c * exponent)).collect(),
    })
}

/// The `(leaf id, C'_y)` pairs a key holder must send to the proxy: exactly
/// the leaves of a minimum satisfying selection.
pub fn conversion_request(ct: &Ciphertext, sk: &SecretKey) -> Result<Vec<(usize, G2)>> {
    conversion_request_for(ct, &sk.attributes())
}

pub(crate) fn conversion_request_for(ct: &Ciphertext, attrs: &BTreeSet<String>) -> Result<Vec<(usize, G2)>> {
    let selection = select_satisfying_leaves(ct.policy(), attrs).ok_or(Error::NotSatisfied)?;
    ct.conversion_components(selection.leaves())
}

/// `e(C_x, D_j) / (e(D''_j, C'_x)^{λ_k} · e(D'_j, C''_x))`, weighted by `w`,
/// as multi-pairing factors.
pub(crate) fn leaf_factors(
    c: &G1,
    c_prime: &G2,
    c_dprime: &G2,
    d: &G2,
    d_prime: &G1,
    d_dprime: &G1,
    lambda_k: &Scalar,
    w: &Scalar,
) -> [(G1, G2); 3] {
    [
        (*c * w, *d),
        (-(*d_dprime * (*w * lambda_k)), *c_prime),
        (-(*d_prime * w), *c_dprime),
    ]
}

/// Decrypts with a bundle converted for this key's identity. A revoked key
/// cannot obtain a valid bundle; any other bundle yields an unrelated group
/// element rather than an error.
pub fn decrypt(ct: &Ciphertext, sk: &SecretKey, bundle: &ConversionBundle) -> Result<Gt> {
    let selection = select_satisfying_leaves(ct.policy(), &sk.attributes()).ok_or(Error::NotSatisfied)?;
    let mut factors = Vec::with_capacity(3 * selection.len());
    for (leaf, w) in selection.leaf_weights::<Scalar>() {
        let comp = ct.leaf(leaf)?;
        let attr = ct.policy().attribute(leaf).expect("selected leaf exists");
        let key = sk
            .components
            .get(attr)
            .ok_or_else(|| Error::DecryptionError(format!("key lacks {attr}")))?;
        let c_dprime = bundle.require(leaf)?;
        factors.extend(leaf_factors(
            &comp.c,
            &comp.c_prime,
            c_dprime,
            &key.d,
            &key.d_prime,
            &key.d_dprime,
            &bundle.lambda_k,
            &w,
        ));
    }
    Ok(ct.unblind(&sk.d, factors))
}
