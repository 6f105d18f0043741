//! Access delegation.
//!
//! Single authority: a key holder re-randomizes part of their key for
//! someone else. The delegatee converts with the delegator's identity, so a
//! delegated key stops working as soon as the delegator is revoked.
//!
//! Two authorities (friend of friend): A issued B a key; B, who also runs
//! an authority, rewraps it for C under B's own polynomial. C needs a
//! conversion from A's proxy for B's identity and one from B's proxy for
//! C's identity, so either revocation cuts C off.

use std::collections::{BTreeMap, BTreeSet};

use ark_ec::PrimeGroup;
use ark_ff::Field;
use rand::{CryptoRng, RngCore};

use crate::algebra::{hash_to_g2, random_scalar, Gt, Scalar, G1, G2};
use crate::ciphertext::{self, Ciphertext, PublicKey};
use crate::error::{Error, Result};
use crate::policy::{normalize_attribute_set, select_satisfying_leaves};
use crate::revocation::{self, conversion_request_for, AttributeKey, ConversionBundle, MasterKey, SecretKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegatedKeySingle {
    pub(crate) delegator_id: Scalar,
    pub(crate) d: G2,
    /// `d_dprime` holds `D''_j · g1^{r~_j/λ_k}`.
    pub(crate) components: BTreeMap<String, AttributeKey>,
}

impl DelegatedKeySingle {
    pub fn new(delegator_id: Scalar, d: G2, components: BTreeMap<String, AttributeKey>) -> Result<Self> {
        let sk = SecretKey::new(delegator_id, d, components)?;
        Ok(DelegatedKeySingle {
            delegator_id: sk.user_id,
            d: sk.d,
            components: sk.components,
        })
    }

    /// The identity to present to the proxy.
    pub fn delegator_id(&self) -> &Scalar {
        &self.delegator_id
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiAttributeKey {
    pub d: G2,
    pub d_prime: G1,
    /// `(D''_j)^{1/P_B(0)}`
    pub d_dprime: G1,
    /// `(D''_j)^{P_B(C)/P_B(0)}`
    pub d_tprime: G1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegatedKeyMulti {
    /// B's identity under A's authority.
    pub(crate) delegator_id: Scalar,
    /// C's identity under B's authority.
    pub(crate) delegatee_id: Scalar,
    pub(crate) d: G2,
    pub(crate) components: BTreeMap<String, MultiAttributeKey>,
}

impl DelegatedKeyMulti {
    pub fn new(
        delegator_id: Scalar,
        delegatee_id: Scalar,
        d: G2,
        components: BTreeMap<String, MultiAttributeKey>,
    ) -> Result<Self> {
        for id in [delegator_id, delegatee_id] {
            ciphertext::nonzero(id).map_err(|_| Error::InvalidComponent("zero identity".into()))?;
        }
        if components.is_empty() {
            return Err(Error::InvalidAttributeSet);
        }
        normalize_attribute_set(components.keys())?;
        Ok(DelegatedKeyMulti {
            delegator_id,
            delegatee_id,
            d,
            components,
        })
    }

    pub fn delegator_id(&self) -> &Scalar {
        &self.delegator_id
    }

    pub fn delegatee_id(&self) -> &Scalar {
        &self.delegatee_id
    }

    pub fn d(&self) -> &G2 {
        &self.d
    }

    pub fn components(&self) -> &BTreeMap<String, MultiAttributeKey> {
        &self.components
    }

    pub fn attributes(&self) -> BTreeSet<String> {
        self.components.keys().cloned().collect()
    }
}

fn checked_subset<I, S, V>(subset: I, held: &BTreeMap<String, V>) -> Result<BTreeSet<String>>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let subset = normalize_attribute_set(subset).map_err(|e| match e {
        Error::InvalidAttributeSet => Error::NotASubset,
        other => other,
    })?;
    if subset.iter().all(|a| held.contains_key(a)) {
        Ok(subset)
    } else {
        Err(Error::NotASubset)
    }
}

/// Derives a key for `subset`. `lambda_k` is the delegator's current
/// coefficient as reported by the proxy; the result is bound to it and must
/// be re-derived after the proxy is rekeyed.
pub fn delegate_single<R, I, S>(
    sk: &SecretKey,
    subset: I,
    pk: &PublicKey,
    lambda_k: &Scalar,
    rng: &mut R,
) -> Result<DelegatedKeySingle>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let subset = checked_subset(subset, sk.components())?;
    let lambda_inv = lambda_k.inverse().ok_or(Error::InvalidCoefficient)?;
    let g1 = G1::generator();
    let g2 = G2::generator();
    let r_tilde = random_scalar(rng);
    let g2_r = g2 * r_tilde;
    let mut components = BTreeMap::new();
    for attr in subset {
        let old = sk.components()[&attr];
        let r_j = random_scalar(rng);
        let key = AttributeKey {
            d: old.d + g2_r + hash_to_g2(&attr)? * r_j,
            d_prime: old.d_prime,
            d_dprime: old.d_dprime + g1 * (r_j * lambda_inv),
        };
        components.insert(attr, key);
    }
    Ok(DelegatedKeySingle {
        delegator_id: *sk.user_id(),
        d: *sk.d() + pk.f * r_tilde,
        components,
    })
}

/// Leaves to send to the proxy, under the delegator's identity.
pub fn delegated_single_request(ct: &Ciphertext, dk: &DelegatedKeySingle) -> Result<Vec<(usize, G2)>> {
    conversion_request_for(ct, &dk.attributes())
}

/// Same leaf computation as ordinary decryption, with `bundle` converted
/// for the delegator's identity.
pub fn decrypt_delegated_single(ct: &Ciphertext, dk: &DelegatedKeySingle, bundle: &ConversionBundle) -> Result<Gt> {
    let as_key = SecretKey {
        user_id: dk.delegator_id,
        d: dk.d,
        components: dk.components.clone(),
    };
    revocation::decrypt(ct, &as_key, bundle)
}

/// B rewraps the key A issued to B for C, who is registered with B's
/// authority.
pub fn delegate_multi<I, S>(
    sk_from_a: &SecretKey,
    subset: I,
    mk_b: &MasterKey,
    c_identity: &Scalar,
) -> Result<DelegatedKeyMulti>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let subset = checked_subset(subset, sk_from_a.components())?;
    if !mk_b.registry().is_registered(c_identity) {
        return Err(Error::UnknownUser(revocation::hex(&crate::algebra::scalar_to_bytes(c_identity))));
    }
    let p_b = mk_b.polynomial();
    let inv_zero = p_b.constant().inverse().ok_or(Error::InvalidCoefficient)?;
    let ratio = p_b.evaluate(c_identity) * inv_zero;
    let components = subset
        .into_iter()
        .map(|attr| {
            let old = sk_from_a.components()[&attr];
            let key = MultiAttributeKey {
                d: old.d,
                d_prime: old.d_prime,
                d_dprime: old.d_dprime * inv_zero,
                d_tprime: old.d_dprime * ratio,
            };
            (attr, key)
        })
        .collect();
    Ok(DelegatedKeyMulti {
        delegator_id: *sk_from_a.user_id(),
        delegatee_id: *c_identity,
        d: *sk_from_a.d(),
        components,
    })
}

/// The same leaves go to both proxies: A's under the delegator's identity,
/// B's under the delegatee's.
pub fn delegated_multi_request(ct: &Ciphertext, dk: &DelegatedKeyMulti) -> Result<Vec<(usize, G2)>> {
    conversion_request_for(ct, &dk.attributes())
}

/// `bundle_a` comes from A's proxy for B's identity, `bundle_b` from B's
/// proxy for C's identity.
pub fn decrypt_delegated_multi(
    ct: &Ciphertext,
    dk: &DelegatedKeyMulti,
    bundle_a: &ConversionBundle,
    bundle_b: &ConversionBundle,
) -> Result<Gt> {
    let selection = select_satisfying_leaves(ct.policy(), &dk.attributes()).ok_or(Error::NotSatisfied)?;
    let lambda_b = bundle_a.lambda_k;
    let lambda_bc = lambda_b * bundle_b.lambda_k;
    let mut factors = Vec::with_capacity(4 * selection.len());
    for (leaf, w) in selection.leaf_weights::<Scalar>() {
        let comp = ct.leaf(leaf)?;
        let attr = ct.policy().attribute(leaf).expect("selected leaf exists");
        let key = &dk.components[attr];
        let c_a = bundle_a.require(leaf)?;
        let c_b = bundle_b.require(leaf)?;
        factors.push((comp.c * w, key.d));
        factors.push((-(key.d_dprime * (w * lambda_b)), *c_b));
        factors.push((-(key.d_tprime * (w * lambda_bc)), comp.c_prime));
        factors.push((-(key.d_prime * w), *c_a));
    }
    Ok(ct.unblind(&dk.d, factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pairing, random_gt, BilinearContext};
    use crate::policy::parse_policy;
    use crate::revocation::{convert, conversion_request, keygen, proxy_rekey, setup, ProxyKey, RevocationList};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Authority {
        pk: PublicKey,
        mk: MasterKey,
        pxk: ProxyKey,
    }

    impl Authority {
        fn new(t: usize, rng: &mut ChaCha20Rng) -> Self {
            let (pk, mut mk) = setup(&BilinearContext::default(), t, rng).unwrap();
            let pxk = proxy_rekey(&pk, &mut mk, &RevocationList::empty(), rng).unwrap();
            Authority { pk, mk, pxk }
        }

        fn revoke(&mut self, users: &[&str], rng: &mut ChaCha20Rng) {
            let rl = self.mk.revocation_list(users).unwrap();
            self.pxk = proxy_rekey(&self.pk, &mut self.mk, &rl, rng).unwrap();
        }
    }

    fn lambda_for(pxk: &ProxyKey, u: &Scalar) -> Scalar {
        convert(pxk, &[(0, G2::generator())], u).unwrap().lambda_k
    }

    fn single_roundtrip(a: &Authority, dk: &DelegatedKeySingle, policy: &str, rng: &mut ChaCha20Rng) -> Result<bool> {
        let m = random_gt(rng);
        let ct = ciphertext::encrypt(&a.pk, &m, &parse_policy(policy).unwrap(), rng)?;
        let bundle = convert(&a.pxk, &delegated_single_request(&ct, dk)?, dk.delegator_id())?;
        Ok(decrypt_delegated_single(&ct, dk, &bundle)? == m)
    }

    #[test]
    fn single_authority_roundtrip_and_subset() {
        let mut rng = ChaCha20Rng::seed_from_u64(55);
        let mut a = Authority::new(2, &mut rng);
        let sk = keygen(&mut a.mk, "alice", ["friend", "neighbor"], &mut rng).unwrap();
        let lk = lambda_for(&a.pxk, sk.user_id());
        let dk = delegate_single(&sk, ["friend"], &a.pk, &lk, &mut rng).unwrap();
        assert!(single_roundtrip(&a, &dk, "friend", &mut rng).unwrap());
        assert_eq!(single_roundtrip(&a, &dk, "neighbor", &mut rng), Err(Error::NotSatisfied));
        assert_eq!(single_roundtrip(&a, &dk, "friend and neighbor", &mut rng), Err(Error::NotSatisfied));
        assert_eq!(
            delegate_single(&sk, ["colleague"], &a.pk, &lk, &mut rng),
            Err(Error::NotASubset)
        );
        assert_eq!(
            delegate_single(&sk, ["friend"], &a.pk, &Scalar::from(0u64), &mut rng),
            Err(Error::InvalidCoefficient)
        );
    }

    #[test]
    fn delegator_revocation_and_stale_coefficient() {
        let mut rng = ChaCha20Rng::seed_from_u64(56);
        let mut a = Authority::new(2, &mut rng);
        let sk = keygen(&mut a.mk, "alice", ["friend"], &mut rng).unwrap();
        keygen(&mut a.mk, "eve", ["friend"], &mut rng).unwrap();
        let lk = lambda_for(&a.pxk, sk.user_id());
        let dk = delegate_single(&sk, ["friend"], &a.pk, &lk, &mut rng).unwrap();
        assert!(single_roundtrip(&a, &dk, "friend", &mut rng).unwrap());

        // Rekeying changes λ_k, so the delegated key goes stale.
        a.revoke(&["eve"], &mut rng);
        assert!(!single_roundtrip(&a, &dk, "friend", &mut rng).unwrap());
        let lk = lambda_for(&a.pxk, sk.user_id());
        let fresh = delegate_single(&sk, ["friend"], &a.pk, &lk, &mut rng).unwrap();
        assert!(single_roundtrip(&a, &fresh, "friend", &mut rng).unwrap());

        a.revoke(&["alice"], &mut rng);
        assert_eq!(single_roundtrip(&a, &fresh, "friend", &mut rng), Err(Error::RequesterRevoked));
    }

    #[test]
    fn bundle_for_other_identity_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(57);
        let mut a = Authority::new(2, &mut rng);
        let sk = keygen(&mut a.mk, "alice", ["friend"], &mut rng).unwrap();
        let bob = keygen(&mut a.mk, "bob", ["friend"], &mut rng).unwrap();
        let dk = delegate_single(&sk, ["friend"], &a.pk, &lambda_for(&a.pxk, sk.user_id()), &mut rng).unwrap();
        let m = random_gt(&mut rng);
        let ct = ciphertext::encrypt(&a.pk, &m, &parse_policy("friend").unwrap(), &mut rng).unwrap();
        let bundle = convert(&a.pxk, &delegated_single_request(&ct, &dk).unwrap(), bob.user_id()).unwrap();
        assert_ne!(decrypt_delegated_single(&ct, &dk, &bundle).unwrap(), m);
    }

    struct Chain {
        a: Authority,
        b: Authority,
        dk: DelegatedKeyMulti,
    }

    fn chain(rng: &mut ChaCha20Rng) -> Chain {
        let mut a = Authority::new(2, rng);
        let mut b = Authority::new(2, rng);
        let sk_b = keygen(&mut a.mk, "bob", ["friend", "fof"], rng).unwrap();
        keygen(&mut a.mk, "mallory", ["friend"], rng).unwrap();
        keygen(&mut b.mk, "carol", ["anything"], rng).unwrap();
        keygen(&mut b.mk, "mallory", ["anything"], rng).unwrap();
        let c_id = b.mk.identity("carol").unwrap();
        let dk = delegate_multi(&sk_b, ["fof"], &b.mk, &c_id).unwrap();
        Chain { a, b, dk }
    }

    fn multi_roundtrip(c: &Chain, policy: &str, rng: &mut ChaCha20Rng) -> Result<bool> {
        let m = random_gt(rng);
        let ct = ciphertext::encrypt(&c.a.pk, &m, &parse_policy(policy).unwrap(), rng)?;
        let req = delegated_multi_request(&ct, &c.dk)?;
        let bundle_a = convert(&c.a.pxk, &req, c.dk.delegator_id())?;
        let bundle_b = convert(&c.b.pxk, &req, c.dk.delegatee_id())?;
        Ok(decrypt_delegated_multi(&ct, &c.dk, &bundle_a, &bundle_b)? == m)
    }

    #[test]
    fn friend_of_friend_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(58);
        let c = chain(&mut rng);
        assert!(multi_roundtrip(&c, "fof", &mut rng).unwrap());
        assert!(multi_roundtrip(&c, "x or fof", &mut rng).unwrap());
        assert_eq!(multi_roundtrip(&c, "friend", &mut rng), Err(Error::NotSatisfied));
        let tree = parse_policy("a or b or fof").unwrap();
        let sel = select_satisfying_leaves(&tree, &c.dk.attributes()).unwrap();
        assert_eq!(sel.len(), 1);
    }

    #[test]
    fn cascade_truth_table() {
        for (a_revokes_b, b_revokes_c) in [(false, false), (true, false), (false, true), (true, true)] {
            let mut rng = ChaCha20Rng::seed_from_u64(59);
            let mut c = chain(&mut rng);
            c.a.revoke(if a_revokes_b { &["bob"] } else { &["mallory"] }, &mut rng);
            c.b.revoke(if b_revokes_c { &["carol"] } else { &["mallory"] }, &mut rng);
            let ok = matches!(multi_roundtrip(&c, "fof", &mut rng), Ok(true));
            assert_eq!(ok, !a_revokes_b && !b_revokes_c, "{a_revokes_b} {b_revokes_c}");
        }
    }

    #[test]
    fn multi_white_box_exponents() {
        let mut rng = ChaCha20Rng::seed_from_u64(60);
        let c = chain(&mut rng);
        let p_a_b = c.a.mk.polynomial().evaluate(c.dk.delegator_id());
        let p_b = c.b.mk.polynomial();
        let ratio = p_b.evaluate(c.dk.delegatee_id()) * p_b.constant().inverse().unwrap();
        let g2 = G2::generator();
        for key in c.dk.components().values() {
            // D'_j = g1^{r_j}, so the target exponent is r_j·P_A(B)·P_B(C)/P_B(0).
            assert_eq!(pairing(&key.d_tprime, &g2), pairing(&key.d_prime, &g2) * (p_a_b * ratio));
        }
    }

    #[test]
    fn multi_errors() {
        let mut rng = ChaCha20Rng::seed_from_u64(61);
        let mut c = chain(&mut rng);
        let sk_b = keygen(&mut c.a.mk, "bob", ["fof"], &mut rng).unwrap();
        let c_id = *c.dk.delegatee_id();
        assert_eq!(delegate_multi(&sk_b, Vec::<&str>::new(), &c.b.mk, &c_id), Err(Error::NotASubset));
        assert!(matches!(
            delegate_multi(&sk_b, ["fof"], &c.b.mk, &Scalar::from(12345u64)),
            Err(Error::UnknownUser(_))
        ));
        let m = random_gt(&mut rng);
        let ct = ciphertext::encrypt(&c.a.pk, &m, &parse_policy("fof").unwrap(), &mut rng).unwrap();
        let req = conversion_request(&ct, &sk_b).unwrap();
        let bundle_a = convert(&c.a.pxk, &req, c.dk.delegator_id()).unwrap();
        let empty_b = ConversionBundle {
            version: 1,
            lambda_k: Scalar::from(1u64),
            converted: vec![],
        };
        assert!(matches!(
            decrypt_delegated_multi(&ct, &c.dk, &bundle_a, &empty_b),
            Err(Error::BundleMismatch(_))
        ));
    }
}
