//! The unmodified ciphertext-policy ABE scheme, laid out over the same
//! asymmetric groups as the revocable variants so that both share the
//! ciphertext format, codec and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use ark_ec::PrimeGroup;
use ark_ff::Field;
use rand::{CryptoRng, RngCore};

use crate::algebra::{hash_to_g2, random_nonzero_scalar, random_scalar, BilinearContext, Gt, Scalar, G1, G2};
use crate::ciphertext::{self, Ciphertext, PublicKey};
use crate::error::{Error, Result};
use crate::policy::{normalize_attribute_set, select_satisfying_leaves, AccessTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterKey {
    pub(crate) beta: Scalar,
    pub(crate) g2_alpha: G2,
}

/// `D_j = g2^r H(j)^{r_j}` and `D'_j = g1^{r_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributeKey {
    pub d: G2,
    pub d_prime: G1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) d: G2,
    pub(crate) components: BTreeMap<String, AttributeKey>,
}

impl SecretKey {
    pub fn new(d: G2, components: BTreeMap<String, AttributeKey>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidAttributeSet);
        }
        normalize_attribute_set(components.keys())?;
        Ok(SecretKey { d, components })
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

impl MasterKey {
    pub fn new(beta: Scalar, g2_alpha: G2) -> Result<Self> {
        ciphertext::nonzero(beta).map_err(|_| Error::InvalidComponent("beta is zero".into()))?;
        Ok(MasterKey { beta, g2_alpha })
    }

    pub fn beta(&self) -> &Scalar {
        &self.beta
    }

    pub fn g2_alpha(&self) -> &G2 {
        &self.g2_alpha
    }
}

pub fn setup<R: RngCore + CryptoRng>(_ctx: &BilinearContext, rng: &mut R) -> (PublicKey, MasterKey) {
    let alpha = random_scalar(rng);
    let beta = random_nonzero_scalar(rng);
    let (pk, g2_alpha) = PublicKey::from_secrets(alpha, beta);
    (pk, MasterKey { beta, g2_alpha })
}

pub fn keygen<R, I, S>(mk: &MasterKey, attrs: I, rng: &mut R) -> Result<SecretKey>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let attrs = normalize_attribute_set(attrs)?;
    let g1 = G1::generator();
    let g2 = G2::generator();
    let r = random_scalar(rng);
    let beta_inv = mk.beta.inverse().expect("beta is nonzero");
    let d = (mk.g2_alpha + g2 * r) * beta_inv;
    let g2_r = g2 * r;
    let components = attrs
        .into_iter()
        .map(|attr| {
            let r_j = random_scalar(rng);
            let key = AttributeKey {
                d: g2_r + hash_to_g2(&attr)? * r_j,
                d_prime: g1 * r_j,
            };
            Ok((attr, key))
        })
        .collect::<Result<_>>()?;
    Ok(SecretKey { d, components })
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    message: &Gt,
    policy: &AccessTree,
    rng: &mut R,
) -> Result<Ciphertext> {
    ciphertext::encrypt(pk, message, policy, rng)
}

/// Pairs `D_j`, `D'_j` with `C_y`, `C'_y` on a minimum satisfying leaf set,
/// interpolates up the tree and strips the blinding factor.
pub fn decrypt(ct: &Ciphertext, sk: &SecretKey) -> Result<Gt> {
    let attrs = sk.attributes();
    let selection = select_satisfying_leaves(ct.policy(), &attrs).ok_or(Error::NotSatisfied)?;
    let mut factors = Vec::with_capacity(2 * selection.len());
    for (leaf, w) in selection.leaf_weights::<Scalar>() {
        let comp = ct.leaf(leaf)?;
        let attr = ct.policy().attribute(leaf).expect("selected leaf exists");
        let key = sk
            .components
            .get(attr)
            .ok_or_else(|| Error::DecryptionError(format!("key lacks {attr}")))?;
        factors.push((comp.c * w, key.d));
        factors.push((-(key.d_prime * w), comp.c_prime));
    }
    Ok(ct.unblind(&sk.d, factors))
}

/// Re-randomizes a key for a subset of its attributes.
pub fn delegate<R, I, S>(sk: &SecretKey, subset: I, pk: &PublicKey, rng: &mut R) -> Result<SecretKey>
where
    R: RngCore + CryptoRng,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let subset = normalize_attribute_set(subset).map_err(|e| match e {
        Error::InvalidAttributeSet => Error::NotASubset,
        other => other,
    })?;
    if !subset.iter().all(|a| sk.components.contains_key(a)) {
        return Err(Error::NotASubset);
    }
    let g1 = G1::generator();
    let g2 = G2::generator();
    let r_tilde = random_scalar(rng);
    let g2_r = g2 * r_tilde;
    let components = subset
        .into_iter()
        .map(|attr| {
            let old = sk.components[&attr];
            let r_j = random_scalar(rng);
            let key = AttributeKey {
                d: old.d + g2_r + hash_to_g2(&attr)? * r_j,
                d_prime: old.d_prime + g1 * r_j,
            };
            Ok((attr, key))
        })
        .collect::<Result<_>>()?;
    Ok(SecretKey {
        d: sk.d + pk.f * r_tilde,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pairing, random_gt};
    use crate::ciphertext::encrypt_with_secret;
    use crate::policy::parse_policy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture() -> (ChaCha20Rng, PublicKey, MasterKey) {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let (pk, mk) = setup(&BilinearContext::default(), &mut rng);
        (rng, pk, mk)
    }

    #[test]
    fn setup_invariants() {
        let (mut rng, pk, mk) = fixture();
        assert!(pk.is_consistent());
        assert_eq!(pk.h, G1::generator() * mk.beta);
        assert_eq!(pairing(&pk.h, &mk.g2_alpha), pk.egg_alpha * mk.beta);
        let (pk2, _) = setup(&BilinearContext::default(), &mut rng);
        assert_ne!(pk, pk2);
    }

    #[test]
    fn single_attribute_roundtrip() {
        let (mut rng, pk, mk) = fixture();
        let sk = keygen(&mk, ["friend"], &mut rng).unwrap();
        let m = random_gt(&mut rng);
        let ct = encrypt(&pk, &m, &parse_policy("friend").unwrap(), &mut rng).unwrap();
        assert_eq!(decrypt(&ct, &sk).unwrap(), m);
        let other = encrypt(&pk, &m, &parse_policy("neighbor").unwrap(), &mut rng).unwrap();
        assert_eq!(decrypt(&other, &sk), Err(Error::NotSatisfied));
    }

    #[test]
    fn fresh_randomness_per_key() {
        let (mut rng, _, mk) = fixture();
        let a = keygen(&mk, ["friend"], &mut rng).unwrap();
        let b = keygen(&mk, ["friend"], &mut rng).unwrap();
        assert_ne!(a.d, b.d);
        assert_eq!(keygen(&mk, Vec::<&str>::new(), &mut rng), Err(Error::InvalidAttributeSet));
    }

    #[test]
    fn white_box_unblinding() {
        let (mut rng, pk, mk) = fixture();
        let m = random_gt(&mut rng);
        let s = random_scalar(&mut rng);
        let (ct, _) = encrypt_with_secret(&pk, &m, &parse_policy("a or b").unwrap(), s, &mut rng).unwrap();
        assert_eq!(*ct.c_tilde() - pk.egg_alpha * s, m);
        assert_eq!(pairing(ct.c(), &mk.g2_alpha), pk.egg_alpha * (mk.beta * s));
    }

    #[test]
    fn threshold_policy() {
        let (mut rng, pk, mk) = fixture();
        let sk = keygen(&mk, ["friend", "neighbor", "colleague"], &mut rng).unwrap();
        let tree = parse_policy("2 of (friend, neighbor, colleague)").unwrap();
        let m = random_gt(&mut rng);
        let ct = encrypt(&pk, &m, &tree, &mut rng).unwrap();
        assert_eq!(decrypt(&ct, &sk).unwrap(), m);
        let sel = select_satisfying_leaves(&tree, &sk.attributes()).unwrap();
        assert_eq!(sel.len(), 2);
    }

    #[test]
    fn spliced_keys_do_not_decrypt() {
        let (mut rng, pk, mk) = fixture();
        let friend = keygen(&mk, ["friend"], &mut rng).unwrap();
        let neighbor = keygen(&mk, ["neighbor"], &mut rng).unwrap();
        let m = random_gt(&mut rng);
        let ct = encrypt(&pk, &m, &parse_policy("friend and neighbor").unwrap(), &mut rng).unwrap();
        let mut components = friend.components.clone();
        components.extend(neighbor.components.clone());
        for d in [friend.d, neighbor.d] {
            let spliced = SecretKey::new(d, components.clone()).unwrap();
            assert_ne!(decrypt(&ct, &spliced).unwrap(), m);
        }
    }

    #[test]
    fn delegation() {
        let (mut rng, pk, mk) = fixture();
        let sk = keygen(&mk, ["friend", "neighbor"], &mut rng).unwrap();
        let m = random_gt(&mut rng);
        let friend_ct = encrypt(&pk, &m, &parse_policy("friend").unwrap(), &mut rng).unwrap();
        let neighbor_ct = encrypt(&pk, &m, &parse_policy("neighbor").unwrap(), &mut rng).unwrap();
        let delegated = delegate(&sk, ["friend"], &pk, &mut rng).unwrap();
        assert_eq!(decrypt(&friend_ct, &delegated).unwrap(), m);
        assert_eq!(decrypt(&neighbor_ct, &delegated), Err(Error::NotSatisfied));
        let chained = delegate(&delegated, ["friend"], &pk, &mut rng).unwrap();
        assert_eq!(decrypt(&friend_ct, &chained).unwrap(), m);
        assert_eq!(delegate(&delegated, ["neighbor"], &pk, &mut rng), Err(Error::NotASubset));
        assert_eq!(delegate(&sk, Vec::<&str>::new(), &pk, &mut rng), Err(Error::NotASubset));
    }
}
