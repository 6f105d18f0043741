//! Asymmetric pairing groups, scalar field helpers, polynomial secret
//! sharing and attribute hashing.
//!
//! Everything runs over BLS12-381, a type-3 pairing: there is no efficiently
//! computable map from G1 into G2, and nothing in this crate offers one. The
//! scheme depends on that asymmetry, since ciphertext components sent to the
//! proxy live in G2 while the matching key components live in G1.

mod multipoint;
mod poly;
pub mod small;

use ark_bls12_381::{Bls12_381, Fr, G1Projective, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::PrimeGroup;
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use ark_serialize::CanonicalSerialize;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::policy::normalize_attribute;

pub use multipoint::SubproductTree;
pub use poly::{lagrange_at, reconstruct_secret, Polynomial, Share};

/// Exponents, polynomial coefficients and identities.
pub type Scalar = Fr;
pub type G1 = G1Projective;
pub type G2 = G2Projective;
/// Target group, written additively as in arkworks: `a + b` is the group
/// product and `a * k` is exponentiation.
pub type Gt = PairingOutput<Bls12_381>;

const HASH_TO_G2_DST: &[u8] = b"PIRATTE-V01-CS01-with-BLS12381G2_XMD:SHA-256_SSWU_RO_";

type AttributeHasher = MapToCurveBasedHasher<
    G2Projective,
    DefaultFieldHasher<Sha256, 128>,
    WBMap<ark_bls12_381::g2::Config>,
>;

/// Static description of the pairing groups in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingDescriptor {
    pub name: &'static str,
    pub security_bits: u32,
    /// Compressed encoding sizes, without length prefixes.
    pub g1_bytes: usize,
    pub g2_bytes: usize,
    pub gt_bytes: usize,
    pub scalar_bytes: usize,
}

/// The bilinear setting every key and ciphertext is built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BilinearContext {
    descriptor: PairingDescriptor,
}

impl Default for BilinearContext {
    fn default() -> Self {
        Self::bls12_381()
    }
}

impl BilinearContext {
    pub fn bls12_381() -> Self {
        let g1_bytes = G1::generator().compressed_size();
        let g2_bytes = G2::generator().compressed_size();
        let gt_bytes = Gt::generator().compressed_size();
        let scalar_bytes = (Scalar::MODULUS_BIT_SIZE as usize).div_ceil(8);
        BilinearContext {
            descriptor: PairingDescriptor {
                name: "bls12-381",
                security_bits: 117,
                g1_bytes,
                g2_bytes,
                gt_bytes,
                scalar_bytes,
            },
        }
    }

    pub fn descriptor(&self) -> &PairingDescriptor {
        &self.descriptor
    }

    pub fn name(&self) -> &'static str {
        self.descriptor.name
    }

    /// Field order as big-endian bytes.
    pub fn field_order(&self) -> Vec<u8> {
        Scalar::MODULUS.to_bytes_be()
    }

    pub fn g1(&self) -> G1 {
        G1::generator()
    }

    pub fn g2(&self) -> G2 {
        G2::generator()
    }

    pub fn pairing(&self, a: &G1, b: &G2) -> Gt {
        pairing(a, b)
    }

    pub fn hash_to_g2(&self, attribute: &str) -> Result<G2> {
        hash_to_g2(attribute)
    }

    /// Fails with `ContextMismatch` when a serialized context name differs.
    pub fn check_name(&self, name: &str) -> Result<()> {
        if name == self.descriptor.name {
            Ok(())
        } else {
            Err(Error::ContextMismatch(name.to_string()))
        }
    }
}

/// `e(g1, g2)`, cached.
pub fn egg() -> Gt {
    static EGG: OnceLock<Gt> = OnceLock::new();
    *EGG.get_or_init(|| pairing(&G1::generator(), &G2::generator()))
}

pub fn pairing(a: &G1, b: &G2) -> Gt {
    Bls12_381::pairing(*a, *b)
}

/// Product of pairings with a single final exponentiation.
pub fn multi_pairing(g1s: Vec<G1>, g2s: Vec<G2>) -> Gt {
    debug_assert_eq!(g1s.len(), g2s.len());
    Bls12_381::multi_pairing(g1s, g2s)
}

/// Hashes a normalized attribute name onto G2.
///
/// The name is normalized first, so `"friend"` and `" Friend "` map to the
/// same element.
pub fn hash_to_g2(attribute: &str) -> Result<G2> {
    let name = normalize_attribute(attribute)?;
    let hasher = AttributeHasher::new(HASH_TO_G2_DST)
        .map_err(|e| Error::InvalidAttribute(format!("{name}: {e}")))?;
    let point = hasher
        .hash(name.as_bytes())
        .map_err(|e| Error::InvalidAttribute(format!("{name}: {e}")))?;
    Ok(point.into())
}

pub fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    Scalar::rand(rng)
}

pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// A uniformly random target group element.
pub fn random_gt<R: RngCore + CryptoRng>(rng: &mut R) -> Gt {
    egg() * random_nonzero_scalar(rng)
}

/// Width of the fixed big-endian scalar encoding.
pub const SCALAR_BYTES: usize = 32;

pub fn scalar_to_bytes(s: &Scalar) -> [u8; SCALAR_BYTES] {
    let be = s.into_bigint().to_bytes_be();
    let mut out = [0u8; SCALAR_BYTES];
    out[SCALAR_BYTES - be.len()..].copy_from_slice(&be);
    out
}

/// Decodes a canonical scalar; values `>= p` are rejected.
pub fn scalar_from_bytes(bytes: &[u8]) -> Result<Scalar> {
    if bytes.len() != SCALAR_BYTES {
        return Err(Error::MalformedInput(format!(
            "scalar must be {SCALAR_BYTES} bytes, got {}",
            bytes.len()
        )));
    }
    let mut le = bytes.to_vec();
    le.reverse();
    let mut limbs = [0u64; 4];
    for (i, chunk) in le.chunks(8).enumerate() {
        limbs[i] = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    }
    Scalar::from_bigint(ark_ff::BigInt::new(limbs))
        .ok_or_else(|| Error::InvalidComponent("scalar is not reduced modulo p".into()))
}

/// Serializes a target group element canonically (used by the KDF).
pub fn gt_to_bytes(x: &Gt) -> Vec<u8> {
    let mut out = Vec::with_capacity(x.compressed_size());
    x.serialize_compressed(&mut out)
        .expect("writing to a Vec cannot fail");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(7)
    }

    #[test]
    fn pairing_identity_exponent() {
        let ctx = BilinearContext::default();
        let base = ctx.pairing(&ctx.g1(), &ctx.g2());
        assert_eq!(base * Scalar::one(), base);
        assert_ne!(base, Gt::zero());
    }

    #[test]
    fn pairing_small_exponents() {
        let ctx = BilinearContext::default();
        let lhs = ctx.pairing(&(ctx.g1() * Scalar::from(2u64)), &(ctx.g2() * Scalar::from(3u64)));
        let rhs = ctx.pairing(&ctx.g1(), &ctx.g2()) * Scalar::from(6u64);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairing_is_linear_in_first_argument() {
        let mut rng = rng();
        let (a, b, c) = (random_scalar(&mut rng), random_scalar(&mut rng), random_scalar(&mut rng));
        let g1 = G1::generator();
        let g2b = G2::generator() * b;
        let lhs = pairing(&(g1 * a), &g2b) + pairing(&(g1 * c), &g2b);
        assert_eq!(lhs, pairing(&(g1 * (a + c)), &g2b));
    }

    #[test]
    fn multi_pairing_matches_product() {
        let mut rng = rng();
        let (a, b) = (random_scalar(&mut rng), random_scalar(&mut rng));
        let p = [G1::generator() * a, G1::generator() * b];
        let q = [G2::generator() * b, G2::generator() * a];
        let expected = pairing(&p[0], &q[0]) + pairing(&p[1], &q[1]);
        assert_eq!(multi_pairing(p.to_vec(), q.to_vec()), expected);
    }

    #[test]
    fn hash_is_deterministic_and_normalizing() {
        assert_eq!(hash_to_g2("friend").unwrap(), hash_to_g2("friend").unwrap());
        assert_eq!(hash_to_g2("friend").unwrap(), hash_to_g2("friend ").unwrap());
        assert_ne!(hash_to_g2("a").unwrap(), hash_to_g2("b").unwrap());
        assert!(matches!(hash_to_g2(""), Err(Error::InvalidAttribute(_))));
        assert!(matches!(hash_to_g2("   "), Err(Error::InvalidAttribute(_))));
    }

    #[test]
    fn hash_output_is_byte_stable() {
        let mut first = Vec::new();
        hash_to_g2("neighbor").unwrap().serialize_compressed(&mut first).unwrap();
        let mut second = Vec::new();
        hash_to_g2("neighbor").unwrap().serialize_compressed(&mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn scalar_encoding_roundtrip_and_range() {
        let mut rng = rng();
        for _ in 0..32 {
            let s = random_scalar(&mut rng);
            assert_eq!(scalar_from_bytes(&scalar_to_bytes(&s)).unwrap(), s);
        }
        let p = BilinearContext::default().field_order();
        let mut padded = vec![0u8; SCALAR_BYTES - p.len()];
        padded.extend_from_slice(&p);
        assert!(matches!(scalar_from_bytes(&padded), Err(Error::InvalidComponent(_))));
        assert!(matches!(scalar_from_bytes(&[1, 2, 3]), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn descriptor_sizes() {
        let d = *BilinearContext::default().descriptor();
        assert_eq!((d.g1_bytes, d.g2_bytes, d.scalar_bytes), (48, 96, 32));
        assert!(d.security_bits >= 100);
    }
}
