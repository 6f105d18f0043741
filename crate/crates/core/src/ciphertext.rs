//! Public key and ciphertext layout shared by the baseline and the
//! revocable schemes. Encryption is identical in all of them.

use ark_ec::PrimeGroup;
use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};

use crate::algebra::{self, hash_to_g2, multi_pairing, random_scalar, Gt, Scalar, G1, G2};
use crate::error::{Error, Result};
use crate::policy::{share_over_tree, AccessTree, LeafShareAssignment};

/// `h = g1^β`, `f = g2^(1/β)` and `e(g1, g2)^α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub h: G1,
    pub f: G2,
    pub egg_alpha: Gt,
}

impl PublicKey {
    pub(crate) fn from_secrets(alpha: Scalar, beta: Scalar) -> (Self, G2) {
        let beta_inv = beta.inverse().expect("beta is nonzero");
        let g1 = G1::generator();
        let g2 = G2::generator();
        let pk = PublicKey {
            h: g1 * beta,
            f: g2 * beta_inv,
            egg_alpha: algebra::egg() * alpha,
        };
        (pk, g2 * alpha)
    }

    /// Checks `e(h, f) = e(g1, g2)`, i.e. that `h` and `f` carry inverse
    /// exponents.
    pub fn is_consistent(&self) -> bool {
        algebra::pairing(&self.h, &self.f) == algebra::egg()
    }
}

/// Per-leaf ciphertext components: `C_y = g1^{q_y(0)}` and
/// `C'_y = H(att(y))^{q_y(0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafComponent {
    pub c: G1,
    pub c_prime: G2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    policy: AccessTree,
    c_tilde: Gt,
    c: G1,
    leaves: Vec<LeafComponent>,
}

impl Ciphertext {
    pub fn new(policy: AccessTree, c_tilde: Gt, c: G1, leaves: Vec<LeafComponent>) -> Result<Self> {
        if leaves.len() != policy.leaf_count() {
            return Err(Error::InvalidComponent(format!(
                "ciphertext has {} leaf components for {} leaves",
                leaves.len(),
                policy.leaf_count()
            )));
        }
        Ok(Ciphertext {
            policy,
            c_tilde,
            c,
            leaves,
        })
    }

    pub fn policy(&self) -> &AccessTree {
        &self.policy
    }

    pub fn c_tilde(&self) -> &Gt {
        &self.c_tilde
    }

    pub fn c(&self) -> &G1 {
        &self.c
    }

    pub fn leaves(&self) -> &[LeafComponent] {
        &self.leaves
    }

    pub fn leaf(&self, id: usize) -> Result<&LeafComponent> {
        self.leaves
            .get(id)
            .ok_or_else(|| Error::DecryptionError(format!("no leaf {id} in ciphertext")))
    }

    /// `C'_y` for the given leaves, in the order given.
    pub fn conversion_components(&self, leaves: &[usize]) -> Result<Vec<(usize, G2)>> {
        leaves
            .iter()
            .map(|&id| self.leaf(id).map(|l| (id, l.c_prime)))
            .collect()
    }

    /// Recovers the message given the factors of
    /// `A = e(g1, g2)^{r·s}`: each pair contributes `e(p, q)`.
    pub(crate) fn unblind(&self, d: &G2, factors: Vec<(G1, G2)>) -> Gt {
        let mut g1s = Vec::with_capacity(factors.len() + 1);
        let mut g2s = Vec::with_capacity(factors.len() + 1);
        g1s.push(self.c);
        g2s.push(*d);
        for (p, q) in factors {
            g1s.push(-p);
            g2s.push(q);
        }
        // C~ / (e(C, D) / A)
        self.c_tilde - multi_pairing(g1s, g2s)
    }
}

/// Encrypts a target group element under `policy`.
pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    message: &Gt,
    policy: &AccessTree,
    rng: &mut R,
) -> Result<Ciphertext> {
    let s = random_scalar(rng);
    Ok(encrypt_with_secret(pk, message, policy, s, rng)?.0)
}

pub(crate) fn encrypt_with_secret<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    message: &Gt,
    policy: &AccessTree,
    s: Scalar,
    rng: &mut R,
) -> Result<(Ciphertext, LeafShareAssignment<Scalar>)> {
    let shares = share_over_tree(policy, s, rng);
    let g1 = G1::generator();
    let leaves = policy
        .leaves()
        .iter()
        .zip(shares.as_slice())
        .map(|(attr, q)| {
            Ok(LeafComponent {
                c: g1 * q,
                c_prime: hash_to_g2(attr)? * q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ct = Ciphertext {
        policy: policy.clone(),
        c_tilde: *message + pk.egg_alpha * s,
        c: pk.h * s,
        leaves,
    };
    Ok((ct, shares))
}

pub(crate) fn nonzero(s: Scalar) -> Result<Scalar> {
    if s.is_zero() {
        Err(Error::InvalidCoefficient)
    } else {
        Ok(s)
    }
}
