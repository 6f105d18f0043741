//! Arbitrary payloads: a random target-group element is ABE-encrypted, a
//! key is derived from it, and the payload is sealed with an AEAD whose
//! associated data is the encoded ABE ciphertext.

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use super::{decode, encode, Reader, Tag, Wire, Writer};
use crate::algebra::{gt_to_bytes, random_gt, Gt};
use crate::ciphertext::{self, Ciphertext, PublicKey};
use crate::error::{Error, Result};
use crate::policy::AccessTree;
use crate::revocation::{self, ConversionBundle, SecretKey};

const KDF_LABEL: &[u8] = b"piratte hybrid v1 chacha20poly1305";
const NONCE_BYTES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridContainer {
    ct: Ciphertext,
    nonce: [u8; NONCE_BYTES],
    sealed: Vec<u8>,
}

impl HybridContainer {
    pub fn ciphertext(&self) -> &Ciphertext {
        &self.ct
    }

    pub fn sealed_len(&self) -> usize {
        self.sealed.len()
    }

    /// Flips a bit of the sealed payload.
    pub fn tamper(&mut self, index: usize) {
        let n = self.sealed.len();
        self.sealed[index % n] ^= 1;
    }
}

fn cipher_for(m: &Gt) -> ChaCha20Poly1305 {
    let hk = Hkdf::<Sha256>::new(None, &gt_to_bytes(m));
    let mut key = [0u8; 32];
    hk.expand(KDF_LABEL, &mut key).expect("32 bytes is a valid HKDF length");
    ChaCha20Poly1305::new(Key::from_slice(&key))
}

pub fn seal_hybrid<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    payload: &[u8],
    tree: &AccessTree,
    rng: &mut R,
) -> Result<HybridContainer> {
    let m = random_gt(rng);
    let ct = ciphertext::encrypt(pk, &m, tree, rng)?;
    let mut nonce = [0u8; NONCE_BYTES];
    rng.fill_bytes(&mut nonce);
    let aad = encode(&ct);
    let sealed = cipher_for(&m)
        .encrypt(Nonce::from_slice(&nonce), Payload { msg: payload, aad: &aad })
        .map_err(|_| Error::MalformedInput("payload too large".into()))?;
    Ok(HybridContainer { ct, nonce, sealed })
}

/// Opens with any decryption routine for the embedded ciphertext. A wrong
/// group element, as produced for a revoked key, fails authentication.
pub fn open_with<F>(container: &HybridContainer, recover: F) -> Result<Vec<u8>>
where
    F: FnOnce(&Ciphertext) -> Result<Gt>,
{
    let m = recover(&container.ct)?;
    let aad = encode(&container.ct);
    cipher_for(&m)
        .decrypt(
            Nonce::from_slice(&container.nonce),
            Payload {
                msg: &container.sealed,
                aad: &aad,
            },
        )
        .map_err(|_| Error::DecryptionFailed)
}

pub fn open_hybrid(container: &HybridContainer, sk: &SecretKey, bundle: &ConversionBundle) -> Result<Vec<u8>> {
    open_with(container, |ct| revocation::decrypt(ct, sk, bundle))
}

impl Wire for HybridContainer {
    const TAG: Tag = Tag::HybridContainer;

    fn write_body(&self, w: &mut Writer) {
        w.bytes32(&encode(&self.ct));
        w.bytes16(&self.nonce);
        w.bytes32(&self.sealed);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let ct = decode(r.bytes32()?)?;
        let nonce = r
            .bytes16()?
            .try_into()
            .map_err(|_| Error::MalformedInput("nonce must be 12 bytes".into()))?;
        let sealed = r.bytes32()?.to_vec();
        if sealed.len() < 16 {
            return Err(Error::MalformedInput("sealed payload shorter than its tag".into()));
        }
        Ok(HybridContainer { ct, nonce, sealed })
    }
}
