//! A toy prime field for exhaustive checks.
//!
//! The sharing and interpolation code is generic over the field, so the same
//! code paths that run over the BLS12-381 scalar field can be enumerated
//! completely over `Z_101`.

use ark_ff::fields::{Fp64, MontBackend, MontConfig};

#[derive(MontConfig)]
#[modulus = "101"]
#[generator = "2"]
pub struct F101Config;

/// The integers modulo 101.
pub type F101 = Fp64<MontBackend<F101Config, 1>>;

pub const F101_MODULUS: u64 = 101;
