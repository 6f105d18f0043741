//! Ciphertext-policy attribute-based encryption with immediate,
//! proxy-mediated revocation and user-driven key delegation.

pub mod algebra;
pub mod attr;
pub mod bench;
pub mod bsw;
pub mod ciphertext;
pub mod cli;
pub mod codec;
pub mod delegation;
pub mod error;
pub mod policy;
pub mod proxy;
pub mod revocation;

pub use error::{Error, Result};
