use crate::algebra::PairingDescriptor;

use super::HEADER_BYTES;

const PREFIX: usize = 2;
const COUNT: usize = 4;
const VERSION: usize = 8;

/// Closed-form encoded sizes in terms of the context's element sizes.
///
/// `a` arguments are the summed byte lengths of attribute names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeModel {
    pub g1: usize,
    pub g2: usize,
    pub gt: usize,
    pub zp: usize,
    pub context_name: usize,
}

impl SizeModel {
    pub fn new(d: &PairingDescriptor) -> Self {
        SizeModel {
            g1: d.g1_bytes,
            g2: d.g2_bytes,
            gt: d.gt_bytes,
            zp: d.scalar_bytes,
            context_name: d.name.len(),
        }
    }

    fn g1e(&self) -> usize {
        PREFIX + self.g1
    }

    fn g2e(&self) -> usize {
        PREFIX + self.g2
    }

    fn gte(&self) -> usize {
        PREFIX + self.gt
    }

    fn zpe(&self) -> usize {
        PREFIX + self.zp
    }

    pub fn public_key(&self) -> usize {
        HEADER_BYTES + PREFIX + self.context_name + self.g1e() + self.g2e() + self.gte()
    }

    pub fn bsw_master_key(&self) -> usize {
        HEADER_BYTES + self.zpe() + self.g2e()
    }

    /// With an empty registry and no revocations.
    pub fn master_key(&self, t: usize) -> usize {
        HEADER_BYTES + self.zpe() + self.g2e() + COUNT + (t + 1) * self.zpe() + 3 * COUNT + VERSION
    }

    /// Per-attribute growth of a revocable private key.
    pub fn private_key_slope(&self) -> usize {
        PREFIX + self.g2e() + 2 * self.g1e()
    }

    pub fn bsw_private_key_slope(&self) -> usize {
        PREFIX + self.g2e() + self.g1e()
    }

    pub fn private_key(&self, n: usize, a: usize) -> usize {
        HEADER_BYTES + self.zpe() + self.g2e() + COUNT + n * self.private_key_slope() + a
    }

    pub fn bsw_private_key(&self, n: usize, a: usize) -> usize {
        HEADER_BYTES + self.g2e() + COUNT + n * self.bsw_private_key_slope() + a
    }

    pub fn delegated_single(&self, n: usize, a: usize) -> usize {
        self.private_key(n, a)
    }

    pub fn delegated_multi(&self, n: usize, a: usize) -> usize {
        HEADER_BYTES + 2 * self.zpe() + self.g2e() + COUNT + n * (PREFIX + self.g2e() + 3 * self.g1e()) + a
    }

    /// Policy tree with `i` gates and `l` leaves.
    pub fn tree(&self, i: usize, l: usize, a: usize) -> usize {
        i * (1 + 2 * COUNT) + l * (1 + PREFIX) + a
    }

    pub fn ciphertext_leaf_slope(&self) -> usize {
        self.g1e() + self.g2e()
    }

    pub fn ciphertext(&self, i: usize, l: usize, a: usize) -> usize {
        HEADER_BYTES + self.tree(i, l, a) + self.gte() + self.g1e() + COUNT + l * self.ciphertext_leaf_slope()
    }

    /// Each point stores both coordinates.
    pub fn proxy_key_slope(&self) -> usize {
        2 * self.zpe()
    }

    pub fn proxy_key(&self, t: usize) -> usize {
        HEADER_BYTES + VERSION + COUNT + t * self.proxy_key_slope()
    }

    /// Leaf id plus one G2 element.
    pub fn conversion_slope(&self) -> usize {
        COUNT + self.g2e()
    }

    pub fn bundle_request(&self, l: usize) -> usize {
        HEADER_BYTES + self.zpe() + COUNT + l * self.conversion_slope()
    }

    pub fn bundle_response(&self, l: usize) -> usize {
        HEADER_BYTES + VERSION + self.zpe() + COUNT + l * self.conversion_slope()
    }
}
