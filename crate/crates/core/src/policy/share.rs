use ark_ff::PrimeField;
use rand::Rng;

use super::{AccessTree, Node};
use crate::algebra::Polynomial;

/// `q_y(0)` for every leaf, indexed by leaf identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafShareAssignment<F> {
    shares: Vec<F>,
}

impl<F: Copy> LeafShareAssignment<F> {
    pub fn get(&self, leaf: usize) -> Option<F> {
        self.shares.get(leaf).copied()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

/// Splits `secret` top-down over the tree.
///
/// Every gate gets a random polynomial of degree `threshold - 1` whose
/// constant term is the value handed down by its parent; child `i`
/// (1-based) receives the gate polynomial evaluated at `i`.
pub fn share_over_tree<F: PrimeField, R: Rng + ?Sized>(
    tree: &AccessTree,
    secret: F,
    rng: &mut R,
) -> LeafShareAssignment<F> {
    let mut shares = Vec::with_capacity(tree.leaf_count());
    share_node(tree.root(), secret, rng, &mut shares);
    LeafShareAssignment { shares }
}

fn share_node<F: PrimeField, R: Rng + ?Sized>(
    node: &Node,
    value: F,
    rng: &mut R,
    out: &mut Vec<F>,
) {
    match node {
        Node::Leaf { .. } => out.push(value),
        Node::Gate {
            threshold,
            children,
        } => {
            let poly = Polynomial::random_any_degree(threshold - 1, Some(value), rng);
            for (i, child) in children.iter().enumerate() {
                let at = poly.evaluate(&F::from((i + 1) as u64));
                share_node(child, at, rng, out);
            }
        }
    }
}
