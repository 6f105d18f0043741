use std::collections::BTreeSet;

use ark_ff::PrimeField;

use super::{AccessTree, Node};
use crate::algebra::lagrange_at;

/// One node of the reconstruction path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionNode {
    Leaf(usize),
    /// Used children as (1-based child index, subtree); exactly
    /// `threshold` of them, in increasing index order.
    Gate(Vec<(usize, SelectionNode)>),
}

/// A minimum-leaf subset of the tree that satisfies every gate on its path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfyingSelection {
    root: SelectionNode,
    leaves: Vec<usize>,
}

impl SatisfyingSelection {
    pub fn root(&self) -> &SelectionNode {
        &self.root
    }

    /// Chosen leaf identifiers, ascending.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Per used gate, in preorder: the child indices and their Lagrange
    /// coefficients at zero.
    pub fn gate_coefficients<F: PrimeField>(&self) -> Vec<(Vec<usize>, Vec<F>)> {
        let mut out = Vec::new();
        collect_gates(&self.root, &mut out);
        out
    }

    /// Product of the Lagrange coefficients along each chosen leaf's path.
    /// `Σ weight · q_leaf(0)` equals the root secret.
    pub fn leaf_weights<F: PrimeField>(&self) -> Vec<(usize, F)> {
        let mut out = Vec::with_capacity(self.leaves.len());
        collect_weights(&self.root, F::one(), &mut out);
        out.sort_by_key(|(leaf, _)| *leaf);
        out
    }
}

fn child_coefficients<F: PrimeField>(used: &[(usize, SelectionNode)]) -> Vec<F> {
    let xs: Vec<F> = used.iter().map(|(i, _)| F::from(*i as u64)).collect();
    lagrange_at(&xs, F::zero()).expect("child indices are distinct and nonzero")
}

fn collect_gates<F: PrimeField>(node: &SelectionNode, out: &mut Vec<(Vec<usize>, Vec<F>)>) {
    if let SelectionNode::Gate(used) = node {
        let indices = used.iter().map(|(i, _)| *i).collect();
        out.push((indices, child_coefficients(used)));
        for (_, child) in used {
            collect_gates(child, out);
        }
    }
}

fn collect_weights<F: PrimeField>(node: &SelectionNode, weight: F, out: &mut Vec<(usize, F)>) {
    match node {
        SelectionNode::Leaf(id) => out.push((*id, weight)),
        SelectionNode::Gate(used) => {
            for ((_, child), coeff) in used.iter().zip(child_coefficients::<F>(used)) {
                collect_weights(child, weight * coeff, out);
            }
        }
    }
}

/// Picks a satisfying leaf set of minimum size for the attribute set, or
/// `None` when the attributes do not satisfy the tree.
pub fn select_satisfying_leaves(
    tree: &AccessTree,
    attrs: &BTreeSet<String>,
) -> Option<SatisfyingSelection> {
    select_with(tree, |_, attribute| attrs.contains(attribute))
}

/// Like [`select_satisfying_leaves`] with an arbitrary leaf predicate
/// (leaf identifier, attribute). Used to route around leaves whose
/// conversion was refused.
///
/// Each gate keeps its `threshold` cheapest satisfiable children; equal
/// costs go to the lower child index.
pub fn select_with<P>(tree: &AccessTree, usable: P) -> Option<SatisfyingSelection>
where
    P: Fn(usize, &str) -> bool,
{
    let mut next_leaf = 0;
    let (_, root) = best(tree.root(), &usable, &mut next_leaf)?;
    let mut leaves = Vec::new();
    flatten(&root, &mut leaves);
    leaves.sort_unstable();
    Some(SatisfyingSelection { root, leaves })
}

fn best<P>(node: &Node, usable: &P, next_leaf: &mut usize) -> Option<(usize, SelectionNode)>
where
    P: Fn(usize, &str) -> bool,
{
    match node {
        Node::Leaf { attribute } => {
            let id = *next_leaf;
            *next_leaf += 1;
            usable(id, attribute).then_some((1, SelectionNode::Leaf(id)))
        }
        Node::Gate {
            threshold,
            children,
        } => {
            // Every child is visited so leaf numbering stays in preorder.
            let mut options: Vec<(usize, usize, SelectionNode)> = children
                .iter()
                .enumerate()
                .filter_map(|(i, child)| best(child, usable, next_leaf).map(|(c, s)| (c, i + 1, s)))
                .collect();
            if options.len() < *threshold {
                return None;
            }
            options.sort_by_key(|(cost, index, _)| (*cost, *index));
            options.truncate(*threshold);
            options.sort_by_key(|(_, index, _)| *index);
            let cost = options.iter().map(|(c, _, _)| c).sum();
            Some((
                cost,
                SelectionNode::Gate(options.into_iter().map(|(_, i, s)| (i, s)).collect()),
            ))
        }
    }
}

fn flatten(node: &SelectionNode, out: &mut Vec<usize>) {
    match node {
        SelectionNode::Leaf(id) => out.push(*id),
        SelectionNode::Gate(used) => used.iter().for_each(|(_, c)| flatten(c, out)),
    }
}
