//! Random policy generation for benchmarks and property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AccessTree, Node};

/// Attribute names `attr0 .. attr{n-1}`.
pub fn attribute_universe(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("attr{i}")).collect()
}

/// A random tree with exactly `leaves` leaves drawn from `universe`.
/// Gates have fan-out 2..=4 and a uniform threshold.
pub fn random_tree<R: Rng + ?Sized>(leaves: usize, universe: &[String], rng: &mut R) -> AccessTree {
    assert!(leaves >= 1, "a policy needs at least one leaf");
    assert!(!universe.is_empty(), "empty attribute universe");
    AccessTree::new(random_node(leaves, universe, rng)).expect("generated tree is valid")
}

fn random_node<R: Rng + ?Sized>(leaves: usize, universe: &[String], rng: &mut R) -> Node {
    if leaves == 1 {
        let attribute = universe.choose(rng).expect("nonempty universe").clone();
        return Node::Leaf { attribute };
    }
    let fanout = rng.gen_range(2..=leaves.min(4));
    let parts = split(leaves, fanout, rng);
    let children: Vec<Node> = parts.into_iter().map(|n| random_node(n, universe, rng)).collect();
    let threshold = rng.gen_range(1..=children.len());
    Node::Gate {
        threshold,
        children,
    }
}

/// Random composition of `total` into `parts` positive summands.
fn split<R: Rng + ?Sized>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, total - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// A random tree bounded by depth and fan-out instead of leaf count.
pub fn random_shaped_tree<R: Rng + ?Sized>(
    max_depth: usize,
    max_fanout: usize,
    universe: &[String],
    rng: &mut R,
) -> AccessTree {
    AccessTree::new(shaped_node(max_depth, max_fanout, universe, rng)).expect("valid tree")
}

fn shaped_node<R: Rng + ?Sized>(
    depth: usize,
    max_fanout: usize,
    universe: &[String],
    rng: &mut R,
) -> Node {
    if depth <= 1 || max_fanout < 1 || rng.gen_bool(0.35) {
        let attribute = universe.choose(rng).expect("nonempty universe").clone();
        return Node::Leaf { attribute };
    }
    let fanout = rng.gen_range(1..=max_fanout);
    let children: Vec<Node> = (0..fanout)
        .map(|_| shaped_node(depth - 1, max_fanout, universe, rng))
        .collect();
    let threshold = rng.gen_range(1..=fanout);
    Node::Gate {
        threshold,
        children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn exact_leaf_counts() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let universe = attribute_universe(100);
        for leaves in [1, 2, 5, 10, 25, 50, 100] {
            for _ in 0..10 {
                assert_eq!(random_tree(leaves, &universe, &mut rng).leaf_count(), leaves);
            }
        }
    }

    #[test]
    fn shaped_trees_respect_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let universe = attribute_universe(6);
        for _ in 0..100 {
            let tree = random_shaped_tree(4, 4, &universe, &mut rng);
            assert!(tree.depth() <= 4);
        }
    }
}
