//! Exhaustive checks over Z_101 against plain integer arithmetic.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ark_ff::{BigInteger, PrimeField};
use piratte::algebra::small::F101;
use piratte::algebra::{lagrange_at, reconstruct_secret, Polynomial, Share};
use piratte::policy::random::random_tree;
use piratte::policy::{select_with, share_over_tree, AccessTree, Node};
use rand::seq::index::sample;
use rand::Rng;

pub const P: u64 = 101;

pub fn f(v: u64) -> F101 {
    F101::from(v)
}

pub fn u(x: F101) -> u64 {
    x.into_bigint().to_bytes_le()[0] as u64
}

/// Quotient `num / den` mod p found by trying every residue.
pub fn brute_div(num: u64, den: u64) -> u64 {
    (0..P).find(|k| (k * den) % P == num % P).expect("den is nonzero")
}

pub fn sub(a: u64, b: u64) -> u64 {
    (a + P - b % P) % P
}

pub fn lagrange_oracle(xs: &[u64], target: u64) -> Vec<u64> {
    xs.iter()
        .enumerate()
        .map(|(i, xi)| {
            let mut num = 1;
            let mut den = 1;
            for (j, xj) in xs.iter().enumerate() {
                if i != j {
                    num = num * sub(target, *xj) % P;
                    den = den * sub(*xi, *xj) % P;
                }
            }
            brute_div(num, den)
        })
        .collect()
}

pub fn eval_oracle(coeffs: &[u64], x: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, c| (acc * x + c) % P)
}

/// Every ordered point list of size 1..=3 from a fixed pool and every
/// target, plus `extra` random lists of size 4..=6.
pub fn check_lagrange<R: Rng>(extra: usize, rng: &mut R) -> Result<usize, String> {
    let mut checked = 0;
    let pool: Vec<u64> = (1..=12).collect();
    let mut lists: Vec<Vec<u64>> = Vec::new();
    for a in &pool {
        lists.push(vec![*a]);
        for b in &pool {
            if b != a {
                lists.push(vec![*a, *b]);
                for c in &pool {
                    if c != a && c != b {
                        lists.push(vec![*a, *b, *c]);
                    }
                }
            }
        }
    }
    for _ in 0..extra {
        let n = rng.gen_range(4..=6);
        lists.push(sample(rng, (P - 1) as usize, n).into_iter().map(|i| i as u64 + 1).collect());
    }
    for xs in &lists {
        let fxs: Vec<F101> = xs.iter().map(|x| f(*x)).collect();
        for target in 0..P {
            if xs.contains(&target) {
                if lagrange_at(&fxs, f(target)).is_ok() {
                    return Err(format!("{xs:?} at {target}: expected a degenerate-target error"));
                }
                continue;
            }
            let got: Vec<u64> = lagrange_at(&fxs, f(target)).map_err(|e| e.to_string())?.into_iter().map(u).collect();
            let want = lagrange_oracle(xs, target);
            if got != want {
                return Err(format!("{xs:?} at {target}: {got:?} != {want:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Degree 1 and 2: every polynomial at fixed points. Degrees 3..=5:
/// every constant term with `samples` random higher coefficients each.
pub fn check_shamir<R: Rng>(samples: usize, rng: &mut R) -> Result<usize, String> {
    let mut checked = 0;
    let mut run = |coeffs: Vec<u64>, xs: &[u64]| -> Result<(), String> {
        let poly = Polynomial::from_coefficients(coeffs.iter().map(|c| f(*c)).collect()).map_err(|e| e.to_string())?;
        let shares: Vec<Share<F101>> = xs.iter().map(|x| Share::new(f(*x), f(eval_oracle(&coeffs, *x))).unwrap()).collect();
        for s in &shares {
            if u(poly.evaluate(&s.x())) != u(s.y()) {
                return Err(format!("evaluation mismatch for {coeffs:?}"));
            }
        }
        let degree = coeffs.len() - 1;
        let got = u(reconstruct_secret(&shares, degree).map_err(|e| e.to_string())?);
        if got != coeffs[0] {
            return Err(format!("{coeffs:?} at {xs:?}: reconstructed {got}"));
        }
        if degree >= 1 && reconstruct_secret(&shares[..degree], degree).is_ok() {
            return Err("reconstruction accepted too few shares".into());
        }
        checked += 1;
        Ok(())
    };
    for a0 in 0..P {
        for a1 in 0..P {
            run(vec![a0, a1], &[3, 77])?;
            if a1 % 4 == 0 {
                for a2 in 0..P {
                    run(vec![a0, a1, a2], &[5, 6, 100])?;
                }
            }
        }
    }
    for degree in 3..=5 {
        for a0 in 0..P {
            for _ in 0..samples {
                let mut coeffs = vec![a0];
                coeffs.extend((0..degree).map(|_| rng.gen_range(0..P)));
                let xs: Vec<u64> = sample(rng, (P - 1) as usize, degree + 1).into_iter().map(|i| i as u64 + 1).collect();
                run(coeffs, &xs)?;
            }
        }
    }
    Ok(checked)
}

/// A degree-`t` polynomial seen only at `t` points: for every candidate
/// `P(0)` exactly one polynomial is consistent with the view. Degrees 1
/// and 2 are counted by enumerating all polynomials; higher degrees by
/// solving for each candidate and verifying.
pub fn check_collusion<R: Rng>(trials: usize, rng: &mut R) -> Result<usize, String> {
    let mut checked = 0;
    for t in 1..=2usize {
        let xs: Vec<u64> = sample(rng, (P - 1) as usize, t).into_iter().map(|i| i as u64 + 1).collect();
        let secret_poly: Vec<u64> = (0..=t).map(|_| rng.gen_range(0..P)).collect();
        let view: Vec<u64> = xs.iter().map(|x| eval_oracle(&secret_poly, *x)).collect();
        let mut per_secret = vec![0usize; P as usize];
        let total = P.pow(t as u32 + 1);
        for code in 0..total {
            let mut c = code;
            let coeffs: Vec<u64> = (0..=t)
                .map(|_| {
                    let d = c % P;
                    c /= P;
                    d
                })
                .collect();
            if xs.iter().zip(&view).all(|(x, y)| eval_oracle(&coeffs, *x) == *y) {
                per_secret[coeffs[0] as usize] += 1;
            }
        }
        if per_secret.iter().any(|n| *n != 1) {
            return Err(format!("t = {t}: consistent polynomials per secret {per_secret:?}"));
        }
        checked += 1;
    }
    for _ in 0..trials {
        let t = rng.gen_range(1..=5usize);
        let xs: Vec<u64> = sample(rng, (P - 1) as usize, t).into_iter().map(|i| i as u64 + 1).collect();
        let view: Vec<u64> = (0..t).map(|_| rng.gen_range(0..P)).collect();
        // The view also reaches the reconstruction code with one share short.
        let shares: Vec<Share<F101>> = xs.iter().zip(&view).map(|(x, y)| Share::new(f(*x), f(*y)).unwrap()).collect();
        if reconstruct_secret(&shares, t).is_ok() {
            return Err(format!("t = {t}: reconstructed from {t} shares"));
        }
        for s in 0..P {
            let mut pts = vec![0u64];
            pts.extend(&xs);
            let mut ys = vec![s];
            ys.extend(&view);
            let coeffs = interpolate_oracle(&pts, &ys);
            if coeffs.len() > t + 1 || eval_oracle(&coeffs, 0) != s {
                return Err(format!("t = {t}: no consistent polynomial for secret {s}"));
            }
            if xs.iter().zip(&view).any(|(x, y)| eval_oracle(&coeffs, *x) != *y) {
                return Err(format!("t = {t}: interpolant misses the view for secret {s}"));
            }
        }
        checked += 1;
    }
    Ok(checked)
}

/// Coefficients of the unique polynomial of degree < n through n points.
pub fn interpolate_oracle(xs: &[u64], ys: &[u64]) -> Vec<u64> {
    let n = xs.len();
    let mut out = vec![0u64; n];
    for i in 0..n {
        // basis numerator Π_{j≠i} (x − x_j)
        let mut basis = vec![1u64];
        let mut den = 1;
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut next = vec![0u64; basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] = (next[k + 1] + b) % P;
                next[k] = (next[k] + b * sub(0, xs[j])) % P;
            }
            basis = next;
            den = den * sub(xs[i], xs[j]) % P;
        }
        let scale = brute_div(ys[i], den);
        for (k, b) in basis.iter().enumerate() {
            out[k] = (out[k] + b * scale) % P;
        }
    }
    out
}

/// Whether a leaf subset satisfies the tree, by direct recursion.
pub fn satisfies(node: &Node, held: &BTreeSet<usize>, next: &mut usize) -> bool {
    match node {
        Node::Leaf { .. } => {
            let id = *next;
            *next += 1;
            held.contains(&id)
        }
        Node::Gate { threshold, children } => {
            let ok = children.iter().filter(|c| satisfies(c, held, next)).count();
            ok >= *threshold
        }
    }
}

/// Random trees with up to 6 leaves: for every leaf subset and every
/// secret, a satisfying subset reconstructs the secret from its shares and
/// a non-satisfying one is rejected by the selector.
pub fn check_tree_shares<R: Rng>(trees: usize, rng: &mut R) -> Result<usize, String> {
    let universe: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
    let mut checked = 0;
    for _ in 0..trees {
        let leaves = rng.gen_range(1..=6);
        let tree: AccessTree = random_tree(leaves, &universe, rng);
        for mask in 0u32..(1 << leaves) {
            let held: BTreeSet<usize> = (0..leaves).filter(|i| mask & (1 << i) != 0).collect();
            let expect = satisfies(tree.root(), &held, &mut 0);
            let selection = select_with(&tree, |id, _| held.contains(&id));
            match (expect, selection) {
                (false, None) => {}
                (true, Some(sel)) => {
                    if !sel.leaves().iter().all(|l| held.contains(l)) {
                        return Err("selection used a leaf outside the subset".into());
                    }
                    let weights = sel.leaf_weights::<F101>();
                    for s in 0..P {
                        let shares = share_over_tree(&tree, f(s), rng);
                        let got: F101 = weights.iter().map(|(l, w)| *w * shares.get(*l).unwrap()).sum();
                        if u(got) != s {
                            return Err(format!("{tree:?} subset {held:?}: got {} for secret {s}", u(got)));
                        }
                    }
                    checked += 1;
                }
                (e, s) => return Err(format!("{tree:?} subset {held:?}: oracle {e}, selector {}", s.is_some())),
            }
        }
    }
    Ok(checked)
}
