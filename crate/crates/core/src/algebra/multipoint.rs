//! Subproduct-tree multipoint evaluation.
//!
//! Proxy rekeying evaluates the degree-t master polynomial at t points, and
//! the proxy's λ precomputation needs `Π_{j≠i} (u_i − u_j)` for every share,
//! which is the derivative of `Π (x − u_j)` evaluated at each `u_i`. Both
//! are multipoint evaluations; done naively they cost O(t²).

use ark_ff::{FftField, Field, PrimeField};
use ark_poly::{EvaluationDomain, Radix2EvaluationDomain};

/// Points per leaf block; blocks are multiplied out and evaluated naively.
const BLOCK: usize = 32;
/// Below this operand length schoolbook multiplication wins.
const FFT_CUTOFF: usize = 64;

/// Balanced tree of products `Π (x − u_i)` over a fixed point set.
/// Coefficient vectors are little-endian and every node is monic.
pub struct SubproductTree<F> {
    points: Vec<F>,
    /// `levels[0]` holds the leaf blocks, the last level holds the root.
    levels: Vec<Vec<Vec<F>>>,
}

impl<F: FftField + PrimeField> SubproductTree<F> {
    pub fn new(points: &[F]) -> Self {
        let blocks: Vec<Vec<F>> = if points.is_empty() {
            vec![vec![F::one()]]
        } else {
            points
                .chunks(BLOCK)
                .map(|chunk| {
                    chunk.iter().fold(vec![F::one()], |acc, u| {
                        let mut next = vec![F::zero(); acc.len() + 1];
                        for (i, c) in acc.iter().enumerate() {
                            next[i + 1] += c;
                            next[i] -= *c * u;
                        }
                        next
                    })
                })
                .collect()
        };
        let mut levels = vec![blocks];
        while levels.last().map_or(false, |l| l.len() > 1) {
            let below = levels.last().expect("nonempty");
            let above = below
                .chunks(2)
                .map(|pair| match pair {
                    [a, b] => mul_monic(a, b),
                    [a] => a.clone(),
                    _ => unreachable!(),
                })
                .collect();
            levels.push(above);
        }
        SubproductTree {
            points: points.to_vec(),
            levels,
        }
    }

    /// `Π (x − u_i)`.
    pub fn root(&self) -> &[F] {
        &self.levels.last().expect("tree has a root")[0]
    }

    /// Evaluates the polynomial with coefficients `coeffs` at every point.
    ///
    /// Walks a scaled remainder tree: each node carries the leading
    /// coefficients of `(f mod Q) / Q` as a series in `1/x`, and a child's
    /// series is a middle product of its parent's with its sibling.
    pub fn evaluate(&self, coeffs: &[F]) -> Vec<F> {
        if self.points.is_empty() {
            return Vec::new();
        }
        let top = self.levels.len() - 1;
        let root = &self.levels[top][0];
        let n = root.len() - 1;
        let f = if coeffs.len() > n { rem(coeffs, root) } else { coeffs.to_vec() };
        let mut rev_f = vec![F::zero(); n];
        for (i, c) in f.iter().enumerate() {
            rev_f[n - 1 - i] = *c;
        }
        let rev_root: Vec<F> = root.iter().rev().copied().collect();
        let mut series = mul(&rev_f, &inverse_series(&rev_root, n));
        series.truncate(n);
        let mut scaled = vec![series];
        for level in (0..top).rev() {
            scaled = self.levels[level]
                .chunks(2)
                .zip(&scaled)
                .flat_map(|(pair, parent)| match pair {
                    [l, r] => vec![middle_product(parent, r), middle_product(parent, l)],
                    [_] => vec![parent.clone()],
                    _ => unreachable!(),
                })
                .collect();
        }
        self.points
            .chunks(BLOCK)
            .zip(self.levels[0].iter().zip(&scaled))
            .flat_map(|(chunk, (block, u))| {
                let r = series_remainder(u, block);
                chunk.iter().map(move |x| horner(&r, x)).collect::<Vec<_>>()
            })
            .collect()
    }

    /// `Π_{j≠i} (u_i − u_j)` for every point, via the derivative of the root.
    pub fn derivative_values(&self) -> Vec<F> {
        let root = self.root();
        let derivative: Vec<F> = root
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| *c * F::from(i as u64))
            .collect();
        if derivative.is_empty() {
            return vec![F::one(); self.points.len()];
        }
        self.evaluate(&derivative)
    }
}

/// Given `u[k]` = coefficient of `x^-(k+1)` in `(f mod Q) / Q` and a factor
/// `sibling` of `Q`, the same coefficients for `Q / sibling`.
fn middle_product<F: FftField>(u: &[F], sibling: &[F]) -> Vec<F> {
    let dq = u.len();
    let r = sibling.len() - 1;
    let dl = dq - r;
    if sibling.len().min(dl) < FFT_CUTOFF {
        return (0..dl)
            .map(|j| sibling.iter().zip(&u[j..]).map(|(a, b)| *a * b).sum())
            .collect();
    }
    let rev_u: Vec<F> = u.iter().rev().copied().collect();
    let size = transform_size::<F>(dq);
    // wrapped terms land below index r, the wanted ones sit at r..dq
    match cyclic_mul(&rev_u, sibling, size, size) {
        Some(p) => (0..dl).map(|j| p[dq - 1 - j]).collect(),
        None => (0..dl)
            .map(|j| sibling.iter().zip(&u[j..]).map(|(a, b)| *a * b).sum())
            .collect(),
    }
}

/// `f mod B` recovered from the leading coefficients of `(f mod B) / B`.
fn series_remainder<F: Field>(u: &[F], b: &[F]) -> Vec<F> {
    let d = b.len() - 1;
    (0..d)
        .map(|m| u.iter().zip(&b[m + 1..]).map(|(c, bk)| *c * bk).sum())
        .collect()
}

fn horner<F: Field>(coeffs: &[F], x: &F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, c| acc * x + c)
}

fn naive_mul<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * y;
        }
    }
    out
}

/// Smallest transform length `>= min`: a power of two, or three times one
/// when the field has a subgroup of that order.
fn transform_size<F: FftField>(min: usize) -> usize {
    let pow2 = min.next_power_of_two();
    if F::SMALL_SUBGROUP_BASE == Some(3) && pow2 >= 4 && 3 * pow2 / 4 >= min {
        3 * pow2 / 4
    } else {
        pow2
    }
}

/// Cyclic product modulo `x^size - 1`, truncated to `n` coefficients.
fn cyclic_mul<F: FftField>(a: &[F], b: &[F], size: usize, n: usize) -> Option<Vec<F>> {
    if !size.is_power_of_two() {
        return cyclic_mul3(a, b, size, n);
    }
    let domain = Radix2EvaluationDomain::<F>::new(size)?;
    if domain.size() != size {
        return None;
    }
    let mut fa = domain.fft(a);
    let fb = domain.fft(b);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    let mut out = domain.ifft(&fa);
    out.truncate(n);
    Some(out)
}

/// Length `3m` cyclic product: `x^3m - 1` splits as `Π_k (x^m - w^k)` for a
/// cube root of unity `w`, each factor is a radix-2 coset transform, and the
/// three residues recombine with a 3-point inverse DFT.
fn cyclic_mul3<F: FftField>(a: &[F], b: &[F], size: usize, n: usize) -> Option<Vec<F>> {
    let m = size / 3;
    if m * 3 != size || !m.is_power_of_two() {
        return None;
    }
    let g = F::get_root_of_unity(size as u64)?;
    let w = g.pow([m as u64]);
    let base = Radix2EvaluationDomain::<F>::new(m)?;
    if base.size() != m {
        return None;
    }
    let fold = |p: &[F], c: F| {
        let mut out = vec![F::zero(); m];
        let mut scale = F::one();
        for chunk in p.chunks(m) {
            for (o, x) in out.iter_mut().zip(chunk) {
                *o += scale * x;
            }
            scale *= c;
        }
        out
    };
    let mut residues = Vec::with_capacity(3);
    let (mut zeta, mut c) = (F::one(), F::one());
    for _ in 0..3 {
        let coset = base.get_coset(zeta)?;
        let mut fa = coset.fft(&fold(a, c));
        let fb = coset.fft(&fold(b, c));
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        residues.push(coset.ifft(&fa));
        zeta *= g;
        c *= w;
    }
    let third = F::from(3u64).inverse()?;
    let w2 = w.square();
    let mut out = vec![F::zero(); size];
    for j in 0..m {
        let (r0, r1, r2) = (residues[0][j], residues[1][j], residues[2][j]);
        out[j] = (r0 + r1 + r2) * third;
        // w^-1 = w^2
        out[j + m] = (r0 + r1 * w2 + r2 * w) * third;
        out[j + 2 * m] = (r0 + r1 * w + r2 * w2) * third;
    }
    out.truncate(n);
    Some(out)
}

fn mul<F: FftField>(a: &[F], b: &[F]) -> Vec<F> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.len() < FFT_CUTOFF {
        return naive_mul(a, b);
    }
    let n = long.len() + short.len() - 1;
    if long.len() < 2 * short.len() {
        return cyclic_mul(long, short, transform_size::<F>(n), n).unwrap_or_else(|| naive_mul(a, b));
    }
    // Lopsided: slice the long operand to the short one's length so every
    // transform is sized by the short operand.
    let s = short.len();
    let Some(domain) = Radix2EvaluationDomain::<F>::new(2 * s - 1) else {
        return naive_mul(a, b);
    };
    let fs = domain.fft(short);
    let mut out = vec![F::zero(); n];
    for (k, chunk) in long.chunks(s).enumerate() {
        let mut fc = domain.fft(chunk);
        for (x, y) in fc.iter_mut().zip(&fs) {
            *x *= y;
        }
        let part = domain.ifft(&fc);
        for (o, c) in out[k * s..].iter_mut().zip(part.into_iter().take(chunk.len() + s - 1)) {
            *o += c;
        }
    }
    out
}

/// Product of two monic polynomials. When the product degree is itself a
/// transform length the leading 1 wraps onto the constant term of a transform of exactly
/// that size, which halves the transform.
fn mul_monic<F: FftField>(a: &[F], b: &[F]) -> Vec<F> {
    let degree = a.len() + b.len() - 2;
    if a.len().min(b.len()) >= FFT_CUTOFF && transform_size::<F>(degree) == degree && a.len().max(b.len()) < 2 * a.len().min(b.len()) {
        if let Some(mut out) = cyclic_mul(a, b, degree, degree) {
            out[0] -= F::one();
            out.push(F::one());
            return out;
        }
    }
    mul(a, b)
}

/// Power series inverse of `f` modulo `x^k`; `f[0]` must be invertible.
///
/// Newton steps `g ← g − g·(f·g − 1)`. The low half of `f·g − 1` is zero, so
/// both products fit a cyclic transform of the new precision.
fn inverse_series<F: FftField>(f: &[F], k: usize) -> Vec<F> {
    let mut g = vec![f[0].inverse().expect("constant term is invertible")];
    while g.len() < k {
        let p = g.len();
        let next = (2 * p).min(k);
        let fl = &f[..f.len().min(next)];
        let size = transform_size::<F>(next);
        let h = if p < FFT_CUTOFF {
            naive_mul(fl, &g)
        } else {
            cyclic_mul(fl, &g, size, next).unwrap_or_else(|| naive_mul(fl, &g))
        };
        let high = &h[p..next.min(h.len())];
        let step = if p < FFT_CUTOFF || high.len() < FFT_CUTOFF {
            naive_mul(&g, high)
        } else {
            cyclic_mul(&g, high, size, next).unwrap_or_else(|| naive_mul(&g, high))
        };
        g.extend(step.into_iter().take(next - p).map(|c| -c));
        g.resize(next, F::zero());
    }
    g.truncate(k);
    g
}

fn schoolbook_rem<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    let m = b.len() - 1;
    let mut r = a.to_vec();
    for i in (m..r.len()).rev() {
        let c = r[i];
        if !c.is_zero() {
            for j in 0..m {
                r[i - m + j] -= c * b[j];
            }
        }
    }
    r.truncate(m);
    r
}

/// `a mod b` for monic `b`.
fn rem<F: FftField>(a: &[F], b: &[F]) -> Vec<F> {
    let m = b.len() - 1;
    if a.len() <= m {
        return a.to_vec();
    }
    let step = m.min(a.len() - m);
    if step < FFT_CUTOFF {
        return schoolbook_rem(a, b);
    }
    let rev_b: Vec<F> = b.iter().rev().copied().collect();
    let inv = inverse_series(&rev_b, step);
    // Peel at most `step` quotient coefficients off the top per round, so a
    // long dividend costs a run of size-m divisions.
    let mut r = a.to_vec();
    while r.len() > m {
        let q_len = (r.len() - m).min(step);
        let base = r.len() - m - q_len;
        let top = &r[base..];
        let rev_top: Vec<F> = top.iter().rev().take(q_len).copied().collect();
        let mut q = mul(&rev_top, &inv[..q_len]);
        q.truncate(q_len);
        q.reverse();
        let qb = mul(&q, b);
        let low: Vec<F> = top[..m].iter().zip(&qb).map(|(x, y)| *x - y).collect();
        r.truncate(base);
        r.extend(low);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::small::F101;
    use crate::algebra::Scalar;
    use ark_ff::UniformRand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn fft_and_naive_products_agree() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let a: Vec<Scalar> = (0..150).map(|_| Scalar::rand(&mut rng)).collect();
        let b: Vec<Scalar> = (0..90).map(|_| Scalar::rand(&mut rng)).collect();
        assert_eq!(mul(&a, &b), naive_mul(&a, &b));
        let long: Vec<Scalar> = (0..1000).map(|_| Scalar::rand(&mut rng)).collect();
        assert_eq!(mul(&long, &b), naive_mul(&long, &b));
        assert_eq!(mul(&b, &long[..181]), naive_mul(&b, &long[..181]));
    }

    #[test]
    fn three_smooth_cyclic_product() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for size in [12usize, 96, 384] {
            let a: Vec<Scalar> = (0..size).map(|_| Scalar::rand(&mut rng)).collect();
            let b: Vec<Scalar> = (0..size * 2 / 3).map(|_| Scalar::rand(&mut rng)).collect();
            let mut wrapped = vec![Scalar::from(0u64); size];
            for (i, c) in naive_mul(&a, &b).into_iter().enumerate() {
                wrapped[i % size] += c;
            }
            assert_eq!(transform_size::<Scalar>(size), size);
            assert_eq!(cyclic_mul(&a, &b, size, size).unwrap(), wrapped);
        }
    }

    #[test]
    fn monic_wraparound_product() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for (da, db) in [(64usize, 64usize), (128, 128), (96, 160), (64, 65), (100, 28)] {
            let mut a: Vec<Scalar> = (0..da).map(|_| Scalar::rand(&mut rng)).collect();
            let mut b: Vec<Scalar> = (0..db).map(|_| Scalar::rand(&mut rng)).collect();
            a.push(Scalar::from(1u64));
            b.push(Scalar::from(1u64));
            assert_eq!(mul_monic(&a, &b), naive_mul(&a, &b), "{da} x {db}");
        }
    }

    #[test]
    fn fast_remainder_matches_long_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let a: Vec<Scalar> = (0..400).map(|_| Scalar::rand(&mut rng)).collect();
        let mut b: Vec<Scalar> = (0..200).map(|_| Scalar::rand(&mut rng)).collect();
        b.push(Scalar::from(1u64));
        assert_eq!(rem(&a, &b), schoolbook_rem(&a, &b));
        // long dividend, short divisor, and the reverse
        let long: Vec<Scalar> = (0..1000).map(|_| Scalar::rand(&mut rng)).collect();
        assert_eq!(rem(&long, &b), schoolbook_rem(&long, &b));
        let mut big: Vec<Scalar> = (0..700).map(|_| Scalar::rand(&mut rng)).collect();
        big.push(Scalar::from(1u64));
        assert_eq!(rem(&long, &big), schoolbook_rem(&long, &big));
    }

    #[test]
    fn derivative_values_are_pairwise_products() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for n in [1usize, 2, 33, 130, 300, 513] {
            let pts: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut rng)).collect();
            let tree = SubproductTree::new(&pts);
            let expected: Vec<Scalar> = pts
                .iter()
                .enumerate()
                .map(|(i, ui)| {
                    pts.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, uj)| *ui - uj)
                        .product()
                })
                .collect();
            assert_eq!(tree.derivative_values(), expected, "n = {n}");
        }
    }

    #[test]
    fn series_inverse() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        for k in [1usize, 2, 63, 64, 65, 200, 750, 1024] {
            let f: Vec<Scalar> = (0..k + 3).map(|_| Scalar::rand(&mut rng)).collect();
            let g = inverse_series(&f, k);
            let mut prod = naive_mul(&f, &g);
            prod.truncate(k);
            let mut one = vec![Scalar::from(0u64); k];
            one[0] = Scalar::from(1u64);
            assert_eq!(prod, one, "k = {k}");
        }
    }

    #[test]
    fn evaluation_matches_horner() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for (n, deg) in [(700usize, 700usize), (300, 40), (97, 500)] {
            let pts: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut rng)).collect();
            let coeffs: Vec<Scalar> = (0..=deg).map(|_| Scalar::rand(&mut rng)).collect();
            let expected: Vec<Scalar> = pts.iter().map(|x| horner(&coeffs, x)).collect();
            assert_eq!(SubproductTree::new(&pts).evaluate(&coeffs), expected, "{n} points, degree {deg}");
        }
    }

    #[test]
    fn small_field_falls_back_to_schoolbook() {
        let pts: Vec<F101> = (1..=100u64).map(F101::from).collect();
        let coeffs: Vec<F101> = (0..80u64).map(|i| F101::from(i * 7 + 3)).collect();
        let tree = SubproductTree::new(&pts);
        let expected: Vec<F101> = pts.iter().map(|x| horner(&coeffs, x)).collect();
        assert_eq!(tree.evaluate(&coeffs), expected);
    }
}
