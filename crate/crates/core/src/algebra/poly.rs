use std::collections::HashSet;

use ark_ff::{batch_inversion, FftField, PrimeField};
use rand::Rng;

use super::multipoint::SubproductTree;
use crate::error::{Error, Result};

/// Dense polynomial `a_0 + a_1 x + ... + a_t x^t`.
///
/// The degree is nominal: it is the length of the coefficient list minus
/// one, even when the leading coefficient happens to be zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<F> {
    coeffs: Vec<F>,
}

impl<F: PrimeField> Polynomial<F> {
    /// A uniformly random polynomial of the given degree.
    ///
    /// `degree` must be at least 1: a constant polynomial hands its secret
    /// to every shareholder.
    pub fn random<R: Rng + ?Sized>(
        degree: usize,
        fixed_constant: Option<F>,
        rng: &mut R,
    ) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDegree(degree));
        }
        Ok(Self::random_any_degree(degree, fixed_constant, rng))
    }

    /// Same as [`Polynomial::random`] but also allows degree 0, which the
    /// access-tree sharing uses for OR gates and leaves.
    pub(crate) fn random_any_degree<R: Rng + ?Sized>(
        degree: usize,
        fixed_constant: Option<F>,
        rng: &mut R,
    ) -> Self {
        let mut coeffs: Vec<F> = (0..=degree).map(|_| F::rand(rng)).collect();
        if let Some(c) = fixed_constant {
            coeffs[0] = c;
        }
        Polynomial { coeffs }
    }

    pub fn from_coefficients(coeffs: Vec<F>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidComponent("polynomial without coefficients".into()));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coeffs
    }

    pub fn constant(&self) -> F {
        self.coeffs[0]
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: &F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x + c)
    }
}

impl<F: FftField + PrimeField> Polynomial<F> {
    /// Evaluates at many points at once; quasi-linear in the number of
    /// points for large inputs.
    pub fn evaluate_many(&self, points: &[F]) -> Vec<F> {
        if points.len() < 48 {
            return points.iter().map(|x| self.evaluate(x)).collect();
        }
        SubproductTree::new(points).evaluate(&self.coeffs)
    }
}

/// A point `(x, P(x))` on a sharing polynomial. `x` is never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Share<F> {
    pub(crate) x: F,
    pub(crate) y: F,
}

impl<F: PrimeField> Share<F> {
    pub fn new(x: F, y: F) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::InvalidComponent("share abscissa must be nonzero".into()));
        }
        Ok(Share { x, y })
    }

    pub fn x(&self) -> F {
        self.x
    }

    pub fn y(&self) -> F {
        self.y
    }
}

/// Lagrange basis coefficients for the points `xs`, evaluated at `target`:
/// `λ_i = Π_{j≠i} (target − x_j) / (x_i − x_j)`.
pub fn lagrange_at<F: PrimeField>(xs: &[F], target: F) -> Result<Vec<F>> {
    let mut seen = HashSet::with_capacity(xs.len());
    for x in xs {
        if !seen.insert(*x) {
            return Err(Error::DuplicatePoint);
        }
    }
    if seen.contains(&target) {
        return Err(Error::DegenerateTarget);
    }
    let mut numerators = Vec::with_capacity(xs.len());
    let mut denominators = Vec::with_capacity(xs.len());
    for (i, xi) in xs.iter().enumerate() {
        let mut num = F::one();
        let mut den = F::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                num *= target - xj;
                den *= *xi - xj;
            }
        }
        numerators.push(num);
        denominators.push(den);
    }
    batch_inversion(&mut denominators);
    Ok(numerators
        .into_iter()
        .zip(denominators)
        .map(|(n, d)| n * d)
        .collect())
}

/// Recovers `P(0)` of a degree-`degree` polynomial from the first
/// `degree + 1` shares.
pub fn reconstruct_secret<F: PrimeField>(shares: &[Share<F>], degree: usize) -> Result<F> {
    if shares.len() < degree + 1 {
        return Err(Error::ReconstructionFailure(format!(
            "need {} shares, got {}",
            degree + 1,
            shares.len()
        )));
    }
    let used = &shares[..degree + 1];
    let xs: Vec<F> = used.iter().map(|s| s.x).collect();
    let coeffs = lagrange_at(&xs, F::zero()).map_err(|e| match e {
        Error::DuplicatePoint => Error::ReconstructionFailure("duplicate share abscissa".into()),
        other => Error::ReconstructionFailure(other.to_string()),
    })?;
    Ok(coeffs.iter().zip(used).map(|(l, s)| *l * s.y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::small::F101;
    use crate::algebra::Scalar;
    use ark_ff::{Field, One, UniformRand, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn f(v: u64) -> F101 {
        F101::from(v)
    }

    #[test]
    fn evaluation_examples() {
        let p = Polynomial::from_coefficients(vec![f(3), f(2)]).unwrap();
        assert_eq!(p.evaluate(&f(0)), f(3));
        assert_eq!(p.evaluate(&f(2)), f(7));
    }

    #[test]
    fn random_polynomial_contract() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = Scalar::from(42u64);
        let p = Polynomial::random(3, Some(s), &mut rng).unwrap();
        assert_eq!(p.evaluate(&Scalar::zero()), s);
        assert_eq!(p.degree(), 3);
        let q = Polynomial::<Scalar>::random(3, None, &mut rng).unwrap();
        assert_ne!(p, q);
        assert_eq!(
            Polynomial::<Scalar>::random(0, None, &mut rng),
            Err(Error::InvalidDegree(0))
        );
    }

    #[test]
    fn lagrange_examples() {
        let l = lagrange_at(&[f(1), f(2)], f(0)).unwrap();
        assert_eq!(l, vec![f(2), f(100)]);
        // A lone point interpolates a constant.
        assert_eq!(lagrange_at(&[f(2)], f(3)).unwrap(), vec![f(1)]);
        // Over {2, 3} at zero: 3/(3-2) and 2/(2-3).
        assert_eq!(lagrange_at(&[f(2), f(3)], f(0)).unwrap(), vec![f(3), f(99)]);
    }

    #[test]
    fn lagrange_errors() {
        assert_eq!(lagrange_at(&[f(1), f(1)], f(0)), Err(Error::DuplicatePoint));
        assert_eq!(lagrange_at(&[f(1), f(2)], f(2)), Err(Error::DegenerateTarget));
    }

    #[test]
    fn reconstruct_examples() {
        let shares = [Share::new(f(1), f(5)).unwrap(), Share::new(f(2), f(7)).unwrap()];
        assert_eq!(reconstruct_secret(&shares, 1).unwrap(), f(3));
        let constant = [Share::new(f(9), f(44)).unwrap()];
        assert_eq!(reconstruct_secret(&constant, 0).unwrap(), f(44));
        assert!(matches!(
            reconstruct_secret(&shares[..1], 1),
            Err(Error::ReconstructionFailure(_))
        ));
        let dup = [Share::new(f(1), f(5)).unwrap(), Share::new(f(1), f(5)).unwrap()];
        assert!(matches!(reconstruct_secret(&dup, 1), Err(Error::ReconstructionFailure(_))));
        assert!(Share::new(f(0), f(1)).is_err());
    }

    #[test]
    fn zero_field_arithmetic_is_exact() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = Polynomial::<Scalar>::random(6, None, &mut rng).unwrap();
        let xs: Vec<Scalar> = (1..=7u64).map(Scalar::from).collect();
        let l = lagrange_at(&xs, Scalar::zero()).unwrap();
        let sum: Scalar = l.iter().zip(&xs).map(|(l, x)| *l * p.evaluate(x)).sum();
        assert_eq!(sum, p.constant());
        assert_eq!(l.iter().sum::<Scalar>(), Scalar::one());
        assert!(Scalar::from(5u64).inverse().is_some());
    }

    #[test]
    fn evaluate_many_matches_horner() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for (deg, n) in [(5usize, 3usize), (40, 100), (300, 257), (1000, 1000)] {
            let p = Polynomial::<Scalar>::random(deg, None, &mut rng).unwrap();
            let xs: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut rng)).collect();
            let direct: Vec<Scalar> = xs.iter().map(|x| p.evaluate(x)).collect();
            assert_eq!(p.evaluate_many(&xs), direct, "deg {deg}, n {n}");
        }
    }
}
