//! Structure constants of coordinate/differential commutators and their
//! consistency conditions.
//!
//! An algebra is fixed by `[x^μ, dx^ν] = Σ_σ C^{μν}_σ dx^σ`, with the sum over
//! σ a plain sum. Every `C` is purely imaginary, so only the imaginary parts
//! are stored and `entry` rebuilds the complex value on demand.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("a-vector component {index} is zero; the coordinate representation would not be faithful")]
    Unfaithful { index: usize },
    #[error("structure constant C[{mu}][{nu}][{sigma}] has a nonzero real part")]
    NotImaginary { mu: usize, nu: usize, sigma: usize },
    #[error("expected {expected} entries for dimension {d}, got {got}")]
    WrongLength { d: usize, expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("non-finite parameter")]
    NonFinite,
}

/// Dense `d×d×d` table of `C^{μν}_σ`, stored as imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants<T> {
    d: usize,
    imag: Vec<T>,
}

/// Diagonal algebra `[x^μ, dx^ν] = i a^μ δ^{μν} dx^ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalAlgebraSpec<T> {
    a: Vec<T>,
}

/// Two-dimensional algebra with six real parameters:
///
/// ```text
/// [x⁰,dx⁰] = i(a dx⁰ + e dx¹)    [x⁰,dx¹] = [x¹,dx⁰] = i(r dx⁰ + f dx¹)
/// [x¹,dx¹] = i(s dx⁰ + h dx¹)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Extended2DAlgebraSpec<T> {
    pub a: T,
    pub e: T,
    pub f: T,
    pub h: T,
    pub r: T,
    pub s: T,
}

/// Outcome of the Jacobi-type consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiReport<T> {
    /// `max |Σ_σ (C^{μν}_σ C^{λσ}_κ − C^{λν}_σ C^{μσ}_κ)|` over all index tuples.
    pub max_residual: T,
    /// `(μ, ν, λ, κ)` where the maximum is attained, if nonzero.
    pub worst: Option<[usize; 4]>,
    pub consistent: bool,
}

impl<T: Scalar> DiagonalAlgebraSpec<T> {
    pub fn new(a: Vec<T>) -> Result<Self, AlgebraError> {
        if a.is_empty() {
            return Err(AlgebraError::EmptyDimension);
        }
        if let Some(index) = a.iter().position(|x| x.is_zero()) {
            return Err(AlgebraError::Unfaithful { index });
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

impl DiagonalAlgebraSpec<f64> {
    pub fn ones(d: usize) -> Self {
        Self { a: vec![1.0; d.max(1)] }
    }
}

impl<T: Scalar> Extended2DAlgebraSpec<T> {
    pub fn new(a: T, e: T, f: T, h: T, r: T, s: T) -> Self {
        Self { a, e, f, h, r, s }
    }

    /// `(es − rf, f(a−f) + e(h−r), r(r−h) + s(f−a))`; all zero iff consistent.
    pub fn constraints(&self) -> (T, T, T) {
        let Self { a, e, f, h, r, s } = self.clone();
        let r1 = e.clone() * s.clone() - r.clone() * f.clone();
        let r2 = f.clone() * (a.clone() - f.clone()) + e * (h.clone() - r.clone());
        let r3 = r.clone() * (r - h) + s * (f - a);
        (r1, r2, r3)
    }

    pub fn is_consistent(&self) -> bool {
        let (r1, r2, r3) = self.constraints();
        r1.is_negligible() && r2.is_negligible() && r3.is_negligible()
    }
}

/// Free-function form of [`Extended2DAlgebraSpec::constraints`].
pub fn extended_constraints<T: Scalar>(spec: &Extended2DAlgebraSpec<T>) -> (T, T, T) {
    spec.constraints()
}

impl<T: Scalar> StructureConstants<T> {
    /// All-zero constants: the commutative calculus.
    pub fn zero(d: usize) -> Self {
        Self { d, imag: vec![T::zero(); d * d * d] }
    }

    /// Build from imaginary parts laid out as `[μ][ν][σ]`.
    pub fn from_imaginary_parts(d: usize, imag: Vec<T>) -> Result<Self, AlgebraError> {
        if d == 0 {
            return Err(AlgebraError::EmptyDimension);
        }
        let expected = d * d * d;
        if imag.len() != expected {
            return Err(AlgebraError::WrongLength { d, expected, got: imag.len() });
        }
        Ok(Self { d, imag })
    }

    /// Build from complex entries; any nonzero real part is rejected.
    pub fn from_complex(d: usize, entries: Vec<Complex<T>>) -> Result<Self, AlgebraError> {
        let expected = d * d * d;
        if d == 0 {
            return Err(AlgebraError::EmptyDimension);
        }
        if entries.len() != expected {
            return Err(AlgebraError::WrongLength { d, expected, got: entries.len() });
        }
        let mut imag = Vec::with_capacity(expected);
        for (k, c) in entries.into_iter().enumerate() {
            if !c.re.is_zero() {
                let (mu, nu, sigma) = (k / (d * d), (k / d) % d, k % d);
                return Err(AlgebraError::NotImaginary { mu, nu, sigma });
            }
            imag.push(c.im);
        }
        Ok(Self { d, imag })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn idx(&self, mu: usize, nu: usize, sigma: usize) -> usize {
        (mu * self.d + nu) * self.d + sigma
    }

    /// Imaginary part of `C^{μν}_σ`.
    pub fn imag(&self, mu: usize, nu: usize, sigma: usize) -> &T {
        &self.imag[self.idx(mu, nu, sigma)]
    }

    pub fn set_imag(&mut self, mu: usize, nu: usize, sigma: usize, value: T) {
        let k = self.idx(mu, nu, sigma);
        self.imag[k] = value;
    }

    pub fn entry(&self, mu: usize, nu: usize, sigma: usize) -> Complex<T> {
        Complex::new(T::zero(), self.imag(mu, nu, sigma).clone())
    }

    /// Replace `C^{μν}_σ` and `C^{νμ}_σ` by their average.
    pub fn symmetrize(&mut self) {
        let two = T::one() + T::one();
        for mu in 0..self.d {
            for nu in (mu + 1)..self.d {
                for sigma in 0..self.d {
                    let avg = (self.imag(mu, nu, sigma).clone() + self.imag(nu, mu, sigma).clone())
                        / two.clone();
                    self.set_imag(mu, nu, sigma, avg.clone());
                    self.set_imag(nu, mu, sigma, avg);
                }
            }
        }
    }

    /// True when `[x^ν, dx^μ]` is a multiple of `dx^μ` for every ν, i.e. the
    /// adjoint action of the coordinates on `dx^μ` is a pure rescaling.
    pub fn acts_diagonally_on(&self, mu: usize) -> bool {
        (0..self.d).all(|nu| (0..self.d).all(|sigma| sigma == mu || self.imag(nu, mu, sigma).is_zero()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> StructureConstants<U> {
        StructureConstants { d: self.d, imag: self.imag.iter().map(f).collect() }
    }
}

pub fn make_diagonal<T: Scalar>(spec: &DiagonalAlgebraSpec<T>) -> StructureConstants<T> {
    let d = spec.dim();
    let mut c = StructureConstants::zero(d);
    for (mu, a) in spec.a().iter().enumerate() {
        c.set_imag(mu, mu, mu, a.clone());
    }
    c
}

pub fn make_extended2d<T: Scalar>(spec: &Extended2DAlgebraSpec<T>) -> StructureConstants<T> {
    let mut c = StructureConstants::zero(2);
    let rows = [
        ((0, 0), [&spec.a, &spec.e]),
        ((0, 1), [&spec.r, &spec.f]),
        ((1, 0), [&spec.r, &spec.f]),
        ((1, 1), [&spec.s, &spec.h]),
    ];
    for ((mu, nu), vals) in rows {
        for (sigma, v) in vals.into_iter().enumerate() {
            c.set_imag(mu, nu, sigma, v.clone());
        }
    }
    c
}

/// Exact symmetry in the first two indices.
pub fn check_symmetry<T: Scalar>(c: &StructureConstants<T>) -> bool {
    let d = c.dim();
    (0..d).all(|mu| {
        (0..d).all(|nu| (0..d).all(|sigma| c.imag(mu, nu, sigma) == c.imag(nu, mu, sigma)))
    })
}

/// Evaluate `Σ_σ (C^{μν}_σ C^{λσ}_κ − C^{λν}_σ C^{μσ}_κ)` over every index tuple.
///
/// With `C = i c` the complex sum equals `−Σ_σ (c c − c c)`, so the magnitude
/// is computed on the imaginary parts directly.
pub fn check_jacobi<T: Scalar>(c: &StructureConstants<T>) -> JacobiReport<T> {
    let d = c.dim();
    let mut max = T::zero();
    let mut worst = None;
    for mu in 0..d {
        for nu in 0..d {
            for lambda in 0..d {
                for kappa in 0..d {
                    let mut sum = T::zero();
                    for sigma in 0..d {
                        sum = sum + c.imag(mu, nu, sigma).clone() * c.imag(lambda, sigma, kappa).clone()
                            - c.imag(lambda, nu, sigma).clone() * c.imag(mu, sigma, kappa).clone();
                    }
                    let mag = sum.abs();
                    if mag > max {
                        max = mag;
                        worst = Some([mu, nu, lambda, kappa]);
                    }
                }
            }
        }
    }
    let consistent = max.is_negligible();
    JacobiReport { max_residual: max, worst, consistent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use num_traits::Zero;

    fn ext(v: [i64; 6]) -> Extended2DAlgebraSpec<Rational> {
        let [a, e, f, h, r, s] = v.map(|x| ratio(x, 1));
        Extended2DAlgebraSpec::new(a, e, f, h, r, s)
    }

    #[test]
    fn diagonal_entries() {
        let c = make_diagonal(&DiagonalAlgebraSpec::new(vec![1.0, 1.0]).unwrap());
        assert_eq!(c.entry(0, 0, 0), Complex::new(0.0, 1.0));
        assert_eq!(c.entry(1, 1, 1), Complex::new(0.0, 1.0));
        assert_eq!(c.entry(0, 1, 1), Complex::new(0.0, 0.0));
        assert_eq!(c.entry(1, 0, 0), Complex::new(0.0, 0.0));

        let c = make_diagonal(&DiagonalAlgebraSpec::new(vec![2.0, -1.0]).unwrap());
        assert_eq!(*c.imag(0, 0, 0), 2.0);
        assert_eq!(*c.imag(1, 1, 1), -1.0);
    }

    #[test]
    fn zero_component_is_unfaithful() {
        assert_eq!(
            DiagonalAlgebraSpec::new(vec![1.0, 0.0]).unwrap_err(),
            AlgebraError::Unfaithful { index: 1 }
        );
    }

    #[test]
    fn real_parts_rejected() {
        let mut entries = vec![Complex::new(0.0, 0.0); 8];
        entries[3] = Complex::new(0.5, 1.0);
        assert_eq!(
            StructureConstants::from_complex(2, entries).unwrap_err(),
            AlgebraError::NotImaginary { mu: 0, nu: 1, sigma: 1 }
        );
    }

    #[test]
    fn extended_reduces_to_diagonal() {
        let c = make_extended2d(&ext([1, 0, 0, 1, 0, 0]));
        let diag = make_diagonal(&DiagonalAlgebraSpec::new(vec![ratio(1, 1), ratio(1, 1)]).unwrap());
        assert_eq!(c, diag);
    }

    #[test]
    fn extended_constraint_values() {
        assert_eq!(ext([1, 0, 1, 1, 1, 0]).constraints(), (ratio(-1, 1), ratio(0, 1), ratio(0, 1)));
        assert_eq!(ext([0, 1, 1, 0, 0, 0]).constraints(), (ratio(0, 1), ratio(-1, 1), ratio(0, 1)));
        assert_eq!(ext([1, 0, 0, 1, 0, 0]).constraints(), (Rational::zero(), Rational::zero(), Rational::zero()));
        assert!(!ext([1, 0, 1, 1, 1, 0]).is_consistent());
    }

    #[test]
    fn symmetry_checks() {
        assert!(check_symmetry(&make_diagonal(&DiagonalAlgebraSpec::ones(3))));
        assert!(check_symmetry(&make_extended2d(&ext([2, 3, 5, 7, 11, 13]))));
        let mut c = StructureConstants::<f64>::zero(2);
        c.set_imag(0, 1, 0, 1.0);
        assert!(!check_symmetry(&c));
    }

    #[test]
    fn jacobi_examples() {
        let r = check_jacobi(&make_diagonal(&DiagonalAlgebraSpec::ones(4)));
        assert!(r.consistent);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.worst, None);

        let r = check_jacobi(&make_extended2d(&ext([2, 0, 0, 3, 0, 0])));
        assert!(r.max_residual.is_zero());

        let mut c = make_diagonal(&DiagonalAlgebraSpec::ones(2));
        let bumped = c.imag(0, 1, 0) + 0.1;
        c.set_imag(0, 1, 0, bumped);
        c.symmetrize();
        assert!(check_symmetry(&c));
        let r = check_jacobi(&c);
        assert!(r.max_residual > 0.0);
        assert!(!r.consistent);
    }

    #[test]
    fn diagonal_rows_act_diagonally() {
        let c = make_diagonal(&DiagonalAlgebraSpec::ones(3));
        assert!((0..3).all(|mu| c.acts_diagonally_on(mu)));
        let c = make_extended2d(&ext([1, 1, 0, 1, 0, 0]));
        assert!(!c.acts_diagonally_on(0));
        assert!(c.acts_diagonally_on(1));
    }
}
