//! Truncated Heisenberg–Weyl matrices as a finite surrogate for the
//! dilatation representation of the coordinate algebra.
//!
//! Every operator lives in the first `N` oscillator levels. The truncation
//! breaks the canonical relations only near the last basis vectors, so all
//! checks compare a leading interior block and ignore the edge.

mod quadrature;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub use quadrature::{
    gauss_hermite, quadrature_warped_convolution, richardson_sequence, QuadratureConfig, QuadratureReport, QuadratureStep,
    MAX_QUADRATURE_DIM,
};

/// Smallest supported truncation dimension.
pub const MIN_DIM: usize = 16;
/// Oscillator levels kept between a trusted block and the truncation edge.
pub const EDGE_BUFFER: usize = 4;
/// Largest `|a·p|` for which conjugation stays inside the trusted block.
pub const MAX_CONJUGATION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QopError {
    #[error("truncation dimension {got} is below the minimum {min}")]
    TooSmall { got: usize, min: usize },
    #[error("scale a = 0 gives an unfaithful representation")]
    ZeroScale,
    #[error("non-finite parameter {0}")]
    NonFinite(&'static str),
    #[error("trusted block {block} does not fit inside N = {dim} with a buffer of {buffer}")]
    BadBlock { block: usize, dim: usize, buffer: usize },
    #[error("|a·p| = {0} exceeds the conjugation trust bound")]
    ConjugationUntrusted(f64),
    #[error("operators have mismatched dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("quadrature: {0}")]
    Quadrature(String),
}

/// Square complex matrix with the size of its trusted leading block.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    matrix: DMatrix<Complex64>,
    trusted: usize,
}

impl MatrixOperator {
    /// Wrap `matrix`, trusting everything up to the edge buffer.
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        let trusted = matrix.nrows().saturating_sub(EDGE_BUFFER);
        Self { matrix, trusted }
    }

    pub fn with_trusted(mut self, block: usize) -> Result<Self, QopError> {
        let dim = self.dim();
        if block == 0 || block + EDGE_BUFFER > dim {
            return Err(QopError::BadBlock { block, dim, buffer: EDGE_BUFFER });
        }
        self.trusted = block;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Leading `m × m` block.
    pub fn block(&self, m: usize) -> DMatrix<Complex64> {
        self.matrix.view((0, 0), (m, m)).into_owned()
    }

    pub fn trusted_block(&self) -> DMatrix<Complex64> {
        self.block(self.trusted)
    }

    /// `max |A − A†|` over the trusted block.
    pub fn hermiticity_defect(&self) -> f64 {
        let b = self.trusted_block();
        max_abs(&(&b - b.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Spectrum of the hermitian part of the trusted block, ascending.
    pub fn block_spectrum(&self) -> Vec<f64> {
        let b = self.trusted_block();
        let h = (&b + b.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Truncation and representation parameters for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationConfig {
    /// Number of oscillator levels.
    pub dim: usize,
    /// Dilatation scale `a`.
    pub scale: f64,
    /// Weight of this coordinate's momentum in the differential.
    pub weight: f64,
}

impl RepresentationConfig {
    pub fn new(dim: usize, scale: f64, weight: f64) -> Result<Self, QopError> {
        let cfg = Self { dim, scale, weight };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), QopError> {
        if self.dim < MIN_DIM {
            return Err(QopError::TooSmall { got: self.dim, min: MIN_DIM });
        }
        if !self.scale.is_finite() {
            return Err(QopError::NonFinite("a"));
        }
        if !self.weight.is_finite() {
            return Err(QopError::NonFinite("q"));
        }
        if self.scale == 0.0 {
            return Err(QopError::ZeroScale);
        }
        Ok(())
    }
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Truncated position and momentum, `Q = (A† + A)/√2`, `P = i(A† − A)/√2`.
pub fn build_qp(dim: usize) -> (MatrixOperator, MatrixOperator) {
    let mut lower = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 1..dim {
        lower[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&raise + &lower) * Complex64::new(s, 0.0);
    let p = (&raise - &lower) * Complex64::new(0.0, s);
    (MatrixOperator::new(q), MatrixOperator::new(p))
}

/// Dilatation generator `X = (a/2)(QP + PQ)`.
pub fn build_x(cfg: &RepresentationConfig) -> Result<MatrixOperator, QopError> {
    cfg.validate()?;
    let (q, p) = build_qp(cfg.dim);
    let (q, p) = (q.matrix(), p.matrix());
    let x = (q * p + p * q) * Complex64::new(cfg.scale / 2.0, 0.0);
    Ok(MatrixOperator::new(x))
}

/// Differential `dX = i q [P, X]`.
pub fn build_dx(cfg: &RepresentationConfig, x: &MatrixOperator) -> Result<MatrixOperator, QopError> {
    cfg.validate()?;
    if x.dim() != cfg.dim {
        return Err(QopError::DimensionMismatch(x.dim(), cfg.dim));
    }
    let (_, p) = build_qp(cfg.dim);
    let dx = commutator(p.matrix(), x.matrix()) * Complex64::new(0.0, cfg.weight);
    Ok(MatrixOperator::new(dx))
}

/// `‖[Q,P] − i‖` (max entry) on the leading `block`.
pub fn ccr_residual(dim: usize, block: usize) -> f64 {
    let (q, p) = build_qp(dim);
    let c = commutator(q.matrix(), p.matrix());
    let m = block.min(dim);
    let defect = c.view((0, 0), (m, m)) - DMatrix::<Complex64>::identity(m, m) * Complex64::new(0.0, 1.0);
    max_abs(&defect)
}

/// `‖[X, dX] − ia·dX‖ / ‖dX‖` on the leading `block` (Frobenius norms).
pub fn verify_commutator(x: &MatrixOperator, dx: &MatrixOperator, scale: f64, block: usize) -> Result<f64, QopError> {
    if x.dim() != dx.dim() {
        return Err(QopError::DimensionMismatch(x.dim(), dx.dim()));
    }
    let m = block.min(x.dim());
    let lhs = commutator(x.matrix(), dx.matrix());
    let r = lhs.view((0, 0), (m, m)) - dx.block(m) * Complex64::new(0.0, scale);
    let norm = frobenius(&dx.block(m));
    Ok(if norm == 0.0 { frobenius(&r) } else { frobenius(&r) / norm })
}

/// Same as [`verify_commutator`] without projection, exposing the edge defect.
pub fn full_commutator_residual(x: &MatrixOperator, dx: &MatrixOperator, scale: f64) -> Result<f64, QopError> {
    verify_commutator(x, dx, scale, x.dim())
}

/// `e^{ipX}`.
pub fn unitary(x: &MatrixOperator, p: f64) -> DMatrix<Complex64> {
    (x.matrix() * Complex64::new(0.0, p)).exp()
}

/// `e^{ipX} A e^{−ipX}`.
pub fn conjugate(x: &MatrixOperator, p: f64, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    unitary(x, p) * op * unitary(x, -p)
}

/// Trusted block used for conjugation checks.
pub fn conjugation_block(dim: usize) -> usize {
    dim / 4
}

/// `‖e^{ipX} dX e^{−ipX} − e^{−ap} dX‖ / ‖dX‖` on the conjugation block.
pub fn verify_adjoint_action(x: &MatrixOperator, dx: &MatrixOperator, scale: f64, p: f64) -> Result<f64, QopError> {
    if x.dim() != dx.dim() {
        return Err(QopError::DimensionMismatch(x.dim(), dx.dim()));
    }
    if !(p.is_finite() && scale.is_finite()) {
        return Err(QopError::NonFinite("p"));
    }
    if (scale * p).abs() > MAX_CONJUGATION {
        return Err(QopError::ConjugationUntrusted((scale * p).abs()));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let m = conjugation_block(x.dim());
    let lhs = conjugate(x, p, dx.matrix());
    let r = lhs.view((0, 0), (m, m)) - dx.block(m) * Complex64::new((-scale * p).exp(), 0.0);
    let norm = frobenius(&dx.block(m));
    Ok(if norm == 0.0 { frobenius(&r) } else { frobenius(&r) / norm })
}

/// Best-fit scalar `λ` with `e^{ipX} dX e^{−ipX} ≈ λ dX` on the conjugation block.
pub fn conjugation_factor(x: &MatrixOperator, dx: &MatrixOperator, p: f64) -> Complex64 {
    let m = conjugation_block(x.dim());
    let lhs = conjugate(x, p, dx.matrix()).view((0, 0), (m, m)).into_owned();
    let base = dx.block(m);
    let num: Complex64 = base.iter().zip(lhs.iter()).map(|(b, l)| b.conj() * l).sum();
    let den: f64 = base.iter().map(|b| b.norm_sqr()).sum();
    num / den
}

/// Relative gap between conjugating by `e^{ip₁X}e^{ip₂X}` and by
/// `e^{i(p₁+p₂)X}`, on the conjugation block.
pub fn group_law_residual(x: &MatrixOperator, op: &MatrixOperator, p1: f64, p2: f64) -> f64 {
    let m = conjugation_block(x.dim());
    let u = unitary(x, p1) * unitary(x, p2);
    let uinv = unitary(x, -p2) * unitary(x, -p1);
    let twice = &u * op.matrix() * &uinv;
    let once = conjugate(x, p1 + p2, op.matrix());
    let r = (twice - &once).view((0, 0), (m, m)).into_owned();
    frobenius(&r) / frobenius(&once.view((0, 0), (m, m)).into_owned())
}

/// Closed-form deformed square `e^{−2aθX'} ⊗ (dX)²` on two oscillator
/// factors, the first carrying `dX` and the second the deforming coordinate.
pub fn deformed_square_closed_form(x: &MatrixOperator, dx: &MatrixOperator, scale: f64, theta: f64) -> DMatrix<Complex64> {
    let square = dx.matrix() * dx.matrix();
    square.kronecker(&spectral_function(x, |l| Complex64::new((-2.0 * scale * theta * l).exp(), 0.0)))
}

/// `f(X)` through the eigendecomposition of the hermitian `X`.
pub fn spectral_function(x: &MatrixOperator, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(x.matrix().clone());
    let v = &eig.eigenvectors;
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    v * diag * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(dim: usize, a: f64, q: f64) -> (MatrixOperator, MatrixOperator) {
        let cfg = RepresentationConfig::new(dim, a, q).unwrap();
        let x = build_x(&cfg).unwrap();
        let dx = build_dx(&cfg, &x).unwrap();
        (x, dx)
    }

    #[test]
    fn ccr_holds_away_from_edge() {
        assert!(ccr_residual(16, 12) < 1e-14);
        assert!(ccr_residual(16, 16) > 1.0);
        let (q, p) = build_qp(16);
        let trace = commutator(q.matrix(), p.matrix()).trace();
        assert!(trace.norm() < 1e-12);
        assert!(q.is_hermitian(1e-15) && p.is_hermitian(1e-15));
    }

    #[test]
    fn dilatation_generator_properties() {
        let (x, _) = ops(32, 1.0, 1.0);
        let (x2, _) = ops(32, 2.0, 1.0);
        assert!(x.is_hermitian(1e-14));
        assert_eq!(x2.matrix(), &(x.matrix() * Complex64::new(2.0, 0.0)));
        let ev = x.block_spectrum();
        for (lo, hi) in ev.iter().zip(ev.iter().rev()) {
            assert!((lo + hi).abs() < 1e-10);
        }
        assert_eq!(RepresentationConfig::new(32, 0.0, 1.0).unwrap_err(), QopError::ZeroScale);
        assert!(matches!(RepresentationConfig::new(8, 1.0, 1.0), Err(QopError::TooSmall { .. })));
    }

    #[test]
    fn differential_is_scaled_momentum() {
        let (x, dx) = ops(32, 0.7, 1.5);
        let (_, p) = build_qp(32);
        let diff = dx.block(28) - p.block(28) * Complex64::new(0.7 * 1.5, 0.0);
        assert!(max_abs(&diff) <= 1e-12);
        assert!(dx.is_hermitian(1e-12));
        let (_, zero) = ops(32, 0.7, 0.0);
        assert_eq!(max_abs(zero.matrix()), 0.0);
        assert!(verify_commutator(&x, &dx, 0.7, 24).unwrap() <= 1e-10);
    }

    #[test]
    fn commutator_relation_needs_projection() {
        for a in [1.0, -0.5] {
            let (x, dx) = ops(32, a, 1.0);
            assert!(verify_commutator(&x, &dx, a, 24).unwrap() <= 1e-10);
            assert!(full_commutator_residual(&x, &dx, a).unwrap() > 1e-2);
        }
    }

    #[test]
    fn adjoint_action_and_group_law() {
        let (x, dx) = ops(64, 1.0, 1.0);
        assert_eq!(verify_adjoint_action(&x, &dx, 1.0, 0.0).unwrap(), 0.0);
        assert!(verify_adjoint_action(&x, &dx, 1.0, 0.3).unwrap() <= 1e-6);
        assert!(matches!(verify_adjoint_action(&x, &dx, 1.0, 3.0), Err(QopError::ConjugationUntrusted(_))));
        assert!(group_law_residual(&x, &dx, 0.1, 0.2) <= 1e-10);
    }

    #[test]
    fn conjugation_factor_ignores_weight() {
        for q in [0.5, 1.0, 2.0] {
            let (x, dx) = ops(48, 1.0, q);
            let f = conjugation_factor(&x, &dx, 0.3);
            assert!((f - Complex64::new((-0.3f64).exp(), 0.0)).norm() < 1e-6, "{q}: {f}");
        }
    }

    #[test]
    fn closed_form_is_hermitian() {
        let (x, dx) = ops(16, 1.0, 1.0);
        let m = MatrixOperator::new(deformed_square_closed_form(&x, &dx, 1.0, 0.05));
        assert!(max_abs(&(m.matrix() - m.matrix().adjoint())) <= 1e-12);
    }
}
