//! Direct evaluation of the warped convolution of `(dX)²` at finite cutoff.
//!
//! Two oscillator factors carry `X⁰` (acted on by the deformation) and `X¹`
//! (the coordinate entering `(ΘX)₀ = θX¹`). With the Gaussian regulator
//! `e^{−ε²(x² + y²)}` both `y` integrals are Gaussian and done in closed form.
//! The remaining `x¹` integral is a shifted Gaussian for each eigenvalue of
//! `X¹`, evaluated with Gauss–Hermite nodes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{build_dx, build_x, deformed_square_closed_form, MatrixOperator, QopError, RepresentationConfig};

/// Largest truncation for which the quadrature is offered.
pub const MAX_QUADRATURE_DIM: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub repr: RepresentationConfig,
    /// `Θ₀₁`.
    pub theta: f64,
    /// Cutoff sequence, strictly decreasing, each half the previous.
    pub cutoffs: Vec<f64>,
    /// Gauss–Hermite nodes per eigenvalue.
    pub nodes: usize,
    /// Leading levels of each factor compared against the closed form.
    pub block: usize,
}

impl QuadratureConfig {
    pub fn new(repr: RepresentationConfig, theta: f64) -> Self {
        Self { repr, theta, cutoffs: vec![0.4, 0.2, 0.1], nodes: 64, block: 4 }
    }

    fn validate(&self) -> Result<(), QopError> {
        self.repr.validate()?;
        let bad = |m: &str| Err(QopError::Quadrature(m.to_owned()));
        if self.repr.dim > MAX_QUADRATURE_DIM {
            return bad("truncation above 24 levels is not supported");
        }
        if !self.theta.is_finite() {
            return Err(QopError::NonFinite("theta"));
        }
        if self.cutoffs.is_empty() || self.cutoffs.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("cutoffs must be positive");
        }
        if self.cutoffs.windows(2).any(|w| w[1] >= w[0]) {
            return bad("cutoffs must decrease");
        }
        if self.nodes < 2 {
            return bad("need at least two nodes");
        }
        if self.block == 0 || self.block > self.repr.dim {
            return bad("comparison block out of range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureStep {
    pub cutoff: f64,
    /// Relative Frobenius distance to the closed form on the compared block.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    pub steps: Vec<QuadratureStep>,
    /// Distance after eliminating the leading `ε²` error from the last two steps.
    pub extrapolated_distance: Option<f64>,
    /// Distances strictly decrease along the cutoff sequence.
    pub monotone: bool,
}

/// Gauss–Hermite rule for the weight `e^{−x²}` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// The regulated warped convolution of `(dX)²` at cutoff `eps`, as an
/// operator on the two-factor space.
pub fn quadrature_warped_convolution(
    x: &MatrixOperator,
    dx: &MatrixOperator,
    theta: f64,
    eps: f64,
    nodes: usize,
) -> Result<DMatrix<Complex64>, QopError> {
    if x.dim() != dx.dim() {
        return Err(QopError::DimensionMismatch(x.dim(), dx.dim()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(QopError::Quadrature(format!("bad cutoff {eps}")));
    }
    let n = x.dim();
    let square = dx.matrix() * dx.matrix();
    let eig = SymmetricEigen::new(x.matrix().clone());
    let (lam, v) = (&eig.eigenvalues, &eig.eigenvectors);
    let width = eps * eps + 1.0 / (4.0 * eps * eps);
    let damping = |l: f64| (-l * l * eps * eps / (1.0 + 4.0 * eps.powi(4))).exp();
    let norm = (std::f64::consts::PI / width).sqrt();
    // x⁰, y⁰ integrals: a smoothed identity I₀(X⁰)
    let smooth = v * DMatrix::from_diagonal(&lam.map(|l| Complex64::new(norm * damping(l), 0.0))) * v.adjoint();
    // e^{isX} A e^{−isX} in the eigenbasis: A_jk e^{is(λ_j − λ_k)}
    let rotated = v.adjoint() * &square * v;
    let (gx, gw) = gauss_hermite(nodes);
    let mut out = DMatrix::<Complex64>::zeros(n * n, n * n);
    for l in 0..n {
        let centre = lam[l] / (4.0 * eps * eps * width);
        let weight = damping(lam[l]) / width.sqrt();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (node, w) in gx.iter().zip(&gw) {
            let s = theta * (centre + node / width.sqrt());
            acc += rotated.map_with_location(|j, k, a| a * Complex64::from_polar(*w, s * (lam[j] - lam[k])));
        }
        let conj = v * acc * v.adjoint() * Complex64::new(weight, 0.0);
        let column = v.column(l);
        let projector = column * column.adjoint();
        out += (conj * &smooth).kronecker(&projector);
    }
    Ok(out / Complex64::new(4.0 * std::f64::consts::PI * eps * eps, 0.0))
}

fn block_indices(n: usize, m: usize) -> Vec<usize> {
    (0..m).flat_map(|i| (0..m).map(move |j| i * n + j)).collect()
}

fn project(full: &DMatrix<Complex64>, idx: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])])
}

fn distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let norm = |m: &DMatrix<Complex64>| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    norm(&(a - b)) / norm(b)
}

/// Run the cutoff sequence and compare each step with
/// `e^{−2aθX¹}(dX⁰)²` on the leading block of both factors.
pub fn richardson_sequence(cfg: &QuadratureConfig) -> Result<QuadratureReport, QopError> {
    cfg.validate()?;
    let x = build_x(&cfg.repr)?;
    let dx = build_dx(&cfg.repr, &x)?;
    let n = cfg.repr.dim;
    let idx = block_indices(n, cfg.block);
    let target = project(&deformed_square_closed_form(&x, &dx, cfg.repr.scale, cfg.theta), &idx);
    let mut steps = Vec::new();
    let mut blocks = Vec::new();
    for &eps in &cfg.cutoffs {
        let approx = project(&quadrature_warped_convolution(&x, &dx, cfg.theta, eps, cfg.nodes)?, &idx);
        if approx.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QopError::Quadrature(format!("non-finite result at ε = {eps}")));
        }
        steps.push(QuadratureStep { cutoff: eps, distance: distance(&approx, &target) });
        blocks.push(approx);
    }
    let monotone = steps.windows(2).all(|w| w[1].distance < w[0].distance);
    let extrapolated_distance = match blocks.as_slice() {
        [.., coarse, fine] => {
            let [e1, e2] = [cfg.cutoffs[cfg.cutoffs.len() - 2], cfg.cutoffs[cfg.cutoffs.len() - 1]];
            let r = (e1 / e2).powi(2);
            let extrapolated = (fine * Complex64::new(r, 0.0) - coarse) / Complex64::new(r - 1.0, 0.0);
            Some(distance(&extrapolated, &target))
        }
        _ => None,
    };
    Ok(QuadratureReport { steps, extrapolated_distance, monotone })
}
