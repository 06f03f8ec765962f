//! Finite-difference curvature from metric samples alone.
//!
//! First and second metric derivatives come from fourth-order central
//! stencils; everything after that is plain algebra on the sampled values.
//! Running the same computation at `h` and `2h` gives a Richardson gap that
//! rejects steps which are too coarse or too fine.

use nalgebra::DMatrix;

use super::GravityError;

/// Largest accepted Richardson gap, relative to `max(|G|, 1)`.
pub const RICHARDSON_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct NumericCurvature {
    pub christoffel: Vec<f64>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub einstein: DMatrix<f64>,
    /// `max |G(h) − G(2h)|`.
    pub richardson_gap: f64,
}

impl NumericCurvature {
    pub fn dim(&self) -> usize {
        self.einstein.nrows()
    }

    /// `Γ^λ_{μν}`.
    pub fn gamma(&self, lambda: usize, mu: usize, nu: usize) -> f64 {
        let d = self.dim();
        self.christoffel[(lambda * d + mu) * d + nu]
    }
}

fn shifted(p: &[f64], axis: usize, by: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[axis] += by;
    q
}

fn first_derivative<F>(f: &F, p: &[f64], axis: usize, h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let s = |k: f64| f(&shifted(p, axis, k * h));
    (s(-2.0) - s(2.0) + (s(1.0) - s(-1.0)) * 8.0) / (12.0 * h)
}

fn second_derivative<F>(f: &F, p: &[f64], a: usize, b: usize, h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    if a == b {
        let s = |k: f64| f(&shifted(p, a, k * h));
        return ((s(1.0) + s(-1.0)) * 16.0 - s(2.0) - s(-2.0) - f(p) * 30.0) / (12.0 * h * h);
    }
    let inner = |q: &[f64]| first_derivative(f, q, b, h);
    first_derivative(&inner, p, a, h)
}

fn curvature_at_step<F>(metric: &F, p: &[f64], h: f64) -> Result<NumericCurvature, GravityError>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let d = p.len();
    let g = metric(p);
    if g.nrows() != d || g.ncols() != d {
        return Err(GravityError::DimensionMismatch { expected: d, got: g.nrows() });
    }
    let ginv = g.clone().try_inverse().ok_or(GravityError::Singular)?;
    let dg: Vec<DMatrix<f64>> = (0..d).map(|s| first_derivative(metric, p, s, h)).collect();
    let mut ddg = vec![DMatrix::zeros(d, d); d * d];
    for a in 0..d {
        for b in a..d {
            let m = second_derivative(metric, p, a, b, h);
            ddg[a * d + b] = m.clone();
            ddg[b * d + a] = m;
        }
    }
    let dginv: Vec<DMatrix<f64>> = dg.iter().map(|m| -(&ginv * m * &ginv)).collect();

    // Γ_{κμν} (lowered) and its derivatives
    let lowered = |mu: usize, nu: usize, kappa: usize| {
        0.5 * (dg[mu][(nu, kappa)] + dg[nu][(mu, kappa)] - dg[kappa][(mu, nu)])
    };
    let lowered_d = |s: usize, mu: usize, nu: usize, kappa: usize| {
        0.5 * (ddg[s * d + mu][(nu, kappa)] + ddg[s * d + nu][(mu, kappa)] - ddg[s * d + kappa][(mu, nu)])
    };
    let idx = |l: usize, m: usize, n: usize| (l * d + m) * d + n;
    let mut gamma = vec![0.0; d * d * d];
    let mut dgamma = vec![0.0; d * d * d * d];
    for l in 0..d {
        for m in 0..d {
            for n in 0..d {
                gamma[idx(l, m, n)] = (0..d).map(|k| ginv[(l, k)] * lowered(m, n, k)).sum();
                for s in 0..d {
                    dgamma[idx(l, m, n) * d + s] = (0..d)
                        .map(|k| dginv[s][(l, k)] * lowered(m, n, k) + ginv[(l, k)] * lowered_d(s, m, n, k))
                        .sum();
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(d, d, |m, n| {
        let mut r = 0.0;
        for l in 0..d {
            r += dgamma[idx(l, m, n) * d + l] - dgamma[idx(l, m, l) * d + n];
            for s in 0..d {
                r += gamma[idx(l, l, s)] * gamma[idx(s, m, n)] - gamma[idx(l, n, s)] * gamma[idx(s, m, l)];
            }
        }
        r
    });
    let scalar = (&ginv * &ricci).trace();
    let einstein = &ricci - &g * (0.5 * scalar);
    Ok(NumericCurvature { christoffel: gamma, ricci, scalar, einstein, richardson_gap: 0.0 })
}

/// Einstein tensor at `point` from samples of `metric`, with step `h`.
pub fn numeric_curvature_oracle<F>(metric: F, point: &[f64], h: f64) -> Result<NumericCurvature, GravityError>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(GravityError::BadStep(h));
    }
    let mut fine = curvature_at_step(&metric, point, h)?;
    let coarse = curvature_at_step(&metric, point, 2.0 * h)?;
    let gap = (&fine.einstein - &coarse.einstein).amax();
    fine.richardson_gap = gap;
    if !gap.is_finite() || gap > RICHARDSON_TOLERANCE * fine.einstein.amax().max(1.0) {
        return Err(GravityError::StepRejected { gap });
    }
    Ok(fine)
}

/// `max|A − B| / max(max|B|, floor)`.
pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).amax() / b.amax().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minkowski_is_flat() {
        let eta = |_: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]));
        let c = numeric_curvature_oracle(eta, &[0.3, 0.1, -0.2, 0.5], 1e-3).unwrap();
        assert!(c.einstein.amax() < 1e-10);
        assert!(c.christoffel.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn matter_dominated_friedmann() {
        let g = |x: &[f64]| {
            let a2 = x[0].powf(4.0 / 3.0);
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -a2, -a2, -a2]))
        };
        let c = numeric_curvature_oracle(g, &[1.0, 0.0, 0.0, 0.0], 1e-3).unwrap();
        assert_relative_eq!(c.einstein[(0, 0)], 4.0 / 3.0, epsilon = 1e-6);
        // Γ⁰_ij = aȧ δ_ij and Γ^i_0j = (ȧ/a) δ
        assert_relative_eq!(c.gamma(0, 1, 1), 2.0 / 3.0, epsilon = 1e-8);
        assert_relative_eq!(c.gamma(1, 0, 1), 2.0 / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn huge_step_rejected() {
        let g = |x: &[f64]| {
            let s = -(5.0 * x[0]).exp();
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, s, s, s]))
        };
        let p = [0.0; 4];
        assert!(matches!(numeric_curvature_oracle(g, &p, 0.5), Err(GravityError::StepRejected { .. })));
        assert_eq!(numeric_curvature_oracle(g, &p, 0.0).unwrap_err(), GravityError::BadStep(0.0));
        let ok = numeric_curvature_oracle(g, &p, 1e-3).unwrap();
        assert_relative_eq!(ok.einstein[(0, 0)], 18.75, epsilon = 1e-6);
    }
}
