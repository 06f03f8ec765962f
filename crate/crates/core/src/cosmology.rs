//! Dust universe with a deformation-induced curvature-like term.
//!
//! The scale factor obeys `ȧ² = C/a + Θ²`. It is integrated as the second
//! order system `ä = −C/(2a²)` so the energy constraint is a genuine check on
//! the numerics rather than an identity; every accepted step must keep
//! `|ȧ² − C/a − Θ²| / (C/a + Θ²)` below [`CONSTRAINT_TOLERANCE`].

use std::f64::consts::PI;

use thiserror::Error;

pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// Fraction of the time span covered by the series when starting at `a = 0`.
const BOOT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CosmologyError {
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("initial velocity would be imaginary: C/a0 + Θ² = {0}")]
    ImaginaryVelocity(f64),
    #[error("starting from a0 = 0 needs C > 0")]
    SingularStart,
    #[error("empty or reversed time span [{start}, {end}]")]
    BadSpan { start: f64, end: f64 },
    #[error("non-finite parameter")]
    NonFinite,
    #[error("need at least two output samples")]
    TooFewSamples,
    #[error("constraint drift {drift:e} at t = {t} exceeds tolerance")]
    ConstraintViolation { t: f64, drift: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosmologyParams {
    pub theta: f64,
    /// `C = (8/3)πC′`.
    pub c: f64,
    pub a0: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Number of uniformly spaced output samples, endpoints included.
    pub samples: usize,
}

impl CosmologyParams {
    pub fn new(theta: f64, c: f64, a0: f64, t_end: f64) -> Self {
        Self { theta, c, a0, t_start: 0.0, t_end, rtol: 1e-11, atol: 1e-13, samples: 201 }
    }

    /// `C′ = 3C/(8π)`.
    pub fn c_prime(&self) -> f64 {
        3.0 * self.c / (8.0 * PI)
    }

    pub fn validate(&self) -> Result<(), CosmologyError> {
        let all = [self.theta, self.c, self.a0, self.t_start, self.t_end, self.rtol, self.atol];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CosmologyError::NonFinite);
        }
        if self.t_end <= self.t_start {
            return Err(CosmologyError::BadSpan { start: self.t_start, end: self.t_end });
        }
        if self.samples < 2 {
            return Err(CosmologyError::TooFewSamples);
        }
        if self.a0 < 0.0 {
            return Err(CosmologyError::NonPositiveScale(self.a0));
        }
        if self.a0 == 0.0 {
            if self.c <= 0.0 {
                return Err(CosmologyError::SingularStart);
            }
            return Ok(());
        }
        let v2 = self.c / self.a0 + self.theta * self.theta;
        if v2 <= 0.0 {
            return Err(CosmologyError::ImaginaryVelocity(v2));
        }
        Ok(())
    }
}

/// Samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub adot: Vec<f64>,
    pub rho: Vec<f64>,
    /// Largest relative constraint drift over all accepted steps.
    pub max_constraint_drift: f64,
    pub accepted_steps: usize,
    /// Indices of samples where ρ < 0.
    pub negative_density: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// `ρ = ((3/8π)Θ²a + C′)/a³`.
pub fn rho_of_a(a: f64, theta: f64, c_prime: f64) -> Result<f64, CosmologyError> {
    if !(a > 0.0) {
        return Err(CosmologyError::NonPositiveScale(a));
    }
    Ok((3.0 / (8.0 * PI) * theta * theta * a + c_prime) / (a * a * a))
}

fn constraint_drift(a: f64, v: f64, c: f64, theta2: f64) -> f64 {
    let target = c / a + theta2;
    (v * v - target).abs() / target.abs()
}

/// Time elapsed since `a = 0` when the scale factor reaches `a`,
/// `t(a) = Σ_k binom(−½,k)(Θ²/C)^k a^{k+3/2} / ((k+3/2)√C)`.
/// Converges for `Θ²a < C`.
pub fn bang_time(a: f64, theta: f64, c: f64) -> f64 {
    let x = theta * theta / c;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = f64::from(k);
        let term = binom * x.powi(k) * a.powf(kf + 1.5) / (kf + 1.5);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        binom *= (-0.5 - kf) / (kf + 1.0);
    }
    sum / c.sqrt()
}

/// Inverse of [`bang_time`] by bisection on the monotone series.
fn scale_at_bang_time(t: f64, theta: f64, c: f64, a_max: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, a_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bang_time(mid, theta, c) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are unused
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(f: &impl Fn(&State) -> State, y: &State, h: f64) -> (State, State) {
    let k1 = f(y);
    let k2 = f(&axpy(y, &[(A21, &k1)], h));
    let k3 = f(&axpy(y, &[(A31, &k1), (A32, &k2)], h));
    let k4 = f(&axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(&axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(&axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    let y5 = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = f(&y5);
    let err = axpy(&[0.0, 0.0], &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], h);
    (y5, err)
}

/// Integrate the expanding branch and sample it on a uniform grid.
pub fn integrate(params: &CosmologyParams) -> Result<Trajectory, CosmologyError> {
    params.validate()?;
    let (c, theta) = (params.c, params.theta);
    let theta2 = theta * theta;
    let c_prime = params.c_prime();
    let rhs = |y: &State| [y[1], -c / (2.0 * y[0] * y[0])];
    let span = params.t_end - params.t_start;
    let n = params.samples;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { params.t_end } else { params.t_start + span * i as f64 / (n - 1) as f64 })
        .collect();

    let mut traj = Trajectory::default();
    let push = |traj: &mut Trajectory, t: f64, a: f64, v: f64| -> Result<(), CosmologyError> {
        let rho = rho_of_a(a, theta, c_prime)?;
        if rho < 0.0 {
            traj.negative_density.push(traj.t.len());
        }
        traj.t.push(t);
        traj.a.push(a);
        traj.adot.push(v);
        traj.rho.push(rho);
        Ok(())
    };

    // starting point, bootstrapped off the singularity when a0 = 0
    let (mut t, mut y) = if params.a0 > 0.0 {
        (params.t_start, [params.a0, (c / params.a0 + theta2).sqrt()])
    } else {
        let mut a_boot = (1.5 * c.sqrt() * BOOT_FRACTION * span).powf(2.0 / 3.0);
        if theta2 > 0.0 {
            a_boot = a_boot.min(1e-3 * c / theta2);
        }
        let t_boot = params.t_start + bang_time(a_boot, theta, c);
        (t_boot, [a_boot, (c / a_boot + theta2).sqrt()])
    };

    let mut next = 0;
    // grid points before the bootstrap come straight from the series
    while next < n && grid[next] < t {
        let dt = grid[next] - params.t_start;
        if dt <= 0.0 {
            // a = 0 exactly: density undefined, record the limit values
            traj.t.push(grid[next]);
            traj.a.push(0.0);
            traj.adot.push(f64::INFINITY);
            traj.rho.push(f64::INFINITY);
        } else {
            let a = scale_at_bang_time(dt, theta, c, y[0]);
            push(&mut traj, grid[next], a, (c / a + theta2).sqrt())?;
        }
        next += 1;
    }

    let mut h = (1e-3 * span).min(1e-2 * y[0] / y[1].max(1e-300));
    let h_min = 1e-14 * span.max(1.0);
    let mut max_drift = constraint_drift(y[0], y[1], c, theta2);
    let mut accepted = 0usize;
    while next < n {
        if (grid[next] - t).abs() <= 1e-14 * t.abs().max(1.0) {
            push(&mut traj, grid[next], y[0], y[1])?;
            next += 1;
            continue;
        }
        let step = h.min(grid[next] - t);
        let (y_new, err) = dopri_step(&rhs, &y, step);
        let scale = |i: usize| params.atol + params.rtol * y[i].abs().max(y_new[i].abs());
        let err_norm = (((err[0] / scale(0)).powi(2) + (err[1] / scale(1)).powi(2)) / 2.0).sqrt();
        let valid = y_new[0] > 0.0 && y_new.iter().all(|v| v.is_finite());
        let drift = if valid { constraint_drift(y_new[0], y_new[1], c, theta2) } else { f64::INFINITY };
        if valid && err_norm <= 1.0 && drift <= CONSTRAINT_TOLERANCE {
            t += step;
            y = y_new;
            accepted += 1;
            max_drift = max_drift.max(drift);
            let grow = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
            // a clipped step says nothing about the natural step size
            if step == h {
                h *= grow;
            }
        } else {
            if step < h_min {
                return Err(if drift > CONSTRAINT_TOLERANCE && valid {
                    CosmologyError::ConstraintViolation { t, drift }
                } else {
                    CosmologyError::StepUnderflow { t }
                });
            }
            let shrink = if valid && err_norm > 1.0 { (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.5) } else { 0.5 };
            h = step * shrink;
        }
    }
    traj.max_constraint_drift = max_drift;
    traj.accepted_steps = accepted;
    Ok(traj)
}

/// Largest relative residuals of the reduced Friedmann equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedmannResiduals {
    /// `3ȧ²/a² = 8πρ`.
    pub energy: f64,
    /// `3ä/a = −4πρ + (3/2)Θ²/a²`.
    pub acceleration: f64,
    /// `d/dt(ρa³) = (3/8π)Θ²ȧ` with ρ from the energy equation.
    pub continuity: f64,
    /// Relative constraint drift over the samples.
    pub constraint: f64,
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Residuals over every sample with `a > 0`; `ä` comes from differentiating
/// the constraint, `ä = −C/(2a²)`.
pub fn friedmann_residuals(traj: &Trajectory, theta: f64, c: f64) -> FriedmannResiduals {
    let theta2 = theta * theta;
    let mut out = FriedmannResiduals { energy: 0.0, acceleration: 0.0, continuity: 0.0, constraint: 0.0 };
    for i in 0..traj.len() {
        let (a, v, rho) = (traj.a[i], traj.adot[i], traj.rho[i]);
        if !(a > 0.0) || !v.is_finite() {
            continue;
        }
        let acc = -c / (2.0 * a * a);
        out.energy = out.energy.max(rel(3.0 * v * v / (a * a), 8.0 * PI * rho));
        out.acceleration = out.acceleration.max(rel(3.0 * acc / a, -4.0 * PI * rho + 1.5 * theta2 / (a * a)));
        // ρa³ = 3ȧ²a/(8π) ⇒ d/dt = (3/8π)ȧ(2aä + ȧ²)
        let k = 3.0 / (8.0 * PI);
        let lhs = k * v * (2.0 * a * acc + v * v);
        let scale = k * v.abs() * (2.0 * a * acc.abs() + v * v).max(theta2);
        out.continuity = out.continuity.max((lhs - k * theta2 * v).abs() / scale);
        out.constraint = out.constraint.max(constraint_drift(a, v, c, theta2));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_examples() {
        assert_relative_eq!(rho_of_a(2.0, 0.0, 1.0).unwrap(), 0.125);
        assert_relative_eq!(rho_of_a(1.0, (8.0 * PI / 3.0).sqrt(), 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(rho_of_a(0.0, 1.0, 1.0).unwrap_err(), CosmologyError::NonPositiveScale(0.0));
    }

    #[test]
    fn bang_time_series_matches_quadrature() {
        // dust: t = a^{3/2} / (1.5 √C)
        assert_relative_eq!(bang_time(0.04, 0.0, 4.0), 0.04_f64.powf(1.5) / 3.0, epsilon = 1e-18);
        // with Θ: compare against a fine midpoint rule of √a/√(C + Θ²a)
        let (theta, c, a) = (0.7, 2.0, 0.3);
        let n = 200_000;
        let da = a / n as f64;
        let quad: f64 = (0..n)
            .map(|k| {
                let x = (k as f64 + 0.5) * da;
                x.sqrt() / (c + theta * theta * x).sqrt()
            })
            .sum::<f64>()
            * da;
        assert_relative_eq!(bang_time(a, theta, c), quad, max_relative = 1e-8);
    }

    #[test]
    fn einstein_de_sitter() {
        let c = 2.0;
        let mut p = CosmologyParams::new(0.0, c, 0.0, 10.0);
        p.samples = 101;
        let traj = integrate(&p).unwrap();
        for (t, a) in traj.t.iter().zip(&traj.a) {
            if *t >= 0.1 {
                let exact = (1.5 * c.sqrt() * t).powf(2.0 / 3.0);
                assert_relative_eq!(*a, exact, max_relative = 1e-6);
            }
        }
        assert!(traj.max_constraint_drift <= CONSTRAINT_TOLERANCE);
    }

    #[test]
    fn coasting_without_matter() {
        let traj = integrate(&CosmologyParams::new(0.5, 0.0, 1.0, 20.0)).unwrap();
        for (t, a) in traj.t.iter().zip(&traj.a) {
            assert_relative_eq!(*a, 1.0 + 0.5 * t, max_relative = 1e-12);
        }
    }

    #[test]
    fn late_time_slope() {
        let (theta, c) = (1.0, 1.0);
        let traj = integrate(&CosmologyParams::new(theta, c, 1.0, 1.0e4)).unwrap();
        let slope = *traj.adot.last().unwrap();
        assert!((slope - theta).abs() <= 1e-4, "{slope}");
        assert!(traj.a.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn residuals_small_along_trajectory() {
        for theta in [0.0, 0.3] {
            let traj = integrate(&CosmologyParams::new(theta, 1.5, 0.5, 5.0)).unwrap();
            let r = friedmann_residuals(&traj, theta, 1.5);
            assert!(r.energy <= 1e-8, "{r:?}");
            assert!(r.acceleration <= 1e-8, "{r:?}");
            assert!(r.continuity <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn sign_of_theta_irrelevant() {
        let plus = integrate(&CosmologyParams::new(0.4, 1.0, 1.0, 3.0)).unwrap();
        let minus = integrate(&CosmologyParams::new(-0.4, 1.0, 1.0, 3.0)).unwrap();
        assert_eq!(plus, minus);
    }

    #[test]
    fn negative_constant_keeps_density_positive() {
        // 8πρ = 3ȧ²/a², so a real velocity already forces ρ > 0
        let traj = integrate(&CosmologyParams::new(1.0, -0.3, 0.4, 2.0)).unwrap();
        assert!(traj.negative_density.is_empty());
        assert!(traj.rho.iter().all(|r| *r > 0.0));
        assert!(matches!(
            integrate(&CosmologyParams::new(0.1, -1.0, 1.0, 2.0)),
            Err(CosmologyError::ImaginaryVelocity(_))
        ));
        assert_eq!(integrate(&CosmologyParams::new(0.1, -1.0, 0.0, 2.0)).unwrap_err(), CosmologyError::SingularStart);
    }
}
