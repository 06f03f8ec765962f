//! Exact curvature for diagonal metrics whose entries are single terms of the
//! [`terms`] grammar, plus a finite-difference oracle to check it against.
//!
//! Conventions: signature (+,−,…,−), `Γ^λ_{μν} = ½g^{λκ}(∂_μg_{νκ} + ∂_νg_{μκ} − ∂_κg_{μν})`,
//! `R_{μν} = ∂_λΓ^λ_{μν} − ∂_νΓ^λ_{μλ} + Γ^λ_{λσ}Γ^σ_{μν} − Γ^λ_{νσ}Γ^σ_{μλ}`,
//! `G_{μν} = R_{μν} − ½R g_{μν}`.

mod numeric;
mod scale;
mod terms;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::deformation::DeformedMetric;
use crate::scalar::{exact, ratio, Rational};
use crate::spacetimes::{DeformedFRWMetric, FRWMetric};

pub use numeric::{numeric_curvature_oracle, relative_error, NumericCurvature, RICHARDSON_TOLERANCE};
pub use scale::ScaleFactorFn;
pub use terms::{Jet, MetricFunctionTerm, TermKey, TermSum};

/// Einstein's constant in the units the field equations are written in.
pub const DEFAULT_KAPPA: f64 = 8.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GravityError {
    #[error("differentiating the third derivative of a(t) leaves the function grammar")]
    GrammarOverflow,
    #[error("metric entry {index} is not a single term and cannot be inverted")]
    NotSingleTerm { index: usize },
    #[error("singular metric")]
    Singular,
    #[error("non-finite metric parameter")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("finite-difference step {0} must be positive and finite")]
    BadStep(f64),
    #[error("Richardson gap {gap:e} too large; step size unsuitable")]
    StepRejected { gap: f64 },
    #[error("cannot parse scale factor '{0}'")]
    BadScaleFactor(String),
    #[error("kappa must be positive")]
    BadKappa,
}

fn exact_checked(x: f64) -> Result<Rational, GravityError> {
    if x.is_finite() {
        Ok(exact(x))
    } else {
        Err(GravityError::NonFinite)
    }
}

/// Diagonal metric with one grammar term per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    entries: Vec<MetricFunctionTerm>,
}

impl DiagonalMetric {
    pub fn new(entries: Vec<MetricFunctionTerm>) -> Result<Self, GravityError> {
        let d = entries.len();
        if let Some(bad) = entries.iter().find(|t| t.dim() != d) {
            return Err(GravityError::DimensionMismatch { expected: d, got: bad.dim() });
        }
        Ok(Self { entries })
    }

    pub fn from_sums(entries: &[TermSum]) -> Result<Self, GravityError> {
        let singles = entries
            .iter()
            .enumerate()
            .map(|(index, s)| s.as_single().ok_or(GravityError::NotSingleTerm { index }))
            .collect::<Result<_, _>>()?;
        Self::new(singles)
    }

    /// `s_μ exp(L_μ·x)` with the exponents converted exactly.
    pub fn from_deformed(g: &DeformedMetric) -> Result<Self, GravityError> {
        let d = g.dim();
        let mut entries = Vec::with_capacity(d);
        for (s, l) in g.signature.iter().zip(&g.exponents) {
            let mut key = TermKey::unit(d);
            for (slot, v) in key.exp_base.iter_mut().zip(&l.0) {
                *slot = exact_checked(*v)?;
            }
            entries.push(MetricFunctionTerm { coeff: ratio(i64::from(*s), 1), key });
        }
        Self::new(entries)
    }

    pub fn from_frw(g: &FRWMetric) -> Result<Self, GravityError> {
        Self::from_deformed(&g.to_deformed_metric())
    }

    /// `g₀₀ = e^{−2βb·x}`, `g_ii = −a²` with `a` the total scale factor and β
    /// the formal marker for powers of b.
    pub fn from_deformed_frw(g: &DeformedFRWMetric) -> Result<Self, GravityError> {
        let d = g.dim();
        let mut time = TermKey::unit(d);
        for (i, b) in g.b.iter().enumerate() {
            time.exp_beta[i + 1] = exact_checked(-2.0 * b)?;
        }
        let mut entries = vec![MetricFunctionTerm { coeff: ratio(1, 1), key: time }];
        for _ in 1..d {
            let mut key = TermKey::unit(d);
            key.powers[0] = 2;
            entries.push(MetricFunctionTerm { coeff: ratio(-1, 1), key });
        }
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, mu: usize) -> &MetricFunctionTerm {
        &self.entries[mu]
    }

    pub fn entry_sum(&self, mu: usize) -> TermSum {
        TermSum::from_term(self.entries[mu].clone())
    }

    pub fn matrix_at(&self, x: &[f64], jet: &Jet) -> DMatrix<f64> {
        let diag: Vec<f64> = (0..self.dim()).map(|mu| self.entry_sum(mu).eval(x, jet)).collect();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
    }

    /// Metric sampler that uses only `a(t)` itself, never its derivatives.
    pub fn sampler<'a>(&'a self, scale: &'a ScaleFactorFn) -> impl Fn(&[f64]) -> DMatrix<f64> + 'a {
        move |x: &[f64]| {
            let jet = [scale.value(x[0]), 0.0, 0.0, 0.0];
            self.matrix_at(x, &jet)
        }
    }
}

/// Symbolic curvature of a diagonal metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub metric: DiagonalMetric,
    christoffel: Vec<TermSum>,
    ricci: Vec<TermSum>,
    pub scalar: TermSum,
    einstein: Vec<TermSum>,
}

impl CurvatureReport {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn gamma(&self, lambda: usize, mu: usize, nu: usize) -> &TermSum {
        let d = self.dim();
        &self.christoffel[(lambda * d + mu) * d + nu]
    }

    pub fn ricci(&self, mu: usize, nu: usize) -> &TermSum {
        &self.ricci[mu * self.dim() + nu]
    }

    pub fn einstein(&self, mu: usize, nu: usize) -> &TermSum {
        &self.einstein[mu * self.dim() + nu]
    }

    pub fn einstein_at(&self, x: &[f64], jet: &Jet) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |m, n| self.einstein(m, n).eval(x, jet))
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|m| (0..d).all(|n| self.einstein(m, n) == self.einstein(n, m)))
    }

    /// `∇_μ G^{μν}` for each ν, computed exactly.
    pub fn divergence(&self) -> Result<Vec<TermSum>, GravityError> {
        let d = self.dim();
        let inv: Vec<MetricFunctionTerm> =
            self.metric.entries.iter().map(MetricFunctionTerm::inverse).collect::<Result<_, _>>()?;
        let raised = |m: usize, n: usize| self.einstein(m, n).mul_term(&inv[m]).mul_term(&inv[n]);
        let mut out = Vec::with_capacity(d);
        for nu in 0..d {
            let mut acc = TermSum::zero(d);
            for mu in 0..d {
                acc = acc.add(&raised(mu, nu).diff(mu)?);
                for lambda in 0..d {
                    acc = acc.add(&self.gamma(mu, mu, lambda).mul(&raised(lambda, nu)));
                    acc = acc.add(&self.gamma(nu, mu, lambda).mul(&raised(mu, lambda)));
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// `Γ^λ_{μν}` laid out as `[λ][μ][ν]`.
pub fn christoffel(g: &DiagonalMetric) -> Result<Vec<TermSum>, GravityError> {
    let d = g.dim();
    let half = ratio(1, 2);
    let inv: Vec<MetricFunctionTerm> =
        g.entries.iter().map(MetricFunctionTerm::inverse).collect::<Result<_, _>>()?;
    // dg[σ][μ] = ∂_σ g_μμ
    let mut dg = Vec::with_capacity(d * d);
    for sigma in 0..d {
        for mu in 0..d {
            dg.push(g.entry_sum(mu).diff(sigma)?);
        }
    }
    let dgf = |sigma: usize, mu: usize| &dg[sigma * d + mu];
    let mut out = Vec::with_capacity(d * d * d);
    for l in 0..d {
        for m in 0..d {
            for n in 0..d {
                let mut s = TermSum::zero(d);
                if n == l {
                    s = s.add(dgf(m, l));
                }
                if m == l {
                    s = s.add(dgf(n, l));
                }
                if m == n {
                    s = s.sub(dgf(l, m));
                }
                out.push(s.mul_term(&inv[l]).scale(&half));
            }
        }
    }
    Ok(out)
}

pub fn einstein_tensor(g: &DiagonalMetric) -> Result<CurvatureReport, GravityError> {
    let d = g.dim();
    let gamma = christoffel(g)?;
    let gm = |l: usize, m: usize, n: usize| &gamma[(l * d + m) * d + n];
    let mut ricci = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            let mut r = TermSum::zero(d);
            for l in 0..d {
                r = r.add(&gm(l, m, n).diff(l)?);
                r = r.sub(&gm(l, m, l).diff(n)?);
                for s in 0..d {
                    r = r.add(&gm(l, l, s).mul(gm(s, m, n)));
                    r = r.sub(&gm(l, n, s).mul(gm(s, m, l)));
                }
            }
            ricci.push(r);
        }
    }
    let mut scalar = TermSum::zero(d);
    for mu in 0..d {
        scalar = scalar.add(&ricci[mu * d + mu].mul_term(&g.entry(mu).inverse()?));
    }
    let half_r = scalar.scale(&ratio(1, 2));
    let mut einstein = ricci.clone();
    for mu in 0..d {
        let k = mu * d + mu;
        einstein[k] = einstein[k].sub(&half_r.mul_term(g.entry(mu)));
    }
    Ok(CurvatureReport { metric: g.clone(), christoffel: gamma, ricci, scalar, einstein })
}

/// `max_ν |∇_μ G^{μν}|` at `x`, using the symbolic tensor and finite
/// differences for the partial derivatives.
pub fn bianchi_residual(
    report: &CurvatureReport,
    scale: &ScaleFactorFn,
    x: &[f64],
    h: f64,
) -> Result<f64, GravityError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GravityError::BadStep(h));
    }
    let d = report.dim();
    let raised_at = |p: &[f64]| {
        let jet = scale.jet(p[0]);
        let ginv = report.metric.matrix_at(p, &jet).map(|v| 1.0 / v);
        let g = report.einstein_at(p, &jet);
        DMatrix::from_fn(d, d, |m, n| ginv[(m, m)] * g[(m, n)] * ginv[(n, n)])
    };
    let jet = scale.jet(x[0]);
    let up = raised_at(x);
    let mut worst: f64 = 0.0;
    for nu in 0..d {
        let mut div = 0.0;
        for mu in 0..d {
            let at = |k: f64| {
                let mut p = x.to_vec();
                p[mu] += k * h;
                raised_at(&p)[(mu, nu)]
            };
            div += (at(-2.0) - at(2.0) + 8.0 * (at(1.0) - at(-1.0))) / (12.0 * h);
            for l in 0..d {
                div += report.gamma(mu, mu, l).eval(x, &jet) * up[(l, nu)];
                div += report.gamma(nu, mu, l).eval(x, &jet) * up[(mu, l)];
            }
        }
        worst = worst.max(div.abs());
    }
    Ok(worst)
}

/// Relative disagreement between the symbolic Einstein tensor and the
/// finite-difference oracle at `x`.
pub fn oracle_disagreement(
    report: &CurvatureReport,
    scale: &ScaleFactorFn,
    x: &[f64],
    h: f64,
) -> Result<f64, GravityError> {
    let numeric = numeric_curvature_oracle(report.metric.sampler(scale), x, h)?;
    let symbolic = report.einstein_at(x, &scale.jet(x[0]));
    Ok(relative_error(&numeric.einstein, &symbolic, 1.0))
}

/// Dust-like perfect fluid with constant density and pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectFluid {
    pub density: f64,
    pub pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEquationSetup {
    pub lambda: f64,
    pub kappa: f64,
}

impl Default for FieldEquationSetup {
    fn default() -> Self {
        Self { lambda: 0.0, kappa: DEFAULT_KAPPA }
    }
}

/// A residual as an exact expression and its lowest order in b.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub expr: TermSum,
    /// `None` when the residual vanishes identically.
    pub leading_order: Option<i32>,
}

impl ResidualReport {
    fn new(expr: TermSum) -> Self {
        let leading_order = expr.leading_beta_order();
        Self { expr, leading_order }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.expr.is_zero()
    }

    pub fn sample(&self, x: &[f64], jet: &Jet) -> f64 {
        self.expr.eval(x, jet)
    }
}

/// Computed geometry minus the published left-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldEquationResiduals {
    /// `(G₀₀ + Λg₀₀) − (3ȧ²/a² + Λg₀₀)`.
    pub energy: ResidualReport,
    /// `G_{0i} − (−2(ȧ/a)b_i)` for each spatial i.
    pub momentum: Vec<ResidualReport>,
    /// `−(g₀₀/a²)·mean_i(G_ii + Λg_ii) − (2ä/a + ȧ²/a² + (2/3)b²g₀₀ + Λg₀₀)`.
    pub pressure: ResidualReport,
    /// Flux the matter must carry: `T_{0i} = G_{0i}/κ`.
    pub required_flux: Vec<TermSum>,
    pub curvature: CurvatureReport,
    pub setup: FieldEquationSetup,
}

impl FieldEquationResiduals {
    /// `G + Λg − κT` at `x` for a perfect fluid at rest, `T_{μν} = (ρ+P)u_μu_ν − Pg_{μν}`
    /// with `g^{00}u₀u₀ = 1`; the `0i` components use the required flux.
    pub fn fluid_residual(&self, fluid: &PerfectFluid, x: &[f64], jet: &Jet) -> DMatrix<f64> {
        let d = self.curvature.dim();
        let g = self.curvature.metric.matrix_at(x, jet);
        let gt = self.curvature.einstein_at(x, jet);
        let (lambda, kappa) = (self.setup.lambda, self.setup.kappa);
        DMatrix::from_fn(d, d, |m, n| {
            let t = match (m, n) {
                (0, 0) => fluid.density * g[(0, 0)],
                (0, i) | (i, 0) => self.required_flux[i - 1].eval(x, jet),
                (i, j) if i == j => -fluid.pressure * g[(i, i)],
                _ => 0.0,
            };
            gt[(m, n)] + lambda * g[(m, n)] - kappa * t
        })
    }
}

fn monomial(d: usize, coeff: Rational, beta: i32, powers: [i32; 4]) -> TermSum {
    let mut key = TermKey::unit(d);
    key.beta = beta;
    key.powers = powers;
    TermSum::from_term(MetricFunctionTerm { coeff, key })
}

/// Compare the Einstein tensor of a deformed FRW metric with the published
/// field equations.
pub fn verify_field_equations(
    g: &DeformedFRWMetric,
    setup: &FieldEquationSetup,
) -> Result<FieldEquationResiduals, GravityError> {
    if !(setup.kappa > 0.0) {
        return Err(GravityError::BadKappa);
    }
    let metric = DiagonalMetric::from_deformed_frw(g)?;
    let d = metric.dim();
    let n = d - 1;
    let report = einstein_tensor(&metric)?;
    let lambda = exact_checked(setup.lambda)?;
    let kappa = exact_checked(setup.kappa)?;
    let g00 = metric.entry_sum(0);
    let lambda_g00 = g00.scale(&lambda);

    let friedmann = monomial(d, ratio(3, 1), 0, [-2, 2, 0, 0]);
    let energy = report.einstein(0, 0).add(&lambda_g00).sub(&friedmann.add(&lambda_g00));

    let mut momentum = Vec::with_capacity(n);
    let mut required_flux = Vec::with_capacity(n);
    for i in 1..d {
        let b = exact_checked(g.b[i - 1])?;
        let paper = monomial(d, ratio(-2, 1) * b, 1, [-1, 1, 0, 0]);
        momentum.push(ResidualReport::new(report.einstein(0, i).sub(&paper)));
        required_flux.push(report.einstein(0, i).scale(&kappa.recip()));
    }

    let mut spatial = TermSum::zero(d);
    for i in 1..d {
        spatial = spatial.add(report.einstein(i, i)).add(&metric.entry_sum(i).scale(&lambda));
    }
    let mean = spatial.scale(&ratio(1, n as i64));
    let inv_a2 = monomial(d, ratio(-1, 1), 0, [-2, 0, 0, 0]);
    let computed = mean.mul(&inv_a2).mul(&g00);
    let b2: Rational = g.b.iter().map(|v| exact(*v) * exact(*v)).sum();
    let mut b2_g00 = g00.scale(&(ratio(2, 3) * b2));
    b2_g00 = b2_g00.mul(&monomial(d, ratio(1, 1), 2, [0; 4]));
    let paper = monomial(d, ratio(2, 1), 0, [-1, 0, 1, 0])
        .add(&monomial(d, ratio(1, 1), 0, [-2, 2, 0, 0]))
        .add(&b2_g00)
        .add(&lambda_g00);
    let pressure = computed.sub(&paper);

    Ok(FieldEquationResiduals {
        energy: ResidualReport::new(energy),
        momentum,
        pressure: ResidualReport::new(pressure),
        required_flux,
        curvature: report,
        setup: *setup,
    })
}
