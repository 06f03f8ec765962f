//! Centrality of deformed conformally flat metrics under Moyal–Weyl
//! time–space noncommutativity.
//!
//! The metric components `η_νν·exp(−2a_ν(Θx)_ν)` are expanded as truncated
//! Taylor series with exact complex-rational coefficients. Because
//! `[x^μ, x^ν] = iΩ^{μν}` is central, `[x^μ, ·]` acts on any ordering of a
//! polynomial as the derivation `iΩ^{μν}∂_ν`, so the commutator is a
//! coefficient-wise operation on the series.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{make_diagonal, AlgebraError, DiagonalAlgebraSpec, StructureConstants};
use crate::deformation::DeformationMatrix;
use crate::scalar::{exact, Rational, Scalar};

/// Default truncation order of the metric series.
pub const DEFAULT_ORDER: u32 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CentralityError {
    #[error("dimension mismatch: algebra has d = {algebra}, deformation d = {deformation}, Ω has {omega} entries")]
    DimensionMismatch { algebra: usize, deformation: usize, omega: usize },
    #[error("Θ_{{{i}{j}}} = {value} is nonzero; only time–space deformations are supported")]
    SpaceSpaceEntry { i: usize, j: usize, value: f64 },
    #[error("Θ vanishes on all time–space entries; no finite Ω solves the condition")]
    Degenerate,
    #[error("non-finite Ω entry at index {0}")]
    NonFinite(usize),
    #[error("need at least one spatial dimension")]
    NoSpace,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Exact complex rational.
pub type ComplexRational = Complex<Rational>;

/// Time–space noncommutativity `[x⁰, x^j] = iΩ^{0j}`, held exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MoyalParams {
    omega: Vec<Rational>,
}

impl MoyalParams {
    /// `omega[j-1] = Ω^{0j}` for `j = 1..n`.
    pub fn new(omega: Vec<f64>) -> Result<Self, CentralityError> {
        if let Some(j) = omega.iter().position(|w| !w.is_finite()) {
            return Err(CentralityError::NonFinite(j + 1));
        }
        Self::from_exact(omega.into_iter().map(exact).collect())
    }

    pub fn from_exact(omega: Vec<Rational>) -> Result<Self, CentralityError> {
        if omega.is_empty() {
            return Err(CentralityError::NoSpace);
        }
        Ok(Self { omega })
    }

    /// `Ω^{0j} = ω` for every spatial `j`.
    pub fn uniform(omega: f64, spatial_dims: usize) -> Result<Self, CentralityError> {
        Self::new(vec![omega; spatial_dims])
    }

    pub fn time_space(&self) -> Vec<f64> {
        self.omega.iter().map(Scalar::to_f64).collect()
    }

    pub fn dim(&self) -> usize {
        self.omega.len() + 1
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        Self { omega: self.omega.iter().map(|w| w * s).collect() }
    }

    /// Exact `Ω^{μν}`; antisymmetric, zero off the time–space block.
    pub fn entry(&self, mu: usize, nu: usize) -> Rational {
        match (mu, nu) {
            (0, j) if j > 0 => self.omega[j - 1].clone(),
            (j, 0) if j > 0 => -self.omega[j - 1].clone(),
            _ => Rational::zero(),
        }
    }
}

/// Truncated power series in commuting placeholders for `x⁰ … x^{d−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpression {
    dim: usize,
    order: u32,
    coeffs: BTreeMap<Vec<u32>, ComplexRational>,
}

fn degree(index: &[u32]) -> u32 {
    index.iter().sum()
}

fn real(r: Rational) -> ComplexRational {
    Complex::new(r, Rational::zero())
}

fn modulus(c: &ComplexRational) -> f64 {
    Scalar::to_f64(&c.re).hypot(Scalar::to_f64(&c.im))
}

impl SeriesExpression {
    pub fn zero(dim: usize, order: u32) -> Self {
        Self { dim, order, coeffs: BTreeMap::new() }
    }

    /// `scale·exp(Σ_k form_k x^k)` up to total degree `order`.
    pub fn exp_linear(form: &[Rational], scale: ComplexRational, order: u32) -> Self {
        let dim = form.len();
        let active: Vec<usize> = (0..dim).filter(|&k| !form[k].is_zero()).collect();
        // powers[k][m] = form_k^m / m!
        let powers: Vec<Vec<Rational>> = active
            .iter()
            .map(|&k| {
                let mut row = vec![Rational::one()];
                for m in 1..=order {
                    let next = row[m as usize - 1].clone() * form[k].clone() / Rational::from_integer(m.into());
                    row.push(next);
                }
                row
            })
            .collect();
        let mut out = Self::zero(dim, order);
        let mut index = vec![0u32; dim];
        fill_exp(&active, &powers, 0, order, Rational::one(), &mut index, &scale, &mut out.coeffs);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficient(&self, index: &[u32]) -> ComplexRational {
        self.coeffs.get(index).cloned().unwrap_or_else(ComplexRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &ComplexRational)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Every stored coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Zero::is_zero)
    }

    fn insert(&mut self, index: Vec<u32>, c: ComplexRational) {
        if c.is_zero() || degree(&index) > self.order {
            return;
        }
        match self.coeffs.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Drop every term above `order`.
    pub fn truncate(&self, order: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|(k, _)| degree(k) <= order).map(|(k, v)| (k.clone(), v.clone())).collect();
        Self { dim: self.dim, order: order.min(self.order), coeffs }
    }

    pub fn scale(&self, s: &ComplexRational) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        for (k, v) in &self.coeffs {
            out.insert(k.clone(), v.clone() * s.clone());
        }
        out
    }

    /// Sum truncated at the smaller of the two orders.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.order.min(other.order));
        for (k, v) in self.coeffs.iter().chain(&other.coeffs) {
            out.insert(k.clone(), v.clone());
        }
        out
    }

    /// `∂_axis`; the result is exact up to `order − 1`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim, self.order.saturating_sub(1));
        for (k, v) in &self.coeffs {
            if k[axis] == 0 {
                continue;
            }
            let mut lowered = k.clone();
            lowered[axis] -= 1;
            out.insert(lowered, v.clone() * real(Rational::from_integer(k[axis].into())));
        }
        out
    }

    /// `max |c_α|` over each total degree `0..=order`.
    pub fn max_by_order(&self) -> Vec<f64> {
        let mut out = vec![0.0_f64; self.order as usize + 1];
        for (k, v) in &self.coeffs {
            let slot = &mut out[degree(k) as usize];
            *slot = slot.max(modulus(v));
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_exp(
    active: &[usize],
    powers: &[Vec<Rational>],
    slot: usize,
    budget: u32,
    acc: Rational,
    index: &mut Vec<u32>,
    scale: &ComplexRational,
    out: &mut BTreeMap<Vec<u32>, ComplexRational>,
) {
    if slot == active.len() {
        let c = scale.clone() * real(acc);
        if !c.is_zero() {
            out.insert(index.clone(), c);
        }
        return;
    }
    let axis = active[slot];
    for m in 0..=budget {
        index[axis] = m;
        let next = acc.clone() * powers[slot][m as usize].clone();
        fill_exp(active, powers, slot + 1, budget - m, next, index, scale, out);
    }
    index[axis] = 0;
}

impl fmt::Display for SeriesExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0 + O({})", self.order + 1);
        }
        for (n, (k, v)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({} + {}i)", Scalar::to_f64(&v.re), Scalar::to_f64(&v.im))?;
            for (axis, p) in k.iter().enumerate().filter(|(_, p)| **p > 0) {
                write!(f, "*x{axis}^{p}")?;
            }
        }
        write!(f, " + O({})", self.order + 1)
    }
}

/// `[x^μ, f] = iΩ^{μν}∂_ν f`, truncated at `order(f) − 1`.
pub fn moyal_commutator(mu: usize, f: &SeriesExpression, moyal: &MoyalParams) -> SeriesExpression {
    let mut out = SeriesExpression::zero(f.dim(), f.order().saturating_sub(1));
    for nu in 0..f.dim() {
        let w = if mu < moyal.dim() && nu < moyal.dim() { moyal.entry(mu, nu) } else { Rational::zero() };
        if w.is_zero() {
            continue;
        }
        out = out.add(&f.derivative(nu).scale(&Complex::new(Rational::zero(), w)));
    }
    out
}

/// One `(μ, ν, ρ)` component of
/// `[x^μ, g_νρ] + C^{μκ}_ν g_ρκ + C^{μκ}_ρ g_νκ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityComponent {
    pub mu: usize,
    pub nu: usize,
    pub rho: usize,
    /// Largest coefficient modulus per total degree.
    pub by_order: Vec<f64>,
    pub max: f64,
    /// Factor by which Ω would have to be rescaled to cancel the constant
    /// term; `None` when the commutator part has no constant term.
    pub required_scale: Option<f64>,
    pub residual: SeriesExpression,
}

impl CentralityComponent {
    pub fn is_exact_zero(&self) -> bool {
        self.residual.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityReport {
    pub order: u32,
    pub components: Vec<CentralityComponent>,
    pub max_residual: f64,
    /// Every coefficient of every component vanishes exactly.
    pub exact_zero: bool,
}

impl CentralityReport {
    pub fn component(&self, mu: usize, nu: usize, rho: usize) -> Option<&CentralityComponent> {
        self.components.iter().find(|c| (c.mu, c.nu, c.rho) == (mu, nu, rho))
    }

    /// Components with at least one nonzero coefficient.
    pub fn failing(&self) -> impl Iterator<Item = &CentralityComponent> {
        self.components.iter().filter(|c| !c.is_exact_zero())
    }

    /// Largest residual per total degree, over all components.
    pub fn by_order(&self) -> Vec<f64> {
        let mut out = vec![0.0_f64; self.order as usize];
        for c in &self.components {
            for (slot, v) in out.iter_mut().zip(&c.by_order) {
                *slot = slot.max(*v);
            }
        }
        out
    }
}

struct Setup {
    constants: StructureConstants<Rational>,
    metric: Vec<SeriesExpression>,
}

fn check_class(spec: &DiagonalAlgebraSpec<f64>, theta: &DeformationMatrix) -> Result<(), CentralityError> {
    let d = spec.dim();
    if theta.dim() != d {
        return Err(CentralityError::DimensionMismatch { algebra: d, deformation: theta.dim(), omega: d - 1 });
    }
    if d < 2 {
        return Err(CentralityError::NoSpace);
    }
    for i in 1..d {
        for j in 1..d {
            if i != j && theta.get(i, j) != 0.0 {
                return Err(CentralityError::SpaceSpaceEntry { i, j, value: theta.get(i, j) });
            }
        }
    }
    Ok(())
}

fn setup(spec: &DiagonalAlgebraSpec<f64>, theta: &DeformationMatrix, order: u32) -> Result<Setup, CentralityError> {
    check_class(spec, theta)?;
    let d = spec.dim();
    let exact_spec = DiagonalAlgebraSpec::new(spec.a().iter().map(|v| exact(*v)).collect())?;
    let constants = make_diagonal(&exact_spec);
    let metric = (0..d)
        .map(|nu| {
            let a = exact_spec.a()[nu].clone();
            let form: Vec<Rational> =
                (0..d).map(|k| Rational::from_integer((-2).into()) * a.clone() * exact(theta.get(nu, k))).collect();
            let eta = if nu == 0 { Rational::one() } else { -Rational::one() };
            SeriesExpression::exp_linear(&form, real(eta), order)
        })
        .collect();
    Ok(Setup { constants, metric })
}

// C^{μκ}_ν g_ρκ + C^{μκ}_ρ g_νκ for a diagonal metric
fn structure_term(s: &Setup, mu: usize, nu: usize, rho: usize, order: u32) -> SeriesExpression {
    let d = s.metric.len();
    let mut out = SeriesExpression::zero(d, order);
    let mut push = |lower: usize, other: usize| {
        let c = s.constants.entry(mu, other, lower);
        if !c.is_zero() {
            out = out.add(&s.metric[other].scale(&c));
        }
    };
    push(nu, rho);
    push(rho, nu);
    out
}

fn metric_component(s: &Setup, nu: usize, rho: usize, order: u32) -> SeriesExpression {
    if nu == rho {
        s.metric[nu].clone()
    } else {
        SeriesExpression::zero(s.metric.len(), order)
    }
}

/// Coefficient-wise centrality residual of `warp_line_element(spec, Θ)`
/// under `[x⁰, x^j] = iΩ^{0j}`, compared up to degree `order − 1`.
pub fn centrality_residual(
    spec: &DiagonalAlgebraSpec<f64>,
    theta: &DeformationMatrix,
    moyal: &MoyalParams,
    order: u32,
) -> Result<CentralityReport, CentralityError> {
    let d = spec.dim();
    if moyal.dim() != d {
        return Err(CentralityError::DimensionMismatch { algebra: d, deformation: theta.dim(), omega: moyal.dim() - 1 });
    }
    let order = order.max(1);
    let s = setup(spec, theta, order)?;
    let compared = order - 1;
    let origin = vec![0u32; d];
    let mut components = Vec::with_capacity(d * d * d);
    for mu in 0..d {
        for nu in 0..d {
            for rho in 0..d {
                let comm = moyal_commutator(mu, &metric_component(&s, nu, rho, order), moyal);
                let rhs = structure_term(&s, mu, nu, rho, order).truncate(compared);
                let residual = comm.add(&rhs);
                let (c0, r0) = (comm.coefficient(&origin), rhs.coefficient(&origin));
                let required_scale = (!c0.is_zero()).then(|| {
                    let q = -(r0 / c0);
                    Scalar::to_f64(&q.re)
                });
                let by_order = residual.max_by_order();
                let max = by_order.iter().copied().fold(0.0, f64::max);
                components.push(CentralityComponent { mu, nu, rho, by_order, max, required_scale, residual });
            }
        }
    }
    let max_residual = components.iter().map(|c| c.max).fold(0.0, f64::max);
    let exact_zero = components.iter().all(CentralityComponent::is_exact_zero);
    Ok(CentralityReport { order, components, max_residual, exact_zero })
}

/// Constant-term equation `Σ_j coeffs[j]·Ω^{0,j+1} = rhs` of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEquation {
    pub mu: usize,
    pub nu: usize,
    pub rho: usize,
    pub coeffs: Vec<ComplexRational>,
    pub rhs: ComplexRational,
}

impl OmegaEquation {
    pub fn is_satisfied_by(&self, omega: &[Rational]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(omega)
            .fold(ComplexRational::zero(), |acc, (c, w)| acc + c.clone() * real(w.clone()));
        lhs == self.rhs
    }
}

impl fmt::Display for OmegaEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}): ", self.mu, self.nu, self.rho)?;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)·Ω0{}", Scalar::to_f64(&c.re), Scalar::to_f64(&c.im), j + 1)?;
        }
        write!(f, " = {}{:+}i", Scalar::to_f64(&self.rhs.re), Scalar::to_f64(&self.rhs.im))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSolution {
    /// Scalar `Ω` with `Ω^{0j} = Ω` for all `j`, present when Θ_{0j} is uniform.
    pub omega: Option<f64>,
    /// Exact form of `omega`.
    pub omega_exact: Option<Rational>,
    /// Nontrivial constant-term equations, one per component.
    pub system: Vec<OmegaEquation>,
    /// The scalar solution satisfies every equation of the system.
    pub consistent: bool,
}

impl OmegaSolution {
    pub fn moyal(&self, spatial_dims: usize) -> Option<MoyalParams> {
        self.omega_exact.as_ref().map(|w| MoyalParams { omega: vec![w.clone(); spatial_dims] })
    }

    /// Equations the scalar solution leaves unsatisfied.
    pub fn violated(&self) -> Vec<&OmegaEquation> {
        match &self.omega_exact {
            Some(w) => {
                let n = self.system.first().map_or(0, |e| e.coeffs.len());
                let omega = vec![w.clone(); n];
                self.system.iter().filter(|e| !e.is_satisfied_by(&omega)).collect()
            }
            None => Vec::new(),
        }
    }
}

/// Solve the time–time equation `[x⁰, g₀₀] = −2C^{00}_0 g₀₀` for a uniform
/// `Ω^{0j} = Ω`, and emit the full componentwise system.
///
/// A uniform `Θ_{0j} = Θ` gives `Ω = 1/(nΘ)`. Non-uniform entries return the
/// system only.
pub fn solve_omega(spec: &DiagonalAlgebraSpec<f64>, theta: &DeformationMatrix) -> Result<OmegaSolution, CentralityError> {
    check_class(spec, theta)?;
    let d = spec.dim();
    let n = d - 1;
    let time_space: Vec<f64> = (1..d).map(|j| theta.get(0, j)).collect();
    if time_space.iter().all(|v| *v == 0.0) {
        return Err(CentralityError::Degenerate);
    }
    // linear in Ω: probe the constant terms with unit Ω vectors
    let s = setup(spec, theta, 1)?;
    let origin = vec![0u32; d];
    let units: Vec<MoyalParams> = (0..n)
        .map(|j| {
            let mut w = vec![Rational::zero(); n];
            w[j] = Rational::one();
            MoyalParams { omega: w }
        })
        .collect();
    let mut system = Vec::new();
    for mu in 0..d {
        for nu in 0..d {
            for rho in 0..d {
                let g = metric_component(&s, nu, rho, 1);
                let coeffs: Vec<ComplexRational> =
                    units.iter().map(|u| moyal_commutator(mu, &g, u).coefficient(&origin)).collect();
                let rhs = -structure_term(&s, mu, nu, rho, 1).coefficient(&origin);
                if coeffs.iter().all(Zero::is_zero) && rhs.is_zero() {
                    continue;
                }
                system.push(OmegaEquation { mu, nu, rho, coeffs, rhs });
            }
        }
    }
    let uniform = time_space.iter().all(|v| *v == time_space[0]);
    let omega_exact = if uniform {
        let tt = system.iter().find(|e| (e.mu, e.nu, e.rho) == (0, 0, 0)).ok_or(CentralityError::Degenerate)?;
        let total = tt.coeffs.iter().fold(ComplexRational::zero(), |acc, c| acc + c.clone());
        if total.is_zero() {
            return Err(CentralityError::Degenerate);
        }
        Some((tt.rhs.clone() / total).re)
    } else {
        None
    };
    let consistent = match &omega_exact {
        Some(w) => {
            let omega = vec![w.clone(); n];
            system.iter().all(|e| e.is_satisfied_by(&omega))
        }
        None => false,
    };
    Ok(OmegaSolution { omega: omega_exact.as_ref().map(Scalar::to_f64), omega_exact, system, consistent })
}
