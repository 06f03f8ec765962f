//! Warped-convolution deformations in closed form.
//!
//! For algebras where `[x^ν, dx^μ]` is a multiple of `dx^μ`, the adjoint action
//! of the translations `e^{i y·X}` rescales each differential by an exponential
//! of a linear form. Everything here is built from that fact: the deformed
//! squares `(dX^μ)²_Θ = e^{−2a_μ(ΘX)_μ}(dX^μ)²`, the warped line element and
//! the Rieffel product.

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use crate::algebra::{make_diagonal, DiagonalAlgebraSpec, StructureConstants};
use crate::ncalc::{commutator, GeneratorKind, NCExpression, NCWord, NcError, RewriteContext};
use crate::scalar::factorial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformationError {
    #[error("deformation matrix is not skew-symmetric at ({i}, {j})")]
    NotSkew { i: usize, j: usize },
    #[error("deformation matrix must be square and nonempty")]
    NotSquare,
    #[error("deformation matrix has a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("adjoint action on dx{index} is not a pure rescaling; closed form does not apply")]
    UnsupportedClass { index: usize },
    #[error("coordinate generators are outside the differential class")]
    CoordinateInProduct,
    #[error(transparent)]
    Rewrite(#[from] NcError),
}

/// Skew-symmetric real `d×d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl DeformationMatrix {
    /// Checks exact skew-symmetry: `Θ_{ij} == −Θ_{ji}` bit for bit.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, DeformationError> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(DeformationError::NotSquare);
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DeformationError::NonFinite);
        }
        for i in 0..d {
            for j in i..d {
                if rows[i][j] != -rows[j][i] {
                    return Err(DeformationError::NotSkew { i, j });
                }
            }
        }
        Ok(Self { d, entries: rows.into_iter().flatten().collect() })
    }

    pub fn zeros(d: usize) -> Self {
        Self { d, entries: vec![0.0; d * d] }
    }

    /// Only time-space entries: `Θ_{0j} = theta[j-1]`, `Θ_{j0} = −theta[j-1]`.
    pub fn time_space(theta_0j: &[f64]) -> Result<Self, DeformationError> {
        let d = theta_0j.len() + 1;
        let mut rows = vec![vec![0.0; d]; d];
        for (j, t) in theta_0j.iter().enumerate() {
            rows[0][j + 1] = *t;
            rows[j + 1][0] = -*t;
        }
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    /// `(Θx)_μ = Σ_ν Θ_{μν} x^ν`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d).map(|mu| self.row(mu).iter().zip(x).map(|(t, v)| t * v).sum()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { d: self.d, entries: self.entries.iter().map(|v| v * s).collect() }
    }
}

/// Coefficients `L` of the linear function `L·x = Σ L_μ x^μ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearForm(pub Vec<f64>);

impl LinearForm {
    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(l, v)| l * v).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mu, c) in self.0.iter().enumerate().filter(|(_, c)| **c != 0.0) {
            match (first, *c < 0.0) {
                (true, true) => write!(f, "-{}*x{mu}", -c)?,
                (true, false) => write!(f, "{c}*x{mu}")?,
                (false, true) => write!(f, " - {}*x{mu}", -c)?,
                (false, false) => write!(f, " + {c}*x{mu}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Formal positive prefactor `exp(c + L·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpLinear {
    pub constant: f64,
    pub form: LinearForm,
}

impl ExpLinear {
    pub fn one(d: usize) -> Self {
        Self { constant: 0.0, form: LinearForm::zeros(d) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.constant + self.form.eval(x)).exp()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { constant: self.constant + other.constant, form: self.form.add(&other.form) }
    }

    pub fn pow(&self, k: u32) -> Self {
        let s = f64::from(k);
        Self { constant: self.constant * s, form: self.form.scale(s) }
    }
}

/// `exp(c + L·x)·dX^index`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDifferential {
    pub index: usize,
    pub prefactor: ExpLinear,
}

impl ScaledDifferential {
    /// Value of the prefactor at a point.
    pub fn factor_at(&self, x: &[f64]) -> f64 {
        self.prefactor.eval(x)
    }

    /// Compose two actions on the same differential; prefactors multiply.
    pub fn compose(&self, other: &Self) -> Option<Self> {
        (self.index == other.index)
            .then(|| Self { index: self.index, prefactor: self.prefactor.mul(&other.prefactor) })
    }
}

/// Diagonal metric `g_μμ = s_μ exp(L_μ·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedMetric {
    pub signature: Vec<i8>,
    pub exponents: Vec<LinearForm>,
}

impl DeformedMetric {
    /// `diag(+1, −1, …, −1)`.
    pub fn minkowski(d: usize) -> Self {
        Self { signature: minkowski_signature(d), exponents: vec![LinearForm::zeros(d); d] }
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn component(&self, mu: usize, x: &[f64]) -> f64 {
        f64::from(self.signature[mu]) * self.exponents[mu].eval(x).exp()
    }

    pub fn diagonal_at(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|mu| self.component(mu, x)).collect()
    }

    pub fn is_minkowski(&self) -> bool {
        self.exponents.iter().all(LinearForm::is_zero)
            && self.signature == minkowski_signature(self.dim())
    }
}

pub fn minkowski_signature(d: usize) -> Vec<i8> {
    (0..d).map(|mu| if mu == 0 { 1 } else { -1 }).collect()
}

/// Linear form `L` with `e^{i y·X} dx^μ e^{−i y·X} = e^{L·y} dx^μ`.
///
/// `L_ν = −c^{νμ}_μ`, where `C = i c`. Fails unless the coordinates act on
/// `dx^μ` by pure rescaling.
pub fn translation_exponent(
    constants: &StructureConstants<f64>,
    mu: usize,
) -> Result<LinearForm, DeformationError> {
    if !constants.acts_diagonally_on(mu) {
        return Err(DeformationError::UnsupportedClass { index: mu });
    }
    Ok(LinearForm((0..constants.dim()).map(|nu| -*constants.imag(nu, mu, mu)).collect()))
}

/// Formal adjoint action with `y = Θx`: prefactor `exp(L·Θx)` as a form in x.
pub fn adjoint_action_formal(
    mu: usize,
    theta: &DeformationMatrix,
    constants: &StructureConstants<f64>,
) -> Result<ScaledDifferential, DeformationError> {
    check_dim(theta.dim(), constants.dim())?;
    let l = translation_exponent(constants, mu)?;
    let d = theta.dim();
    // (L·Θx) = Σ_ν L_ν Σ_ρ Θ_{νρ} x^ρ
    let form = (0..d).map(|rho| (0..d).map(|nu| l.0[nu] * theta.get(nu, rho)).sum()).collect();
    Ok(ScaledDifferential { index: mu, prefactor: ExpLinear { constant: 0.0, form: LinearForm(form) } })
}

/// `e^{−a_μ(Θx)_μ} dX^μ` evaluated at the point `x`.
pub fn adjoint_action(
    mu: usize,
    theta: &DeformationMatrix,
    x: &[f64],
    spec: &DiagonalAlgebraSpec<f64>,
) -> Result<ScaledDifferential, DeformationError> {
    check_dim(x.len(), theta.dim())?;
    let formal = adjoint_action_formal(mu, theta, &make_diagonal(spec))?;
    let value = formal.prefactor.form.eval(x);
    Ok(ScaledDifferential { index: mu, prefactor: ExpLinear { constant: value, form: LinearForm::zeros(x.len()) } })
}

/// Truncated series for the adjoint action, built from nested commutators.
#[derive(Debug, Clone, PartialEq)]
pub struct BchReport {
    /// Coefficient of `dx^μ` after including orders `0..=k`, for each k.
    pub partial_sums: Vec<f64>,
    pub closed_form: f64,
    /// `|partial_sums.last() − closed_form|`.
    pub truncation_residual: f64,
}

/// Expand `e^{iB} dx^μ e^{−iB}` with `B = Σ_ν (Θx)_ν x^ν` as
/// `Σ_k (i^k/k!) ad_B^k(dx^μ)`, each `ad_B` evaluated by the rewriter.
pub fn adjoint_action_series(
    mu: usize,
    theta: &DeformationMatrix,
    x: &[f64],
    ctx: &RewriteContext<f64>,
    order: u32,
) -> Result<BchReport, DeformationError> {
    check_dim(x.len(), theta.dim())?;
    check_dim(ctx.dim(), theta.dim())?;
    let closed = adjoint_action_formal(mu, theta, ctx.constants())?.prefactor.form.eval(x).exp();
    let y = theta.apply(x);
    let mut b = NCExpression::zero();
    for (nu, v) in y.iter().enumerate() {
        b = b.add(&NCExpression::x(nu).scale(&Complex::new(*v, 0.0)));
    }
    let target = NCWord(vec![crate::ncalc::Generator::dx(mu)]);
    let mut nested = NCExpression::dx(mu);
    let mut i_pow = Complex::new(1.0, 0.0);
    let mut sum = 0.0;
    let mut partial_sums = Vec::with_capacity(order as usize + 1);
    for k in 0..=order {
        if k > 0 {
            nested = commutator(&b, &nested, ctx)?;
            i_pow *= Complex::new(0.0, 1.0);
        }
        let term = i_pow * nested.coefficient(&target) / factorial::<f64>(k);
        sum += term.re;
        partial_sums.push(sum);
    }
    Ok(BchReport { partial_sums, closed_form: closed, truncation_residual: (sum - closed).abs() })
}

/// Operator `scale · exp(L·X) · word`, with `L·X` a formal exponential of the
/// coordinate generators standing to the left of the word.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedOperator {
    pub scale: f64,
    pub exponent: LinearForm,
    pub word: NCWord,
}

impl fmt::Display for DeformedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale != 1.0 {
            write!(f, "{}*", self.scale)?;
        }
        if !self.exponent.is_zero() {
            write!(f, "exp({})", self.exponent.to_string().replace('x', "X"))?;
            if !self.word.is_empty() {
                f.write_str("*")?;
            }
        }
        for (k, g) in self.word.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{g}")?;
        }
        if self.word.is_empty() && self.exponent.is_zero() && self.scale == 1.0 {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Replace the point `x` in the prefactor of `(e^{c+L·x} dX^μ)^power` by the
/// coordinate generators: `e^{power·c} e^{power·L·X} (dX^μ)^power`.
pub fn spectral_substitution(
    sd: &ScaledDifferential,
    power: u32,
    constants: &StructureConstants<f64>,
) -> Result<DeformedOperator, DeformationError> {
    if !constants.acts_diagonally_on(sd.index) {
        return Err(DeformationError::UnsupportedClass { index: sd.index });
    }
    let p = sd.prefactor.pow(power);
    Ok(DeformedOperator {
        scale: p.constant.exp(),
        exponent: p.form,
        word: NCWord(vec![crate::ncalc::Generator::dx(sd.index); power as usize]),
    })
}

/// Deformed product of differentials: `e^{−Σ_{μ∈w} g_μ·ΘX} w`.
pub fn deform_word(
    word: &NCWord,
    theta: &DeformationMatrix,
    constants: &StructureConstants<f64>,
) -> Result<DeformedOperator, DeformationError> {
    let d = theta.dim();
    check_dim(constants.dim(), d)?;
    let mut exponent = LinearForm::zeros(d);
    for g in &word.0 {
        if g.kind == GeneratorKind::Coordinate {
            return Err(DeformationError::CoordinateInProduct);
        }
        exponent = exponent.add(&adjoint_action_formal(g.index, theta, constants)?.prefactor.form);
    }
    Ok(DeformedOperator { scale: 1.0, exponent, word: word.clone() })
}

/// Deformed square `(dX^μ)²_Θ`.
pub fn deformed_square(
    mu: usize,
    theta: &DeformationMatrix,
    constants: &StructureConstants<f64>,
) -> Result<DeformedOperator, DeformationError> {
    let sd = adjoint_action_formal(mu, theta, constants)?;
    spectral_substitution(&sd, 2, constants)
}

/// `g_μμ = s_μ exp(−2a_μ Σ_ν Θ_{μν} x^ν)`.
pub fn warp_line_element(
    spec: &DiagonalAlgebraSpec<f64>,
    theta: &DeformationMatrix,
) -> Result<DeformedMetric, DeformationError> {
    let d = spec.dim();
    check_dim(theta.dim(), d)?;
    let exponents = (0..d)
        .map(|mu| LinearForm(theta.row(mu).iter().map(|t| -2.0 * spec.a()[mu] * t).collect()))
        .collect();
    Ok(DeformedMetric { signature: minkowski_signature(d), exponents })
}

fn translation_weight(
    word: &NCWord,
    constants: &StructureConstants<f64>,
) -> Result<Vec<f64>, DeformationError> {
    let mut g = vec![0.0; constants.dim()];
    for gen in &word.0 {
        if gen.kind == GeneratorKind::Coordinate {
            return Err(DeformationError::CoordinateInProduct);
        }
        let l = translation_exponent(constants, gen.index)?;
        for (acc, v) in g.iter_mut().zip(&l.0) {
            *acc -= v;
        }
    }
    Ok(g)
}

/// Rieffel product for differential words.
///
/// With `α_y(w) = e^{−g_w·y} w`, integrating out the oscillatory kernel
/// collapses the double integral to the phase `e^{−i g_Aᵀ Θ g_B}`. Because Θ
/// is skew this phase is trivial whenever `g_A ∥ g_B`, in particular for
/// `dX^μ ×_Θ dX^μ`.
pub fn rieffel_product(
    a: &NCExpression<f64>,
    b: &NCExpression<f64>,
    ctx: &RewriteContext<f64>,
    theta: &DeformationMatrix,
) -> Result<NCExpression<f64>, DeformationError> {
    let d = theta.dim();
    check_dim(ctx.dim(), d)?;
    let constants = ctx.constants();
    let mut out = NCExpression::zero();
    for (wa, ca) in a.terms() {
        let ga = translation_weight(wa, constants)?;
        for (wb, cb) in b.terms() {
            let gb = translation_weight(wb, constants)?;
            let tg = theta.apply(&gb);
            let angle: f64 = -ga.iter().zip(&tg).map(|(u, v)| u * v).sum::<f64>();
            let phase = Complex::from_polar(1.0, angle);
            out.add_term(wa.concat(wb), ca * cb * phase);
        }
    }
    Ok(out)
}

fn check_dim(got: usize, expected: usize) -> Result<(), DeformationError> {
    if got == expected {
        Ok(())
    } else {
        Err(DeformationError::DimensionMismatch { expected, got })
    }
}
