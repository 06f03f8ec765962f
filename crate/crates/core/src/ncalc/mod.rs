//! Universal differential calculus as a rewriting system.
//!
//! Expressions are complex combinations of words in `x^μ` and `dx^μ`. The
//! relations
//!
//! ```text
//! dx^ν x^μ = x^μ dx^ν − Σ_σ C^{μν}_σ dx^σ
//! x^ν x^μ  = x^μ x^ν − iΩ^{μν}        (ν > μ, Moyal part optional)
//! ```
//!
//! are oriented so that coordinates move left and sort by index. Differentials
//! never commute with each other: the calculus is the universal one, not the
//! exterior one.

mod grammar;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{check_jacobi, check_symmetry, StructureConstants};
use crate::scalar::Scalar;

pub use grammar::{parse_expression, ParseError};

pub const DEFAULT_MAX_WORD_LEN: usize = 16;
pub const DEFAULT_GRADING_CAP: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NcError {
    #[error("structure constants are not symmetric in their first two indices")]
    Asymmetric,
    #[error("structure constants violate the Jacobi condition (residual {residual})")]
    Inconsistent { residual: f64 },
    #[error("Moyal matrix must be antisymmetric and of dimension {d}")]
    BadMoyal { d: usize },
    #[error("word of length {len} exceeds the cap of {cap}")]
    WordTooLong { len: usize, cap: usize },
    #[error("generator index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("word already carries {degree} differentials; grading cap is {cap}")]
    GradingCap { degree: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorKind {
    Coordinate,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub index: usize,
}

impl Generator {
    pub fn x(index: usize) -> Self {
        Self { kind: GeneratorKind::Coordinate, index }
    }

    pub fn dx(index: usize) -> Self {
        Self { kind: GeneratorKind::Differential, index }
    }

    pub fn is_differential(&self) -> bool {
        self.kind == GeneratorKind::Differential
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Coordinate => write!(f, "x{}", self.index),
            GeneratorKind::Differential => write!(f, "dx{}", self.index),
        }
    }
}

/// Ordered product of generators; the empty word is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NCWord(pub Vec<Generator>);

impl NCWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn differential_degree(&self) -> usize {
        self.0.iter().filter(|g| g.is_differential()).count()
    }

    pub fn concat(&self, other: &NCWord) -> NCWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NCWord(v)
    }

    /// Canonical: coordinates first in ascending index, then differentials.
    pub fn is_canonical(&self) -> bool {
        self.0.windows(2).all(|w| !out_of_order(&w[0], &w[1]))
    }
}

fn out_of_order(left: &Generator, right: &Generator) -> bool {
    use GeneratorKind::*;
    match (left.kind, right.kind) {
        (Differential, Coordinate) => true,
        (Coordinate, Coordinate) => left.index > right.index,
        _ => false,
    }
}

/// Finite map from words to nonzero complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NCExpression<T> {
    terms: BTreeMap<NCWord, Complex<T>>,
}

impl<T: Scalar> Default for NCExpression<T> {
    fn default() -> Self {
        Self::zero()
    }
}

fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cis_zero<T: Scalar>(c: &Complex<T>) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

impl<T: Scalar> NCExpression<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::scalar(Complex::new(T::one(), T::zero()))
    }

    pub fn scalar(c: Complex<T>) -> Self {
        Self::term(NCWord::empty(), c)
    }

    pub fn term(word: NCWord, c: Complex<T>) -> Self {
        let mut e = Self::zero();
        e.add_term(word, c);
        e
    }

    pub fn word(gens: &[Generator]) -> Self {
        Self::term(NCWord(gens.to_vec()), Complex::new(T::one(), T::zero()))
    }

    pub fn x(index: usize) -> Self {
        Self::word(&[Generator::x(index)])
    }

    pub fn dx(index: usize) -> Self {
        Self::word(&[Generator::dx(index)])
    }

    pub fn add_term(&mut self, word: NCWord, c: Complex<T>) {
        if cis_zero(&c) {
            return;
        }
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if cis_zero(&sum) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NCWord, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &NCWord) -> Complex<T> {
        self.terms.get(word).cloned().unwrap_or_else(czero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every coefficient negligible in the field's sense.
    pub fn is_negligible(&self) -> bool {
        self.terms.values().all(|c| c.re.is_negligible() && c.im.is_negligible())
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(NCWord::len).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, v) in &other.terms {
            out.add_term(w.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, v) in &other.terms {
            out.add_term(w.clone(), -v.clone());
        }
        out
    }

    /// Free (concatenation) product; no relations applied.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1.clone() * c2.clone());
            }
        }
        out
    }

    /// The `*` operation: reverse every word and conjugate its coefficient.
    /// Generators are self-adjoint.
    pub fn star(&self) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut rev = w.0.clone();
            rev.reverse();
            out.add_term(NCWord(rev), c.conj());
        }
        out
    }

    pub fn map_coefficients<U: Scalar>(&self, f: impl Fn(&T) -> U) -> NCExpression<U> {
        let mut out = NCExpression::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), Complex::new(f(&c.re), f(&c.im)));
        }
        out
    }
}

/// Which out-of-order adjacent pair is rewritten first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingPolicy {
    Leftmost,
    Rightmost,
    /// Pick uniformly among the available pairs, driven by a seeded RNG.
    Seeded(u64),
}

/// Everything the rewriter needs: validated structure constants, the optional
/// constant coordinate commutators, and the limits.
#[derive(Debug, Clone)]
pub struct RewriteContext<T> {
    constants: StructureConstants<T>,
    /// `Ω^{μν}` with `[x^μ, x^ν] = iΩ^{μν}`; `None` means commuting coordinates.
    moyal: Option<Vec<Vec<T>>>,
    pub policy: OrderingPolicy,
    pub max_word_len: usize,
    pub grading_cap: usize,
}

impl<T: Scalar> RewriteContext<T> {
    pub fn new(constants: StructureConstants<T>) -> Result<Self, NcError> {
        if !check_symmetry(&constants) {
            return Err(NcError::Asymmetric);
        }
        let report = check_jacobi(&constants);
        if !report.consistent {
            return Err(NcError::Inconsistent { residual: report.max_residual.to_f64() });
        }
        Ok(Self {
            constants,
            moyal: None,
            policy: OrderingPolicy::Leftmost,
            max_word_len: DEFAULT_MAX_WORD_LEN,
            grading_cap: DEFAULT_GRADING_CAP,
        })
    }

    /// Attach a full antisymmetric `Ω` matrix.
    pub fn with_moyal(mut self, omega: Vec<Vec<T>>) -> Result<Self, NcError> {
        let d = self.dim();
        let ok = omega.len() == d
            && omega.iter().all(|row| row.len() == d)
            && (0..d).all(|i| (0..d).all(|j| omega[i][j] == -omega[j][i].clone()));
        if !ok {
            return Err(NcError::BadMoyal { d });
        }
        self.moyal = Some(omega);
        Ok(self)
    }

    /// Attach time-space noncommutativity `[x⁰, x^j] = iΩ^{0j}`, `j = 1..d-1`.
    pub fn with_time_space_moyal(self, omega_0j: &[T]) -> Result<Self, NcError> {
        let d = self.dim();
        if omega_0j.len() + 1 != d {
            return Err(NcError::BadMoyal { d });
        }
        let mut m = vec![vec![T::zero(); d]; d];
        for (j, w) in omega_0j.iter().enumerate() {
            m[0][j + 1] = w.clone();
            m[j + 1][0] = -w.clone();
        }
        self.with_moyal(m)
    }

    pub fn with_policy(mut self, policy: OrderingPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn dim(&self) -> usize {
        self.constants.dim()
    }

    pub fn constants(&self) -> &StructureConstants<T> {
        &self.constants
    }

    fn omega(&self, mu: usize, nu: usize) -> T {
        self.moyal.as_ref().map_or_else(T::zero, |m| m[mu][nu].clone())
    }

    fn check_indices(&self, e: &NCExpression<T>) -> Result<(), NcError> {
        let d = self.dim();
        for w in e.terms.keys() {
            if let Some(g) = w.0.iter().find(|g| g.index >= d) {
                return Err(NcError::IndexOutOfRange { index: g.index, d });
            }
        }
        Ok(())
    }
}

/// Rewrite `e` into canonical order.
pub fn normal_form<T: Scalar>(
    e: &NCExpression<T>,
    ctx: &RewriteContext<T>,
) -> Result<NCExpression<T>, NcError> {
    ctx.check_indices(e)?;
    let mut rng = match ctx.policy {
        OrderingPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let d = ctx.dim();
    let mut out = NCExpression::zero();
    let mut stack: Vec<(NCWord, Complex<T>)> =
        e.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect();
    let mut pairs = Vec::new();

    while let Some((word, coeff)) = stack.pop() {
        if word.len() > ctx.max_word_len {
            return Err(NcError::WordTooLong { len: word.len(), cap: ctx.max_word_len });
        }
        pairs.clear();
        pairs.extend(
            word.0.windows(2).enumerate().filter(|(_, w)| out_of_order(&w[0], &w[1])).map(|(i, _)| i),
        );
        if pairs.is_empty() {
            out.add_term(word, coeff);
            continue;
        }
        let pos = match (&ctx.policy, rng.as_mut()) {
            (OrderingPolicy::Rightmost, _) => *pairs.last().unwrap(),
            (OrderingPolicy::Seeded(_), Some(r)) => pairs[r.random_range(0..pairs.len())],
            _ => pairs[0],
        };
        let (left, right) = (word.0[pos], word.0[pos + 1]);
        let prefix = &word.0[..pos];
        let suffix = &word.0[pos + 2..];

        let mut swapped = prefix.to_vec();
        swapped.push(right);
        swapped.push(left);
        swapped.extend_from_slice(suffix);
        stack.push((NCWord(swapped), coeff.clone()));

        match left.kind {
            // dx^ν x^μ = x^μ dx^ν − Σ_σ C^{μν}_σ dx^σ
            GeneratorKind::Differential => {
                let (mu, nu) = (right.index, left.index);
                for sigma in 0..d {
                    let c = ctx.constants.entry(mu, nu, sigma);
                    if cis_zero(&c) {
                        continue;
                    }
                    let mut w = prefix.to_vec();
                    w.push(Generator::dx(sigma));
                    w.extend_from_slice(suffix);
                    stack.push((NCWord(w), -(coeff.clone() * c)));
                }
            }
            // x^ν x^μ = x^μ x^ν − iΩ^{μν}
            GeneratorKind::Coordinate => {
                let omega = ctx.omega(right.index, left.index);
                if !omega.is_zero() {
                    let mut w = prefix.to_vec();
                    w.extend_from_slice(suffix);
                    let i_omega = Complex::new(T::zero(), omega);
                    stack.push((NCWord(w), -(coeff.clone() * i_omega)));
                }
            }
        }
    }
    Ok(out)
}

/// `AB − BA` in normal form.
pub fn commutator<T: Scalar>(
    a: &NCExpression<T>,
    b: &NCExpression<T>,
    ctx: &RewriteContext<T>,
) -> Result<NCExpression<T>, NcError> {
    normal_form(&a.mul(b).sub(&b.mul(a)), ctx)
}

/// The universal differential on word representatives.
///
/// Uses the graded Leibniz rule `d(ω w) = (dω) w + (−1)^{|ω|} ω (dw)` where
/// `|ω|` counts differentials, together with `d(x^μ) = dx^μ`, `d(dx^μ) = 0`
/// and `d(1) = 0`. The sign is what makes `d∘d` vanish on one-forms. The
/// result is returned as written; call [`normal_form`] to canonicalize.
pub fn apply_d<T: Scalar>(
    e: &NCExpression<T>,
    ctx: &RewriteContext<T>,
) -> Result<NCExpression<T>, NcError> {
    ctx.check_indices(e)?;
    let mut out = NCExpression::zero();
    for (word, coeff) in e.terms() {
        let degree = word.differential_degree();
        if degree >= ctx.grading_cap {
            return Err(NcError::GradingCap { degree, cap: ctx.grading_cap });
        }
        let mut sign_negative = false;
        for (pos, g) in word.0.iter().enumerate() {
            match g.kind {
                GeneratorKind::Differential => sign_negative = !sign_negative,
                GeneratorKind::Coordinate => {
                    let mut w = word.0.clone();
                    w[pos] = Generator::dx(g.index);
                    let c = if sign_negative { -coeff.clone() } else { coeff.clone() };
                    out.add_term(NCWord(w), c);
                }
            }
        }
    }
    Ok(out)
}

impl<T: Scalar> fmt::Display for NCExpression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        grammar::write_expression(self, f)
    }
}

#[cfg(test)]
mod tests;
