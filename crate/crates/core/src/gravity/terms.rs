//! Exact function grammar for diagonal cosmological metrics.
//!
//! A term is `c · β^k · a^p₀ ȧ^p₁ ä^p₂ a⃛^p₃ · exp((L + βM)·x)` with rational
//! `c`, `L`, `M`. The formal parameter β marks every power of the deformation
//! vector b, so a residual's order in b can be read off exactly. Coordinate 0
//! is time; `a` and its derivatives depend on time only.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::GravityError;
use crate::scalar::{Rational, Scalar};

/// Everything about a term except its coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub beta: i32,
    /// Powers of `a, ȧ, ä, a⃛`.
    pub powers: [i32; 4],
    pub exp_base: Vec<Rational>,
    pub exp_beta: Vec<Rational>,
}

impl TermKey {
    pub fn unit(d: usize) -> Self {
        Self { beta: 0, powers: [0; 4], exp_base: vec![Rational::zero(); d], exp_beta: vec![Rational::zero(); d] }
    }

    fn mul(&self, other: &Self) -> Self {
        let add = |u: &[Rational], v: &[Rational]| u.iter().zip(v).map(|(p, q)| p + q).collect();
        let mut powers = self.powers;
        for (p, q) in powers.iter_mut().zip(other.powers) {
            *p += q;
        }
        Self {
            beta: self.beta + other.beta,
            powers,
            exp_base: add(&self.exp_base, &other.exp_base),
            exp_beta: add(&self.exp_beta, &other.exp_beta),
        }
    }

    fn inverse(&self) -> Self {
        Self {
            beta: -self.beta,
            powers: self.powers.map(|p| -p),
            exp_base: self.exp_base.iter().map(|v| -v).collect(),
            exp_beta: self.exp_beta.iter().map(|v| -v).collect(),
        }
    }

    fn is_unit(&self) -> bool {
        self.beta == 0
            && self.powers == [0; 4]
            && self.exp_base.iter().all(Zero::is_zero)
            && self.exp_beta.iter().all(Zero::is_zero)
    }
}

/// One coefficient-weighted term.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFunctionTerm {
    pub coeff: Rational,
    pub key: TermKey,
}

impl MetricFunctionTerm {
    pub fn constant(d: usize, c: Rational) -> Self {
        Self { coeff: c, key: TermKey::unit(d) }
    }

    pub fn dim(&self) -> usize {
        self.key.exp_base.len()
    }

    pub fn inverse(&self) -> Result<Self, GravityError> {
        if self.coeff.is_zero() {
            return Err(GravityError::Singular);
        }
        Ok(Self { coeff: self.coeff.recip(), key: self.key.inverse() })
    }
}

/// Values of `a, ȧ, ä, a⃛` at one instant.
pub type Jet = [f64; 4];

/// Finite sum of terms with distinct keys and nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSum {
    d: usize,
    terms: BTreeMap<TermKey, Rational>,
}

impl TermSum {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: Rational) -> Self {
        Self::from_term(MetricFunctionTerm::constant(d, c))
    }

    pub fn from_term(t: MetricFunctionTerm) -> Self {
        let mut s = Self::zero(t.dim());
        s.add_term(t.key, t.coeff);
        s
    }

    pub fn dim(&self) -> usize {
        self.d
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

    pub fn terms(&self) -> impl Iterator<Item = MetricFunctionTerm> + '_ {
        self.terms.iter().map(|(k, c)| MetricFunctionTerm { coeff: c.clone(), key: k.clone() })
    }

    pub fn add_term(&mut self, key: TermKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero(self.d);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.d);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                out.add_term(k1.mul(k2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_term(&self, t: &MetricFunctionTerm) -> Self {
        let mut out = Self::zero(self.d);
        for (k, c) in &self.terms {
            out.add_term(k.mul(&t.key), c * &t.coeff);
        }
        out
    }

    /// The single term, when there is exactly one.
    pub fn as_single(&self) -> Option<MetricFunctionTerm> {
        (self.terms.len() == 1).then(|| self.terms().next().expect("one term"))
    }

    /// `∂/∂x^var`; time is `var = 0`. Differentiating `a⃛` leaves the grammar.
    pub fn diff(&self, var: usize) -> Result<Self, GravityError> {
        let mut out = Self::zero(self.d);
        for (k, c) in &self.terms {
            let base = &k.exp_base[var];
            if !base.is_zero() {
                out.add_term(k.clone(), c * base);
            }
            let slope = &k.exp_beta[var];
            if !slope.is_zero() {
                let mut key = k.clone();
                key.beta += 1;
                out.add_term(key, c * slope);
            }
            if var != 0 {
                continue;
            }
            for slot in 0..4 {
                let p = k.powers[slot];
                if p == 0 {
                    continue;
                }
                if slot == 3 {
                    return Err(GravityError::GrammarOverflow);
                }
                let mut key = k.clone();
                key.powers[slot] -= 1;
                key.powers[slot + 1] += 1;
                out.add_term(key, c * Rational::from_i64(i64::from(p)));
            }
        }
        Ok(out)
    }

    /// Value at `x` with β = 1.
    pub fn eval(&self, x: &[f64], jet: &Jet) -> f64 {
        self.terms().map(|t| eval_term(&t, x, jet)).sum()
    }

    /// Lowest power of β in the expansion about β = 0, or `None` when the sum
    /// vanishes identically.
    ///
    /// Terms are grouped by everything except β and the β-slope; within a
    /// group `Σ c_j β^{k_j} e^{β M_j·x}` is expanded order by order as a
    /// polynomial in x until a nonzero coefficient appears.
    pub fn leading_beta_order(&self) -> Option<i32> {
        if self.is_zero() {
            return None;
        }
        let mut groups: BTreeMap<([i32; 4], Vec<Rational>), Vec<(i32, Vec<Rational>, Rational)>> =
            BTreeMap::new();
        for (k, c) in &self.terms {
            groups
                .entry((k.powers, k.exp_base.clone()))
                .or_default()
                .push((k.beta, k.exp_beta.clone(), c.clone()));
        }
        groups
            .values()
            .filter_map(|g| group_leading_order(g, self.d))
            .min()
    }
}

/// Polynomial in the coordinates: multi-index exponents to coefficients.
type Poly = BTreeMap<Vec<u32>, Rational>;

fn poly_add(p: &mut Poly, mono: Vec<u32>, c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = p.entry(mono.clone()).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        p.remove(&mono);
    }
}

/// `(M·x)^n / n!` as a polynomial.
fn linear_power(m: &[Rational], n: u32, d: usize) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![0; d], Rational::one());
    for k in 1..=n {
        let mut next = Poly::new();
        for (mono, c) in &p {
            for (var, coef) in m.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let mut mm = mono.clone();
                mm[var] += 1;
                poly_add(&mut next, mm, c * coef / Rational::from_i64(i64::from(k)));
            }
        }
        p = next;
    }
    p
}

const MAX_EXPANSION_ORDER: i32 = 64;

fn group_leading_order(group: &[(i32, Vec<Rational>, Rational)], d: usize) -> Option<i32> {
    let start = group.iter().map(|(k, _, _)| *k).min()?;
    for n in start..start + MAX_EXPANSION_ORDER {
        let mut coeff = Poly::new();
        for (k, m, c) in group {
            if n < *k {
                continue;
            }
            let power = u32::try_from(n - k).expect("nonnegative");
            for (mono, v) in linear_power(m, power, d) {
                poly_add(&mut coeff, mono, v * c);
            }
        }
        if !coeff.is_empty() {
            return Some(n);
        }
    }
    None
}

fn eval_term(t: &MetricFunctionTerm, x: &[f64], jet: &Jet) -> f64 {
    let mut v = Scalar::to_f64(&t.coeff);
    for (slot, p) in t.key.powers.iter().enumerate() {
        if *p != 0 {
            v *= jet[slot].powi(*p);
        }
    }
    let exponent: f64 = t
        .key
        .exp_base
        .iter()
        .zip(&t.key.exp_beta)
        .zip(x)
        .map(|((l, m), xv)| (Scalar::to_f64(l) + Scalar::to_f64(m)) * xv)
        .sum();
    v * exponent.exp()
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(_), Some(den)) if den <= 1_000_000 => format!("{}/{}", r.numer(), r.denom()),
            _ => format!("{:e}", Scalar::to_f64(r)),
        }
    }
}

fn fmt_form(f: &mut fmt::Formatter<'_>, form: &[Rational], suffix: &str) -> fmt::Result {
    for (var, c) in form.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        let name = if var == 0 { "t".to_owned() } else { format!("x{var}") };
        let sign = if c.is_negative() { "-" } else { "+" };
        write!(f, " {sign} {}{suffix}*{name}", fmt_rational(&c.abs()))?;
    }
    Ok(())
}

impl fmt::Display for MetricFunctionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rational(&self.coeff))?;
        if self.key.beta != 0 {
            write!(f, "*beta^{}", self.key.beta)?;
        }
        for (name, p) in ["a", "ad", "add", "addd"].iter().zip(self.key.powers) {
            if p != 0 {
                write!(f, "*{name}^{p}")?;
            }
        }
        let has_exp = !self.key.exp_base.iter().chain(&self.key.exp_beta).all(Zero::is_zero);
        if has_exp {
            f.write_str("*exp(")?;
            fmt_form(f, &self.key.exp_base, "")?;
            fmt_form(f, &self.key.exp_beta, "*beta")?;
            f.write_str(" )")?;
        }
        Ok(())
    }
}

impl fmt::Display for TermSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, t) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl MetricFunctionTerm {
    pub fn is_constant(&self) -> bool {
        self.key.is_unit()
    }
}
