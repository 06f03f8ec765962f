//! Concrete scale factors for sampling symbolic expressions.

use super::terms::Jet;
use super::GravityError;

/// A scale factor with closed-form derivatives up to third order.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleFactorFn {
    /// `c·t^p`, defined for `t > 0`.
    PowerLaw { coef: f64, exponent: f64 },
    /// `A·e^{rt}`.
    Exponential { amplitude: f64, rate: f64 },
    /// `e^{ωt/2}·ã(t)`, the total scale factor of a warped background.
    Warped { rate: f64, base: Box<ScaleFactorFn> },
}

impl ScaleFactorFn {
    pub fn constant(c: f64) -> Self {
        Self::Exponential { amplitude: c, rate: 0.0 }
    }

    pub fn warped(self, rate: f64) -> Self {
        if rate == 0.0 {
            self
        } else {
            Self::Warped { rate, base: Box::new(self) }
        }
    }

    /// `(a, ȧ, ä, a⃛)` at `t`.
    pub fn jet(&self, t: f64) -> Jet {
        match self {
            Self::PowerLaw { coef, exponent: p } => {
                let v = coef * t.powf(*p);
                [
                    v,
                    coef * p * t.powf(p - 1.0),
                    coef * p * (p - 1.0) * t.powf(p - 2.0),
                    coef * p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0),
                ]
            }
            Self::Exponential { amplitude, rate } => {
                let v = amplitude * (rate * t).exp();
                [v, v * rate, v * rate * rate, v * rate * rate * rate]
            }
            Self::Warped { rate, base } => {
                let inner = base.jet(t);
                let half = rate / 2.0;
                let u = (half * t).exp();
                let du = [u, u * half, u * half * half, u * half * half * half];
                let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
                let mut out = [0.0; 4];
                for (n, slot) in out.iter_mut().enumerate() {
                    *slot = (0..=n).map(|k| binom[n][k] * du[k] * inner[n - k]).sum();
                }
                out
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }

    /// True when the scale factor is only positive for `t > 0`. Any
    /// non-constant power vanishes at the origin, integer powers included.
    pub fn requires_positive_time(&self) -> bool {
        match self {
            Self::PowerLaw { exponent, .. } => *exponent != 0.0,
            Self::Exponential { .. } => false,
            Self::Warped { base, .. } => base.requires_positive_time(),
        }
    }

    /// Parse `t`, `t^2`, `t^(2/3)`, `3*t^0.5`, `exp(0.5*t)`, `2*exp(t)` or a
    /// positive constant.
    pub fn parse(src: &str) -> Result<Self, GravityError> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || GravityError::BadScaleFactor(src.to_owned());
        if s.is_empty() {
            return Err(bad());
        }
        let (coef, rest) = match s.split_once('*') {
            Some((c, r)) if !c.contains('(') && !c.contains('t') => (c.parse::<f64>().map_err(|_| bad())?, r),
            _ => (1.0, s.as_str()),
        };
        if let Some(inner) = rest.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
            let rate = match inner {
                "t" => 1.0,
                _ => inner.strip_suffix("*t").ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
            };
            return Ok(Self::Exponential { amplitude: coef, rate });
        }
        if rest == "t" {
            return Ok(Self::PowerLaw { coef, exponent: 1.0 });
        }
        if let Some(p) = rest.strip_prefix("t^") {
            let p = p.strip_prefix('(').and_then(|q| q.strip_suffix(')')).unwrap_or(p);
            let exponent = match p.split_once('/') {
                Some((n, d)) => {
                    let n: f64 = n.parse().map_err(|_| bad())?;
                    let d: f64 = d.parse().map_err(|_| bad())?;
                    if d == 0.0 {
                        return Err(bad());
                    }
                    n / d
                }
                None => p.parse().map_err(|_| bad())?,
            };
            return Ok(Self::PowerLaw { coef, exponent });
        }
        if rest.contains('t') {
            return Err(bad());
        }
        let c: f64 = rest.parse().map_err(|_| bad())?;
        Ok(Self::constant(coef * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integer_powers_need_positive_time() {
        for src in ["t", "2*t", "t^2"] {
            assert!(ScaleFactorFn::parse(src).unwrap().requires_positive_time(), "{src}");
        }
        assert!(!ScaleFactorFn::parse("exp(0.5*t)").unwrap().requires_positive_time());
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(ScaleFactorFn::parse("t^(2/3)").unwrap(), ScaleFactorFn::PowerLaw { coef: 1.0, exponent: 2.0 / 3.0 });
        assert_eq!(ScaleFactorFn::parse("3 * t^0.5").unwrap(), ScaleFactorFn::PowerLaw { coef: 3.0, exponent: 0.5 });
        assert_eq!(ScaleFactorFn::parse("t").unwrap(), ScaleFactorFn::PowerLaw { coef: 1.0, exponent: 1.0 });
        assert_eq!(
            ScaleFactorFn::parse("2*exp(0.5*t)").unwrap(),
            ScaleFactorFn::Exponential { amplitude: 2.0, rate: 0.5 }
        );
        assert_eq!(ScaleFactorFn::parse("exp(t)").unwrap(), ScaleFactorFn::Exponential { amplitude: 1.0, rate: 1.0 });
        assert_eq!(ScaleFactorFn::parse("1.5").unwrap(), ScaleFactorFn::constant(1.5));
        for bad in ["", "s^2", "t^(1/0)", "exp(t", "2*q"] {
            assert!(ScaleFactorFn::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn power_law_jet() {
        let j = ScaleFactorFn::parse("t^(2/3)").unwrap().jet(8.0);
        assert_relative_eq!(j[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(j[1], 2.0 / 3.0 * 0.5, epsilon = 1e-14);
        assert_relative_eq!(j[2], -2.0 / 9.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn warped_jet_matches_finite_differences() {
        let f = ScaleFactorFn::parse("t^(2/3)").unwrap().warped(0.4);
        let t = 1.3;
        let h = 1e-4;
        let j = f.jet(t);
        let fd1 = (f.value(t + h) - f.value(t - h)) / (2.0 * h);
        let fd2 = (f.value(t + h) - 2.0 * f.value(t) + f.value(t - h)) / (h * h);
        assert_relative_eq!(j[1], fd1, epsilon = 1e-7);
        assert_relative_eq!(j[2], fd2, epsilon = 1e-5);
        let fd3 = (f.jet(t + h)[2] - f.jet(t - h)[2]) / (2.0 * h);
        assert_relative_eq!(j[3], fd3, epsilon = 1e-6);
    }
}
