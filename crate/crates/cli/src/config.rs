//! TOML run configuration with span-anchored validation errors.

use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use toml::Spanned;
use warpgeom::algebra::{DiagonalAlgebraSpec, Extended2DAlgebraSpec};
use warpgeom::deformation::DeformationMatrix;
use warpgeom::scalar::{Rational, Scalar};

use crate::error::CliError;

/// A number written as an integer, a float, or a string like `"1/3"` or `"0.25"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    /// Exact value; floats convert bit for bit, decimal strings exactly.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Num::Int(n) => Some(Rational::from_integer((*n).into())),
            Num::Float(x) => Rational::from_f64(*x),
            Num::Text(s) => parse_decimal(s.trim()),
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    if let Ok(r) = BigRational::from_str(s) {
        return Some(r);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-Rational::one(), rest),
        None => (Rational::one(), s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer = BigRational::from_str(&digits).ok()?;
    let scale = BigRational::from_integer(num_traits::pow(10u32.into(), frac.len()));
    Some(sign * numer / scale)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrList {
    One(Num),
    Many(Vec<Num>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub kind: Option<Spanned<String>>,
    pub a: Option<Spanned<NumOrList>>,
    pub e: Option<Spanned<Num>>,
    pub f: Option<Spanned<Num>>,
    pub h: Option<Spanned<Num>>,
    pub r: Option<Spanned<Num>>,
    pub s: Option<Spanned<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSection {
    /// Full skew matrix.
    pub theta: Option<Spanned<Vec<Vec<f64>>>>,
    /// Only `Θ_{0j}`, j = 1..d-1.
    pub time_space: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub family: Option<String>,
    pub hubble: Option<f64>,
    pub spatial_dims: Option<usize>,
    pub scale_factor: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSection {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub t_range: Option<[f64; 2]>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmologySection {
    pub theta: Option<f64>,
    pub c: Option<f64>,
    pub a0: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralitySection {
    pub n: Option<usize>,
    pub theta: Option<f64>,
    pub order: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorsSection {
    pub dim: Option<usize>,
    pub scale: Option<f64>,
    pub weight: Option<f64>,
    pub p: Option<f64>,
    pub quadrature: Option<bool>,
    pub theta: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    algebra: Option<AlgebraSection>,
    deformation: Option<DeformationSection>,
    metric: Option<MetricSection>,
    curvature: Option<CurvatureSection>,
    cosmology: Option<CosmologySection>,
    centrality: Option<CentralitySection>,
    operators: Option<OperatorsSection>,
    output: Option<OutputSection>,
}

/// Algebra parameters, kept exact.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraConfig {
    Diagonal(DiagonalAlgebraSpec<Rational>),
    Extended2D(Extended2DAlgebraSpec<Rational>),
}

impl AlgebraConfig {
    pub fn dim(&self) -> usize {
        match self {
            AlgebraConfig::Diagonal(s) => s.dim(),
            AlgebraConfig::Extended2D(_) => 2,
        }
    }
}

/// A validated configuration. Sections stay optional until a subcommand asks.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub algebra: Option<AlgebraConfig>,
    pub deformation: Option<DeformationMatrix>,
    pub metric: MetricSection,
    pub curvature: CurvatureSection,
    pub cosmology: CosmologySection,
    pub centrality: CentralitySection,
    pub operators: OperatorsSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn algebra(&self) -> Result<&AlgebraConfig, CliError> {
        self.algebra.as_ref().ok_or(CliError::MissingSection("algebra"))
    }

    /// The diagonal algebra in floating point, for the numeric modules.
    pub fn diagonal(&self) -> Result<DiagonalAlgebraSpec<f64>, CliError> {
        match self.algebra()? {
            AlgebraConfig::Diagonal(s) => {
                let a = s.a().iter().map(Scalar::to_f64).collect();
                DiagonalAlgebraSpec::new(a).map_err(|e| CliError::module("algebra", &e))
            }
            AlgebraConfig::Extended2D(_) => {
                Err(CliError::Usage("this subcommand needs a diagonal algebra (kind = \"diagonal\")".into()))
            }
        }
    }

    pub fn deformation(&self) -> Result<&DeformationMatrix, CliError> {
        self.deformation.as_ref().ok_or(CliError::MissingSection("deformation"))
    }
}

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn anchored(src: &str, span: Range<usize>, code: &'static str, message: String) -> CliError {
    let (line, column) = line_col(src, span.start);
    CliError::Config { code, message, line, column }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&src)
}

pub fn parse_config_str(src: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
        CliError::Config { code: "config.syntax", message: e.message().to_owned(), line, column }
    })?;
    let algebra = raw.algebra.map(|a| build_algebra(src, a)).transpose()?;
    let deformation = raw.deformation.map(|d| build_deformation(src, d)).transpose()?;
    if let (Some(a), Some(t)) = (&algebra, &deformation) {
        if a.dim() != t.dim() {
            return Err(CliError::Usage(format!(
                "algebra has dimension {} but the deformation matrix is {}×{}",
                a.dim(),
                t.dim(),
                t.dim()
            )));
        }
    }
    Ok(RunConfig {
        algebra,
        deformation,
        metric: raw.metric.unwrap_or_default(),
        curvature: raw.curvature.unwrap_or_default(),
        cosmology: raw.cosmology.unwrap_or_default(),
        centrality: raw.centrality.unwrap_or_default(),
        operators: raw.operators.unwrap_or_default(),
        output: raw.output.unwrap_or_default(),
    })
}

fn exact_value(src: &str, span: Range<usize>, v: &Num) -> Result<Rational, CliError> {
    v.to_rational().ok_or_else(|| anchored(src, span, "config.bad_number", format!("not a finite number: {v:?}")))
}

fn build_algebra(src: &str, sec: AlgebraSection) -> Result<AlgebraConfig, CliError> {
    let kind = sec.kind.as_ref().map_or_else(|| "diagonal".to_owned(), |k| k.get_ref().clone());
    match kind.as_str() {
        "diagonal" => {
            let a = sec.a.ok_or(CliError::MissingKey("algebra.a"))?;
            let span = a.span();
            let values = match a.into_inner() {
                NumOrList::Many(v) => v,
                NumOrList::One(v) => vec![v],
            };
            let exact = values.iter().map(|v| exact_value(src, span.clone(), v)).collect::<Result<Vec<_>, _>>()?;
            if exact.is_empty() {
                return Err(anchored(src, span, "config.empty_algebra", "a-vector is empty".into()));
            }
            if let Some(k) = exact.iter().position(Zero::is_zero) {
                return Err(anchored(
                    src,
                    span,
                    "config.zero_a_component",
                    format!("a[{k}] = 0: the coordinate representation would not be faithful"),
                ));
            }
            Ok(AlgebraConfig::Diagonal(DiagonalAlgebraSpec::new(exact).map_err(|e| CliError::module("algebra", &e))?))
        }
        "extended2d" => {
            let scalar = |key: &'static str, v: Option<Spanned<Num>>| -> Result<Rational, CliError> {
                let v = v.ok_or(CliError::MissingKey(key))?;
                exact_value(src, v.span(), v.get_ref())
            };
            let a = match sec.a {
                Some(a) => match a.get_ref() {
                    NumOrList::One(v) => exact_value(src, a.span(), v)?,
                    NumOrList::Many(_) => {
                        return Err(anchored(src, a.span(), "config.bad_number", "extended2d expects a scalar a".into()))
                    }
                },
                None => return Err(CliError::MissingKey("algebra.a")),
            };
            Ok(AlgebraConfig::Extended2D(Extended2DAlgebraSpec::new(
                a,
                scalar("algebra.e", sec.e)?,
                scalar("algebra.f", sec.f)?,
                scalar("algebra.h", sec.h)?,
                scalar("algebra.r", sec.r)?,
                scalar("algebra.s", sec.s)?,
            )))
        }
        other => {
            let span = sec.kind.map(|k| k.span()).unwrap_or(0..0);
            Err(anchored(src, span, "config.unknown_kind", format!("unknown algebra kind {other:?}")))
        }
    }
}

fn build_deformation(src: &str, sec: DeformationSection) -> Result<DeformationMatrix, CliError> {
    match (sec.theta, sec.time_space) {
        (Some(_), Some(ts)) => {
            Err(anchored(src, ts.span(), "config.conflict", "give either theta or time_space, not both".into()))
        }
        (Some(theta), None) => {
            let span = theta.span();
            let rows = theta.into_inner();
            let d = rows.len();
            if d == 0 || rows.iter().any(|r| r.len() != d) {
                return Err(anchored(src, span, "config.not_square", "theta must be a nonempty square matrix".into()));
            }
            for i in 0..d {
                for j in i..d {
                    if rows[i][j] != -rows[j][i] {
                        return Err(anchored(
                            src,
                            span,
                            "config.nonskew_theta",
                            format!("theta is not skew-symmetric: [{i}][{j}] = {}, [{j}][{i}] = {}", rows[i][j], rows[j][i]),
                        ));
                    }
                }
            }
            DeformationMatrix::new(rows).map_err(|e| anchored(src, span, "config.bad_theta", e.to_string()))
        }
        (None, Some(ts)) => {
            let span = ts.span();
            DeformationMatrix::time_space(ts.get_ref()).map_err(|e| anchored(src, span, "config.bad_theta", e.to_string()))
        }
        (None, None) => Err(CliError::MissingKey("deformation.theta")),
    }
}
