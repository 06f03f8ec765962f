//! Named metric families obtained from deformations of Minkowski space.

use thiserror::Error;

use crate::algebra::DiagonalAlgebraSpec;
use crate::deformation::{
    warp_line_element, DeformationError, DeformationMatrix, DeformedMetric, LinearForm,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpacetimeError {
    #[error("time-space entry Θ[0][{j}] is nonzero; ultra-static family needs Θ_0j = 0")]
    TimeSpaceEntry { j: usize },
    #[error("space-space entry Θ[{i}][{j}] is nonzero; FRW families need Θ_ij = 0")]
    SpaceSpaceEntry { i: usize, j: usize },
    #[error("warp rates a_i Θ_i0 differ between spatial directions ({first} vs {other})")]
    Anisotropic { first: f64, other: f64 },
    #[error("need at least one spatial dimension")]
    NoSpace,
    #[error(transparent)]
    Deformation(#[from] DeformationError),
}

/// `ds² = dt² − Σ_i e^{L_i·x}(dx^i)²` with time-independent exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct UltraStaticMetric {
    /// One form per spatial direction, each over all `d` coordinates.
    pub spatial_exponents: Vec<LinearForm>,
}

impl UltraStaticMetric {
    pub fn dim(&self) -> usize {
        self.spatial_exponents.len() + 1
    }

    pub fn to_deformed_metric(&self) -> DeformedMetric {
        let d = self.dim();
        let mut g = DeformedMetric::minkowski(d);
        for (i, l) in self.spatial_exponents.iter().enumerate() {
            g.exponents[i + 1] = l.clone();
        }
        g
    }
}

/// `diag(1, −e^{Ht}, …, −e^{Ht})`.
#[derive(Debug, Clone, PartialEq)]
pub struct FRWMetric {
    pub hubble: f64,
    pub spatial_dims: usize,
}

impl FRWMetric {
    pub fn dim(&self) -> usize {
        self.spatial_dims + 1
    }

    pub fn to_deformed_metric(&self) -> DeformedMetric {
        let d = self.dim();
        let mut g = DeformedMetric::minkowski(d);
        let mut warp = LinearForm::zeros(d);
        warp.0[0] = self.hubble;
        for mu in 1..d {
            g.exponents[mu] = warp.clone();
        }
        g
    }
}

/// Algebra and deformation parameters that realize a family member.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub spec: DiagonalAlgebraSpec<f64>,
    pub theta: DeformationMatrix,
}

/// `g₀₀ = e^{−2b·x}`, `g_ij = −a(t)²δ_ij` with `a(t)² = e^{ω t}ã(t)²`.
///
/// `a` stays formal: only the symbol name of `ã` and the warp rate `ω` are
/// kept. The curvature engine works with the total `a(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedFRWMetric {
    pub base_symbol: String,
    /// `ω = −2a_iΘ_{i0}`, shared by every spatial direction.
    pub warp_rate: f64,
    /// `b_i = a₀Θ_{0i}` for `i = 1..d-1`.
    pub b: Vec<f64>,
}

impl DeformedFRWMetric {
    /// Undeformed FRW with a formal scale factor.
    pub fn undeformed(base_symbol: &str, spatial_dims: usize) -> Self {
        Self { base_symbol: base_symbol.to_owned(), warp_rate: 0.0, b: vec![0.0; spatial_dims] }
    }

    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    pub fn b_squared(&self) -> f64 {
        self.b.iter().map(|v| v * v).sum()
    }
}

/// Requires `Θ_{0j} = 0`; returns `h_ii = e^{−2a_i(Θx)_i}`.
pub fn ultrastatic_from_deformation(
    spec: &DiagonalAlgebraSpec<f64>,
    theta: &DeformationMatrix,
) -> Result<UltraStaticMetric, SpacetimeError> {
    if theta.dim() < 2 {
        return Err(SpacetimeError::NoSpace);
    }
    if let Some(j) = (1..theta.dim()).find(|&j| theta.get(0, j) != 0.0) {
        return Err(SpacetimeError::TimeSpaceEntry { j });
    }
    let g = warp_line_element(spec, theta)?;
    Ok(UltraStaticMetric { spatial_exponents: g.exponents[1..].to_vec() })
}

/// FRW with Hubble rate `H` in `spatial_dims` dimensions, realized by
/// `Θ_{0i} = θ` for every i and `a_i = H/(2θ)`, `a₀ = 1`.
///
/// The realization gives `−2a_iΘ_{i0}t = Ht` on the spatial diagonal. Its
/// `g₀₀` carries the `a₀Θ_{0i}` term, which the FRW family drops. `H = 0`
/// returns the undeformed Minkowski parameters.
pub fn frw_from_deformation(
    hubble: f64,
    spatial_dims: usize,
) -> Result<(FRWMetric, Realization), SpacetimeError> {
    frw_from_deformation_with(hubble, spatial_dims, 1.0)
}

pub fn frw_from_deformation_with(
    hubble: f64,
    spatial_dims: usize,
    theta: f64,
) -> Result<(FRWMetric, Realization), SpacetimeError> {
    if spatial_dims == 0 {
        return Err(SpacetimeError::NoSpace);
    }
    let d = spatial_dims + 1;
    let metric = FRWMetric { hubble, spatial_dims };
    if hubble == 0.0 || theta == 0.0 {
        let realization =
            Realization { spec: DiagonalAlgebraSpec::ones(d), theta: DeformationMatrix::zeros(d) };
        return Ok((metric, realization));
    }
    let mut a = vec![hubble / (2.0 * theta); d];
    a[0] = 1.0;
    let spec = DiagonalAlgebraSpec::new(a).map_err(|_| SpacetimeError::NoSpace)?;
    let theta = DeformationMatrix::time_space(&vec![theta; spatial_dims])?;
    Ok((metric, Realization { spec, theta }))
}

/// Relative spread allowed between the per-direction warp rates, which are
/// products of user floats and rarely agree to the last bit.
pub const RATE_TOLERANCE: f64 = 1e-12;

/// Deform an FRW background with scale factor `ã` by a time-space Θ.
pub fn deformed_frw(
    base_symbol: &str,
    spec: &DiagonalAlgebraSpec<f64>,
    theta: &DeformationMatrix,
) -> Result<DeformedFRWMetric, SpacetimeError> {
    let d = theta.dim();
    if d < 2 {
        return Err(SpacetimeError::NoSpace);
    }
    if spec.dim() != d {
        return Err(DeformationError::DimensionMismatch { expected: d, got: spec.dim() }.into());
    }
    for i in 1..d {
        for j in 1..d {
            if theta.get(i, j) != 0.0 {
                return Err(SpacetimeError::SpaceSpaceEntry { i, j });
            }
        }
    }
    let a = spec.a();
    let rate = |i: usize| -2.0 * a[i] * theta.get(i, 0);
    let first = rate(1);
    let differs = |r: &f64| (r - first).abs() > RATE_TOLERANCE * r.abs().max(first.abs());
    if let Some(other) = (2..d).map(rate).find(differs) {
        return Err(SpacetimeError::Anisotropic { first, other });
    }
    let b = (1..d).map(|i| a[0] * theta.get(0, i)).collect();
    Ok(DeformedFRWMetric { base_symbol: base_symbol.to_owned(), warp_rate: first, b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ultrastatic_exponents() {
        let theta = 0.3;
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[1][2] = theta;
        rows[2][1] = -theta;
        let m = ultrastatic_from_deformation(&DiagonalAlgebraSpec::ones(4), &DeformationMatrix::new(rows).unwrap()).unwrap();
        assert_eq!(m.spatial_exponents[0].0, vec![0.0, 0.0, -2.0 * theta, 0.0]);
        assert_eq!(m.spatial_exponents[1].0, vec![0.0, 2.0 * theta, 0.0, 0.0]);
        assert!(m.spatial_exponents[2].is_zero());
        assert!(m.spatial_exponents.iter().all(|l| l.0[0] == 0.0));
        assert!(m.to_deformed_metric().exponents[0].is_zero());

        let flat = ultrastatic_from_deformation(&DiagonalAlgebraSpec::ones(4), &DeformationMatrix::zeros(4)).unwrap();
        assert!(flat.to_deformed_metric().is_minkowski());
    }

    #[test]
    fn ultrastatic_rejects_time_space() {
        let theta = DeformationMatrix::time_space(&[0.0, 0.1, 0.0]).unwrap();
        assert_eq!(
            ultrastatic_from_deformation(&DiagonalAlgebraSpec::ones(4), &theta).unwrap_err(),
            SpacetimeError::TimeSpaceEntry { j: 2 }
        );
    }

    #[test]
    fn frw_round_trip() {
        let (m, r) = frw_from_deformation(1.0, 3).unwrap();
        let target = m.to_deformed_metric();
        assert_eq!(target.exponents[1].0, vec![1.0, 0.0, 0.0, 0.0]);
        let warped = warp_line_element(&r.spec, &r.theta).unwrap();
        for i in 1..4 {
            assert_eq!(warped.exponents[i], target.exponents[i]);
        }
        // only the dropped a₀Θ_{0i} term differs
        assert_eq!(warped.exponents[0].0, vec![0.0, -2.0, -2.0, -2.0]);
    }

    #[test]
    fn frw_zero_hubble_is_flat() {
        let (m, r) = frw_from_deformation(0.0, 3).unwrap();
        assert!(m.to_deformed_metric().is_minkowski());
        assert!(r.theta.is_zero());
    }

    #[test]
    fn deformed_frw_recovers_frw() {
        let h = 0.8;
        let (_, r) = frw_from_deformation(h, 3).unwrap();
        let m = deformed_frw("a~", &r.spec, &r.theta).unwrap();
        assert_eq!(m.warp_rate, h);
        assert_eq!(m.b, vec![1.0; 3]);

        let flat = deformed_frw("a~", &DiagonalAlgebraSpec::ones(4), &DeformationMatrix::zeros(4)).unwrap();
        assert_eq!(flat.warp_rate, 0.0);
        assert_eq!(flat.b_squared(), 0.0);
    }

    #[test]
    fn deformed_frw_half_theta() {
        let big_theta = 0.2;
        let spec = DiagonalAlgebraSpec::new(vec![0.5, 1.0, 1.0, 1.0]).unwrap();
        let theta = DeformationMatrix::time_space(&[big_theta, 0.0, 0.0]).unwrap();
        let m = deformed_frw("a~", &spec, &theta);
        // a_iΘ_i0 differs between x¹ and the other directions
        assert!(matches!(m, Err(SpacetimeError::Anisotropic { .. })));

        let theta = DeformationMatrix::time_space(&[big_theta; 3]).unwrap();
        let m = deformed_frw("a~", &spec, &theta).unwrap();
        assert_eq!(m.b, vec![0.5 * big_theta; 3]);
    }

    #[test]
    fn deformed_frw_rejects_space_space() {
        let mut rows = vec![vec![0.0; 3]; 3];
        rows[1][2] = 1.0;
        rows[2][1] = -1.0;
        let theta = DeformationMatrix::new(rows).unwrap();
        assert_eq!(
            deformed_frw("a", &DiagonalAlgebraSpec::ones(3), &theta).unwrap_err(),
            SpacetimeError::SpaceSpaceEntry { i: 1, j: 2 }
        );
    }
}
