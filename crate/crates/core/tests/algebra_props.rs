use num_traits::Zero;
use proptest::prelude::*;
use warpgeom::algebra::{
    check_jacobi, check_symmetry, extended_constraints, make_diagonal, make_extended2d, DiagonalAlgebraSpec,
    Extended2DAlgebraSpec,
};
use warpgeom::scalar::{ratio, Rational};

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-40i64..=-1, 1i64..=40], 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #[test]
    fn diagonal_algebras_are_exactly_consistent(a in prop::collection::vec(nonzero_rational(), 1..=6)) {
        let c = make_diagonal(&DiagonalAlgebraSpec::new(a).unwrap());
        prop_assert!(check_symmetry(&c));
        let report = check_jacobi(&c);
        prop_assert!(report.consistent);
        prop_assert!(report.max_residual.is_zero());
    }

    #[test]
    fn diagonal_float_algebras_pass(a in prop::collection::vec(prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], 1..=6)) {
        let report = check_jacobi(&make_diagonal(&DiagonalAlgebraSpec::new(a).unwrap()));
        prop_assert!(report.consistent);
        prop_assert_eq!(report.max_residual, 0.0);
    }
}

#[test]
fn extended_constraints_match_jacobi_on_grid() {
    // every tuple over {-1, 0, 1, 2}^6: 4096 specs, consistent and not
    let values = [-1i64, 0, 1, 2];
    let (mut consistent, mut inconsistent) = (0, 0);
    for code in 0..4096usize {
        let pick = |k: usize| ratio(values[(code >> (2 * k)) & 3], 1);
        let spec = Extended2DAlgebraSpec::new(pick(0), pick(1), pick(2), pick(3), pick(4), pick(5));
        let (r1, r2, r3) = extended_constraints(&spec);
        let by_constraints = r1.is_zero() && r2.is_zero() && r3.is_zero();
        let report = check_jacobi(&make_extended2d(&spec));
        assert_eq!(by_constraints, report.max_residual.is_zero(), "{spec:?}");
        assert_eq!(report.consistent, by_constraints);
        if by_constraints {
            consistent += 1;
        } else {
            inconsistent += 1;
        }
    }
    assert!(consistent > 10 && inconsistent >= 1000);
}

#[test]
fn extended_half_integer_grid() {
    let values = [ratio(-1, 2), ratio(1, 2), ratio(3, 2)];
    for code in 0..729usize {
        let mut k = code;
        let mut pick = || {
            let v = values[k % 3].clone();
            k /= 3;
            v
        };
        let spec = Extended2DAlgebraSpec::new(pick(), pick(), pick(), pick(), pick(), pick());
        let (r1, r2, r3) = extended_constraints(&spec);
        let by_constraints = r1.is_zero() && r2.is_zero() && r3.is_zero();
        assert_eq!(by_constraints, check_jacobi(&make_extended2d(&spec)).max_residual.is_zero());
    }
}
