use super::*;
use crate::algebra::{make_diagonal, make_extended2d, DiagonalAlgebraSpec, Extended2DAlgebraSpec};
use crate::scalar::{ratio, Rational};

fn diag_ctx(a: &[f64]) -> RewriteContext<f64> {
    RewriteContext::new(make_diagonal(&DiagonalAlgebraSpec::new(a.to_vec()).unwrap())).unwrap()
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn w(gens: &[Generator]) -> NCWord {
    NCWord(gens.to_vec())
}

use Generator as G;

#[test]
fn differential_moves_right() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    let e = NCExpression::word(&[G::dx(0), G::x(0)]);
    let n = normal_form(&e, &ctx).unwrap();
    assert_eq!(n.len(), 2);
    assert_eq!(n.coefficient(&w(&[G::x(0), G::dx(0)])), c(1.0, 0.0));
    assert_eq!(n.coefficient(&w(&[G::dx(0)])), c(0.0, -1.0));
}

#[test]
fn coordinates_sort_with_and_without_moyal() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    let e = NCExpression::word(&[G::x(1), G::x(0)]).scale(&c(3.0, 0.0));
    let n = normal_form(&e, &ctx).unwrap();
    assert_eq!(n, NCExpression::word(&[G::x(0), G::x(1)]).scale(&c(3.0, 0.0)));

    let omega = 0.7;
    let ctx = ctx.with_time_space_moyal(&[omega]).unwrap();
    let n = normal_form(&NCExpression::word(&[G::x(1), G::x(0)]), &ctx).unwrap();
    assert_eq!(n.coefficient(&w(&[G::x(0), G::x(1)])), c(1.0, 0.0));
    assert_eq!(n.coefficient(&NCWord::empty()), c(0.0, -omega));
}

#[test]
fn commutator_reproduces_structure_constants() {
    let ctx = diag_ctx(&[2.0, 1.0]);
    let r = commutator(&NCExpression::x(0), &NCExpression::dx(0), &ctx).unwrap();
    assert_eq!(r, NCExpression::dx(0).scale(&c(0.0, 2.0)));

    let spec = Extended2DAlgebraSpec::new(ratio(2, 1), ratio(1, 1), ratio(1, 1), ratio(-1, 1), ratio(0, 1), ratio(0, 1));
    let constants = make_extended2d(&spec);
    let ctx = RewriteContext::new(constants.clone()).unwrap();
    for mu in 0..2 {
        for nu in 0..2 {
            let r = commutator(&NCExpression::x(mu), &NCExpression::dx(nu), &ctx).unwrap();
            let mut expected = NCExpression::zero();
            for sigma in 0..2 {
                expected.add_term(w(&[G::dx(sigma)]), constants.entry(mu, nu, sigma));
            }
            assert_eq!(r, expected);
        }
    }
}

#[test]
fn self_commutator_vanishes() {
    let ctx = diag_ctx(&[1.0, -2.0, 0.5]);
    let a = parse_expression("x0*dx2 + 3*x1*x0 - i*dx1*x2").unwrap();
    assert!(commutator(&a, &a, &ctx).unwrap().is_zero());
}

#[test]
fn jacobi_sum_vanishes_exactly() {
    let spec = Extended2DAlgebraSpec::new(ratio(2, 1), ratio(1, 1), ratio(1, 1), ratio(-1, 1), ratio(0, 1), ratio(0, 1));
    let ctx = RewriteContext::new(make_extended2d(&spec)).unwrap();
    let x = |i| NCExpression::<Rational>::x(i);
    let dx = |i| NCExpression::<Rational>::dx(i);
    for lambda in 0..2 {
        for mu in 0..2 {
            for nu in 0..2 {
                let t1 = commutator(&x(lambda), &commutator(&x(mu), &dx(nu), &ctx).unwrap(), &ctx).unwrap();
                let t2 = commutator(&x(mu), &commutator(&dx(nu), &x(lambda), &ctx).unwrap(), &ctx).unwrap();
                let t3 = commutator(&dx(nu), &commutator(&x(lambda), &x(mu), &ctx).unwrap(), &ctx).unwrap();
                assert!(t1.add(&t2).add(&t3).is_zero());
            }
        }
    }
}

#[test]
fn inconsistent_context_rejected() {
    let spec = Extended2DAlgebraSpec::new(ratio(1, 1), ratio(0, 1), ratio(1, 1), ratio(1, 1), ratio(1, 1), ratio(0, 1));
    assert!(matches!(
        RewriteContext::new(make_extended2d(&spec)),
        Err(NcError::Inconsistent { .. })
    ));
    let mut asym = StructureConstants::<f64>::zero(2);
    asym.set_imag(0, 1, 0, 1.0);
    assert_eq!(RewriteContext::new(asym).unwrap_err(), NcError::Asymmetric);
}

#[test]
fn bad_moyal_rejected() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    assert!(ctx.clone().with_moyal(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    assert!(ctx.with_time_space_moyal(&[1.0, 2.0]).is_err());
}

#[test]
fn word_cap_is_an_error() {
    let mut ctx = diag_ctx(&[1.0]);
    ctx.max_word_len = 4;
    let e = NCExpression::word(&[G::x(0); 5]);
    assert_eq!(normal_form(&e, &ctx).unwrap_err(), NcError::WordTooLong { len: 5, cap: 4 });
}

#[test]
fn out_of_range_index() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    assert_eq!(
        normal_form(&NCExpression::x(2), &ctx).unwrap_err(),
        NcError::IndexOutOfRange { index: 2, d: 2 }
    );
}

#[test]
fn d_follows_leibniz() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    let d = apply_d(&NCExpression::word(&[G::x(0), G::x(1)]), &ctx).unwrap();
    let expected = parse_expression("dx0*x1 + x0*dx1").unwrap();
    assert_eq!(d, expected);
    assert!(apply_d(&NCExpression::one(), &ctx).unwrap().is_zero());
    assert!(apply_d(&NCExpression::dx(0), &ctx).unwrap().is_zero());
}

#[test]
fn d_squared_vanishes() {
    let ctx = diag_ctx(&[1.0, 2.0, -1.0]);
    let e = NCExpression::word(&[G::x(0), G::x(1), G::x(2)]);
    let dd = apply_d(&apply_d(&e, &ctx).unwrap(), &ctx).unwrap();
    assert!(normal_form(&dd, &ctx).unwrap().is_zero());
}

#[test]
fn grading_cap_enforced() {
    let ctx = diag_ctx(&[1.0, 1.0]);
    let two_form = NCExpression::word(&[G::dx(0), G::dx(1)]);
    assert_eq!(apply_d(&two_form, &ctx).unwrap_err(), NcError::GradingCap { degree: 2, cap: 2 });
}

#[test]
fn star_reverses_and_conjugates() {
    let e = parse_expression("(1 + 2i)*x0*dx1").unwrap();
    let s = e.star();
    assert_eq!(s.coefficient(&w(&[G::dx(1), G::x(0)])), c(1.0, -2.0));
    assert_eq!(s.star(), e);
}

#[test]
fn policies_agree_on_exact_rationals() {
    let constants = make_diagonal(&DiagonalAlgebraSpec::new(vec![ratio(1, 2), ratio(3, 1), ratio(-2, 1)]).unwrap());
    let base = RewriteContext::new(constants).unwrap().with_time_space_moyal(&[ratio(1, 3), ratio(2, 1)]).unwrap();
    let e = NCExpression::<Rational>::word(&[G::dx(2), G::x(2), G::x(1), G::dx(0), G::x(0), G::x(2)]);
    let left = normal_form(&e, &base.clone().with_policy(OrderingPolicy::Leftmost)).unwrap();
    let right = normal_form(&e, &base.clone().with_policy(OrderingPolicy::Rightmost)).unwrap();
    assert_eq!(left, right);
    for seed in 0..20 {
        let s = normal_form(&e, &base.clone().with_policy(OrderingPolicy::Seeded(seed))).unwrap();
        assert_eq!(s, left);
    }
    assert!(left.terms().all(|(w, _)| w.is_canonical()));
}
