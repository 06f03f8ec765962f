use num_complex::Complex;
use proptest::prelude::*;
use warpgeom::algebra::{make_diagonal, make_extended2d, DiagonalAlgebraSpec, Extended2DAlgebraSpec};
use warpgeom::ncalc::{
    apply_d, commutator, normal_form, parse_expression, Generator, NCExpression, NCWord, OrderingPolicy, RewriteContext,
};
use warpgeom::scalar::{ratio, Rational};

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-6i64..=-1, 1i64..=6], 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn generator(d: usize) -> impl Strategy<Value = Generator> {
    (any::<bool>(), 0..d).prop_map(|(diff, i)| if diff { Generator::dx(i) } else { Generator::x(i) })
}

/// A diagonal context in `d ≤ 4` dimensions, with or without Moyal coordinates.
fn context() -> impl Strategy<Value = RewriteContext<Rational>> {
    (1usize..=4)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(nonzero_rational(), d),
                prop::option::of(prop::collection::vec(nonzero_rational(), d - 1)),
            )
        })
        .prop_map(|(a, omega)| {
            let ctx = RewriteContext::new(make_diagonal(&DiagonalAlgebraSpec::new(a).unwrap())).unwrap();
            match omega {
                Some(w) if !w.is_empty() => ctx.with_time_space_moyal(&w).unwrap(),
                _ => ctx,
            }
        })
}

fn context_and_word() -> impl Strategy<Value = (RewriteContext<Rational>, Vec<Generator>)> {
    context().prop_flat_map(|ctx| {
        let d = ctx.dim();
        (Just(ctx), prop::collection::vec(generator(d), 0..=8))
    })
}

fn expression(d: usize) -> impl Strategy<Value = NCExpression<Rational>> {
    prop::collection::vec((prop::collection::vec(generator(d), 0..=5), -5i64..=5, -5i64..=5), 0..4).prop_map(
        |terms| {
            let mut e = NCExpression::zero();
            for (w, re, im) in terms {
                e.add_term(NCWord(w), Complex::new(ratio(re, 1), ratio(im, 1)));
            }
            e
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rewrite_order_does_not_matter((ctx, word) in context_and_word(), seed in any::<u64>()) {
        let e = NCExpression::word(&word);
        let left = normal_form(&e, &ctx.clone().with_policy(OrderingPolicy::Leftmost)).unwrap();
        let right = normal_form(&e, &ctx.clone().with_policy(OrderingPolicy::Rightmost)).unwrap();
        let random = normal_form(&e, &ctx.with_policy(OrderingPolicy::Seeded(seed))).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&left, &random);
        prop_assert!(left.terms().all(|(w, _)| w.is_canonical()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normal_form_is_idempotent((ctx, word) in context_and_word()) {
        let once = normal_form(&NCExpression::word(&word), &ctx).unwrap();
        prop_assert_eq!(normal_form(&once, &ctx).unwrap(), once);
    }

    #[test]
    fn normal_form_is_linear(
        (ctx, a, b) in context().prop_flat_map(|ctx| { let d = ctx.dim(); (Just(ctx), expression(d), expression(d)) }),
        alpha in (-4i64..=4, -4i64..=4),
        beta in (-4i64..=4, -4i64..=4),
    ) {
        let alpha = Complex::new(ratio(alpha.0, 1), ratio(alpha.1, 1));
        let beta = Complex::new(ratio(beta.0, 1), ratio(beta.1, 1));
        let combined = normal_form(&a.scale(&alpha).add(&b.scale(&beta)), &ctx).unwrap();
        let separate = normal_form(&a, &ctx).unwrap().scale(&alpha).add(&normal_form(&b, &ctx).unwrap().scale(&beta));
        prop_assert_eq!(combined, separate);
    }

    #[test]
    fn d_squared_vanishes_on_polynomials(
        (ctx, monomials) in context().prop_flat_map(|ctx| {
            let d = ctx.dim();
            (Just(ctx), prop::collection::vec((prop::collection::vec(0..d, 0..=5), -3i64..=3), 1..4))
        }),
    ) {
        let mut p = NCExpression::zero();
        for (indices, c) in monomials {
            let word: Vec<Generator> = indices.into_iter().map(Generator::x).collect();
            p.add_term(NCWord(word), Complex::new(ratio(c, 1), Rational::from_integer(0.into())));
        }
        let p = normal_form(&p, &ctx).unwrap();
        let dd = apply_d(&apply_d(&p, &ctx).unwrap(), &ctx).unwrap();
        prop_assert!(normal_form(&dd, &ctx).unwrap().is_zero());
    }

    #[test]
    fn commutator_round_trips_structure_constants(ctx in context(), mu in 0usize..4, nu in 0usize..4) {
        let d = ctx.dim();
        let (mu, nu) = (mu % d, nu % d);
        let r = commutator(&NCExpression::x(mu), &NCExpression::dx(nu), &ctx).unwrap();
        let mut expected = NCExpression::zero();
        for sigma in 0..d {
            expected.add_term(NCWord(vec![Generator::dx(sigma)]), ctx.constants().entry(mu, nu, sigma));
        }
        prop_assert_eq!(r, expected);
    }
}

#[test]
fn extended_algebra_is_confluent() {
    let spec = Extended2DAlgebraSpec::new(ratio(2, 1), ratio(1, 1), ratio(1, 1), ratio(-1, 1), ratio(0, 1), ratio(0, 1));
    let ctx = RewriteContext::new(make_extended2d(&spec)).unwrap();
    let words: Vec<Vec<Generator>> = (0..4096u32)
        .map(|code| (0..6).map(|k| {
            let bits = (code >> (2 * k)) & 3;
            if bits & 1 == 1 { Generator::dx((bits >> 1) as usize) } else { Generator::x((bits >> 1) as usize) }
        }).collect())
        .collect();
    for w in words {
        let e = NCExpression::word(&w);
        let left = normal_form(&e, &ctx.clone().with_policy(OrderingPolicy::Leftmost)).unwrap();
        let right = normal_form(&e, &ctx.clone().with_policy(OrderingPolicy::Rightmost)).unwrap();
        assert_eq!(left, right, "{w:?}");
    }
}

#[test]
fn parse_normalize_print_round_trip() {
    let ctx = RewriteContext::new(make_diagonal(&DiagonalAlgebraSpec::new(vec![1.0, 0.5]).unwrap())).unwrap();
    let e = parse_expression("dx1*x1*x0 + 2*dx0").unwrap();
    let n = normal_form(&e, &ctx).unwrap();
    let again = parse_expression(&n.to_string()).unwrap();
    assert_eq!(normal_form(&again, &ctx).unwrap(), n);
}
