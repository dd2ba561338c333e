use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use gauss_malliavin::constants::{c_finite_dim, c_finite_dim_recursive, c_poincare, poincare_lower_bound};
use gauss_malliavin::functional::givens;
use gauss_malliavin::hermite::{chaos_identity_check, chaos_l2_sq, from_hermite, to_hermite};
use gauss_malliavin::integrate::lq_norm;
use gauss_malliavin::malliavin::{derivative, mean_derivative};
use gauss_malliavin::ou::{apply, apply_diagonal, OUTime};
use gauss_malliavin::poly::{factorial, ratio};
use gauss_malliavin::{MultiIndex, PolyFunctional, QPoly, QuadratureConfig};

fn poly(dim: usize) -> impl Strategy<Value = QPoly> {
    let term = (prop::collection::vec(0u32..=3, dim), -6i64..=6, 1i64..=4);
    prop::collection::vec(term, 1..6).prop_map(move |terms| {
        let terms = terms
            .into_iter()
            .filter(|(e, _, _)| e.iter().sum::<u32>() <= 4)
            .map(|(e, n, d)| (MultiIndex::new(e), ratio(n, d)));
        QPoly::from_terms(dim, terms).unwrap()
    })
}

fn functional(max_dim: usize) -> impl Strategy<Value = PolyFunctional> {
    (1..=max_dim).prop_flat_map(|d| poly(d).prop_map(PolyFunctional::scalar))
}

fn decay() -> impl Strategy<Value = OUTime> {
    (1i64..=9).prop_map(|n| OUTime::from_decay(ratio(n, 10)).unwrap())
}

fn fact(k: u32) -> BigRational {
    BigRational::from_integer(factorial(k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_round_trip(p in (1usize..=3).prop_flat_map(poly)) {
        let e = to_hermite(&p, p.dim()).unwrap();
        prop_assert_eq!(from_hermite(&e), p);
    }

    #[test]
    fn parseval(f in functional(3)) {
        let total = (0..=f.degree()).map(|k| chaos_l2_sq(&f, k)).fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b);
        prop_assert_eq!(total, f.l2_norm_sq());
    }

    #[test]
    fn chaos_identity_is_exact(f in functional(3)) {
        for k in 0..=f.degree() + 1 {
            prop_assert_eq!(chaos_identity_check(&f, k, &mean_derivative(&f, k as usize)).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivatives_are_symmetric(f in functional(3)) {
        prop_assert!(derivative(&f, 2).is_symmetric());
        prop_assert!(derivative(&f, 3).is_symmetric());
    }

    #[test]
    fn rotation_preserves_l2(p in poly(2), theta in 0.0f64..6.3) {
        let f = PolyFunctional::scalar(p);
        let g = f.rotate(&givens(2, 0, 1, theta)).unwrap();
        let (a, b) = (f.l2_norm_sq(), g.l2_norm_sq());
        let (a, b): (f64, f64) = (num_traits::ToPrimitive::to_f64(&a).unwrap(), num_traits::ToPrimitive::to_f64(&b).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn mehler_matches_diagonal(f in functional(3), t in decay()) {
        prop_assert_eq!(apply(&f, &t), apply_diagonal(&f, &t));
    }

    #[test]
    fn semigroup_law(f in functional(3), s in decay(), t in decay()) {
        prop_assert_eq!(apply(&apply(&f, &s), &t), apply(&f, &s.then(&t)));
    }

    #[test]
    fn ou_preserves_mean_and_contracts(f in functional(3), t in decay()) {
        let g = apply(&f, &t);
        prop_assert_eq!(g.mean(), f.mean());
        let a2 = t.decay() * t.decay();
        prop_assert!(g.centered().l2_norm_sq() <= a2 * f.centered().l2_norm_sq());
    }

    #[test]
    fn poincare_q2_exact(f in functional(3)) {
        let grad: BigRational = (0..f.dim()).map(|i| f.partial(i).unwrap().l2_norm_sq()).fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b);
        prop_assert!(f.centered().l2_norm_sq() <= grad);
    }

    #[test]
    fn expected_derivative_q2_exact(f in functional(3), l in 1u32..=4) {
        prop_assert!(mean_derivative(&f, l as usize).norm_sq() <= fact(l) * f.l2_norm_sq());
    }

    #[test]
    fn lower_bound_below_constant(q in 1.0f64..20.0) {
        prop_assert!(poincare_lower_bound(q).unwrap() <= c_poincare(q).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn finite_dim_constant_forms_agree(l in 1u32..=4, n in 1u32..=8) {
        let (a, b) = (c_finite_dim(l, n).unwrap(), c_finite_dim_recursive(l, n).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a, "{} vs {}", a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lq_norms_increase_with_q(f in functional(2)) {
        prop_assume!(!f.is_zero());
        let cfg = QuadratureConfig::default();
        let norms: Vec<_> = [1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|&q| lq_norm(&f, q, &cfg).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0].value <= w[1].value + w[0].error_estimate + w[1].error_estimate + 1e-12 * w[1].value);
        }
    }
}
