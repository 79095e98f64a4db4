use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use cb_lab::bounds::{
    binom2, cc_bound, ceil_div, dagger_check, floor_div, k_prime, ledger_conclusions, ledger_sweep, m_double_prime,
    main_bound, main_implies_dagger,
};

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

proptest! {
    #[test]
    fn rounding_matches_rationals(a in -100_000i64..100_000, b in (-500i64..500).prop_filter("nonzero", |b| *b != 0)) {
        let q = ratio(a, b);
        prop_assert_eq!(BigInt::from(floor_div(a, b)), q.floor().to_integer());
        prop_assert_eq!(BigInt::from(ceil_div(a, b)), q.ceil().to_integer());
    }

    #[test]
    fn derived_quantities_match_rationals(m1 in 1i64..2000, r in 1i64..200, k in 1i64..7, k2 in 1i64..7, k3 in 1i64..7) {
        prop_assert_eq!(BigInt::from(k_prime(m1, r, k) + 1), ratio(m1 + k * k - k - 1, r).ceil().to_integer());
        let k1 = k_prime(m1, r, k);
        let want = (ratio(k3, k2) * BigRational::from_integer(BigInt::from(m1 - (k1 - k2) * (k1 * k1 - k2)))).ceil().to_integer();
        prop_assert_eq!(BigInt::from(m_double_prime(m1, k1, k2, k3)), want);
    }

    #[test]
    fn main_bound_identity(n in 1i64..60, k in 1i64..9, extra in 0i64..80) {
        let d = main_bound(n, k) + extra;
        let rep = main_implies_dagger(n, k, d).unwrap();
        prop_assert!(rep.verdict, "{:?}", rep);
    }
}

#[test]
fn dagger_examples() {
    assert!(dagger_check(11, 5, 1).unwrap().verdict);
    let fail = dagger_check(11, 4, 1).unwrap();
    let v = fail.first_violation().unwrap();
    assert_eq!((v.name.as_str(), v.lhs, v.rhs), ("dagger_ii", 11, 13));
    let fail = dagger_check(100, 6, 2).unwrap();
    let v = fail.first_violation().unwrap();
    assert_eq!((v.name.as_str(), v.lhs, v.rhs), ("dagger_i_r_ge_2k2-1", 6, 7));
    assert!(dagger_check(0, 1, 1).is_err());
}

#[test]
fn ledger_examples() {
    let rep = ledger_conclusions(11, 5, 1).unwrap();
    assert!(rep.verdict);
    let two = rep.checks.iter().find(|c| c.name == "2_kd_le").unwrap();
    assert_eq!((two.lhs, two.rhs), (11, 11));
    // m' = 11: k' = 1, m'' = 11, l = 1, (3a) value 2*11 - 1 - 11
    assert_eq!(k_prime(11, 5, 1), 1);
    assert_eq!(k_prime(9, 5, 1), 1);
    assert_eq!(m_double_prime(11, 1, 1, 1), 11);
    assert_eq!(2 * 11 - binom2(2) - 11, 10);
    assert!(ledger_conclusions(11, 4, 1).is_err());
}

#[test]
fn main_bound_examples() {
    assert_eq!(main_bound(2, 1), 11);
    assert_eq!(main_bound(1, 1), 7);
    assert_eq!(main_bound(2, 2), 37);
    for n in 1..50 {
        assert_eq!(main_bound(n, 1), 4 * n + 3);
    }
    let rep = main_implies_dagger(2, 2, 37).unwrap();
    assert!(rep.verdict);
    let d2 = rep.checks.iter().find(|c| c.name == "dagger_ii").unwrap();
    assert_eq!((d2.lhs, d2.rhs), (37, 37));
    let rep = main_implies_dagger(3, 2, main_bound(3, 2)).unwrap();
    let l = rep.checks.iter().find(|c| c.name == "identity_lhs_eq_rhs").unwrap();
    assert_eq!(l.lhs, l.rhs);
    assert!(main_implies_dagger(2, 1, 10).is_err());
}

#[test]
fn cc_examples() {
    let rep = cc_bound(2, 1, 0, 7).unwrap();
    assert!(rep.hypothesis.pass && rep.inequality.pass);
    assert_eq!((rep.m, rep.rr, rep.inequality.rhs), (0, 0, 1));
    let rep = cc_bound(3, 2, 1, 11).unwrap();
    assert!(rep.hypothesis.pass);
    assert_eq!((rep.m, rep.rr), (0, 1));
    assert_eq!(rep.inequality.rhs, 2 * (6 - 1 - 1) - 2);
    assert!(rep.implication);
    let edge = cc_bound(2, 1, 0, 6).unwrap();
    assert!(!edge.hypothesis.pass);
    assert!(cc_bound(2, 1, 2, 7).is_err());
}

#[test]
fn cc_implication_holds_on_a_grid() {
    for n in 1..12 {
        for k in 1..8 {
            for dz in 0..n {
                for d in 1..80 {
                    assert!(cc_bound(n, k, dz, d).unwrap().implication, "n={} k={} dimZ={} d={}", n, k, dz, d);
                }
            }
        }
    }
}

#[test]
fn small_sweep_rows_are_admissible() {
    let (rows, summary) = ledger_sweep(3, 60).unwrap();
    assert_eq!(summary.violations, 0);
    assert_eq!(rows.len() as u64, summary.admissible);
    assert!(rows.iter().all(|r| dagger_check(r.d, r.r, r.k).unwrap().verdict));
    assert!(rows.iter().any(|r| (r.d, r.r, r.k) == (11, 5, 1)));
}
