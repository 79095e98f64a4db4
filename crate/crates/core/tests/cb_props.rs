use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cb_lab::cb::{cb_monotone_check, cb_satisfies, find_cb_subset, verify_witness};
use cb_lab::gen::plane_ci_config;
use cb_lab::linalg::det;
use cb_lab::projective::{random_projection, PointConfig, ProjPoint};
use cb_lab::{Elem, Field};

fn f101() -> Field {
    Field::prime(101).unwrap()
}

fn pts(field: &Field, coords: &[&[i64]]) -> PointConfig {
    let p: Vec<ProjPoint> = coords.iter().map(|c| ProjPoint::from_i64(field, c).unwrap()).collect();
    PointConfig::new(field, coords[0].len() - 1, p).unwrap()
}

fn collinear_config(field: &Field, m: usize, offset: i64) -> PointConfig {
    let p: Vec<ProjPoint> =
        (0..m as i64).map(|t| ProjPoint::from_i64(field, &[1, t + offset, 2 * (t + offset) + 7]).unwrap()).collect();
    PointConfig::new(field, 2, p).unwrap()
}

// a random family: some collinear points, some conic points, some general ones
fn family(seed: u64) -> PointConfig {
    let field = f101();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<ProjPoint> = Vec::new();
    let a = rng.gen_range(0..7);
    let b = rng.gen_range(0..7);
    let c = rng.gen_range(0..3);
    for t in 0..a {
        out.push(ProjPoint::from_i64(&field, &[1, t, 3 * t + 1]).unwrap());
    }
    for t in 0..b {
        out.push(ProjPoint::from_i64(&field, &[1, t + 20, (t + 20) * (t + 20)]).unwrap());
    }
    for _ in 0..c {
        let v: Vec<i64> = (0..3).map(|_| rng.gen_range(0..101)).collect();
        if let Ok(p) = ProjPoint::from_i64(&field, &v) {
            out.push(p);
        }
    }
    if out.len() < 2 {
        out.push(ProjPoint::from_i64(&field, &[0, 1, 0]).unwrap());
        out.push(ProjPoint::from_i64(&field, &[0, 0, 1]).unwrap());
    }
    out.dedup();
    PointConfig::from_support(&field, 2, out).unwrap()
}

fn random_invertible(field: &Field, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Elem>> {
    loop {
        let t: Vec<Vec<Elem>> = (0..n).map(|_| (0..n).map(|_| field.from_i64(rng.gen_range(0..101))).collect()).collect();
        if !field.is_zero(&det(field, &t)) {
            return t;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariant_under_coordinate_change_and_relabeling(seed in any::<u64>(), r in 1usize..4) {
        let s = family(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let field = s.field().clone();
        let t = random_invertible(&field, 3, &mut rng);
        let moved = s.transform(&t).unwrap();
        let mut perm = s.labels();
        perm.shuffle(&mut rng);
        let shuffled = s.subset(&perm).unwrap();
        let v = cb_satisfies(&s, r).unwrap().satisfied;
        prop_assert_eq!(cb_satisfies(&moved, r).unwrap().satisfied, v);
        prop_assert_eq!(cb_satisfies(&shuffled, r).unwrap().satisfied, v);
    }

    #[test]
    fn downward_closed(seed in any::<u64>(), r in 1usize..5) {
        let s = family(seed);
        let verdicts = cb_monotone_check(&s, r).unwrap();
        for w in verdicts.windows(2) {
            prop_assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn failure_witness_reverifies(seed in any::<u64>(), r in 1usize..4) {
        let s = family(seed);
        let v = cb_satisfies(&s, r).unwrap();
        if let Some(w) = &v.witness {
            prop_assert!(!v.satisfied);
            prop_assert!(verify_witness(&s, r, w).is_ok());
        }
    }

    #[test]
    fn preserved_under_projection(seed in any::<u64>(), r in 1usize..4, on_line in 3usize..9, on_conic in 0usize..8) {
        // points on a line and a conic in P^3; forms on the image pull back
        let field = f101();
        let mut pts: Vec<ProjPoint> = (0..on_line as i64).map(|t| ProjPoint::from_i64(&field, &[1, t, 2 * t, 5]).unwrap()).collect();
        for t in 0..on_conic as i64 {
            let p = ProjPoint::from_i64(&field, &[1, t + 30, (t + 30) * (t + 30), 0]).unwrap();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let s = PointConfig::new(&field, 3, pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pr = random_projection(&s, 2, &mut rng).unwrap();
        prop_assert_eq!(pr.image.len(), s.len());
        if cb_satisfies(&s, r).unwrap().satisfied {
            prop_assert!(cb_satisfies(&pr.image, r).unwrap().satisfied);
        }
    }

    #[test]
    fn collinear_threshold(m in 1usize..14, r in 1usize..7) {
        let s = collinear_config(&f101(), m, 5);
        prop_assert_eq!(cb_satisfies(&s, r).unwrap().satisfied, m >= r + 2);
    }
}

#[test]
fn small_examples() {
    let field = f101();
    assert!(cb_satisfies(&pts(&field, &[&[1, 0, 0], &[1, 1, 1], &[1, 2, 2]]), 1).unwrap().satisfied);
    let tri = pts(&field, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
    let v = cb_satisfies(&tri, 1).unwrap();
    assert!(!v.satisfied);
    verify_witness(&tri, 1, v.witness.as_ref().unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ci = plane_ci_config(2, 2, 101, &mut rng).unwrap();
    assert!(cb_satisfies(&ci.config, 1).unwrap().satisfied);
    assert_eq!(cb_monotone_check(&ci.config, 1).unwrap(), vec![true]);
    assert_eq!(cb_monotone_check(&collinear_config(&field, 4, 0), 2).unwrap(), vec![true, true]);
    assert_eq!(cb_monotone_check(&tri, 2).unwrap(), vec![false, false]);
}

#[test]
fn subset_search_examples() {
    let field = f101();
    for r in 1..5 {
        let s = collinear_config(&field, r + 2, 3);
        let found = find_cb_subset(&s, r, r + 2).unwrap();
        assert_eq!(found.best().unwrap(), &s.labels());
        let short = collinear_config(&field, r + 1, 3);
        assert!(find_cb_subset(&short, r, 1).unwrap().best().is_none());
    }
    let five = pts(&field, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1], &[1, 2, 5]]);
    let search = find_cb_subset(&five, 2, 1).unwrap();
    assert!(search.exhaustive);
    assert!(search.best().is_none());
}

#[test]
fn r_zero_is_rejected() {
    assert!(cb_satisfies(&collinear_config(&f101(), 3, 0), 0).is_err());
}
