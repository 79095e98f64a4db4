use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cb_lab::cb::cb_satisfies;
use cb_lab::curve::{
    bootstrap_curve, cone_intersection_curve, max_collinear, pigeonhole_component, plane_curve_fit,
    projection_component_split, squarefree_part, CurveRepr, CurveWitness,
};
use cb_lab::form::{form_divides, Form};
use cb_lab::projective::{PointConfig, ProjPoint};
use cb_lab::{Error, Field};

fn f101() -> Field {
    Field::prime(101).unwrap()
}

fn config(field: &Field, coords: &[Vec<i64>]) -> PointConfig {
    let p: Vec<ProjPoint> = coords.iter().map(|c| ProjPoint::from_i64(field, c).unwrap()).collect();
    PointConfig::new(field, coords[0].len() - 1, p).unwrap()
}

fn general(field: &Field, n: usize, m: usize, seed: u64) -> PointConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<ProjPoint> = Vec::new();
    while pts.len() < m {
        let c: Vec<i64> = (0..=n).map(|_| rng.gen_range(0..101)).collect();
        if let Ok(p) = ProjPoint::from_i64(field, &c) {
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    PointConfig::new(field, n, pts).unwrap()
}

fn line(field: &Field, c: [i64; 3]) -> Form {
    Form::linear(field, c.iter().map(|&x| field.from_i64(x)).collect())
}

// x0 x2 - x1^2
fn conic(field: &Field) -> Form {
    Form::from_terms(field, 3, 2, &[(vec![1, 0, 1], field.one()), (vec![0, 2, 0], field.from_i64(-1))]).unwrap()
}

#[test]
fn max_collinear_examples() {
    let field = f101();
    let s = config(&field, &[vec![1, 0, 0], vec![1, 1, 0], vec![1, 2, 0], vec![1, 3, 0], vec![1, 1, 1]]);
    let (l, labels) = max_collinear(&s).unwrap();
    assert_eq!(labels, vec![0, 1, 2, 3]);
    assert!(labels.iter().all(|&i| l.contains(&field, s.point(i))));
    let g = config(&field, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]);
    assert_eq!(max_collinear(&g).unwrap().1.len(), 2);
    let d = config(&field, &(0..11).map(|t| vec![1, t, 3 * t + 2, 5 - t]).collect::<Vec<_>>());
    assert_eq!(max_collinear(&d).unwrap().1.len(), 11);
}

#[test]
fn plane_fit_examples() {
    let field = f101();
    let five = general(&field, 2, 5, 3);
    let c = plane_curve_fit(&five, 2).unwrap().unwrap();
    assert_eq!(c.degree(), 2);
    assert!(five.points().iter().all(|p| c.vanishes_at(p)));
    let six = general(&field, 2, 6, 4);
    assert!(plane_curve_fit(&six, 2).unwrap().is_none());
    let three = config(&field, &[vec![1, 0, 1], vec![1, 1, 3], vec![1, 2, 5]]);
    let l = plane_curve_fit(&three, 1).unwrap().unwrap();
    assert_eq!(l.degree(), 1);
    assert!(three.points().iter().all(|p| l.vanishes_at(p)));
}

#[test]
fn squarefree_examples() {
    let field = f101();
    let l = line(&field, [1, 2, 3]);
    let sq = squarefree_part(&l.pow(2)).unwrap();
    assert!(!sq.reduced);
    assert_eq!(sq.form.degree(), 1);
    assert!(form_divides(&sq.form, &l) && form_divides(&l, &sq.form));
    let q = conic(&field);
    let sq = squarefree_part(&q).unwrap();
    assert!(sq.reduced);
    assert_eq!(sq.form.normalized(), q.normalized());
    let lc = l.mul(&q);
    let sq = squarefree_part(&lc).unwrap();
    assert!(sq.reduced);
    assert_eq!(sq.form.degree(), 3);
}

#[test]
fn cone_examples() {
    let field = f101();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let on_line = config(&field, &(0..6).map(|t| vec![1, t, 2 * t, 3 * t + 1]).collect::<Vec<_>>());
    let w = cone_intersection_curve(&on_line, 1, &mut rng).unwrap().unwrap();
    assert_eq!(w.labels(), on_line.labels().as_slice());
    let nine = general(&field, 3, 9, 6);
    assert!(cone_intersection_curve(&nine, 2, &mut rng).unwrap().is_none());
    let cubic = config(&field, &(1..11).map(|t| vec![1, t, t * t, t * t * t]).collect::<Vec<_>>());
    let w = cone_intersection_curve(&cubic, 3, &mut rng).unwrap().unwrap();
    assert_eq!(w.labels().len(), 10);
    assert!(matches!(w.repr(), CurveRepr::Cones(_)));
}

#[test]
fn split_examples() {
    let field = f101();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let on_line = config(&field, &(0..9).map(|t| vec![1, t, 2 * t, 3 * t + 1]).collect::<Vec<_>>());
    let r = projection_component_split(&on_line, 1, &mut rng).unwrap();
    assert_eq!(r.k_prime, 1);
    assert_eq!(r.labels, on_line.labels());
    let plane = config(&field, &[vec![1, 0, 0], vec![0, 1, 0]]);
    assert!(matches!(projection_component_split(&plane, 1, &mut rng), Err(Error::Precondition(_))));
}

#[test]
fn bootstrap_examples() {
    let field = f101();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let seven = config(&field, &(0..7).map(|t| vec![1, t, 2 * t + 1, 5 * t]).collect::<Vec<_>>());
    let b = bootstrap_curve(&seven, 5, 1, &mut rng).unwrap();
    assert_eq!(b.k_prime, 1);
    assert_eq!(b.labels, seven.labels());

    // a plane conic placed in the hyperplane x3 = x0 + x1 of P^3
    let conic8 = config(&field, &(1..9).map(|t| vec![1, t, t * t, 1 + t]).collect::<Vec<_>>());
    // eight conic points only satisfy CB(r) for r <= 3
    assert!(!cb_satisfies(&conic8, 7).unwrap().satisfied);
    assert!(matches!(bootstrap_curve(&conic8, 7, 2, &mut rng), Err(Error::Precondition(_))));
    let b = bootstrap_curve(&conic8, 3, 2, &mut rng).unwrap();
    assert!(b.k_prime == 1 || b.k_prime == 2);
    let kp = b.k_prime;
    assert!(b.labels.len() >= 8 - (2 - kp) * (4 - kp));
    assert!(b.labels.iter().all(|&i| b.witness.contains(conic8.point(i))));

    let plane = config(&field, &(0..6).map(|t| vec![1, t, 4 * t + 9]).collect::<Vec<_>>());
    let b = bootstrap_curve(&plane, 3, 1, &mut rng).unwrap();
    assert_eq!(b.chain.len(), 1);
    assert_eq!(b.labels.len(), 6);
}

#[test]
fn pigeonhole_examples() {
    let field = f101();
    let mut coords: Vec<Vec<i64>> = (1..8).map(|t| vec![1, t, 0]).collect();
    coords.extend((1..4).map(|t| vec![1, 0, t]));
    let s = config(&field, &coords);
    let l1 = CurveWitness::on_config(&s, 1, CurveRepr::Plane(line(&field, [0, 0, 1]))).unwrap();
    let l2 = CurveWitness::on_config(&s, 1, CurveRepr::Plane(line(&field, [0, 1, 0]))).unwrap();
    let u = CurveWitness::on_config(&s, 2, CurveRepr::Union(vec![l1.clone(), l2])).unwrap();
    assert_eq!(u.labels().len(), 10);
    let p = pigeonhole_component(&u).unwrap();
    assert_eq!((p.degree, p.labels.len(), p.promised), (1, 7, 5));
    let single = pigeonhole_component(&l1).unwrap();
    assert_eq!(single.labels, l1.labels());

    let mut coords: Vec<Vec<i64>> = (1..10).map(|t| vec![1, t, t * t]).collect();
    coords.extend((20..23).map(|t| vec![1, t, -1 - t]));
    let s = config(&field, &coords);
    let c = CurveWitness::on_config(&s, 2, CurveRepr::Plane(conic(&field))).unwrap();
    let l = CurveWitness::on_config(&s, 1, CurveRepr::Plane(line(&field, [1, 1, 1]))).unwrap();
    assert_eq!((c.labels().len(), l.labels().len()), (9, 3));
    let u = CurveWitness::on_config(&s, 3, CurveRepr::Union(vec![l, c])).unwrap();
    let p = pigeonhole_component(&u).unwrap();
    assert_eq!((p.degree, p.labels.len(), p.promised), (2, 9, 8));
}

#[test]
fn witness_membership_is_reverified() {
    let field = f101();
    let s = config(&field, &[vec![1, 0, 0], vec![1, 1, 0], vec![1, 1, 1]]);
    let bad = CurveWitness::with_labels(&s, 1, CurveRepr::Plane(line(&field, [0, 0, 1])), vec![0, 2]);
    assert!(matches!(bad, Err(Error::MathAssertion(_))));
    let w = CurveWitness::on_config(&s, 1, CurveRepr::Plane(line(&field, [0, 0, 1]))).unwrap();
    let back = CurveWitness::from_json(&s, &w.to_json()).unwrap();
    assert_eq!(back, w);
}
