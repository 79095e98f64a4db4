use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use cb_lab::linalg::{det, rank, rank_and_kernel, rref};
use cb_lab::projective::{eval_matrix, PointConfig, ProjPoint};
use cb_lab::{Elem, Field};

// plain Gauss-Jordan over BigRational
fn oracle_rref(m: &[Vec<BigRational>], cols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut rows = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pr = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for j in 0..cols {
                    row[j] = &row[j] - &f * &pr[j];
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #[test]
    fn bareiss_matches_gauss_jordan(entries in prop::collection::vec((-9i64..10, 1i64..5), 20), low_rank in any::<bool>()) {
        let field = Field::rational();
        let (rows, cols) = (4, 5);
        let mut m: Vec<Vec<BigRational>> =
            (0..rows).map(|i| (0..cols).map(|j| { let (n, d) = entries[i * cols + j]; q(n, d) }).collect()).collect();
        if low_rank {
            let combo: Vec<BigRational> = (0..cols).map(|j| &m[0][j] * q(2, 3) - &m[1][j]).collect();
            m[3] = combo;
        }
        let elems: Vec<Vec<Elem>> = m.iter().map(|r| r.iter().map(|x| Elem::Rational(x.clone())).collect()).collect();
        let got = rref(&field, &elems, cols);
        let (want, pivots) = oracle_rref(&m, cols);
        prop_assert_eq!(&got.pivots, &pivots);
        let got_rows: Vec<Vec<BigRational>> = got.rows.iter().map(|r| r.iter().map(|x| match x {
            Elem::Rational(v) => v.clone(),
            _ => unreachable!(),
        }).collect()).collect();
        prop_assert_eq!(got_rows, want);
    }

    #[test]
    fn rank_nullity(entries in prop::collection::vec(0u32..7, 12)) {
        let field = Field::prime(7).unwrap();
        let m: Vec<Vec<Elem>> = (0..3).map(|i| (0..4).map(|j| field.from_prime(entries[i * 4 + j])).collect()).collect();
        let (rk, ker) = rank_and_kernel(&field, &m, 4);
        prop_assert_eq!(rk + ker.len(), 4);
        for v in &ker {
            for row in &m {
                let s = row.iter().zip(v).fold(field.zero(), |acc, (a, b)| field.add(&acc, &field.mul(a, b)));
                prop_assert!(field.is_zero(&s));
            }
        }
    }
}

#[test]
fn identity_and_zero_matrices() {
    let field = Field::prime(101).unwrap();
    let id: Vec<Vec<Elem>> = (0..3).map(|i| (0..3).map(|j| field.from_i64((i == j) as i64)).collect()).collect();
    let (rk, ker) = rank_and_kernel(&field, &id, 3);
    assert_eq!((rk, ker.len()), (3, 0));
    let z = vec![vec![field.zero(); 4]; 2];
    let (rk, ker) = rank_and_kernel(&field, &z, 4);
    assert_eq!((rk, ker.len()), (0, 4));
}

#[test]
fn vandermonde_rank_against_minor_oracle() {
    let field = Field::prime(101).unwrap();
    let nodes = [3i64, 17, 40, 99];
    let v: Vec<Vec<Elem>> = nodes.iter().map(|&x| (0..3).map(|e| field.pow(&field.from_i64(x), e)).collect()).collect();
    assert_eq!(rank(&field, &v, 3), 3);
    // a nonzero 3x3 minor certifies rank 3
    assert!(!field.is_zero(&det(&field, &v[..3])));
}

#[test]
fn evaluation_matrix_examples() {
    let field = Field::prime(101).unwrap();
    let pts = vec![ProjPoint::from_i64(&field, &[1, 0]).unwrap(), ProjPoint::from_i64(&field, &[0, 1]).unwrap()];
    let s = PointConfig::new(&field, 1, pts).unwrap();
    let m = eval_matrix(&s, 1);
    assert_eq!(m, vec![vec![field.one(), field.zero()], vec![field.zero(), field.one()]]);
    let three: Vec<ProjPoint> = [[1, 0], [0, 1], [1, 1]].iter().map(|c| ProjPoint::from_i64(&field, c).unwrap()).collect();
    let s = PointConfig::new(&field, 1, three).unwrap();
    assert_eq!(rank(&field, &eval_matrix(&s, 1), 2), 2);
    let five: Vec<ProjPoint> = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 2, 5]]
        .iter()
        .map(|c| ProjPoint::from_i64(&field, c).unwrap())
        .collect();
    let s = PointConfig::new(&field, 2, five).unwrap();
    assert_eq!(rank(&field, &eval_matrix(&s, 2), 6), 5);
}

#[test]
fn duplicate_points_are_rejected() {
    let field = Field::prime(101).unwrap();
    let pts = vec![ProjPoint::from_i64(&field, &[1, 2, 3]).unwrap(), ProjPoint::from_i64(&field, &[2, 4, 6]).unwrap()];
    assert!(PointConfig::new(&field, 2, pts).is_err());
}
