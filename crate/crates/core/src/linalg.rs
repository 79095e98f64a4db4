//! Exact dense linear algebra over a [`Field`].
//!
//! Prime fields run on raw `u32` residues, extensions use plain
//! Gauss-Jordan on field elements, and the rationals go through
//! fraction-free (Bareiss) forward elimination on integerized rows followed
//! by rational back-substitution. All routines return the reduced row
//! echelon form, so kernel bases are canonical.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::{fp, Elem, Field, FieldDescriptor};

pub type Matrix = Vec<Vec<Elem>>;

/// Reduced row echelon form: nonzero rows only, `pivots[i]` is the pivot
/// column of `rows[i]` (pivot entries equal 1).
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Matrix,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
    vec![vec![field.zero(); cols]; rows]
}

pub fn identity(field: &Field, n: usize) -> Matrix {
    let mut m = zeros(field, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = field.one();
    }
    m
}

pub fn transpose(m: &[Vec<Elem>], cols: usize) -> Matrix {
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec(field: &Field, a: &[Vec<Elem>], v: &[Elem]) -> Vec<Elem> {
    a.iter().map(|row| dot(field, row, v)).collect()
}

pub fn dot(field: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    let mut acc = field.zero();
    for (x, y) in a.iter().zip(b) {
        if field.is_zero(x) || field.is_zero(y) {
            continue;
        }
        acc = field.add(&acc, &field.mul(x, y));
    }
    acc
}

pub fn mat_mul(field: &Field, a: &[Vec<Elem>], b: &[Vec<Elem>], b_cols: usize) -> Matrix {
    a.iter()
        .map(|row| (0..b_cols).map(|j| dot(field, row, &b.iter().map(|r| r[j].clone()).collect::<Vec<_>>())).collect())
        .collect()
}

pub fn rref(field: &Field, m: &[Vec<Elem>], cols: usize) -> Rref {
    match field.descriptor() {
        FieldDescriptor::Finite { m: 1, p, .. } => {
            let raw: Vec<Vec<u32>> =
                m.iter().map(|r| r.iter().map(|x| field.to_prime(x).unwrap()).collect()).collect();
            let (rows, pivots) = fp_rref(*p, raw, cols);
            Rref {
                rows: rows.into_iter().map(|r| r.into_iter().map(|x| field.from_prime(x)).collect()).collect(),
                pivots,
                cols,
            }
        }
        FieldDescriptor::Finite { .. } => gauss_jordan(field, m, cols),
        FieldDescriptor::Rational => bareiss_rref(field, m, cols),
    }
}

pub fn rank(field: &Field, m: &[Vec<Elem>], cols: usize) -> usize {
    rref(field, m, cols).rank()
}

/// Canonical kernel basis read off the RREF: one vector per free column,
/// with a 1 in that column.
pub fn kernel_from_rref(field: &Field, r: &Rref) -> Matrix {
    let mut is_pivot = vec![false; r.cols];
    for &c in &r.pivots {
        is_pivot[c] = true;
    }
    let mut out = Vec::new();
    for free in 0..r.cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![field.zero(); r.cols];
        v[free] = field.one();
        for (row, &pc) in r.rows.iter().zip(&r.pivots) {
            v[pc] = field.neg(&row[free]);
        }
        out.push(v);
    }
    out
}

/// Exact rank and canonical right-kernel basis.
pub fn rank_and_kernel(field: &Field, m: &[Vec<Elem>], cols: usize) -> (usize, Matrix) {
    let r = rref(field, m, cols);
    let k = kernel_from_rref(field, &r);
    (r.rank(), k)
}

/// Basis of `{y : y^T M = 0}`.
pub fn left_kernel(field: &Field, m: &[Vec<Elem>], cols: usize) -> Matrix {
    let t = transpose(m, cols);
    rank_and_kernel(field, &t, m.len()).1
}

/// Some solution of `A x = b`, or `None` if inconsistent.
pub fn solve(field: &Field, a: &[Vec<Elem>], b: &[Elem], cols: usize) -> Option<Vec<Elem>> {
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let r = rref(field, &aug, cols + 1);
    if r.pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![field.zero(); cols];
    for (row, &pc) in r.rows.iter().zip(&r.pivots) {
        x[pc] = row[cols].clone();
    }
    Some(x)
}

pub fn inverse(field: &Field, a: &[Vec<Elem>]) -> Option<Matrix> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    let r = rref(field, &aug, 2 * n);
    if r.rank() < n || r.pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.rows.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Determinant of a square matrix by elimination.
pub fn det(field: &Field, a: &[Vec<Elem>]) -> Elem {
    let n = a.len();
    let mut m: Matrix = a.to_vec();
    let mut d = field.one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| !field.is_zero(&m[i][c])) else {
            return field.zero();
        };
        if piv != c {
            m.swap(piv, c);
            d = field.neg(&d);
        }
        let pv = m[c][c].clone();
        d = field.mul(&d, &pv);
        let inv = field.inv(&pv).unwrap();
        for i in c + 1..n {
            if field.is_zero(&m[i][c]) {
                continue;
            }
            let f = field.mul(&m[i][c], &inv);
            for j in c..n {
                let t = field.mul(&f, &m[c][j]);
                m[i][j] = field.sub(&m[i][j], &t);
            }
        }
    }
    d
}

fn gauss_jordan(field: &Field, m: &[Vec<Elem>], cols: usize) -> Rref {
    let mut rows: Matrix = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| !field.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = field.inv(&rows[r][c]).unwrap();
        if !field.is_one(&inv) {
            for j in c..cols {
                rows[r][j] = field.mul(&rows[r][j], &inv);
            }
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || field.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for j in c..cols {
                if field.is_zero(&prow[j]) {
                    continue;
                }
                row[j] = field.sub(&row[j], &field.mul(&f, &prow[j]));
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Rref { rows, pivots, cols }
}

fn bareiss_rref(field: &Field, m: &[Vec<Elem>], cols: usize) -> Rref {
    // integerize each row
    let mut rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let mut l = BigInt::one();
            for x in row {
                if let Elem::Rational(q) = x {
                    l = l.lcm(q.denom());
                }
            }
            row.iter()
                .map(|x| match x {
                    Elem::Rational(q) => (q * BigRational::from_integer(l.clone())).to_integer(),
                    Elem::Finite(_) => unreachable!("finite element in a rational matrix"),
                })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        for i in r + 1..rows.len() {
            for j in c + 1..cols {
                let v = &rows[r][c] * &rows[i][j] - &rows[i][c] * &rows[r][j];
                rows[i][j] = v / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    // back-substitution over Q
    let mut q: Matrix = rows
        .into_iter()
        .zip(&pivots)
        .map(|(row, &pc)| {
            let d = row[pc].clone();
            row.into_iter().map(|x| Elem::Rational(BigRational::new(x, d.clone()))).collect()
        })
        .collect();
    for i in (0..q.len()).rev() {
        let pc = pivots[i];
        let prow = q[i].clone();
        for row in q.iter_mut().take(i) {
            if field.is_zero(&row[pc]) {
                continue;
            }
            let f = row[pc].clone();
            for j in pc..cols {
                if field.is_zero(&prow[j]) {
                    continue;
                }
                row[j] = field.sub(&row[j], &field.mul(&f, &prow[j]));
            }
        }
    }
    Rref { rows: q, pivots, cols }
}

/// RREF over `F_p` on raw residues: returns the nonzero rows and pivots.
pub fn fp_rref(p: u32, mut rows: Vec<Vec<u32>>, cols: usize) -> (Vec<Vec<u32>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = fp::inv_mod(rows[r][c], p);
        if inv != 1 {
            for x in rows[r][c..].iter_mut() {
                *x = fp::mul_mod(*x, inv, p);
            }
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = p - row[c];
            for j in c..cols {
                if prow[j] != 0 {
                    row[j] = ((row[j] as u64 + f as u64 * prow[j] as u64) % p as u64) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn fp_rank(p: u32, rows: Vec<Vec<u32>>, cols: usize) -> usize {
    fp_rref(p, rows, cols).1.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(field: &Field, rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect()
    }

    #[test]
    fn identity_and_zero() {
        for field in [Field::rational(), Field::prime(101).unwrap(), Field::finite(3, 2).unwrap()] {
            let (r, k) = rank_and_kernel(&field, &identity(&field, 3), 3);
            assert_eq!((r, k.len()), (3, 0));
            let (r, k) = rank_and_kernel(&field, &zeros(&field, 2, 4), 4);
            assert_eq!((r, k.len()), (0, 4));
        }
    }

    #[test]
    fn rational_kernel_is_reduced() {
        let q = Field::rational();
        let m = mat(&q, &[&[2, 4, 6], &[1, 3, 5]]);
        let (r, k) = rank_and_kernel(&q, &m, 3);
        assert_eq!(r, 2);
        assert_eq!(k.len(), 1);
        let shown: Vec<String> = k[0].iter().map(|x| q.format(x)).collect();
        assert_eq!(shown, vec!["1", "-2", "1"]);
        assert!(mat_vec(&q, &m, &k[0]).iter().all(|x| q.is_zero(x)));
    }

    #[test]
    fn determinant_and_inverse() {
        let f = Field::prime(7).unwrap();
        let a = mat(&f, &[&[1, 2], &[3, 4]]);
        assert_eq!(det(&f, &a), f.from_i64(-2));
        let inv = inverse(&f, &a).unwrap();
        assert_eq!(mat_mul(&f, &a, &inv, 2), identity(&f, 2));
        assert!(inverse(&f, &mat(&f, &[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn solve_consistent_and_not() {
        let q = Field::rational();
        let a = mat(&q, &[&[1, 1], &[1, -1]]);
        let x = solve(&q, &a, &[q.from_i64(3), q.from_i64(1)], 2).unwrap();
        assert_eq!(x, vec![q.from_i64(2), q.from_i64(1)]);
        let b = mat(&q, &[&[1, 1], &[2, 2]]);
        assert!(solve(&q, &b, &[q.from_i64(1), q.from_i64(3)], 2).is_none());
    }
}
