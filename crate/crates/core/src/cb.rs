//! Cayley-Bacharach conditions: deciding CB(r), failure witnesses and
//! CB-subset search.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::linalg::{self, fp_rref};
use crate::projective::{eval_matrix, MonomialBasis, PointConfig};

/// Exhaustive subset search is used up to this many points.
pub const EXHAUSTIVE_CAP: usize = 24;

/// A degree-`r` form (coefficients over [`MonomialBasis`]) vanishing on
/// every point except `label`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CbWitness {
    pub label: usize,
    pub form: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CbVerdict {
    pub satisfied: bool,
    pub witness: Option<CbWitness>,
    /// Labels at which the condition fails, ascending.
    pub failing: Vec<usize>,
    /// Rank of the degree-`r` evaluation matrix.
    pub rank: usize,
    /// Whether the Frobenius-orbit shortcut decided the verdict.
    pub orbit_shortcut: bool,
}

impl CbVerdict {
    pub fn to_json(&self, field: &Field) -> serde_json::Value {
        serde_json::json!({
            "satisfied": self.satisfied,
            "rank": self.rank,
            "failing_labels": self.failing,
            "orbit_shortcut": self.orbit_shortcut,
            "witness": self.witness.as_ref().map(|w| serde_json::json!({
                "label": w.label,
                "witness_form": w.form.iter().map(|c| field.elem_to_json(c)).collect::<Vec<_>>(),
            })),
        })
    }
}

/// Decides CB(r): every degree-`r` form vanishing on all but one point of
/// `s` vanishes on all of `s`.
///
/// Equivalently, every row of the evaluation matrix lies in the support of
/// its left kernel. On failure the smallest failing label is reported with
/// the first reduced kernel form of `S \ {x}` that is nonzero at `x`.
pub fn cb_satisfies(s: &PointConfig, r: usize) -> Result<CbVerdict> {
    check_args(s, r)?;
    if let Some(v) = orbit_verdict(s, r)? {
        return Ok(v);
    }
    generic_verdict(s, r)
}

fn check_args(s: &PointConfig, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::Precondition("CB(0) holds vacuously; r must be at least 1".into()));
    }
    if s.is_empty() {
        return Err(Error::Precondition("CB needs at least one point".into()));
    }
    Ok(())
}

fn generic_verdict(s: &PointConfig, r: usize) -> Result<CbVerdict> {
    let field = s.field();
    let e = eval_matrix(s, r);
    let cols = MonomialBasis::new(s.ambient_dim(), r).len();
    let t = linalg::transpose(&e, cols);
    let (rank, left) = linalg::rank_and_kernel(field, &t, s.len());
    let mut in_support = vec![false; s.len()];
    for v in &left {
        for (i, c) in v.iter().enumerate() {
            if !field.is_zero(c) {
                in_support[i] = true;
            }
        }
    }
    let failing: Vec<usize> = (0..s.len()).filter(|&i| !in_support[i]).collect();
    debug_assert_eq!(rank, s.len() - left.len());
    if failing.is_empty() {
        return Ok(CbVerdict { satisfied: true, witness: None, failing, rank, orbit_shortcut: false });
    }
    let x = failing[0];
    let rest = s.without(x);
    let ker = linalg::rank_and_kernel(field, &eval_matrix(&rest, r), cols).1;
    let basis = MonomialBasis::new(s.ambient_dim(), r);
    let at_x = basis.eval(field, s.point(x).coords());
    let form = ker
        .into_iter()
        .find(|v| !field.is_zero(&linalg::dot(field, v, &at_x)))
        .ok_or_else(|| Error::MathAssertion("no kernel form separates the failing point".into()))?;
    let w = CbWitness { label: x, form };
    verify_witness(s, r, &w)?;
    Ok(CbVerdict { satisfied: false, witness: Some(w), failing, rank, orbit_shortcut: false })
}

/// Re-checks that a witness vanishes exactly off its label.
pub fn verify_witness(s: &PointConfig, r: usize, w: &CbWitness) -> Result<()> {
    let field = s.field();
    let basis = MonomialBasis::new(s.ambient_dim(), r);
    for (i, p) in s.points().iter().enumerate() {
        let v = linalg::dot(field, &basis.eval(field, p.coords()), &w.form);
        if field.is_zero(&v) != (i != w.label) {
            return Err(Error::MathAssertion(format!("witness form misbehaves at label {}", i)));
        }
    }
    Ok(())
}

/// Frobenius permutation of the labels, if Frobenius maps the configuration
/// to itself.
pub fn frobenius_permutation(s: &PointConfig) -> Result<Option<Vec<usize>>> {
    let field = s.field();
    if !field.is_finite() {
        return Ok(None);
    }
    let index = s.index();
    let mut perm = Vec::with_capacity(s.len());
    for p in s.points() {
        match index.get(&p.frobenius(field)?) {
            Some(&j) => perm.push(j),
            None => return Ok(None),
        }
    }
    Ok(Some(perm))
}

/// When the configuration is one Frobenius orbit of size equal to the
/// extension degree, the rank over the big field equals the `F_p`-rank of
/// the coefficient expansion of a single evaluation row, and the left-kernel
/// support is Frobenius-stable, hence all or nothing.
fn orbit_verdict(s: &PointConfig, r: usize) -> Result<Option<CbVerdict>> {
    let field = s.field();
    let m = field.degree();
    if !field.is_finite() || m < 2 || s.len() != m {
        return Ok(None);
    }
    let Some(perm) = frobenius_permutation(s)? else {
        return Ok(None);
    };
    let mut cur = 0;
    let mut order = vec![0usize];
    loop {
        cur = perm[cur];
        if cur == 0 {
            break;
        }
        order.push(cur);
    }
    if order.len() != m {
        return Ok(None);
    }
    let p = field.characteristic();
    let basis = MonomialBasis::new(s.ambient_dim(), r);
    let row0 = basis.eval(field, s.point(0).coords());
    let cols = row0.len();
    let mut w = vec![vec![0u32; cols]; m];
    for (c, x) in row0.iter().enumerate() {
        for (j, v) in field.coeffs(x).into_iter().enumerate() {
            w[j][c] = v;
        }
    }
    let (_, pivots) = fp_rref(p, w.clone(), cols);
    let rank = pivots.len();
    if rank < m {
        return Ok(Some(CbVerdict { satisfied: true, witness: None, failing: Vec::new(), rank, orbit_shortcut: true }));
    }
    let form = orbit_witness(field, &w, &pivots, cols)?;
    let witness = CbWitness { label: 0, form };
    Ok(Some(CbVerdict { satisfied: false, witness: Some(witness), failing: (0..m).collect(), rank, orbit_shortcut: true }))
}

// Builds sum_l gamma_l F_l where W F_l = e_l over F_p and the Moore system
// sum_l gamma_l sigma^i(t^l) = delta_{i0} fixes gamma.
fn orbit_witness(field: &Field, w: &[Vec<u32>], pivots: &[usize], cols: usize) -> Result<Vec<Elem>> {
    let p = field.characteristic();
    let m = w.len();
    // invert the pivot block
    let aug: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            let mut row: Vec<u32> = pivots.iter().map(|&c| w[i][c]).collect();
            row.extend((0..m).map(|j| u32::from(i == j)));
            row
        })
        .collect();
    let (red, piv) = fp_rref(p, aug, 2 * m);
    if piv.len() != m || piv[m - 1] != m - 1 {
        return Err(Error::MathAssertion("pivot block of the orbit expansion is singular".into()));
    }
    // column l of the inverse gives F_l on the pivot columns
    let inv: Vec<Vec<u32>> = red.iter().map(|row| row[m..].to_vec()).collect();
    let moore: Vec<Vec<Elem>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|l| {
                    let mut c = vec![0u32; l + 1];
                    c[l] = 1;
                    field.frobenius_pow(&field.from_coeffs(&c).unwrap(), i)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rhs = vec![field.zero(); m];
    rhs[0] = field.one();
    let gamma = linalg::solve(field, &moore, &rhs, m)
        .ok_or_else(|| Error::MathAssertion("Moore system is singular".into()))?;
    let check = linalg::mat_vec(field, &moore, &gamma);
    if check != rhs {
        return Err(Error::MathAssertion("Moore system solution does not check".into()));
    }
    let mut form = vec![field.zero(); cols];
    for (k, &c) in pivots.iter().enumerate() {
        let mut acc = field.zero();
        for (l, g) in gamma.iter().enumerate() {
            let a = inv[k][l];
            if a != 0 {
                acc = field.add(&acc, &field.mul(g, &field.from_prime(a)));
            }
        }
        form[c] = acc;
    }
    Ok(form)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetSearch {
    /// All CB(r) subsets of the largest size found, lexicographically sorted.
    pub subsets: Vec<Vec<usize>>,
    /// False when the greedy peeling heuristic was used.
    pub exhaustive: bool,
    pub examined: usize,
}

impl SubsetSearch {
    pub fn best(&self) -> Option<&Vec<usize>> {
        self.subsets.first()
    }
}

/// Searches for `T` with `|T| >= min_size` satisfying CB(r), by decreasing
/// size then lexicographically. Sizes below `r+2` are skipped since no
/// CB(r) set is that small.
pub fn find_cb_subset(s: &PointConfig, r: usize, min_size: usize) -> Result<SubsetSearch> {
    if r == 0 {
        return Err(Error::Precondition("CB(0) holds vacuously; r must be at least 1".into()));
    }
    let lower = min_size.max(r + 2).max(1);
    if s.len() > EXHAUSTIVE_CAP {
        return greedy_peel(s, r, lower);
    }
    let mut examined = 0;
    for size in (lower..=s.len()).rev() {
        let combos = combinations(s.len(), size);
        examined += combos.len();
        let found: Vec<Vec<usize>> = combos
            .into_par_iter()
            .map(|c| {
                let sub = s.subset(&c)?;
                Ok((c, cb_satisfies(&sub, r)?.satisfied))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, ok)| *ok)
            .map(|(c, _)| c)
            .collect();
        if !found.is_empty() {
            return Ok(SubsetSearch { subsets: found, exhaustive: true, examined });
        }
    }
    Ok(SubsetSearch { subsets: Vec::new(), exhaustive: true, examined })
}

fn greedy_peel(s: &PointConfig, r: usize, lower: usize) -> Result<SubsetSearch> {
    let mut labels: Vec<usize> = s.labels();
    let mut examined = 0;
    while labels.len() >= lower {
        examined += 1;
        let sub = s.subset(&labels)?;
        let v = cb_satisfies(&sub, r)?;
        if v.satisfied {
            return Ok(SubsetSearch { subsets: vec![labels], exhaustive: false, examined });
        }
        let drop: std::collections::HashSet<usize> = v.failing.iter().map(|&i| labels[i]).collect();
        labels.retain(|l| !drop.contains(l));
    }
    Ok(SubsetSearch { subsets: Vec::new(), exhaustive: false, examined })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// CB verdicts for `r' = 1..=r`.
pub fn cb_monotone_check(s: &PointConfig, r: usize) -> Result<Vec<bool>> {
    (1..=r).map(|rr| cb_satisfies(s, rr).map(|v| v.satisfied)).collect()
}

/// Evaluations of a degree-`r` form at every point.
pub fn form_values(s: &PointConfig, r: usize, form: &[Elem]) -> Vec<Elem> {
    let field = s.field();
    let basis = MonomialBasis::new(s.ambient_dim(), r);
    s.points().iter().map(|p| linalg::dot(field, &basis.eval(field, p.coords()), form)).collect()
}

#[doc(hidden)]
pub fn label_map(labels: &[usize]) -> HashMap<usize, usize> {
    labels.iter().enumerate().map(|(i, &l)| (l, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjPoint;

    fn cfg(field: &Field, pts: &[&[i64]]) -> PointConfig {
        let n = pts[0].len() - 1;
        PointConfig::new(field, n, pts.iter().map(|c| ProjPoint::from_i64(field, c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn lines_and_triangles() {
        let f = Field::prime(101).unwrap();
        let col = cfg(&f, &[&[1, 0, 0], &[1, 1, 0], &[1, 2, 0]]);
        assert!(cb_satisfies(&col, 1).unwrap().satisfied);
        let tri = cfg(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let v = cb_satisfies(&tri, 1).unwrap();
        assert!(!v.satisfied);
        let w = v.witness.unwrap();
        assert_eq!(w.label, 0);
        // the line x0 = 0 through the other two
        assert_eq!(w.form, vec![f.one(), f.zero(), f.zero()]);
    }

    #[test]
    fn rejects_r_zero() {
        let f = Field::prime(7).unwrap();
        let s = cfg(&f, &[&[1, 0]]);
        assert!(matches!(cb_satisfies(&s, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
