//! Exact integer checks of the numeric conditions: the covering condition
//! (dagger), its consequences, the main degree bound and the
//! Chiantini-Ciliberto inequality.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// `floor(a / b)` for `b != 0`, rounding toward negative infinity.
pub fn floor_div(a: i64, b: i64) -> i64 {
    assert!(b != 0, "division by zero");
    let (a, b) = if b < 0 { (-a, -b) } else { (a, b) };
    a.div_euclid(b)
}

/// `ceil(a / b)` for `b != 0`.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

pub fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: i64,
    pub relation: Relation,
    pub rhs: i64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, lhs: i64, relation: Relation, rhs: i64) -> Self {
        let pass = match relation {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
        };
        Check { name: name.to_string(), lhs, relation, rhs, pass }
    }
}

/// Values derived for one `(m', k'', k''')` tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derived {
    pub m1: i64,
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
    pub m2: i64,
    pub l: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub inputs: serde_json::Value,
    pub checks: Vec<Check>,
    pub derived: Option<Derived>,
    pub verdict: bool,
    /// Number of `(m', k'', k''')` tuples evaluated, for ledger reports.
    pub tuples: Option<u64>,
    /// Tuples where `m'' > k k'''` fails but `m'' >= k k'''` holds.
    pub strict_only_3c: Option<u64>,
}

impl BoundReport {
    fn from_checks(inputs: serde_json::Value, checks: Vec<Check>) -> Self {
        let verdict = checks.iter().all(|c| c.pass);
        BoundReport { inputs, checks, derived: None, verdict, tuples: None, strict_only_3c: None }
    }

    pub fn first_violation(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// The two covering-condition inequalities for `(d, r, k)`.
pub fn dagger_check(d: i64, r: i64, k: i64) -> Result<BoundReport> {
    if d < 1 || r < 1 || k < 1 {
        return Err(Error::Precondition("d, r, k must be positive".into()));
    }
    let checks = vec![
        Check::new("dagger_i_d_ge_r", d, Relation::Ge, r),
        Check::new("dagger_i_r_ge_2k2-1", r, Relation::Ge, 2 * k * k - 1),
        Check::new("dagger_ii", d, Relation::Ge, 2 * k * (d - r) + 3 * k * k * k - k * k - 4 * k + 1),
    ];
    Ok(BoundReport::from_checks(serde_json::json!({ "d": d, "r": r, "k": k }), checks))
}

/// `ceil((m' + k^2 - k - 1) / r) - 1`.
pub fn k_prime(m1: i64, r: i64, k: i64) -> i64 {
    ceil_div(m1 + k * k - k - 1, r) - 1
}

/// `ceil(k''' / k'' * (m' - (k' - k'')(k'^2 - k'')))`.
pub fn m_double_prime(m1: i64, k1: i64, k2: i64, k3: i64) -> i64 {
    ceil_div(k3 * (m1 - (k1 - k2) * (k1 * k1 - k2)), k2)
}

/// Checks the consequences (1), (2), (3a), (3b), (3c) over every admissible
/// `(m', k'', k''')`; stops at the first violation.
pub fn ledger_conclusions(d: i64, r: i64, k: i64) -> Result<BoundReport> {
    let dag = dagger_check(d, r, k)?;
    if !dag.verdict {
        return Err(Error::Precondition(format!(
            "dagger fails for (d, r, k) = ({}, {}, {}): {}",
            d,
            r,
            k,
            serde_json::to_string(&dag).unwrap()
        )));
    }
    let inputs = serde_json::json!({ "d": d, "r": r, "k": k });
    let mut checks = vec![
        Check::new("1_r_ge_2k-1", r, Relation::Ge, 2 * k - 1),
        Check::new("2_kd_le", k * d, Relation::Le, (k + 1) * r - (k * k - k - 1)),
    ];
    let mut tuples = 0u64;
    let mut strict_only = 0u64;
    let mut last = None;
    if checks.iter().all(|c| c.pass) {
        'outer: for m1 in r + 2..=k * d {
            let k1 = k_prime(m1, r, k);
            let c3b = Check::new("3b_m1_gt_k1^3", m1, Relation::Gt, k1 * k1 * k1);
            if !c3b.pass {
                checks.push(c3b);
                last = Some(Derived { m1, k1, k2: 0, k3: 0, m2: 0, l: 0 });
                break;
            }
            for k2 in 1..=k1 {
                for k3 in 1..=k2 {
                    tuples += 1;
                    let m2 = m_double_prime(m1, k1, k2, k3);
                    let l = floor_div(k, k3);
                    let der = Derived { m1, k1, k2, k3, m2, l };
                    let a = (l + 1) * m2 - binom2(l + 1) * k3 * k3 - k * d;
                    let c3a = Check::new("3a", a, Relation::Gt, 0);
                    let c3c = Check::new("3c_m2_gt_kk3", m2, Relation::Gt, k * k3);
                    if !c3c.pass && m2 >= k * k3 {
                        strict_only += 1;
                    }
                    if !c3a.pass || !c3c.pass {
                        checks.push(if !c3a.pass { c3a } else { c3c });
                        last = Some(der);
                        break 'outer;
                    }
                    last = Some(der);
                }
            }
        }
    }
    let mut rep = BoundReport::from_checks(inputs, checks);
    if !rep.verdict {
        rep.derived = last;
    }
    rep.tuples = Some(tuples);
    rep.strict_only_3c = Some(strict_only);
    Ok(rep)
}

/// `4kn + 3k^3 - k^2 + 1`.
pub fn main_bound(n: i64, k: i64) -> i64 {
    4 * k * n + 3 * k * k * k - k * k + 1
}

/// With `r = d - 2n - 2`, checks the covering condition and the identity
/// relating the main bound to it.
pub fn main_implies_dagger(n: i64, k: i64, d: i64) -> Result<BoundReport> {
    if n < 1 || k < 1 {
        return Err(Error::Precondition("n, k must be positive".into()));
    }
    let b = main_bound(n, k);
    if d < b {
        return Err(Error::Precondition(format!("d = {} is below the main bound {}", d, b)));
    }
    let r = d - 2 * n - 2;
    let dag = dagger_check(d, r, k)?;
    let lhs = b - (2 * n + 2 + 2 * k * k - 1);
    let rhs = (3 * k * k + 2 * n) * (k - 1) + 2 * k * n;
    let mut checks = dag.checks;
    checks.push(Check::new("identity_lhs_eq_rhs", lhs, Relation::Ge, rhs));
    checks.push(Check::new("identity_rhs_eq_lhs", rhs, Relation::Ge, lhs));
    checks.push(Check::new("identity_rhs_nonnegative", rhs, Relation::Ge, 0));
    Ok(BoundReport::from_checks(serde_json::json!({ "n": n, "k": k, "d": d, "r": r }), checks))
}

/// Both sides of the Chiantini-Ciliberto condition: `d > 2(n+k)` and
/// `kd > k(2n-1-dimZ) + m(m-1)(n-dimZ) + 2m rr - 2` with
/// `m, rr = divmod(k-1, n-dimZ)`; `implication` is whether the first
/// implies the second.
pub fn cc_bound(n: i64, k: i64, dim_z: i64, d: i64) -> Result<CcReport> {
    if dim_z < 0 || dim_z >= n {
        return Err(Error::Precondition(format!("need 0 <= dimZ < n, got dimZ = {}, n = {}", dim_z, n)));
    }
    if k < 1 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let c = n - dim_z;
    let m = (k - 1) / c;
    let rr = (k - 1) % c;
    let rhs = k * (2 * n - 1 - dim_z) + m * (m - 1) * c + 2 * m * rr - 2;
    let hyp = Check::new("d_gt_2(n+k)", d, Relation::Gt, 2 * (n + k));
    let ineq = Check::new("kd_gt_rhs", k * d, Relation::Gt, rhs);
    let implication = !hyp.pass || ineq.pass;
    Ok(CcReport { n, k, dim_z, d, m, rr, hypothesis: hyp, inequality: ineq, implication })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CcReport {
    pub n: i64,
    pub k: i64,
    pub dim_z: i64,
    pub d: i64,
    pub m: i64,
    pub rr: i64,
    pub hypothesis: Check,
    pub inequality: Check,
    pub implication: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub d: i64,
    pub r: i64,
    pub k: i64,
    pub verdict: String,
    pub first_violation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub k_max: i64,
    pub d_max: i64,
    pub triples: u64,
    pub admissible: u64,
    pub tuples: u64,
    pub violations: u64,
    /// Tuples passing `m'' >= k k'''` but failing the strict form.
    pub strict_only_3c: u64,
}

/// Ledger certification over `1 <= k <= k_max`, `1 <= r <= d <= d_max`;
/// rows only for triples satisfying the covering condition.
pub fn ledger_sweep(k_max: i64, d_max: i64) -> Result<(Vec<SweepRow>, SweepSummary)> {
    let triples: Vec<(i64, i64, i64)> =
        (1..=k_max).flat_map(|k| (1..=d_max).flat_map(move |d| (1..=d).map(move |r| (d, r, k)))).collect();
    let n = triples.len() as u64;
    let rows: Vec<(SweepRow, u64, u64)> = triples
        .into_par_iter()
        .filter_map(|(d, r, k)| {
            let dag = dagger_check(d, r, k).ok()?;
            if !dag.verdict {
                return None;
            }
            let rep = ledger_conclusions(d, r, k).expect("admissible triple");
            let row = SweepRow {
                d,
                r,
                k,
                verdict: if rep.verdict { "pass".into() } else { "fail".into() },
                first_violation: rep.first_violation().map(|c| c.name.clone()).unwrap_or_default(),
            };
            Some((row, rep.tuples.unwrap_or(0), rep.strict_only_3c.unwrap_or(0)))
        })
        .collect();
    let summary = SweepSummary {
        k_max,
        d_max,
        triples: n,
        admissible: rows.len() as u64,
        tuples: rows.iter().map(|r| r.1).sum(),
        violations: rows.iter().filter(|r| r.0.verdict != "pass").count() as u64,
        strict_only_3c: rows.iter().map(|r| r.2).sum(),
    };
    Ok((rows.into_iter().map(|r| r.0).collect(), summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_rounding() {
        assert_eq!(floor_div(7, 2), 3);
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(ceil_div(7, -2), -3);
        assert_eq!(floor_div(7, -2), -4);
        assert_eq!(ceil_div(6, 3), 2);
    }

    #[test]
    fn dagger_examples() {
        assert!(dagger_check(11, 5, 1).unwrap().verdict);
        let r = dagger_check(11, 4, 1).unwrap();
        assert_eq!(r.first_violation().unwrap().name, "dagger_ii");
        assert_eq!(r.first_violation().unwrap().rhs, 13);
        let r = dagger_check(100, 6, 2).unwrap();
        assert_eq!(r.first_violation().unwrap().name, "dagger_i_r_ge_2k2-1");
    }

    #[test]
    fn main_bound_values() {
        assert_eq!(main_bound(2, 1), 11);
        assert_eq!(main_bound(1, 1), 7);
        assert_eq!(main_bound(2, 2), 37);
        assert!(main_implies_dagger(2, 2, 37).unwrap().verdict);
        assert!(main_implies_dagger(2, 2, 36).is_err());
    }
}
