//! Group actions on configurations, covering an orbit by conjugates of a
//! curve, and the component selection on tagged sections.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::cb::{combinations, frobenius_permutation};
use crate::curve::CurveWitness;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::projective::{PointConfig, ProjPoint, TaggedConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Frobenius,
    Explicit,
}

/// A permutation action on the labels of a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupAction {
    pub kind: ActionKind,
    pub generators: Vec<Vec<usize>>,
    /// Frobenius exponent inducing each generator, when every generator is
    /// induced by a field automorphism.
    pub exponents: Option<Vec<usize>>,
    pub transitive: bool,
}

impl GroupAction {
    /// The Frobenius action on a Frobenius-stable configuration.
    pub fn frobenius(s: &PointConfig) -> Result<Self> {
        let perm = frobenius_permutation(s)?
            .ok_or_else(|| Error::Action("configuration is not stable under Frobenius".into()))?;
        let gens = vec![perm];
        let transitive = is_transitive(s.len(), &gens);
        Ok(GroupAction { kind: ActionKind::Frobenius, generators: gens, exponents: Some(vec![1]), transitive })
    }

    /// An explicit action; each generator must permute the labels.
    pub fn explicit(s: &PointConfig, generators: Vec<Vec<usize>>) -> Result<Self> {
        let n = s.len();
        for (gi, g) in generators.iter().enumerate() {
            let mut seen = vec![false; n];
            if g.len() != n {
                return Err(Error::Action(format!("generator {} has length {}, expected {}", gi, g.len(), n)));
            }
            for &x in g {
                if x >= n || seen[x] {
                    return Err(Error::Action(format!("generator {} is not a permutation", gi)));
                }
                seen[x] = true;
            }
        }
        let exponents = field_exponents(s, &generators)?;
        let transitive = is_transitive(n, &generators);
        Ok(GroupAction { kind: ActionKind::Explicit, generators, exponents, transitive })
    }

    pub fn degree(&self) -> usize {
        self.generators.first().map(|g| g.len()).unwrap_or(0)
    }

    pub fn compatible(&self) -> bool {
        self.exponents.is_some()
    }

    /// Group elements as (permutation, Frobenius exponent) pairs, in BFS
    /// order from the identity. Only for compatible actions.
    fn elements(&self, field_degree: usize) -> Vec<(Vec<usize>, usize)> {
        let n = self.degree();
        let exps = self.exponents.as_ref().expect("compatible action");
        let id: Vec<usize> = (0..n).collect();
        let mut out = vec![(id.clone(), 0usize)];
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([id]);
        let mut q = VecDeque::from([0usize]);
        while let Some(i) = q.pop_front() {
            for (g, &e) in self.generators.iter().zip(exps) {
                let (p, pe) = &out[i];
                let comp: Vec<usize> = p.iter().map(|&x| g[x]).collect();
                if seen.insert(comp.clone()) {
                    out.push((comp, (pe + e) % field_degree.max(1)));
                    q.push_back(out.len() - 1);
                }
            }
        }
        out
    }
}

fn is_transitive(n: usize, gens: &[Vec<usize>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut q = VecDeque::from([0usize]);
    while let Some(x) = q.pop_front() {
        for g in gens {
            if !seen[g[x]] {
                seen[g[x]] = true;
                q.push_back(g[x]);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

// Frobenius exponent inducing each generator, or None if some generator is not induced.
fn field_exponents(s: &PointConfig, gens: &[Vec<usize>]) -> Result<Option<Vec<usize>>> {
    let field = s.field();
    if !field.is_finite() {
        return Ok(None);
    }
    let m = field.degree();
    let mut out = Vec::with_capacity(gens.len());
    for g in gens {
        let mut found = None;
        for e in 0..m {
            let ok = (0..s.len()).try_fold(true, |acc, i| -> Result<bool> {
                Ok(acc && s.point(i).frobenius_pow(field, e)? == *s.point(g[i]))
            })?;
            if ok {
                found = Some(e);
                break;
            }
        }
        match found {
            Some(e) => out.push(e),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// The Frobenius orbit of `point`, which must have exactly `e` conjugates.
pub fn orbit_config(field: &Field, point: &ProjPoint, e: usize) -> Result<(PointConfig, GroupAction)> {
    if e == 0 {
        return Err(Error::Precondition("orbit degree must be positive".into()));
    }
    let mut pts = vec![point.clone()];
    loop {
        let next = pts.last().unwrap().frobenius(field)?;
        if next == *point {
            break;
        }
        pts.push(next);
    }
    if pts.len() != e {
        return Err(Error::Degenerate(format!(
            "point has degree {}, not {}: it is defined over a smaller field",
            pts.len(),
            e
        )));
    }
    let s = PointConfig::new(field, point.dim(), pts)?;
    let a = GroupAction::frobenius(&s)?;
    Ok((s, a))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCount {
    pub a: usize,
    pub b: usize,
    pub common: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverAudit {
    /// Labels covered by the base curve.
    pub m2: usize,
    /// Degree of the base curve.
    pub k3: usize,
    /// Translate budget `floor(k / k3)`.
    pub l: usize,
    pub pairwise: Vec<PairCount>,
    /// `k3^2`.
    pub pairwise_bound: usize,
    /// `(l+1) m2 - C(l+1, 2) k3^2 - k d`.
    pub value_3a: i64,
    /// Labels covered after each translate.
    pub covered_after: Vec<usize>,
    /// On failure: the translate through the next uncovered label, and its
    /// intersection counts with the others.
    pub next_translate_exponent: Option<usize>,
    pub next_pairwise: Vec<PairCount>,
}

#[derive(Clone, Debug)]
pub struct CoverResult {
    pub translates: Vec<CurveWitness>,
    /// Frobenius exponent of each translate.
    pub exponents: Vec<usize>,
    pub total_degree: usize,
    pub covered: Vec<usize>,
    pub success: bool,
    pub audit: CoverAudit,
}

impl CoverResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "success": self.success,
            "total_degree": self.total_degree,
            "covered": self.covered,
            "translates": self.translates.iter().zip(&self.exponents).map(|(t, e)| serde_json::json!({
                "frobenius_exponent": e,
                "witness": t.to_json(),
            })).collect::<Vec<_>>(),
            "audit": self.audit,
        })
    }
}

/// Greedy covering of `s` by Frobenius conjugates of `base`: repeatedly
/// adjoins a conjugate through the smallest uncovered label, up to
/// `floor(k / deg base)` translates.
pub fn cover_with_conjugates(
    s: &PointConfig,
    action: &GroupAction,
    base: &CurveWitness,
    k: usize,
    d: usize,
) -> Result<CoverResult> {
    if !action.transitive {
        return Err(Error::Action("covering needs a transitive action".into()));
    }
    if action.degree() != s.len() {
        return Err(Error::Action("action does not act on this configuration".into()));
    }
    if !action.compatible() {
        return Err(Error::Action("conjugating a curve needs an action induced by field automorphisms".into()));
    }
    let base = base.relabel(s)?;
    let k3 = base.degree();
    let m2 = base.labels().len();
    if m2 == 0 || k3 == 0 {
        return Err(Error::Precondition("base curve must cover at least one label".into()));
    }
    let l = k / k3;
    if l == 0 {
        return Err(Error::Precondition(format!("base degree {} exceeds the budget {}", k3, k)));
    }
    let field_degree = s.field().degree();
    let elems = action.elements(field_degree);
    let mut translates = vec![base.clone()];
    let mut exponents = vec![0usize];
    let mut covered: BTreeSet<usize> = base.labels().iter().copied().collect();
    let mut covered_after = vec![covered.len()];

    let next = |covered: &BTreeSet<usize>| -> Result<Option<(usize, CurveWitness)>> {
        let Some(x) = (0..s.len()).find(|i| !covered.contains(i)) else {
            return Ok(None);
        };
        for (perm, e) in &elems {
            if base.labels().iter().any(|&b| perm[b] == x) {
                let t = base.conjugate_on(s, *e)?;
                let mut want: Vec<usize> = base.labels().iter().map(|&b| perm[b]).collect();
                want.sort_unstable();
                if t.labels() != want.as_slice() {
                    return Err(Error::MathAssertion(format!(
                        "conjugate by Frobenius^{} covers {:?}, expected {:?}",
                        e,
                        t.labels(),
                        want
                    )));
                }
                return Ok(Some((*e, t)));
            }
        }
        Err(Error::Action(format!("no group element moves the base curve through label {}", x)))
    };

    while covered.len() < s.len() && translates.len() < l {
        let (e, t) = next(&covered)?.expect("uncovered label exists");
        covered.extend(t.labels().iter().copied());
        translates.push(t);
        exponents.push(e);
        covered_after.push(covered.len());
    }
    let pairwise = pair_counts(&translates, 0);
    let total_degree = k3 * translates.len();
    let success = covered.len() == s.len() && total_degree <= k;
    let value_3a = (l as i64 + 1) * m2 as i64 - ((l * (l + 1) / 2) * k3 * k3) as i64 - (k * d) as i64;
    let mut audit = CoverAudit {
        m2,
        k3,
        l,
        pairwise,
        pairwise_bound: k3 * k3,
        value_3a,
        covered_after,
        next_translate_exponent: None,
        next_pairwise: Vec::new(),
    };
    if !success {
        if let Some((e, t)) = next(&covered)? {
            let mut all = translates.clone();
            all.push(t);
            audit.next_translate_exponent = Some(e);
            audit.next_pairwise = pair_counts(&all, translates.len());
            let within = audit.pairwise.iter().chain(&audit.next_pairwise).all(|c| c.common <= k3 * k3);
            let lower = (l as i64 + 1) * m2 as i64
                - audit.pairwise.iter().chain(&audit.next_pairwise).map(|c| c.common as i64).sum::<i64>();
            if value_3a > 0 && within && s.len() <= k * d {
                return Err(Error::MathAssertion(format!(
                    "greedy cover failed although (l+1)m'' - C(l+1,2)k'''^2 - kd = {} > 0; \
                     {} translates would cover at least {} > {} labels",
                    value_3a,
                    l + 1,
                    lower,
                    s.len()
                )));
            }
        }
    }
    Ok(CoverResult { translates, exponents, total_degree, covered: covered.into_iter().collect(), success, audit })
}

// counts |T_a ∩ T_b ∩ S| for pairs with b >= from
fn pair_counts(ts: &[CurveWitness], from: usize) -> Vec<PairCount> {
    let mut out = Vec::new();
    for b in from.max(1)..ts.len() {
        for a in 0..b {
            let sa: BTreeSet<usize> = ts[a].labels().iter().copied().collect();
            let common = ts[b].labels().iter().filter(|x| sa.contains(x)).count();
            out.push(PairCount { a, b, common });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceViolation {
    pub generator: usize,
    pub member: usize,
    /// Labels of the moved member.
    pub labels: Vec<usize>,
    /// Labels of `S` on the moved member, compared against `k k'''`.
    pub count: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub violation: Option<InvarianceViolation>,
}

/// Whether every generator maps the label set of each member of the cover
/// to the label set of some member.
pub fn invariance_check(c: &CoverResult, action: &GroupAction, k: usize) -> InvarianceReport {
    let sets: Vec<BTreeSet<usize>> = c.translates.iter().map(|t| t.labels().iter().copied().collect()).collect();
    for (gi, g) in action.generators.iter().enumerate() {
        for (mi, set) in sets.iter().enumerate() {
            let moved: BTreeSet<usize> = set.iter().map(|&x| g[x]).collect();
            if !sets.contains(&moved) {
                let k3 = c.translates[mi].degree();
                return InvarianceReport {
                    invariant: false,
                    violation: Some(InvarianceViolation {
                        generator: gi,
                        member: mi,
                        count: moved.len(),
                        labels: moved.into_iter().collect(),
                        bound: k * k3,
                    }),
                };
            }
        }
    }
    InvarianceReport { invariant: true, violation: None }
}

/// Which of the three selection conditions a subcollection violates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelectionCheck {
    pub candidates: Vec<usize>,
    /// Members not containing exactly `d deg` section points.
    pub count_failures: Vec<usize>,
    /// (member, group tag) pairs meeting a group partially.
    pub partial_groups: Vec<(usize, usize)>,
    /// Labels not covered by the union.
    pub uncovered: Vec<usize>,
}

impl SelectionCheck {
    pub fn ok(&self) -> bool {
        self.count_failures.is_empty() && self.partial_groups.is_empty() && self.uncovered.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Selection {
    /// Candidate indices of the selected curves.
    pub selected: Option<Vec<usize>>,
    pub peeling_succeeded: bool,
    pub exhaustive: bool,
    /// Number of valid subcollections, when the search was exhaustive.
    pub valid_count: Option<usize>,
    /// Failure record per subcollection, when no selection exists.
    pub failures: Vec<SelectionCheck>,
}

/// Exhaustive selection is used up to this many candidates.
pub const SELECTION_CAP: usize = 12;

/// Checks the three conditions for a subcollection of candidates.
pub fn check_selection(section: &TaggedConfig, candidates: &[CurveWitness], chosen: &[usize], d: usize) -> SelectionCheck {
    let groups = section.groups();
    let mut count_failures = Vec::new();
    let mut partial_groups = Vec::new();
    let mut cover = BTreeSet::new();
    for &c in chosen {
        let w = &candidates[c];
        let set: BTreeSet<usize> = w.labels().iter().copied().collect();
        if set.len() != d * w.degree() {
            count_failures.push(c);
        }
        for (tag, g) in &groups {
            let inside = g.iter().filter(|x| set.contains(x)).count();
            if inside != 0 && inside != g.len() {
                partial_groups.push((c, *tag));
            }
        }
        cover.extend(set);
    }
    let uncovered = (0..section.config.len()).filter(|x| !cover.contains(x)).collect();
    SelectionCheck { candidates: chosen.to_vec(), count_failures, partial_groups, uncovered }
}

/// Selects curves among `candidates` each holding `d deg` section points,
/// meeting every component group fully or not at all, and jointly covering
/// the section.
pub fn component_selection(
    section: &TaggedConfig,
    candidates: &[CurveWitness],
    d: usize,
    k: usize,
) -> Result<Selection> {
    if d < 2 {
        return Err(Error::Precondition("selection needs d >= 2".into()));
    }
    let total: usize = candidates.iter().map(|c| c.degree()).sum();
    if total > k {
        return Err(Error::Precondition(format!("candidate degrees sum to {} > k = {}", total, k)));
    }
    let candidates: Vec<CurveWitness> =
        candidates.iter().map(|c| c.relabel(&section.config)).collect::<Result<_>>()?;
    let peeled = peel(section, &candidates, d);
    let peel_ok = peeled.as_ref().map(|p| check_selection(section, &candidates, p, d).ok()).unwrap_or(false);
    if candidates.len() > SELECTION_CAP {
        return Ok(Selection {
            selected: if peel_ok { peeled } else { None },
            peeling_succeeded: peel_ok,
            exhaustive: false,
            valid_count: None,
            failures: Vec::new(),
        });
    }
    let mut valid = Vec::new();
    let mut failures = Vec::new();
    for size in 0..=candidates.len() {
        for c in combinations(candidates.len(), size) {
            let chk = check_selection(section, &candidates, &c, d);
            if chk.ok() {
                valid.push(c);
            } else {
                failures.push(chk);
            }
        }
    }
    if d > k && valid.len() > 1 {
        return Err(Error::MathAssertion(format!("{} distinct valid selections although d > k", valid.len())));
    }
    if peel_ok && !valid.contains(peeled.as_ref().unwrap()) {
        return Err(Error::MathAssertion("peeling result missed by the exhaustive search".into()));
    }
    let selected = if peel_ok { peeled } else { valid.first().cloned() };
    Ok(Selection {
        failures: if selected.is_some() { Vec::new() } else { failures },
        selected,
        peeling_succeeded: peel_ok,
        exhaustive: true,
        valid_count: Some(valid.len()),
    })
}

// pick a curve with at least d deg points among the remaining groups, drop
// the groups it contains, repeat
fn peel(section: &TaggedConfig, candidates: &[CurveWitness], d: usize) -> Option<Vec<usize>> {
    let mut remaining: Vec<(usize, Vec<usize>)> = section.groups();
    let mut chosen = Vec::new();
    while !remaining.is_empty() {
        let pick = (0..candidates.len()).find(|&c| {
            if chosen.contains(&c) {
                return false;
            }
            let set: BTreeSet<usize> = candidates[c].labels().iter().copied().collect();
            let on = remaining.iter().flat_map(|(_, g)| g).filter(|x| set.contains(x)).count();
            on >= d * candidates[c].degree()
        })?;
        let set: BTreeSet<usize> = candidates[pick].labels().iter().copied().collect();
        let before = remaining.len();
        remaining.retain(|(_, g)| !g.iter().all(|x| set.contains(x)));
        if remaining.len() == before {
            return None;
        }
        chosen.push(pick);
    }
    chosen.sort_unstable();
    Some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_of_i_in_f49() {
        let f = Field::finite(7, 2).unwrap();
        assert_eq!(f.modulus().unwrap(), &[1, 0, 1]);
        let i = f.from_coeffs(&[0, 1]).unwrap();
        let p = ProjPoint::new(&f, vec![f.one(), i, f.zero()]).unwrap();
        let (s, a) = orbit_config(&f, &p, 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(a.generators, vec![vec![1, 0]]);
        assert!(a.transitive);
        assert!(matches!(orbit_config(&f, &p, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn explicit_actions() {
        let f = Field::prime(7).unwrap();
        let pts = (0..3).map(|t| ProjPoint::from_i64(&f, &[1, t]).unwrap()).collect();
        let s = PointConfig::new(&f, 1, pts).unwrap();
        let a = GroupAction::explicit(&s, vec![vec![1, 2, 0]]).unwrap();
        assert!(a.transitive);
        assert!(!a.compatible());
        assert!(GroupAction::explicit(&s, vec![vec![0, 0, 1]]).is_err());
        let b = GroupAction::explicit(&s, vec![vec![1, 0, 2]]).unwrap();
        assert!(!b.transitive);
    }
}
