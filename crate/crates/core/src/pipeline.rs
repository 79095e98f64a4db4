//! End-to-end replay of the covering argument on a generated closed point:
//! CB subset, curve bootstrap, pigeonhole component, Frobenius cover and
//! the check that the cover is not contained in the hypersurface.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{dagger_check, k_prime, main_bound};
use crate::cb::find_cb_subset;
use crate::curve::{bootstrap_curve, components, pigeonhole_component};
use crate::error::{Error, Result};
use crate::gen::{lift_form, main_theorem_instance};
use crate::orbit::{cover_with_conjugates, invariance_check};

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub seed: u64,
    pub d: usize,
    pub r: usize,
    pub orbit_size: usize,
    pub dagger: bool,
    pub cb_subset_size: usize,
    pub cb_search_exhaustive: bool,
    /// `k'` computed from `|S'|`, and the degree the bootstrap returned.
    pub k1: usize,
    pub bootstrap_degree: usize,
    pub bootstrap_covered: usize,
    pub bootstrap_guaranteed: i64,
    pub bootstrap_reduced: bool,
    pub component_degree: usize,
    pub component_covered: usize,
    pub component_promised: usize,
    pub factorization_complete: bool,
    pub cover_success: bool,
    pub cover_translates: usize,
    pub cover_degree: usize,
    pub invariant: bool,
    /// Parameter `s` in `F_p` with `C(s)` on the cover and off the hypersurface.
    pub off_hypersurface_parameter: Option<u32>,
    /// Sampled parameters whose curve point lies on the cover.
    pub sampled_on_cover: usize,
    pub success: bool,
    pub stages: serde_json::Value,
}

/// Runs the whole chain for `(n, k)` at `d = main_bound(n, k)` over `F_p`.
pub fn pipeline_main_theorem(n: usize, k: usize, p: u32, seed: u64) -> Result<PipelineReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = main_bound(n as i64, k as i64) as usize;
    let r = d - 2 * n - 2;
    let dagger = dagger_check(d as i64, r as i64, k as i64)?.verdict;
    let inst = main_theorem_instance(n, k, p, &mut rng)?;
    let orbit = inst.orbit();
    let s = &orbit.config;
    let field = s.field().clone();

    let search = find_cb_subset(s, r, r + 2)?;
    let sub_labels = search
        .best()
        .cloned()
        .ok_or_else(|| Error::MathAssertion(format!("no CB({}) subset in an orbit of size {}", r, s.len())))?;
    let sub = s.subset(&sub_labels)?;
    let m1 = sub.len();
    let k1 = k_prime(m1 as i64, r as i64, k as i64) as usize;
    if k1 > k {
        return Err(Error::MathAssertion(format!("k' = {} exceeds k = {}", k1, k)));
    }

    let boot = bootstrap_curve(&sub, r, k1, &mut rng)?;
    let guaranteed = boot.chain.last().map(|c| c.guaranteed).unwrap_or(m1 as i64);
    if boot.k_prime == 0 {
        return Err(Error::MathAssertion("bootstrap returned the empty curve".into()));
    }
    let (comp, complete) = components(&sub, &boot.witness)?;
    let pig = pigeonhole_component(&comp)?;
    let base = pig.member.relabel(s)?;
    let cover = cover_with_conjugates(s, &orbit.action, &base, k, d)?;
    let inv = invariance_check(&cover, &orbit.action, k);

    // points C(s), s in F_p, on the cover and off X
    let x = lift_form(&inst.hypersurface, &field)?;
    let mut off = None;
    let mut on_cover = 0;
    for t in 0..p {
        let pt = inst.curve.point_at(&field, &field.from_prime(t))?;
        if cover.translates.iter().any(|w| w.contains(&pt)) {
            on_cover += 1;
            if off.is_none() && !field.is_zero(&x.eval(pt.coords())) {
                off = Some(t);
            }
        }
    }
    let success = dagger
        && cover.success
        && cover.total_degree <= k
        && inv.invariant
        && off.is_some()
        && boot.labels.len() as i64 >= guaranteed;
    let stages = serde_json::json!({
        "instance": {
            "hypersurface_degree": inst.d,
            "curve": inst.curve,
            "section": inst.section.to_json(),
        },
        "cb_subset": search,
        "bootstrap": {
            "k_prime": boot.k_prime,
            "covered_labels": boot.labels,
            "chain": boot.chain,
            "witness": boot.witness.to_json(),
            "reduced": boot.reduced,
            "inconclusive": boot.inconclusive,
        },
        "component": {
            "degree": pig.degree,
            "labels": pig.labels,
            "promised": pig.promised,
            "factorization_complete": complete,
        },
        "cover": cover.to_json(),
        "invariance": inv,
    });
    Ok(PipelineReport {
        n,
        k,
        p,
        seed,
        d,
        r,
        orbit_size: s.len(),
        dagger,
        cb_subset_size: m1,
        cb_search_exhaustive: search.exhaustive,
        k1,
        bootstrap_degree: boot.k_prime,
        bootstrap_covered: boot.labels.len(),
        bootstrap_guaranteed: guaranteed,
        bootstrap_reduced: boot.reduced,
        component_degree: pig.degree,
        component_covered: pig.labels.len(),
        component_promised: pig.promised,
        factorization_complete: complete,
        cover_success: cover.success,
        cover_translates: cover.translates.len(),
        cover_degree: cover.total_degree,
        invariant: inv.invariant,
        off_hypersurface_parameter: off,
        sampled_on_cover: on_cover,
        success,
        stages,
    })
}
