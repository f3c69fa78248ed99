//! Integral covers: rounding-bit inclusion on top of both LCAs, the boosted
//! coverage estimator, and element probes.

use std::ops::ControlFlow;

use rand::seq::SliceRandom;

use crate::access::{OracleKind, Pipeline, ProbeContext, Vertex};
use crate::instance::{ElementId, SetId};
use crate::main_lca::{degree_oracle, retroactive_sweep, BoostFrame};
use crate::randomness::{Label, Tag};
use crate::warmup_lca::warmup_integral_pre_naive;

/// The sweep step at which a set entered the cover: `at` is the iteration
/// being swept, `target` the (possibly earlier) iteration whose estimate
/// crossed its threshold with rounding bit one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoverWitness {
    pub at: (u32, u32),
    pub target: (u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverDecision {
    pub in_cover: bool,
    /// Trigger iteration that put the set in the cover, if any.
    pub witness: Option<(u32, u32)>,
    /// Set only by the least-id rule.
    pub naive: bool,
}

/// A containing set of `e` that the estimator saw enter the cover by the end
/// of `frame`'s iteration, or `None`.
pub fn covered_estimate(ctx: &mut ProbeContext<'_>, frame: BoostFrame, e: ElementId) -> Option<SetId> {
    if frame.i == 0 {
        return None;
    }
    ctx.note_call();
    if let Some(&v) = ctx.memo.covered.get(&(frame, e)) {
        return v;
    }
    let v = ctx.instrumented(OracleKind::CoveredEstimate, frame.i, frame.j, frame.b(), |ctx| covered_fresh(ctx, frame, e));
    ctx.memo.covered.insert((frame, e), v);
    v
}

fn covered_fresh(ctx: &mut ProbeContext<'_>, frame: BoostFrame, e: ElementId) -> Option<SetId> {
    let BoostFrame { i, j, .. } = frame;
    let p = *ctx.params();
    let prev = if j > 1 { frame.at(i, j - 1) } else { frame.at(i - 1, p.log_f) };
    if let Some(w) = covered_estimate(ctx, prev, e) {
        return Some(w);
    }
    let rounding = ctx.tape().rounding(p.f as usize);
    let db = p.delta_boost * frame.b();
    let mut candidates: Vec<SetId> = ctx.adjacency(Vertex::Element(e)).into_iter().filter(|&s| rounding.bit(s, i, j)).collect();
    let cap = ((1u64 << (j + db)) * p.k * p.sample_scale) as usize;
    if candidates.len() > cap {
        let label = Label::new(Tag::Truncation).iteration(i, j).boost(frame.i_star, frame.j_star).vertex(e as u64);
        let mut stream = ctx.tape().stream(&label);
        candidates.partial_shuffle(stream.rng(), cap);
        candidates.truncate(cap);
        candidates.sort_unstable();
    }
    for earlier_j in 1..=j {
        for &s in &candidates {
            if degree_oracle(ctx, Pipeline::Integral, frame.at(i, earlier_j), s).reaches_level(p.delta, i) {
                return Some(s);
            }
        }
        if candidates.len() as u64 > (1u64 << (j - earlier_j + p.delta_boost + db)) * p.k * p.sample_scale {
            return None;
        }
    }
    None
}

/// First trigger of the integral sweep for `s` whose rounding bit is one.
pub fn integral_pre_naive(ctx: &mut ProbeContext<'_>, s: SetId) -> Option<CoverWitness> {
    if let Some(&w) = ctx.memo.integral_witness.get(&s) {
        return w;
    }
    let p = *ctx.params();
    let rounding = ctx.tape().rounding(p.f as usize);
    let mut witness = None;
    retroactive_sweep(
        &p,
        |frame| degree_oracle(ctx, Pipeline::Integral, frame, s),
        |t| {
            if rounding.bit(s, t.target.0, t.target.1) {
                witness = Some(CoverWitness { at: t.at, target: t.target });
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    ctx.memo.integral_witness.insert(s, witness);
    witness
}

/// Shared naive pass: `s` joins when it is the least-id set of some member
/// none of whose sets joined before naive covering.
fn naive_rule(ctx: &mut ProbeContext<'_>, s: SetId, mut pre: impl FnMut(&mut ProbeContext<'_>, SetId) -> bool) -> bool {
    let size = ctx.size(Vertex::Set(s));
    for idx in 0..size as u32 {
        let e = ctx.read(Vertex::Set(s), idx);
        let sets = ctx.adjacency(Vertex::Element(e));
        if sets.iter().min() != Some(&s) {
            continue;
        }
        let mut covered = false;
        for &other in &sets {
            if pre(ctx, other) {
                covered = true;
                break;
            }
        }
        if !covered {
            return true;
        }
    }
    false
}

/// Full decision for `s` in the integral main LCA.
pub fn integral_decision(ctx: &mut ProbeContext<'_>, s: SetId) -> CoverDecision {
    if let Some(w) = integral_pre_naive(ctx, s) {
        return CoverDecision { in_cover: true, witness: Some(w.target), naive: false };
    }
    let naive = naive_rule(ctx, s, |ctx, other| integral_pre_naive(ctx, other).is_some());
    CoverDecision { in_cover: naive, witness: None, naive }
}

/// Is `s` in the cover produced by the integral main LCA?
pub fn integral_probe_set(ctx: &mut ProbeContext<'_>, s: SetId) -> bool {
    integral_decision(ctx, s).in_cover
}

/// A set containing `e` that the integral main LCA puts in the cover.
pub fn integral_probe_element(ctx: &mut ProbeContext<'_>, e: ElementId) -> SetId {
    let p = *ctx.params();
    let last = BoostFrame::unboosted(p.log_delta, p.log_f);
    if let Some(w) = covered_estimate(ctx, last, e) {
        if integral_pre_naive(ctx, w).is_some() {
            return w;
        }
    }
    let sets = ctx.adjacency(Vertex::Element(e));
    for &s in &sets {
        if integral_pre_naive(ctx, s).is_some() {
            return s;
        }
    }
    *sets.iter().min().expect("every element lies in some set")
}

/// Is `s` in the cover produced by the integral variant of the warmup LCA?
pub fn warmup_integral_probe(ctx: &mut ProbeContext<'_>, s: SetId) -> bool {
    warmup_integral_pre_naive(ctx, s) || naive_rule(ctx, s, warmup_integral_pre_naive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::AlgoParams;
    use crate::instance::{validate_cover, IntegralCover, SetCoverInstance};
    use crate::randomness::RandomTape;

    fn star(delta: u32) -> SetCoverInstance {
        let mut sets = vec![(0..delta).collect::<Vec<u32>>()];
        sets.extend((0..delta).map(|e| vec![e]));
        SetCoverInstance::from_sets(delta as usize, sets).unwrap()
    }

    #[test]
    fn base_case_is_uncovered() {
        let inst = star(4);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert_eq!(covered_estimate(&mut ctx, BoostFrame { i: 0, j: 1, i_star: 1, j_star: 1 }, 0), None);
    }

    #[test]
    fn dominant_set_is_witnessed() {
        // f = 2, so j = log_f = 1 has bit probability one, and the center's
        // degree at (1, 1) is exactly delta.
        let inst = star(8);
        let p = AlgoParams::for_instance(&inst).with_sample_scale(4);
        assert_eq!(p.log_f, 1);
        for seed in 0..5 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), p);
            assert_eq!(covered_estimate(&mut ctx, BoostFrame::unboosted(1, 1), 3), Some(0));
            assert!(integral_probe_set(&mut ctx, 0));
            assert_eq!(integral_probe_element(&mut ctx, 3), 0);
        }
    }

    #[test]
    fn star_cover_is_the_center() {
        let inst = star(8);
        let p = AlgoParams::for_instance(&inst).with_sample_scale(4);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(2), p);
        let chosen: Vec<bool> = (0..inst.num_sets() as u32).map(|s| integral_probe_set(&mut ctx, s)).collect();
        assert_eq!(IntegralCover::from_flags(chosen).ids(), vec![0]);
    }

    #[test]
    fn element_probe_consistent_with_set_probe() {
        let inst = SetCoverInstance::from_sets(6, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5], vec![1, 4]]).unwrap();
        let p = AlgoParams::for_instance(&inst).with_sample_scale(4);
        for seed in 0..10 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), p);
            let flags: Vec<bool> = (0..5).map(|s| integral_probe_set(&mut ctx, s)).collect();
            assert!(validate_cover(&inst, &IntegralCover::from_flags(flags.clone())).is_ok());
            for e in 0..6 {
                let s = integral_probe_element(&mut ctx, e);
                assert!(inst.members(s).contains(&e));
                assert!(flags[s as usize]);
            }
        }
    }

    #[test]
    fn warmup_integral_is_feasible() {
        let inst = SetCoverInstance::from_sets(6, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5], vec![1, 4]]).unwrap();
        let p = AlgoParams::for_instance(&inst).with_sample_scale(8);
        for seed in 0..10 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), p);
            let flags: Vec<bool> = (0..5).map(|s| warmup_integral_probe(&mut ctx, s)).collect();
            assert!(validate_cover(&inst, &IntegralCover::from_flags(flags)).is_ok());
        }
    }

    #[test]
    fn unreached_set_outside_naive_rule_is_out() {
        // Set 2 = {0} is never dense (delta = 16) and never least-id.
        let inst = SetCoverInstance::from_sets(16, vec![(0..16).collect(), vec![0], vec![0]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst).with_sample_scale(4));
        let d = integral_decision(&mut ctx, 2);
        assert!(!d.in_cover);
        assert_eq!(d.witness, None);
    }
}
