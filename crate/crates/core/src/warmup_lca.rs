//! The sampling-based LCA built from a density test and an element coverage
//! test, each recursing into the other at earlier iterations.

use crate::access::{OracleKind, Pipeline, ProbeContext, Vertex};
use crate::instance::{ElementId, SetId};
use crate::randomness::{sample_positions, Label, Tag};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityVerdict {
    Dense,
    Light,
    Bad,
}

/// Density test for set `s` at phase `i`, iteration `j`.
pub fn is_set_dense(ctx: &mut ProbeContext<'_>, i: u32, j: u32, s: SetId) -> DensityVerdict {
    density(ctx, Pipeline::Fractional, i, j, s)
}

/// Whether element `e` is covered by the end of iteration `(i, j)`. `j = 0`
/// refers to the start of phase `i`.
pub fn is_ele_cov(ctx: &mut ProbeContext<'_>, i: u32, j: u32, e: ElementId) -> bool {
    element_covered(ctx, Pipeline::Fractional, i, j, e)
}

pub(crate) fn density(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, i: u32, j: u32, s: SetId) -> DensityVerdict {
    ctx.note_call();
    if let Some(&v) = ctx.memo.dense.get(&(pipeline, i, j, s)) {
        return v;
    }
    let v = ctx.instrumented(OracleKind::SetDense, i, j, 0, |ctx| density_fresh(ctx, pipeline, i, j, s));
    ctx.memo.dense.insert((pipeline, i, j, s), v);
    v
}

fn density_fresh(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, i: u32, j: u32, s: SetId) -> DensityVerdict {
    let p = *ctx.params();
    let size = ctx.size(Vertex::Set(s));
    if !p.reaches_level(size as u64, i) {
        return DensityVerdict::Light;
    }
    let label = Label::new(Tag::WarmupSetSample).iteration(i, j).vertex(s as u64);
    let draws = (1u64 << i) * p.sample_scale;
    let sample = sample_positions(ctx.tape(), &label, size, draws, p.delta);
    let mut live: Vec<(ElementId, u64)> =
        sample.entries.iter().map(|en| (ctx.read(Vertex::Set(s), en.position), en.count)).collect();

    for earlier in 1..i {
        let mut kept = Vec::with_capacity(live.len());
        for &(e, c) in &live {
            if !element_covered(ctx, pipeline, earlier, p.log_f, e) {
                kept.push((e, c));
            }
        }
        live = kept;
        if live.len() as u64 > (1u64 << (i - earlier + 2)) * p.sample_scale {
            return DensityVerdict::Bad;
        }
    }
    let mut survivors = 0u64;
    for &(e, c) in &live {
        if !element_covered(ctx, pipeline, i, j - 1, e) {
            survivors += c;
        }
    }
    if 2 * survivors >= p.sample_scale {
        DensityVerdict::Dense
    } else {
        DensityVerdict::Light
    }
}

pub(crate) fn element_covered(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, i: u32, j: u32, e: ElementId) -> bool {
    if j == 0 {
        if i <= 1 {
            return false;
        }
        let log_f = ctx.params().log_f;
        return element_covered(ctx, pipeline, i - 1, log_f, e);
    }
    ctx.note_call();
    if let Some(&v) = ctx.memo.ele_cov.get(&(pipeline, i, j, e)) {
        return v;
    }
    let v = ctx.instrumented(OracleKind::ElementCovered, i, j, 0, |ctx| element_covered_fresh(ctx, pipeline, i, j, e));
    ctx.memo.ele_cov.insert((pipeline, i, j, e), v);
    v
}

fn element_covered_fresh(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, i: u32, j: u32, e: ElementId) -> bool {
    if element_covered(ctx, pipeline, i, j - 1, e) {
        return true;
    }
    let p = *ctx.params();
    let size = ctx.size(Vertex::Element(e));
    let label = Label::new(Tag::WarmupElementSample).iteration(i, j).vertex(e as u64);
    let draws = (1u64 << j) * p.sample_scale;
    let sample = sample_positions(ctx.tape(), &label, size, draws, p.f);
    match pipeline {
        Pipeline::Fractional => {
            // Weight is tracked scaled by 2^j * scale so that the target is an integer.
            let target = draws as u128;
            let mut acc = 0u128;
            for en in &sample.entries {
                let s = ctx.read(Vertex::Element(e), en.position);
                for k in 1..=j {
                    match density(ctx, pipeline, i, k, s) {
                        DensityVerdict::Dense => {
                            acc += (en.count as u128) << k;
                            if acc >= target {
                                return true;
                            }
                        }
                        DensityVerdict::Bad => return true,
                        DensityVerdict::Light => break,
                    }
                }
            }
            false
        }
        Pipeline::Integral => {
            let rounding = ctx.tape().rounding(p.f as usize);
            for en in &sample.entries {
                let s = ctx.read(Vertex::Element(e), en.position);
                if !rounding.bit(s, i, j) {
                    continue;
                }
                let mut dense_throughout = true;
                for k in 1..=j {
                    match density(ctx, pipeline, i, k, s) {
                        DensityVerdict::Dense => {}
                        DensityVerdict::Bad => return true,
                        DensityVerdict::Light => {
                            dense_throughout = false;
                            break;
                        }
                    }
                }
                if dense_throughout {
                    return true;
                }
            }
            false
        }
    }
}

/// Weight of `s` before naive covering.
pub fn get_weight<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> T {
    let p = *ctx.params();
    let mut wt = T::zero();
    for i in 1..=p.log_delta {
        for j in 1..=p.log_f {
            match is_set_dense(ctx, i, j, s) {
                DensityVerdict::Dense => wt = (wt + T::pow2_over(j, p.f)).cap_one(),
                DensityVerdict::Bad => wt = T::one(),
                DensityVerdict::Light => break,
            }
        }
    }
    wt
}

/// Nonzero weight increments `(i, j, amount)` that make up [`get_weight`].
pub fn weight_schedule<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> Vec<(u32, u32, T)> {
    let p = *ctx.params();
    let mut wt = T::zero();
    let mut out = Vec::new();
    for i in 1..=p.log_delta {
        for j in 1..=p.log_f {
            let next = match is_set_dense(ctx, i, j, s) {
                DensityVerdict::Dense => (wt.clone() + T::pow2_over(j, p.f)).cap_one(),
                DensityVerdict::Bad => T::one(),
                DensityVerdict::Light => break,
            };
            if next > wt {
                out.push((i, j, next.clone() - wt.clone()));
                wt = next;
            }
        }
    }
    out
}

/// Final weight of `s`, including the least-id naive covering step.
pub fn lca_weight<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> T {
    let wt: T = get_weight(ctx, s);
    if wt >= T::one() {
        return wt;
    }
    let size = ctx.size(Vertex::Set(s));
    for idx in 0..size as u32 {
        let e = ctx.read(Vertex::Set(s), idx);
        let sets = ctx.adjacency(Vertex::Element(e));
        if sets.iter().min() != Some(&s) {
            continue;
        }
        let mut total = T::zero();
        for &other in &sets {
            total = total + get_weight::<T>(ctx, other);
        }
        if total < T::one() {
            return T::one();
        }
    }
    wt
}

/// Pre-naive membership in the integral variant: a Dense verdict adds the
/// set when its rounding bit for that iteration is set, and Bad adds it
/// outright.
pub fn warmup_integral_pre_naive(ctx: &mut ProbeContext<'_>, s: SetId) -> bool {
    warmup_integral_join(ctx, s).is_some()
}

/// Iteration at which `s` joins the integral warmup cover before naive
/// covering.
pub fn warmup_integral_join(ctx: &mut ProbeContext<'_>, s: SetId) -> Option<(u32, u32)> {
    let p = *ctx.params();
    let rounding = ctx.tape().rounding(p.f as usize);
    for i in 1..=p.log_delta {
        for j in 1..=p.log_f {
            match density(ctx, Pipeline::Integral, i, j, s) {
                DensityVerdict::Dense => {
                    if rounding.bit(s, i, j) {
                        return Some((i, j));
                    }
                }
                DensityVerdict::Bad => return Some((i, j)),
                DensityVerdict::Light => break,
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::AlgoParams;
    use crate::instance::SetCoverInstance;
    use crate::randomness::RandomTape;

    fn complete(sets: usize, elems: usize) -> SetCoverInstance {
        SetCoverInstance::from_sets(elems, vec![(0..elems as u32).collect(); sets]).unwrap()
    }

    #[test]
    fn small_set_is_light() {
        let inst = SetCoverInstance::from_sets(8, vec![(0..8).collect(), vec![0]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(1), AlgoParams::for_instance(&inst).with_sample_scale(8));
        assert_eq!(is_set_dense(&mut ctx, 2, 1, 1), DensityVerdict::Light);
    }

    #[test]
    fn full_set_dense_at_first_iteration() {
        let inst = SetCoverInstance::from_sets(8, vec![(0..8).collect(), vec![0]]).unwrap();
        for seed in 0..20 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), AlgoParams::for_instance(&inst).with_sample_scale(8));
            assert_eq!(is_set_dense(&mut ctx, 1, 1, 0), DensityVerdict::Dense);
        }
    }

    #[test]
    fn memo_hit_costs_nothing() {
        let inst = complete(3, 8);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(4), AlgoParams::for_instance(&inst).with_sample_scale(8));
        let first = is_set_dense(&mut ctx, 2, 2, 1);
        let q = ctx.query_count();
        assert_eq!(is_set_dense(&mut ctx, 2, 2, 1), first);
        assert_eq!(ctx.query_count(), q);
    }

    #[test]
    fn coverage_base_case() {
        let inst = complete(2, 4);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert!(!is_ele_cov(&mut ctx, 1, 0, 3));
        assert_eq!(ctx.query_count(), 0);
    }

    #[test]
    fn all_light_sets_leave_element_uncovered() {
        // Element 0 sits only in singletons while delta is 8, so every set
        // containing it fails the size guard at i = 1.
        let inst = SetCoverInstance::from_sets(9, vec![(1..9).collect(), vec![0], vec![0]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(2), AlgoParams::for_instance(&inst).with_sample_scale(8));
        assert!(!is_ele_cov(&mut ctx, 1, 1, 0));
    }

    #[test]
    fn complete_bipartite_accumulates_to_one() {
        // Every draw over N(e) lands (|N(e)| = f) and every set is dense at
        // (1, k) for all k <= j, so the accumulated weight is
        // 2^j * scale * sum_k 2^(k - j) / scale >= 1.
        let inst = complete(4, 16);
        for seed in 0..10 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), AlgoParams::for_instance(&inst).with_sample_scale(8));
            assert_eq!(is_set_dense(&mut ctx, 1, 1, 0), DensityVerdict::Dense);
            assert!(is_ele_cov(&mut ctx, 1, 1, 5));
        }
    }

    #[test]
    fn light_everywhere_gives_zero_weight() {
        // Set 1 = {0} and set 2 = {1} fail the size guard in every phase
        // since 2^i < 32 = delta.
        let inst = SetCoverInstance::from_sets(32, vec![(0..32).collect(), vec![0], vec![1]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(3), AlgoParams::for_instance(&inst).with_sample_scale(8));
        assert_eq!(ctx.params().log_delta, 5);
        for i in 1..5 {
            assert_eq!(is_set_dense(&mut ctx, i, 1, 1), DensityVerdict::Light);
        }
        let w: f64 = get_weight(&mut ctx, 2);
        assert!(w < 1.0);
    }

    #[test]
    fn star_center_saturates() {
        let inst = SetCoverInstance::from_sets(8, {
            let mut v = vec![(0..8).collect::<Vec<u32>>()];
            v.extend((0..8).map(|e| vec![e]));
            v
        })
        .unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(11), AlgoParams::for_instance(&inst));
        let w: f64 = lca_weight(&mut ctx, 0);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn naive_rule_prefers_least_id() {
        // Element 0 lies in sets 2 and 7 only; with a huge delta both are
        // light everywhere, so only the least-id set is raised.
        let mut sets: Vec<Vec<u32>> = vec![vec![]; 8];
        sets[0] = (1..65).collect();
        sets[2] = vec![0];
        sets[7] = vec![0];
        let inst = SetCoverInstance::from_sets(65, sets).unwrap();
        let p = AlgoParams::for_instance(&inst).with_sample_scale(8);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(5), p);
        let w2: f64 = get_weight(&mut ctx, 2);
        let w7: f64 = get_weight(&mut ctx, 7);
        if w2 + w7 < 1.0 {
            assert_eq!(lca_weight::<f64>(&mut ctx, 2), 1.0);
            assert_eq!(lca_weight::<f64>(&mut ctx, 7), w7);
        }
    }

    #[test]
    fn exact_and_float_weights_agree() {
        use num_rational::Ratio;
        let inst = complete(5, 12);
        let p = AlgoParams::for_instance(&inst).with_sample_scale(8);
        for s in 0..5 {
            let mut a = ProbeContext::new(&inst, RandomTape::new(9), p);
            let mut b = ProbeContext::new(&inst, RandomTape::new(9), p);
            let wf: f64 = lca_weight(&mut a, s);
            let wr: Ratio<i64> = lca_weight(&mut b, s);
            assert_eq!(wf, wr.to_f64_lossy());
        }
    }
}
