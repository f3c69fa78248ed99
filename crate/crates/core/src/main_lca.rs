//! Boosted degree and weight estimators and the per-set simulation of the
//! retroactive-update algorithm.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use crate::access::{AlgoParams, OracleKind, Pipeline, ProbeContext, Vertex};
use crate::instance::{ElementId, SetId};
use crate::integral::covered_estimate;
use crate::randomness::{sample_positions, Label, Tag};
use crate::scalar::Scalar;

/// An iteration `(i, j)` evaluated on behalf of a later iteration
/// `(i_star, j_star)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoostFrame {
    pub i: u32,
    pub j: u32,
    pub i_star: u32,
    pub j_star: u32,
}

impl BoostFrame {
    pub fn new(i: u32, j: u32, i_star: u32, j_star: u32) -> Self {
        debug_assert!((i, j) <= (i_star, j_star), "frame must not precede its iteration");
        BoostFrame { i, j, i_star, j_star }
    }

    /// Frame evaluated on behalf of itself.
    pub fn unboosted(i: u32, j: u32) -> Self {
        BoostFrame::new(i, j, i, j)
    }

    /// Iteration distance to the boost anchor.
    pub fn b(&self) -> u32 {
        if self.i == self.i_star {
            self.j_star - self.j + 1
        } else {
            self.j_star
        }
    }

    /// Same anchor, different iteration.
    pub fn at(&self, i: u32, j: u32) -> Self {
        BoostFrame { i, j, ..*self }
    }

    fn label(&self, tag: Tag, vertex: u32) -> Label {
        Label::new(tag).iteration(self.i, self.j).boost(self.i_star, self.j_star).vertex(vertex as u64)
    }
}

/// Non-negative rational `num / den` with exact comparisons.
#[derive(Debug, Clone, Copy)]
pub struct DegreeValue {
    num: u128,
    den: u128,
}

impl DegreeValue {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        DegreeValue { num, den }
    }

    pub fn integer(v: u64) -> Self {
        DegreeValue::new(v as u128, 1)
    }

    pub fn zero() -> Self {
        DegreeValue::integer(0)
    }

    /// `self >= delta / 2^i`.
    pub fn reaches_level(&self, delta: u64, i: u32) -> bool {
        self.num << i >= delta as u128 * self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_scalar<T: Scalar>(&self) -> T {
        T::from_u128(self.num).expect("numerator representable") / T::from_u128(self.den).expect("denominator representable")
    }
}

impl PartialEq for DegreeValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DegreeValue {}

impl PartialOrd for DegreeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DegreeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeOutcome {
    Estimate(DegreeValue),
    Fail,
}

impl DegreeOutcome {
    /// `Fail` counts as zero.
    pub fn value_or_zero(&self) -> DegreeValue {
        match self {
            DegreeOutcome::Estimate(v) => *v,
            DegreeOutcome::Fail => DegreeValue::zero(),
        }
    }

    pub fn reaches_level(&self, delta: u64, i: u32) -> bool {
        matches!(self, DegreeOutcome::Estimate(v) if v.reaches_level(delta, i))
    }
}

/// Estimated weight of an element: either at least one half or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementWeight {
    Zero,
    Half,
}

impl ElementWeight {
    pub fn as_scalar<T: Scalar>(&self) -> T {
        match self {
            ElementWeight::Zero => T::zero(),
            ElementWeight::Half => T::ratio(1, 2),
        }
    }
}

fn boosted(p: &AlgoParams, exp: u32) -> u64 {
    (1u64 << exp) * p.k * p.sample_scale
}

/// Effective-degree estimate of `s` at `frame`.
pub fn degree_estimate(ctx: &mut ProbeContext<'_>, frame: BoostFrame, s: SetId) -> DegreeOutcome {
    degree_oracle(ctx, Pipeline::Fractional, frame, s)
}

pub(crate) fn degree_oracle(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, frame: BoostFrame, s: SetId) -> DegreeOutcome {
    ctx.note_call();
    if frame.i == 0 {
        let n = ctx.size(Vertex::Set(s));
        return DegreeOutcome::Estimate(DegreeValue::integer(n as u64));
    }
    if let Some(&v) = ctx.memo.degree.get(&(pipeline, frame, s)) {
        return v;
    }
    let v = ctx.instrumented(OracleKind::DegreeEstimate, frame.i, frame.j, frame.b(), |ctx| {
        degree_fresh(ctx, pipeline, frame, s)
    });
    ctx.memo.degree.insert((pipeline, frame, s), v);
    v
}

fn element_pruned(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, frame: BoostFrame, e: ElementId) -> bool {
    match pipeline {
        Pipeline::Fractional => weight_estimate(ctx, frame, e) == ElementWeight::Half,
        Pipeline::Integral => covered_estimate(ctx, frame, e).is_some(),
    }
}

fn degree_fresh(ctx: &mut ProbeContext<'_>, pipeline: Pipeline, frame: BoostFrame, s: SetId) -> DegreeOutcome {
    let BoostFrame { i, j, .. } = frame;
    if j > 1 && degree_oracle(ctx, pipeline, frame.at(i, j - 1), s) == DegreeOutcome::Fail {
        return DegreeOutcome::Fail;
    }
    let p = *ctx.params();
    let n = ctx.size(Vertex::Set(s));
    if n == 0 {
        return DegreeOutcome::Estimate(DegreeValue::zero());
    }
    let db = p.delta_boost * frame.b();
    let draws = boosted(&p, i + db);
    let sample = sample_positions(ctx.tape(), &frame.label(Tag::DegreeSample, s), n, draws, n as u64);
    let mut live: Vec<(ElementId, u64)> =
        sample.entries.iter().map(|en| (ctx.read(Vertex::Set(s), en.position), en.count)).collect();

    for earlier in 1..i {
        let anchor = BoostFrame::new(earlier, p.log_f, i, j);
        let mut kept = Vec::with_capacity(live.len());
        for &(e, c) in &live {
            if !element_pruned(ctx, pipeline, anchor, e) {
                kept.push((e, c));
            }
        }
        live = kept;
        let size: u64 = live.iter().map(|&(_, c)| c).sum();
        if size > boosted(&p, i - earlier + db + p.delta_boost) {
            return DegreeOutcome::Fail;
        }
    }
    for earlier_j in 1..j {
        let anchor = BoostFrame::new(i, earlier_j, i, j - 1);
        let mut kept = Vec::with_capacity(live.len());
        for &(e, c) in &live {
            if !element_pruned(ctx, pipeline, anchor, e) {
                kept.push((e, c));
            }
        }
        live = kept;
    }
    let survivors: u64 = live.iter().map(|&(_, c)| c).sum();
    DegreeOutcome::Estimate(DegreeValue::new(survivors as u128 * n as u128, draws as u128))
}

/// Whether `e` carries estimated weight at least one half by the end of
/// `frame`'s iteration.
pub fn weight_estimate(ctx: &mut ProbeContext<'_>, frame: BoostFrame, e: ElementId) -> ElementWeight {
    if frame.j == 0 {
        if frame.i <= 1 {
            return ElementWeight::Zero;
        }
        let log_f = ctx.params().log_f;
        return weight_estimate(ctx, frame.at(frame.i - 1, log_f), e);
    }
    ctx.note_call();
    if let Some(&v) = ctx.memo.weight.get(&(frame, e)) {
        return v;
    }
    let v = ctx.instrumented(OracleKind::WeightEstimate, frame.i, frame.j, frame.b(), |ctx| weight_fresh(ctx, frame, e));
    ctx.memo.weight.insert((frame, e), v);
    v
}

fn weight_fresh(ctx: &mut ProbeContext<'_>, frame: BoostFrame, e: ElementId) -> ElementWeight {
    let BoostFrame { i, j, .. } = frame;
    if weight_estimate(ctx, frame.at(i, j - 1), e) == ElementWeight::Half {
        return ElementWeight::Half;
    }
    let p = *ctx.params();
    let db = p.delta_boost * frame.b();
    let n = ctx.size(Vertex::Element(e));
    let draws = boosted(&p, j + db + p.delta_boost);
    let sample = sample_positions(ctx.tape(), &frame.label(Tag::WeightSample, e), n, draws, p.f);
    let mut live: Vec<(SetId, u64)> =
        sample.entries.iter().map(|en| (ctx.read(Vertex::Element(e), en.position), en.count)).collect();
    for earlier_j in 1..=j {
        let mut kept = Vec::with_capacity(live.len());
        for &(s, c) in &live {
            if degree_oracle(ctx, Pipeline::Fractional, frame.at(i, earlier_j), s).reaches_level(p.delta, i) {
                kept.push((s, c));
            }
        }
        live = kept;
        let size: u64 = live.iter().map(|&(_, c)| c).sum();
        if size >= boosted(&p, j - earlier_j + db + p.delta_boost) {
            return ElementWeight::Half;
        }
    }
    ElementWeight::Zero
}

/// A first-time threshold crossing: while sweeping iteration `at`, the stored
/// estimate for iteration `target` reached `delta / 2^i'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Trigger {
    pub at: (u32, u32),
    pub target: (u32, u32),
}

/// Runs the retroactive sweep for one set. `estimate` returns the fresh
/// estimate for a frame; `on_trigger` is told about every first-time crossing
/// and may stop the sweep.
pub fn retroactive_sweep(
    params: &AlgoParams,
    mut estimate: impl FnMut(BoostFrame) -> DegreeOutcome,
    mut on_trigger: impl FnMut(Trigger) -> ControlFlow<()>,
) {
    let lf = params.log_f as usize;
    let cells = params.log_delta as usize * lf;
    let mut stored = vec![DegreeValue::zero(); cells];
    let mut fired = vec![false; cells];
    for i in 1..=params.log_delta {
        for j in 1..=params.log_f {
            let mut running_min: Option<DegreeValue> = None;
            for ii in 1..=i {
                let jj_max = if ii == i { j } else { params.log_f };
                for jj in 1..=jj_max {
                    let fresh = estimate(BoostFrame::new(ii, jj, i, j)).value_or_zero();
                    let m = running_min.map_or(fresh, |r| r.min(fresh));
                    running_min = Some(m);
                    let idx = (ii as usize - 1) * lf + (jj as usize - 1);
                    stored[idx] = stored[idx].max(m);
                    if !fired[idx] && stored[idx].reaches_level(params.delta, ii) {
                        fired[idx] = true;
                        if on_trigger(Trigger { at: (i, j), target: (ii, jj) }).is_break() {
                            return;
                        }
                    }
                }
            }
        }
    }
}

/// Targets of the triggers that added weight, in firing order, stopping at
/// saturation.
pub(crate) fn fractional_triggers(ctx: &mut ProbeContext<'_>, s: SetId) -> Vec<(u32, u32)> {
    if let Some(t) = ctx.memo.fractional_triggers.get(&s) {
        return t.clone();
    }
    let p = *ctx.params();
    let mut targets = Vec::new();
    let mut acc = 0u64;
    retroactive_sweep(
        &p,
        |frame| degree_oracle(ctx, Pipeline::Fractional, frame, s),
        |t| {
            targets.push(t.target);
            acc += 1u64 << t.target.1;
            if acc >= p.f {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    ctx.memo.fractional_triggers.insert(s, targets.clone());
    targets
}

/// Weight from the sweep, capped at one, before scaling and naive covering.
pub fn main_pre_naive_weight<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> T {
    let f = ctx.params().f;
    let mut wt = T::zero();
    for (_, j) in fractional_triggers(ctx, s) {
        wt = (wt + T::pow2_over(j, f)).cap_one();
    }
    wt
}

fn scaled_weight<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> T {
    let wt: T = main_pre_naive_weight(ctx, s);
    if ctx.params().scale_by_four {
        wt * T::from_u8(4).expect("small constant")
    } else {
        wt
    }
}

/// Final weight of `s` in the main LCA.
pub fn main_probe_weight<T: Scalar>(ctx: &mut ProbeContext<'_>, s: SetId) -> T {
    let wt: T = scaled_weight(ctx, s);
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
            total = total + scaled_weight::<T>(ctx, other);
        }
        if total < T::one() {
            return T::one();
        }
    }
    wt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SetCoverInstance;
    use crate::randomness::RandomTape;

    fn complete(sets: usize, elems: usize) -> SetCoverInstance {
        SetCoverInstance::from_sets(elems, vec![(0..elems as u32).collect(); sets]).unwrap()
    }

    #[test]
    fn b_convention() {
        assert_eq!(BoostFrame::new(2, 1, 2, 3).b(), 3);
        assert_eq!(BoostFrame::new(2, 3, 2, 3).b(), 1);
        assert_eq!(BoostFrame::new(1, 2, 3, 2).b(), 2);
        assert_eq!(BoostFrame::new(1, 2, 3, 2).at(1, 3), BoostFrame::new(1, 3, 3, 2));
    }

    #[test]
    fn degree_values_compare_exactly() {
        let a = DegreeValue::new(1, 3);
        let b = DegreeValue::new(2, 6);
        assert_eq!(a, b);
        assert!(DegreeValue::new(1, 2) > a);
        assert!(DegreeValue::new(3, 2).reaches_level(6, 2));
        assert!(!DegreeValue::new(3, 2).reaches_level(7, 2));
    }

    #[test]
    fn degree_base_case_is_set_size() {
        let inst = SetCoverInstance::from_sets(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        let out = degree_estimate(&mut ctx, BoostFrame { i: 0, j: 1, i_star: 1, j_star: 1 }, 0);
        assert_eq!(out, DegreeOutcome::Estimate(DegreeValue::integer(3)));
    }

    #[test]
    fn empty_set_has_zero_degree() {
        let inst = SetCoverInstance::from_sets(2, vec![vec![0, 1], vec![]]).unwrap();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst).with_sample_scale(4));
        let out = degree_estimate(&mut ctx, BoostFrame::unboosted(1, 1), 1);
        assert_eq!(out, DegreeOutcome::Estimate(DegreeValue::zero()));
    }

    #[test]
    fn first_iteration_estimate_is_exact_set_size() {
        // With no filtering every draw over N(S) with m = |S| lands, so the
        // rescaled survivor count is exactly |S|.
        let inst = complete(3, 8);
        for seed in 0..5 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), AlgoParams::for_instance(&inst).with_sample_scale(4));
            let out = degree_estimate(&mut ctx, BoostFrame::unboosted(1, 1), 2);
            assert_eq!(out, DegreeOutcome::Estimate(DegreeValue::integer(8)));
        }
    }

    #[test]
    fn weight_base_case() {
        let inst = complete(2, 4);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert_eq!(weight_estimate(&mut ctx, BoostFrame { i: 1, j: 0, i_star: 1, j_star: 1 }, 0), ElementWeight::Zero);
        assert_eq!(ctx.query_count(), 0);
    }

    #[test]
    fn weight_without_large_sets_is_zero() {
        // Element 0 lies only in singletons, far below delta / 2 = 8.
        let inst = SetCoverInstance::from_sets(17, vec![(1..17).collect(), vec![0], vec![0]]).unwrap();
        let p = AlgoParams::for_instance(&inst).with_sample_scale(4);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(6), p);
        assert_eq!(weight_estimate(&mut ctx, BoostFrame::unboosted(1, 1), 0), ElementWeight::Zero);
    }

    #[test]
    fn dense_neighbourhood_gives_half() {
        // All f sets contain every element and have degree delta at (1, 1),
        // so the sample of N(e) (every draw lands, m = f) survives whole and
        // meets the threshold at j' = 1.
        let inst = complete(4, 16);
        for seed in 0..5 {
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(seed), AlgoParams::for_instance(&inst).with_sample_scale(4));
            assert_eq!(weight_estimate(&mut ctx, BoostFrame::unboosted(1, 1), 3), ElementWeight::Half);
        }
    }

    #[test]
    fn sweep_with_exact_degrees_triggers_in_place() {
        // Degrees 4 then 2 meet delta / 2^i in every phase, and a constant
        // sequence fires each target during its own sweep.
        let p = AlgoParams::new(8, 4);
        let mut seen = Vec::new();
        retroactive_sweep(
            &p,
            |fr| DegreeOutcome::Estimate(DegreeValue::integer(if fr.i == 1 { 4 } else { 2 })),
            |t| {
                seen.push(t);
                ControlFlow::Continue(())
            },
        );
        assert_eq!(
            seen,
            vec![
                Trigger { at: (1, 1), target: (1, 1) },
                Trigger { at: (1, 2), target: (1, 2) },
                Trigger { at: (2, 1), target: (2, 1) },
                Trigger { at: (2, 2), target: (2, 2) },
                Trigger { at: (3, 1), target: (3, 1) },
                Trigger { at: (3, 2), target: (3, 2) },
            ]
        );
    }

    #[test]
    fn sweep_raises_earlier_iterations_retroactively() {
        // The first look at (1, 1) is pessimistic; the boosted re-estimate
        // from the (1, 2) sweep crosses the threshold.
        let p = AlgoParams::new(8, 4);
        let mut seen = Vec::new();
        retroactive_sweep(
            &p,
            |fr| {
                let v = if (fr.i_star, fr.j_star) == (1, 1) { 0 } else { 8 };
                DegreeOutcome::Estimate(DegreeValue::integer(v))
            },
            |t| {
                seen.push(t);
                ControlFlow::Continue(())
            },
        );
        assert_eq!(seen[0], Trigger { at: (1, 2), target: (1, 1) });
        assert_eq!(seen[1], Trigger { at: (1, 2), target: (1, 2) });
    }

    #[test]
    fn always_fail_never_triggers() {
        let p = AlgoParams::new(16, 8);
        let mut fired = false;
        retroactive_sweep(&p, |_| DegreeOutcome::Fail, |_| {
            fired = true;
            ControlFlow::Continue(())
        });
        assert!(!fired);
    }

    #[test]
    fn saturated_set_scales_to_four() {
        let inst = complete(2, 16);
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(1), AlgoParams::for_instance(&inst).with_sample_scale(4));
        let pre: f64 = main_pre_naive_weight(&mut ctx, 0);
        assert_eq!(pre, 1.0);
        assert_eq!(main_probe_weight::<f64>(&mut ctx, 0), 4.0);
    }
}
