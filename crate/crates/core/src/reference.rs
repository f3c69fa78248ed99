//! Global executions used as ground truth: greedy, exact search, and the
//! LOCAL fractional algorithms run over the whole instance.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::access::{AlgoParams, ProbeContext};
use crate::instance::{ElementId, FractionalCover, IntegralCover, SetCoverInstance, SetId};
use crate::main_lca::{degree_estimate, retroactive_sweep, BoostFrame, DegreeOutcome, DegreeValue, Trigger};
use crate::randomness::{Label, RandomTape, Tag};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReferenceError {
    #[error("exact search supports at most {max} sets, instance has {got}")]
    InstanceTooLarge { max: usize, got: usize },
    #[error("invalid slack policy: {0}")]
    InvalidPolicy(String),
}

/// Max-gain greedy, ties broken by least set id.
pub fn greedy_cover(inst: &SetCoverInstance) -> IntegralCover {
    let mut covered = vec![false; inst.num_elements()];
    let mut left = inst.num_elements();
    let mut cover = IntegralCover::empty(inst.num_sets());
    while left > 0 {
        let mut best: Option<(usize, SetId)> = None;
        for s in 0..inst.num_sets() as SetId {
            let gain = inst.members(s).iter().filter(|&&e| !covered[e as usize]).count();
            if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, s));
            }
        }
        let (gain, s) = best.expect("coverable instance");
        cover.insert(s);
        for &e in inst.members(s) {
            covered[e as usize] = true;
        }
        left -= gain;
    }
    cover
}

pub const EXACT_MAX_SETS: usize = 24;

/// Minimum-cardinality cover by branch and bound.
pub fn exact_cover(inst: &SetCoverInstance) -> Result<IntegralCover, ReferenceError> {
    if inst.num_sets() > EXACT_MAX_SETS {
        return Err(ReferenceError::InstanceTooLarge { max: EXACT_MAX_SETS, got: inst.num_sets() });
    }
    let masks: Vec<u32> = (0..inst.num_elements() as ElementId)
        .map(|e| inst.sets_of(e).iter().fold(0u32, |m, &s| m | (1 << s)))
        .collect();
    let greedy = greedy_cover(inst);
    let mut best = greedy.ids().iter().fold(0u32, |m, &s| m | (1 << s));

    fn search(masks: &[u32], chosen: u32, best: &mut u32) {
        let size = chosen.count_ones();
        let mut pick: Option<u32> = None;
        for &m in masks {
            if m & chosen == 0 && pick.is_none_or(|p| m.count_ones() < p.count_ones()) {
                pick = Some(m);
            }
        }
        let Some(options) = pick else {
            if size < best.count_ones() {
                *best = chosen;
            }
            return;
        };
        if size + 1 >= best.count_ones() {
            return;
        }
        let mut rest = options;
        while rest != 0 {
            let s = rest.trailing_zeros();
            rest &= rest - 1;
            search(masks, chosen | (1 << s), best);
        }
    }
    search(&masks, 0, &mut best);
    Ok(IntegralCover::from_ids(inst.num_sets(), (0..32).filter(|s| best & (1 << s) != 0)))
}

/// Per-iteration snapshot of a global run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub i: u32,
    pub j: u32,
    /// Effective degree of every set at the start of the iteration.
    pub degree: Vec<u32>,
    /// Weight each set gained in the iteration.
    pub added: Vec<T>,
    /// Number of elements covered after the iteration.
    pub covered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub log_delta: u32,
    pub log_f: u32,
    pub iterations: Vec<IterationRecord<T>>,
    /// Iteration in which each element was first covered.
    pub first_cover: Vec<Option<(u32, u32)>>,
    /// Number of containing sets that gained weight (or joined the cover) in
    /// the element's first-cover iteration.
    pub multiplicity: Vec<u32>,
    /// Weight the element received in its first-cover phase, up to and
    /// including the first-cover iteration.
    pub phase_weight: Vec<f64>,
}

impl<T: Scalar> RunTrace<T> {
    fn new(inst: &SetCoverInstance, log_delta: u32, log_f: u32) -> Self {
        let n = inst.num_elements();
        RunTrace {
            log_delta,
            log_f,
            iterations: Vec::new(),
            first_cover: vec![None; n],
            multiplicity: vec![0; n],
            phase_weight: vec![0.0; n],
        }
    }

    /// Effective degree of `s` at the start of iteration `(i, j)`.
    pub fn degree_at(&self, i: u32, j: u32, s: SetId) -> u32 {
        self.iterations[((i - 1) * self.log_f + (j - 1)) as usize].degree[s as usize]
    }

    /// CSV with header `iteration,kind,id,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,kind,id,metric,value\n");
        for (t, rec) in self.iterations.iter().enumerate() {
            for (s, d) in rec.degree.iter().enumerate() {
                let _ = writeln!(out, "{t},set,{s},degree,{d}");
            }
            for (s, w) in rec.added.iter().enumerate() {
                if *w != T::zero() {
                    let _ = writeln!(out, "{t},set,{s},added,{}", w.to_f64_lossy());
                }
            }
        }
        for (e, fc) in self.first_cover.iter().enumerate() {
            if let Some((i, j)) = fc {
                let t = (i - 1) * self.log_f + (j - 1);
                let _ = writeln!(out, "{t},element,{e},multiplicity,{}", self.multiplicity[e]);
                let _ = writeln!(out, "{t},element,{e},phase_weight,{}", self.phase_weight[e]);
            }
        }
        out
    }
}

fn effective_degrees(inst: &SetCoverInstance, covered: &[bool]) -> Vec<u32> {
    (0..inst.num_sets() as SetId)
        .map(|s| inst.members(s).iter().filter(|&&e| !covered[e as usize]).count() as u32)
        .collect()
}

fn reaches(delta: u64, d: u32, shift: u32) -> bool {
    (d as u128) << shift >= delta as u128
}

/// Weight-thresholded covering shared by the fractional runs.
struct FractionalRun<T> {
    wt: Vec<T>,
    covered: Vec<bool>,
    phase_acc: Vec<f64>,
    trace: RunTrace<T>,
}

impl<T: Scalar> FractionalRun<T> {
    fn new(inst: &SetCoverInstance, p: &AlgoParams) -> Self {
        FractionalRun {
            wt: vec![T::zero(); inst.num_sets()],
            covered: vec![false; inst.num_elements()],
            phase_acc: vec![0.0; inst.num_elements()],
            trace: RunTrace::new(inst, p.log_delta, p.log_f),
        }
    }

    /// Applies one iteration's additions, then covers elements whose weight
    /// reaches their threshold.
    fn step(&mut self, inst: &SetCoverInstance, i: u32, j: u32, degree: Vec<u32>, added: Vec<T>, threshold: impl Fn(ElementId) -> T) {
        for (s, a) in added.iter().enumerate() {
            if *a != T::zero() {
                self.wt[s] = (self.wt[s].clone() + a.clone()).cap_one();
            }
        }
        for e in 0..inst.num_elements() {
            if self.covered[e] {
                continue;
            }
            let sets = inst.sets_of(e as ElementId);
            let gained: f64 = sets.iter().map(|&s| added[s as usize].to_f64_lossy()).sum();
            self.phase_acc[e] += gained;
            let wt_e = sets.iter().fold(T::zero(), |acc, &s| acc + self.wt[s as usize].clone());
            if wt_e >= threshold(e as ElementId) {
                self.covered[e] = true;
                self.trace.first_cover[e] = Some((i, j));
                self.trace.multiplicity[e] = sets.iter().filter(|&&s| added[s as usize] != T::zero()).count() as u32;
                self.trace.phase_weight[e] = self.phase_acc[e];
            }
        }
        let covered = self.covered.iter().filter(|&&c| c).count();
        self.trace.iterations.push(IterationRecord { i, j, degree, added, covered });
    }

    fn start_phase(&mut self) {
        self.phase_acc.iter_mut().for_each(|w| *w = 0.0);
    }
}

/// The baseline fractional LOCAL algorithm.
pub fn run_alg1<T: Scalar>(inst: &SetCoverInstance) -> (FractionalCover<T>, RunTrace<T>) {
    let p = AlgoParams::for_instance(inst);
    let mut run = FractionalRun::<T>::new(inst, &p);
    for i in 1..=p.log_delta {
        run.start_phase();
        for j in 1..=p.log_f {
            let degree = effective_degrees(inst, &run.covered);
            let added: Vec<T> = degree
                .iter()
                .enumerate()
                .map(|(s, &d)| {
                    if reaches(p.delta, d, i) {
                        let room = T::one() - run.wt[s].clone();
                        let inc = T::pow2_over(j, p.f);
                        if inc < room { inc } else { room }
                    } else {
                        T::zero()
                    }
                })
                .collect();
            run.step(inst, i, j, degree, added, |_| T::one());
        }
    }
    (FractionalCover { weight: run.wt }, run.trace)
}

/// A per-element or constant threshold table.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold<T> {
    Constant(T),
    /// Indexed by `iteration * num_elements + element`, iterations counted
    /// from zero in row-major order.
    Table(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutOff {
    Constant(u32),
    /// Indexed by `(phase - 1) * num_sets + set`.
    Table(Vec<u32>),
}

/// The free choices of the slacked algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackPolicy<T> {
    pub ell: T,
    pub r: T,
    pub tau: Threshold<T>,
    pub jcut: CutOff,
}

impl<T: Scalar> SlackPolicy<T> {
    /// `ell = r = 1` and `j_S = 1` everywhere.
    pub fn identity() -> Self {
        SlackPolicy { ell: T::one(), r: T::one(), tau: Threshold::Constant(T::one()), jcut: CutOff::Constant(1) }
    }

    /// Thresholds drawn from a 65-point grid over `[ell, r]` and cut-offs
    /// uniform over `[1, log_f + 1]`.
    pub fn random(inst: &SetCoverInstance, ell: T, r: T, seed: u64) -> Self {
        let p = AlgoParams::for_instance(inst);
        let tape = RandomTape::new(seed);
        let mut stream = tape.stream(&Label::new(Tag::SlackPolicy));
        let cells = p.rounds() as usize * inst.num_elements();
        let span = r.clone() - ell.clone();
        let tau = (0..cells).map(|_| ell.clone() + span.clone() * T::ratio(stream.below(65), 64)).collect();
        let jcut = (0..p.log_delta as usize * inst.num_sets()).map(|_| 1 + stream.below(p.log_f as u64 + 1) as u32).collect();
        SlackPolicy { ell, r, tau: Threshold::Table(tau), jcut: CutOff::Table(jcut) }
    }

    pub fn validate(&self, inst: &SetCoverInstance) -> Result<(), ReferenceError> {
        let bad = |m: &str| Err(ReferenceError::InvalidPolicy(m.to_string()));
        let p = AlgoParams::for_instance(inst);
        if !(self.ell > T::zero() && self.ell <= T::one() && self.r >= T::one()) {
            return bad("need 0 < ell <= 1 <= r");
        }
        let in_range = |t: &T| *t >= self.ell && *t <= self.r;
        match &self.tau {
            Threshold::Constant(t) if !in_range(t) => return bad("tau outside [ell, r]"),
            Threshold::Table(v) if v.len() != p.rounds() as usize * inst.num_elements() => return bad("tau table size"),
            Threshold::Table(v) if !v.iter().all(in_range) => return bad("tau outside [ell, r]"),
            _ => {}
        }
        let cut_ok = |c: &u32| (1..=p.log_f + 1).contains(c);
        match &self.jcut {
            CutOff::Constant(c) if !cut_ok(c) => return bad("cut-off outside [1, log f + 1]"),
            CutOff::Table(v) if v.len() != p.log_delta as usize * inst.num_sets() => return bad("cut-off table size"),
            CutOff::Table(v) if !v.iter().all(cut_ok) => return bad("cut-off outside [1, log f + 1]"),
            _ => {}
        }
        Ok(())
    }

    fn tau(&self, t: usize, n: usize, e: ElementId) -> T {
        match &self.tau {
            Threshold::Constant(v) => v.clone(),
            Threshold::Table(v) => v[t * n + e as usize].clone(),
        }
    }

    fn jcut(&self, i: u32, m: usize, s: usize) -> u32 {
        match &self.jcut {
            CutOff::Constant(c) => *c,
            CutOff::Table(v) => v[(i as usize - 1) * m + s],
        }
    }
}

/// The slacked fractional LOCAL algorithm. Output weights are divided by
/// `ell`; the trace records weights before that rescaling.
pub fn run_alg2<T: Scalar>(inst: &SetCoverInstance, policy: &SlackPolicy<T>) -> Result<(FractionalCover<T>, RunTrace<T>), ReferenceError> {
    policy.validate(inst)?;
    let p = AlgoParams::for_instance(inst);
    let (n, m) = (inst.num_elements(), inst.num_sets());
    let mut run = FractionalRun::<T>::new(inst, &p);
    for i in 1..=p.log_delta {
        run.start_phase();
        for j in 1..=p.log_f {
            let t = ((i - 1) * p.log_f + (j - 1)) as usize;
            let degree = effective_degrees(inst, &run.covered);
            let added: Vec<T> = degree
                .iter()
                .enumerate()
                .map(|(s, &d)| {
                    let dense = reaches(p.delta, d, i);
                    let moderate = !dense && reaches(p.delta, d, i + 2) && j < policy.jcut(i, m, s);
                    if dense || moderate {
                        let room = T::one() - run.wt[s].clone();
                        let inc = T::pow2_over(j, p.f);
                        if inc < room { inc } else { room }
                    } else {
                        T::zero()
                    }
                })
                .collect();
            run.step(inst, i, j, degree, added, |e| policy.tau(t, n, e));
        }
    }
    let weight = run.wt.into_iter().map(|w| w / policy.ell.clone()).collect();
    Ok((FractionalCover { weight }, run.trace))
}

/// Source of effective-degree estimates for the retroactive algorithm.
pub trait DegreeEstimator {
    fn estimate(&mut self, frame: BoostFrame, s: SetId) -> DegreeOutcome;
}

impl<F: FnMut(BoostFrame, SetId) -> DegreeOutcome> DegreeEstimator for F {
    fn estimate(&mut self, frame: BoostFrame, s: SetId) -> DegreeOutcome {
        self(frame, s)
    }
}

/// Exact effective degrees read off a baseline trace, independent of the
/// boost anchor.
pub struct ExactDegrees<'t, T> {
    pub trace: &'t RunTrace<T>,
}

impl<T: Scalar> DegreeEstimator for ExactDegrees<'_, T> {
    fn estimate(&mut self, frame: BoostFrame, s: SetId) -> DegreeOutcome {
        DegreeOutcome::Estimate(DegreeValue::integer(self.trace.degree_at(frame.i, frame.j, s) as u64))
    }
}

/// The main LCA's degree estimator behind the trait.
pub struct LcaDegrees<'c, 'a> {
    pub ctx: &'c mut ProbeContext<'a>,
}

impl DegreeEstimator for LcaDegrees<'_, '_> {
    fn estimate(&mut self, frame: BoostFrame, s: SetId) -> DegreeOutcome {
        degree_estimate(self.ctx, frame, s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetroactiveTrace {
    /// Weight-adding triggers per set, in firing order.
    pub triggers: Vec<Vec<Trigger>>,
    /// Weight after the sweep, before scaling.
    pub pre_naive: Vec<f64>,
    /// Sets raised to one by the naive pass.
    pub naive: Vec<bool>,
}

/// The retroactive-update algorithm over the whole instance.
pub fn run_alg6<T: Scalar>(inst: &SetCoverInstance, params: &AlgoParams, est: &mut impl DegreeEstimator) -> (FractionalCover<T>, RetroactiveTrace) {
    let m = inst.num_sets();
    let mut pre = Vec::with_capacity(m);
    let mut triggers = Vec::with_capacity(m);
    for s in 0..m as SetId {
        let mut wt = T::zero();
        let mut fired = Vec::new();
        retroactive_sweep(
            params,
            |frame| est.estimate(frame, s),
            |t| {
                fired.push(t);
                wt = wt.clone() + T::pow2_over(t.target.1, params.f);
                if wt >= T::one() {
                    wt = T::one();
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        pre.push(wt);
        triggers.push(fired);
    }
    let pre_naive = pre.iter().map(|w| w.to_f64_lossy()).collect();
    let scaled: Vec<T> = if params.scale_by_four {
        pre.into_iter().map(|w| w * T::from_u8(4).expect("small constant")).collect()
    } else {
        pre
    };
    let mut weight = scaled.clone();
    let mut naive = vec![false; m];
    for e in 0..inst.num_elements() as ElementId {
        let sets = inst.sets_of(e);
        let total = sets.iter().fold(T::zero(), |acc, &s| acc + scaled[s as usize].clone());
        if total < T::one() {
            let s = *sets.iter().min().expect("coverable") as usize;
            if weight[s] < T::one() {
                weight[s] = T::one();
            }
            naive[s] = true;
        }
    }
    (FractionalCover { weight }, RetroactiveTrace { triggers, pre_naive, naive })
}

/// Integral baseline: every set dense at `(i, j)` joins the cover when its
/// rounding bit is one; leftovers go to their least-id set.
pub fn run_integral_alg1(inst: &SetCoverInstance, tape: &RandomTape) -> (IntegralCover, RunTrace<f64>) {
    let p = AlgoParams::for_instance(inst);
    let rounding = tape.rounding(inst.freq());
    let mut cover = IntegralCover::empty(inst.num_sets());
    let mut covered = vec![false; inst.num_elements()];
    let mut trace = RunTrace::<f64>::new(inst, p.log_delta, p.log_f);
    for i in 1..=p.log_delta {
        for j in 1..=p.log_f {
            let degree = effective_degrees(inst, &covered);
            let mut added = vec![0.0; inst.num_sets()];
            for s in 0..inst.num_sets() as SetId {
                if !cover.contains(s) && reaches(p.delta, degree[s as usize], i) && rounding.bit(s, i, j) {
                    cover.insert(s);
                    added[s as usize] = 1.0;
                }
            }
            for (e, done) in covered.iter_mut().enumerate() {
                if *done {
                    continue;
                }
                let sets = inst.sets_of(e as ElementId);
                let joined = sets.iter().filter(|&&s| added[s as usize] > 0.0).count() as u32;
                if joined > 0 {
                    *done = true;
                    trace.first_cover[e] = Some((i, j));
                    trace.multiplicity[e] = joined;
                    trace.phase_weight[e] = joined as f64;
                }
            }
            let count = covered.iter().filter(|&&c| c).count();
            trace.iterations.push(IterationRecord { i, j, degree, added, covered: count });
        }
    }
    for e in 0..inst.num_elements() as ElementId {
        if !covered[e as usize] {
            let s = *inst.sets_of(e).iter().min().expect("coverable");
            cover.insert(s);
            for &x in inst.members(s) {
                covered[x as usize] = true;
            }
        }
    }
    (cover, trace)
}
