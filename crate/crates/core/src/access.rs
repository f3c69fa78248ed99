//! Query-counted adjacency-list oracle and the per-probe state bundle.
//!
//! Algorithms never touch a [`SetCoverInstance`] directly. They read
//! adjacency lists through [`ProbeContext::neighbor`] and
//! [`ProbeContext::list_size`], each of which costs one query. The cached
//! readers [`ProbeContext::read`] and [`ProbeContext::size`] go through the
//! same oracle but only on the first access of a given position, so the
//! counter equals the number of distinct input cells a probe has seen.

use std::collections::HashMap;

use thiserror::Error;

use crate::instance::{ElementId, SetCoverInstance, SetId};
use crate::integral::CoverWitness;
use crate::main_lca::{BoostFrame, DegreeOutcome, ElementWeight};
use crate::randomness::RandomTape;
use crate::warmup_lca::DensityVerdict;

/// A node of the bipartite incidence graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Set(SetId),
    Element(ElementId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccessError {
    #[error("{vertex:?} has no adjacency position {idx} (list length {len})")]
    IndexOutOfRange { vertex: Vertex, idx: usize, len: usize },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(Vertex),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("parameter `{0}` must be positive")]
    NonPositive(&'static str),
}

/// Whether memoized oracle answers survive across top-level probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CacheMode {
    /// A fresh context per probe; query counts are per-probe worst case.
    PerProbe,
    /// One context shared by all probes of a run.
    Shared,
}

impl CacheMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CacheMode::PerProbe => "per-probe",
            CacheMode::Shared => "shared",
        }
    }
}

/// Ceiling of log2, clamped to at least one.
pub fn clamped_log2(x: usize) -> u32 {
    if x <= 2 {
        1
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Tunable constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgoParams {
    /// Maximum set size of the instance.
    pub delta: u64,
    /// Maximum element frequency of the instance.
    pub f: u64,
    /// Number of phases, `max(1, ceil(log2 delta))`.
    pub log_delta: u32,
    /// Iterations per phase, `max(1, ceil(log2 f))`.
    pub log_f: u32,
    /// Replaces `L^3` in sample sizes and thresholds.
    pub sample_scale: u64,
    /// The constant `K` of the boosted oracles.
    pub k: u64,
    /// The boost exponent `delta` of the boosted oracles.
    pub delta_boost: u32,
    /// Multiply pre-naive weights by four before naive covering.
    pub scale_by_four: bool,
    pub cache_mode: CacheMode,
}

impl AlgoParams {
    pub const DEFAULT_K: u64 = 8;
    pub const DEFAULT_DELTA_BOOST: u32 = 2;

    pub fn new(delta: usize, f: usize) -> Self {
        let log_delta = clamped_log2(delta);
        let log_f = clamped_log2(f);
        let l = (log_delta * log_f) as u64;
        AlgoParams {
            delta: delta.max(1) as u64,
            f: f.max(1) as u64,
            log_delta,
            log_f,
            sample_scale: l * l * l,
            k: Self::DEFAULT_K,
            delta_boost: Self::DEFAULT_DELTA_BOOST,
            scale_by_four: true,
            cache_mode: CacheMode::PerProbe,
        }
    }

    pub fn for_instance(inst: &SetCoverInstance) -> Self {
        Self::new(inst.delta(), inst.freq())
    }

    /// `L = log_delta * log_f`.
    pub fn rounds(&self) -> u32 {
        self.log_delta * self.log_f
    }

    pub fn with_sample_scale(mut self, scale: u64) -> Self {
        self.sample_scale = scale;
        self
    }

    pub fn with_k(mut self, k: u64) -> Self {
        self.k = k;
        self
    }

    pub fn with_delta_boost(mut self, delta_boost: u32) -> Self {
        self.delta_boost = delta_boost;
        self
    }

    pub fn with_scale_by_four(mut self, on: bool) -> Self {
        self.scale_by_four = on;
        self
    }

    pub fn with_cache_mode(mut self, mode: CacheMode) -> Self {
        self.cache_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.sample_scale == 0 {
            return Err(ParamError::NonPositive("sample_scale"));
        }
        if self.k == 0 {
            return Err(ParamError::NonPositive("k"));
        }
        if self.delta_boost == 0 {
            return Err(ParamError::NonPositive("delta_boost"));
        }
        Ok(())
    }

    /// Short stable identifier for reports.
    pub fn fingerprint(&self) -> String {
        format!(
            "s{}-K{}-d{}-x{}-{}",
            self.sample_scale,
            self.k,
            self.delta_boost,
            if self.scale_by_four { 4 } else { 1 },
            self.cache_mode.as_str()
        )
    }

    /// Threshold test `value >= delta / 2^i` for an integer-valued quantity.
    pub fn reaches_level(&self, value: u64, i: u32) -> bool {
        (value as u128) << i >= self.delta as u128
    }
}

/// Which variant of the oracles an evaluation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pipeline {
    Fractional,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OracleKind {
    SetDense,
    ElementCovered,
    DegreeEstimate,
    WeightEstimate,
    CoveredEstimate,
}

impl OracleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleKind::SetDense => "is_set_dense",
            OracleKind::ElementCovered => "is_ele_cov",
            OracleKind::DegreeEstimate => "degree_estimate",
            OracleKind::WeightEstimate => "weight_estimate",
            OracleKind::CoveredEstimate => "covered_estimate",
        }
    }
}

/// Worst observed cost of fresh oracle evaluations at one `(kind, i, j, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecursionRecord {
    pub kind: OracleKind,
    pub i: u32,
    pub j: u32,
    pub b: u32,
    /// Oracle invocations (memo hits included) made inside one evaluation.
    pub max_calls: u64,
    pub max_queries: u64,
    pub evaluations: u64,
}

#[derive(Debug, Default)]
pub(crate) struct Memo {
    pub dense: HashMap<(Pipeline, u32, u32, SetId), DensityVerdict>,
    pub ele_cov: HashMap<(Pipeline, u32, u32, ElementId), bool>,
    pub degree: HashMap<(Pipeline, BoostFrame, SetId), DegreeOutcome>,
    pub weight: HashMap<(BoostFrame, ElementId), ElementWeight>,
    pub covered: HashMap<(BoostFrame, ElementId), Option<SetId>>,
    pub fractional_triggers: HashMap<SetId, Vec<(u32, u32)>>,
    pub integral_witness: HashMap<SetId, Option<CoverWitness>>,
}

/// Per-probe bundle: instance handle, tape, parameters, query counter and
/// memo caches.
#[derive(Debug)]
pub struct ProbeContext<'a> {
    inst: &'a SetCoverInstance,
    tape: RandomTape,
    params: AlgoParams,
    queries: u64,
    reads: HashMap<(Vertex, u32), u32>,
    sizes: HashMap<Vertex, u32>,
    pub(crate) memo: Memo,
    calls: u64,
    recursion: HashMap<(OracleKind, u32, u32, u32), RecursionRecord>,
}

impl<'a> ProbeContext<'a> {
    pub fn new(inst: &'a SetCoverInstance, tape: RandomTape, params: AlgoParams) -> Self {
        ProbeContext {
            inst,
            tape,
            params,
            queries: 0,
            reads: HashMap::new(),
            sizes: HashMap::new(),
            memo: Memo::default(),
            calls: 0,
            recursion: HashMap::new(),
        }
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn tape(&self) -> &RandomTape {
        &self.tape
    }

    fn list(&self, v: Vertex) -> Result<&'a [u32], AccessError> {
        let inst: &'a SetCoverInstance = self.inst;
        match v {
            Vertex::Set(s) if (s as usize) < inst.num_sets() => Ok(inst.members(s)),
            Vertex::Element(e) if (e as usize) < inst.num_elements() => Ok(inst.sets_of(e)),
            _ => Err(AccessError::UnknownVertex(v)),
        }
    }

    /// The `idx`-th (0-based) entry of `v`'s adjacency list. One query.
    pub fn neighbor(&mut self, v: Vertex, idx: usize) -> Result<u32, AccessError> {
        let list = self.list(v)?;
        self.queries += 1;
        list.get(idx).copied().ok_or(AccessError::IndexOutOfRange { vertex: v, idx, len: list.len() })
    }

    /// Length of `v`'s adjacency list. One query.
    pub fn list_size(&mut self, v: Vertex) -> Result<usize, AccessError> {
        let list = self.list(v)?;
        self.queries += 1;
        Ok(list.len())
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    /// Cached [`neighbor`](Self::neighbor); panics on invalid arguments.
    pub fn read(&mut self, v: Vertex, idx: u32) -> u32 {
        if let Some(&w) = self.reads.get(&(v, idx)) {
            return w;
        }
        let w = self.neighbor(v, idx as usize).expect("adjacency read in range");
        self.reads.insert((v, idx), w);
        w
    }

    /// Cached [`list_size`](Self::list_size); panics on an unknown vertex.
    pub fn size(&mut self, v: Vertex) -> usize {
        if let Some(&n) = self.sizes.get(&v) {
            return n as usize;
        }
        let n = self.list_size(v).expect("known vertex");
        self.sizes.insert(v, n as u32);
        n
    }

    /// Whole adjacency list of `v`, read position by position.
    pub fn adjacency(&mut self, v: Vertex) -> Vec<u32> {
        let n = self.size(v);
        (0..n as u32).map(|idx| self.read(v, idx)).collect()
    }

    /// Drops memoized oracle answers and adjacency reads. The counter keeps
    /// running.
    pub fn clear_caches(&mut self) {
        self.reads.clear();
        self.sizes.clear();
        self.memo = Memo::default();
    }

    pub(crate) fn note_call(&mut self) {
        self.calls += 1;
    }

    pub fn oracle_calls(&self) -> u64 {
        self.calls
    }

    /// Runs a fresh (memo-miss) evaluation and records how many oracle calls
    /// and queries it caused.
    pub(crate) fn instrumented<R>(&mut self, kind: OracleKind, i: u32, j: u32, b: u32, eval: impl FnOnce(&mut Self) -> R) -> R {
        let calls_before = self.calls;
        let queries_before = self.queries;
        let out = eval(self);
        let calls = self.calls - calls_before;
        let queries = self.queries - queries_before;
        let rec = self.recursion.entry((kind, i, j, b)).or_insert(RecursionRecord {
            kind,
            i,
            j,
            b,
            max_calls: 0,
            max_queries: 0,
            evaluations: 0,
        });
        rec.max_calls = rec.max_calls.max(calls);
        rec.max_queries = rec.max_queries.max(queries);
        rec.evaluations += 1;
        out
    }

    /// Recorded recursion costs, sorted by key.
    pub fn recursion_records(&self) -> Vec<RecursionRecord> {
        let mut out: Vec<RecursionRecord> = self.recursion.values().copied().collect();
        out.sort_by_key(|r| (r.kind, r.i, r.j, r.b));
        out
    }

    /// Runs `probe` and returns its answer along with the queries it used.
    pub fn measured<R>(&mut self, probe: impl FnOnce(&mut Self) -> R) -> (R, u64) {
        let before = self.queries;
        let out = probe(self);
        (out, self.queries - before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SetCoverInstance {
        SetCoverInstance::from_sets(10, vec![vec![3, 5, 9], (0..10).collect(), vec![5]]).unwrap()
    }

    #[test]
    fn neighbor_reads_position() {
        let inst = tiny();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert_eq!(ctx.query_count(), 0);
        assert_eq!(ctx.neighbor(Vertex::Set(0), 1), Ok(5));
        assert_eq!(ctx.query_count(), 1);
        assert_eq!(ctx.neighbor(Vertex::Set(0), 1), Ok(5));
        assert_eq!(ctx.query_count(), 2);
    }

    #[test]
    fn neighbor_out_of_range() {
        let inst = tiny();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert!(matches!(ctx.neighbor(Vertex::Set(0), 3), Err(AccessError::IndexOutOfRange { len: 3, .. })));
        assert!(matches!(ctx.neighbor(Vertex::Set(7), 0), Err(AccessError::UnknownVertex(_))));
    }

    #[test]
    fn enumerating_positions_recovers_members() {
        let inst = tiny();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        for s in 0..3 {
            let n = ctx.list_size(Vertex::Set(s)).unwrap();
            let got: Vec<u32> = (0..n).map(|i| ctx.neighbor(Vertex::Set(s), i).unwrap()).collect();
            assert_eq!(got, inst.members(s));
        }
    }

    #[test]
    fn list_sizes_and_handshake() {
        let inst = tiny();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        assert_eq!(ctx.list_size(Vertex::Set(2)), Ok(1));
        assert_eq!(ctx.list_size(Vertex::Element(5)), Ok(3));
        let by_sets: usize = (0..3).map(|s| ctx.list_size(Vertex::Set(s)).unwrap()).sum();
        let by_elems: usize = (0..10).map(|e| ctx.list_size(Vertex::Element(e)).unwrap()).sum();
        assert_eq!(by_sets, by_elems);
    }

    #[test]
    fn cached_reads_cost_once() {
        let inst = tiny();
        let mut ctx = ProbeContext::new(&inst, RandomTape::new(0), AlgoParams::for_instance(&inst));
        ctx.read(Vertex::Set(1), 4);
        ctx.read(Vertex::Set(1), 4);
        ctx.size(Vertex::Set(1));
        ctx.size(Vertex::Set(1));
        assert_eq!(ctx.query_count(), 2);
        assert_eq!(ctx.adjacency(Vertex::Element(5)), vec![0, 1, 2]);
        assert_eq!(ctx.query_count(), 6);
    }

    #[test]
    fn params_defaults() {
        let p = AlgoParams::new(32, 8);
        assert_eq!((p.log_delta, p.log_f), (5, 3));
        assert_eq!(p.rounds(), 15);
        assert_eq!(p.sample_scale, 15 * 15 * 15);
        assert_eq!((p.k, p.delta_boost), (8, 2));
        let q = AlgoParams::new(1, 1);
        assert_eq!((q.log_delta, q.log_f), (1, 1));
        assert_eq!(AlgoParams::new(5, 3).log_delta, 3);
        assert!(p.with_k(0).validate().is_err());
    }

    #[test]
    fn level_threshold() {
        let p = AlgoParams::new(8, 2);
        assert!(!p.reaches_level(1, 2));
        assert!(p.reaches_level(2, 2));
        assert!(p.reaches_level(4, 1));
    }
}
