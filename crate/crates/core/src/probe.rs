//! Whole-instance probing helpers: ask one LCA about every set and collect
//! the answers and per-probe query counts.

use crate::access::{AlgoParams, CacheMode, ProbeContext};
use crate::instance::{IntegralCover, SetCoverInstance, SetId};
use crate::integral::{integral_probe_set, warmup_integral_probe};
use crate::main_lca::main_probe_weight;
use crate::randomness::RandomTape;
use crate::warmup_lca::lca_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LcaKind {
    /// Fractional warmup LCA.
    Warmup,
    /// Integral variant of the warmup LCA.
    WarmupIntegral,
    /// Fractional main LCA.
    Main,
    /// Integral main LCA.
    Integral,
}

impl LcaKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LcaKind::Warmup => "warmup",
            LcaKind::WarmupIntegral => "warmup-integral",
            LcaKind::Main => "main",
            LcaKind::Integral => "integral",
        }
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, LcaKind::WarmupIntegral | LcaKind::Integral)
    }
}

/// Answer for one set: its weight, or 0/1 for integral kinds.
pub fn probe_set(ctx: &mut ProbeContext<'_>, kind: LcaKind, s: SetId) -> f64 {
    match kind {
        LcaKind::Warmup => lca_weight::<f64>(ctx, s),
        LcaKind::WarmupIntegral => warmup_integral_probe(ctx, s) as u8 as f64,
        LcaKind::Main => main_probe_weight::<f64>(ctx, s),
        LcaKind::Integral => integral_probe_set(ctx, s) as u8 as f64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllProbes {
    pub values: Vec<f64>,
    /// Queries spent by each probe. In shared mode later probes benefit from
    /// earlier caches.
    pub queries: Vec<u64>,
}

impl AllProbes {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn cover(&self) -> IntegralCover {
        IntegralCover::from_flags(self.values.iter().map(|&v| v > 0.0).collect())
    }

    pub fn queries_max(&self) -> u64 {
        self.queries.iter().copied().max().unwrap_or(0)
    }

    pub fn queries_mean(&self) -> f64 {
        self.queries.iter().sum::<u64>() as f64 / self.queries.len().max(1) as f64
    }
}

/// Probes every set in id order, honouring `params.cache_mode`.
pub fn probe_all_sets(inst: &SetCoverInstance, tape: RandomTape, params: &AlgoParams, kind: LcaKind) -> AllProbes {
    let m = inst.num_sets() as SetId;
    let mut values = Vec::with_capacity(m as usize);
    let mut queries = Vec::with_capacity(m as usize);
    let mut shared = ProbeContext::new(inst, tape, *params);
    for s in 0..m {
        let (v, q) = match params.cache_mode {
            CacheMode::Shared => shared.measured(|c| probe_set(c, kind, s)),
            CacheMode::PerProbe => ProbeContext::new(inst, tape, *params).measured(|c| probe_set(c, kind, s)),
        };
        values.push(v);
        queries.push(q);
    }
    AllProbes { values, queries }
}
