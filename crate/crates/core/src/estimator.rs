//! Sublinear estimate of the optimum cover size from random set probes.

use crate::access::{AlgoParams, CacheMode, ProbeContext};
use crate::instance::{SetCoverInstance, SetId};
use crate::integral::integral_probe_set;
use crate::randomness::{Label, RandomTape, Tag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub samples: u64,
    pub hits: u64,
    pub num_sets: u64,
    pub estimate: f64,
    pub queries: u64,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "samples,hits,num_sets,estimate,queries";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.samples, self.hits, self.num_sets, self.estimate, self.queries)
    }
}

/// `100 * delta * f`.
pub fn sample_count(delta: usize, f: usize) -> u64 {
    100 * delta as u64 * f as u64
}

/// Draws `samples` set ids uniformly with replacement from the round-`round`
/// estimator stream and asks `probe` about each; `probe` returns the answer
/// and the queries it spent.
pub fn estimate_from_probe(
    tape: &RandomTape,
    round: u64,
    num_sets: usize,
    samples: u64,
    mut probe: impl FnMut(SetId) -> (bool, u64),
) -> EstimateReport {
    let mut stream = tape.stream(&Label::new(Tag::EstimatorSample).counter(round));
    let mut hits = 0;
    let mut queries = 0;
    for _ in 0..samples {
        let s = stream.below(num_sets as u64) as SetId;
        let (inside, q) = probe(s);
        hits += inside as u64;
        queries += q;
    }
    EstimateReport {
        samples,
        hits,
        num_sets: num_sets as u64,
        estimate: num_sets as f64 * hits as f64 / samples as f64,
        queries,
    }
}

/// Estimates the optimum by probing the integral main LCA on
/// `100 * delta * f` random sets.
pub fn estimate_opt(inst: &SetCoverInstance, params: &AlgoParams, seed: u64) -> EstimateReport {
    let tape = RandomTape::new(seed);
    let samples = sample_count(inst.delta(), inst.freq());
    match params.cache_mode {
        CacheMode::Shared => {
            let mut ctx = ProbeContext::new(inst, tape, *params);
            estimate_from_probe(&tape, 0, inst.num_sets(), samples, |s| ctx.measured(|c| integral_probe_set(c, s)))
        }
        CacheMode::PerProbe => estimate_from_probe(&tape, 0, inst.num_sets(), samples, |s| {
            let mut ctx = ProbeContext::new(inst, tape, *params);
            ctx.measured(|c| integral_probe_set(c, s))
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, Family};

    #[test]
    fn sample_count_rule() {
        assert_eq!(sample_count(4, 2), 800);
    }

    #[test]
    fn stub_all_false_estimates_zero() {
        let tape = RandomTape::new(1);
        let r = estimate_from_probe(&tape, 0, 10, 800, |_| (false, 3));
        assert_eq!(r.hits, 0);
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.queries, 2400);
    }

    #[test]
    fn stub_all_true_estimates_num_sets() {
        let tape = RandomTape::new(1);
        let r = estimate_from_probe(&tape, 0, 10, 50, |_| (true, 0));
        assert_eq!(r.estimate, 10.0);
    }

    #[test]
    fn estimate_is_deterministic_and_counts_samples() {
        let g = generate_instance(Family::UniformRandom { num_elements: 20, num_sets: 10, f_target: 2 }, 3).unwrap();
        let p = AlgoParams::for_instance(&g.instance).with_sample_scale(4).with_cache_mode(CacheMode::Shared);
        let a = estimate_opt(&g.instance, &p, 5);
        let b = estimate_opt(&g.instance, &p, 5);
        assert_eq!(a, b);
        assert_eq!(a.samples, sample_count(g.instance.delta(), g.instance.freq()));
        assert_eq!(a.estimate, a.num_sets as f64 * a.hits as f64 / a.samples as f64);
    }
}
