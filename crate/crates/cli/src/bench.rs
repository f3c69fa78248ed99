//! Benchmark grids and the CSV they append to.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use lcasc::access::{AlgoParams, CacheMode};
use lcasc::instance::{generate_instance, Family, SetCoverInstance};
use lcasc::probe::{probe_all_sets, LcaKind};
use lcasc::randomness::RandomTape;
use lcasc::reference::{exact_cover, greedy_cover, run_alg1, EXACT_MAX_SETS};
use rayon::prelude::*;

use crate::GridArg;

pub const CSV_HEADER: &str =
    "algorithm,seed,n,m,delta,f,params,cover_cost,baseline_cost,ratio,queries_max,queries_mean,wall_millis";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algorithm {
    Greedy,
    Alg1,
    Lca(LcaKind),
}

impl Algorithm {
    fn tag(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Alg1 => "alg1",
            Algorithm::Lca(k) => k.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub f: usize,
    pub params: String,
    pub cover_cost: f64,
    pub baseline_cost: f64,
    pub ratio: f64,
    pub queries_max: u64,
    pub queries_mean: f64,
    pub wall_millis: u128,
}

impl BenchRecord {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{},{:.3},{}",
            self.algorithm,
            self.seed,
            self.n,
            self.m,
            self.delta,
            self.f,
            self.params,
            self.cover_cost,
            self.baseline_cost,
            self.ratio,
            self.queries_max,
            self.queries_mean,
            self.wall_millis
        )
    }
}

struct Cell {
    family: Family,
    seed: u64,
    algorithm: Algorithm,
    cache: CacheMode,
}

fn grid(which: GridArg, seed: u64) -> Vec<Cell> {
    let mut cells = Vec::new();
    match which {
        GridArg::Default => {
            let families = [
                Family::UniformRandom { num_elements: 60, num_sets: 20, f_target: 3 },
                Family::BlockPlanted { opt_size: 4, delta: 8, f: 4 },
                Family::Star { delta: 8 },
            ];
            let algorithms = [
                Algorithm::Greedy,
                Algorithm::Alg1,
                Algorithm::Lca(LcaKind::Warmup),
                Algorithm::Lca(LcaKind::WarmupIntegral),
                Algorithm::Lca(LcaKind::Main),
                Algorithm::Lca(LcaKind::Integral),
            ];
            for family in families {
                for s in [seed, seed + 1] {
                    for algorithm in algorithms {
                        cells.push(Cell { family, seed: s, algorithm, cache: CacheMode::PerProbe });
                    }
                }
            }
        }
        GridArg::Recurrence => {
            for delta in [4, 8, 16, 32] {
                for s in [seed, seed + 1] {
                    cells.push(Cell {
                        family: Family::BlockPlanted { opt_size: 4, delta, f: 4 },
                        seed: s,
                        algorithm: Algorithm::Lca(LcaKind::Integral),
                        cache: CacheMode::PerProbe,
                    });
                }
            }
        }
    }
    cells
}

fn baseline(inst: &SetCoverInstance) -> f64 {
    if inst.num_sets() <= EXACT_MAX_SETS {
        exact_cover(inst).expect("size checked").size() as f64
    } else {
        greedy_cover(inst).size() as f64
    }
}

fn run_cell(cell: &Cell) -> Result<BenchRecord> {
    let g = generate_instance(cell.family, cell.seed)?;
    let inst = &g.instance;
    let params = AlgoParams::for_instance(inst).with_cache_mode(cell.cache);
    let start = Instant::now();
    let (cost, qmax, qmean) = match cell.algorithm {
        Algorithm::Greedy => (greedy_cover(inst).size() as f64, 0, 0.0),
        Algorithm::Alg1 => (run_alg1::<f64>(inst).0.total(), 0, 0.0),
        Algorithm::Lca(kind) => {
            let r = probe_all_sets(inst, RandomTape::new(cell.seed), &params, kind);
            let cost = if kind.is_integral() { r.cover().size() as f64 } else { r.total() };
            (cost, r.queries_max(), r.queries_mean())
        }
    };
    let wall_millis = start.elapsed().as_millis();
    let base = baseline(inst);
    Ok(BenchRecord {
        algorithm: cell.algorithm.tag().to_string(),
        seed: cell.seed,
        n: inst.num_elements(),
        m: inst.num_sets(),
        delta: inst.delta(),
        f: inst.freq(),
        params: params.fingerprint(),
        cover_cost: cost,
        baseline_cost: base,
        ratio: cost / base,
        queries_max: qmax,
        queries_mean: qmean,
        wall_millis,
    })
}

/// Runs every cell of the grid and appends one row per cell to `out`,
/// writing the header first when the file is new or empty.
pub fn run_grid(which: GridArg, seed: u64, out: &Path) -> Result<usize> {
    let cells = grid(which, seed);
    let mut records: Vec<BenchRecord> = cells.par_iter().map(run_cell).collect::<Result<_>>()?;
    records.sort_by(|a, b| {
        (&a.algorithm, a.n, a.m, a.delta, a.f, a.seed)
            .cmp(&(&b.algorithm, b.n, b.m, b.delta, b.f, b.seed))
    });
    let needs_header = std::fs::metadata(out).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .with_context(|| format!("cannot open {}", out.display()))?;
    if needs_header {
        writeln!(file, "{CSV_HEADER}")?;
    }
    for r in &records {
        writeln!(file, "{}", r.csv())?;
    }
    Ok(records.len())
}
