use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lcasc::access::{AlgoParams, CacheMode, ProbeContext};
use lcasc::instance::{generate_instance, load_instance, validate_cover, CoverVerdict, Family, IntegralCover, SetCoverInstance};
use lcasc::integral::integral_probe_element;
use lcasc::probe::{probe_set, LcaKind};
use lcasc::randomness::RandomTape;
use lcasc::reference::{exact_cover, greedy_cover, run_alg1, run_alg2, run_alg6, LcaDegrees, SlackPolicy};

mod bench;

#[derive(Parser)]
#[command(name = "lcasc", version, about = "Local computation algorithms for set cover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve an instance with a global algorithm.
    Solve(SolveArgs),
    /// Answer one LCA probe.
    Probe(ProbeArgs),
    /// Estimate the optimum cover size.
    Estimate(EstimateArgs),
    /// Run a benchmark grid and append CSV rows.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Star,
    Uniform,
    Planted,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; LCASC_SEED overrides it when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SeedArg {
    fn resolve(&self) -> Result<u64> {
        match std::env::var("LCASC_SEED") {
            Ok(v) => v.trim().parse().with_context(|| format!("LCASC_SEED is not a u64: {v:?}")),
            Err(_) => Ok(self.seed),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Set size (star, planted).
    #[arg(long, default_value_t = 8)]
    delta: usize,
    /// Element frequency (uniform target, planted).
    #[arg(long, default_value_t = 2)]
    f: usize,
    /// Number of elements (uniform).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of sets (uniform).
    #[arg(long, default_value_t = 40)]
    m: usize,
    /// Planted cover size (planted).
    #[arg(long, default_value_t = 5)]
    opt: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveAlg {
    Greedy,
    Exact,
    Alg1,
    Alg2,
    Alg6,
}

#[derive(Args)]
struct ParamArgs {
    /// Sample-size scale (default: L^3).
    #[arg(long)]
    sample_scale: Option<u64>,
    #[arg(long, default_value_t = AlgoParams::DEFAULT_K)]
    k: u64,
    #[arg(long, default_value_t = AlgoParams::DEFAULT_DELTA_BOOST)]
    delta_boost: u32,
    /// Skip the factor-four scaling before naive covering.
    #[arg(long)]
    no_scale_by_four: bool,
    #[arg(long, value_enum, default_value_t = CacheArg::PerProbe)]
    cache: CacheArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheArg {
    PerProbe,
    Shared,
}

impl ParamArgs {
    fn build(&self, inst: &SetCoverInstance, default_cache: Option<CacheMode>) -> Result<AlgoParams> {
        let mut p = AlgoParams::for_instance(inst).with_k(self.k).with_delta_boost(self.delta_boost).with_scale_by_four(!self.no_scale_by_four);
        if let Some(s) = self.sample_scale {
            p = p.with_sample_scale(s);
        }
        p = p.with_cache_mode(match (self.cache, default_cache) {
            (CacheArg::PerProbe, Some(d)) => d,
            (CacheArg::PerProbe, None) => CacheMode::PerProbe,
            (CacheArg::Shared, _) => CacheMode::Shared,
        });
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    alg: SolveAlg,
    #[arg(long)]
    instance: PathBuf,
    /// Lower slack for alg2; with --r draws a random policy.
    #[arg(long)]
    ell: Option<f64>,
    /// Upper slack for alg2.
    #[arg(long)]
    r: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeAlg {
    Warmup,
    WarmupIntegral,
    Main,
    Integral,
}

impl ProbeAlg {
    fn kind(self) -> LcaKind {
        match self {
            ProbeAlg::Warmup => LcaKind::Warmup,
            ProbeAlg::WarmupIntegral => LcaKind::WarmupIntegral,
            ProbeAlg::Main => LcaKind::Main,
            ProbeAlg::Integral => LcaKind::Integral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Set,
    Element,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_enum, default_value_t = ProbeAlg::Integral)]
    alg: ProbeAlg,
    #[arg(long, value_enum)]
    kind: ProbeKind,
    #[arg(long)]
    id: u32,
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GridArg {
    Default,
    Recurrence,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = GridArg::Default)]
    grid: GridArg,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
}

/// Failure categories mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load(path: &PathBuf) -> Result<SetCoverInstance> {
    load_instance(path).with_context(|| format!("cannot load instance {}", path.display()))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let family = match a.family {
        FamilyArg::Star => Family::Star { delta: a.delta },
        FamilyArg::Uniform => Family::UniformRandom { num_elements: a.n, num_sets: a.m, f_target: a.f },
        FamilyArg::Planted => Family::BlockPlanted { opt_size: a.opt, delta: a.delta, f: a.f },
    };
    let g = generate_instance(family, a.seed.resolve()?)?;
    g.instance.save(&a.out)?;
    let inst = &g.instance;
    print!("wrote {} sets={} elements={} delta={} f={}", a.out.display(), inst.num_sets(), inst.num_elements(), inst.delta(), inst.freq());
    if let Some(p) = &g.planted_cover {
        print!(" planted={}", p.len());
    }
    println!();
    Ok(())
}

fn verdict_text(v: &CoverVerdict) -> String {
    match v {
        CoverVerdict::Ok => "ok".into(),
        CoverVerdict::Uncovered(e) => format!("uncovered:{e}"),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<bool> {
    let inst = load(&a.instance)?;
    let (cost, valid) = match a.alg {
        SolveAlg::Greedy => integral_line(&inst, greedy_cover(&inst)),
        SolveAlg::Exact => integral_line(&inst, exact_cover(&inst)?),
        SolveAlg::Alg1 => {
            let (cover, _) = run_alg1::<f64>(&inst);
            (format!("{}", cover.total()), fractional_verdict(cover.first_uncovered(&inst)))
        }
        SolveAlg::Alg2 => {
            let policy = match (a.ell, a.r) {
                (None, None) => SlackPolicy::identity(),
                (ell, r) => SlackPolicy::random(&inst, ell.unwrap_or(1.0), r.unwrap_or(1.0), a.seed.resolve()?),
            };
            let (cover, _) = run_alg2::<f64>(&inst, &policy)?;
            (format!("{}", cover.total()), fractional_verdict(cover.first_uncovered(&inst)))
        }
        SolveAlg::Alg6 => {
            let params = a.params.build(&inst, Some(CacheMode::Shared))?;
            let mut ctx = ProbeContext::new(&inst, RandomTape::new(a.seed.resolve()?), params);
            let (cover, _) = run_alg6::<f64>(&inst, &params, &mut LcaDegrees { ctx: &mut ctx });
            (format!("{}", cover.total()), fractional_verdict(cover.first_uncovered(&inst)))
        }
    };
    println!("cost={cost} valid={}", verdict_text(&valid));
    Ok(valid.is_ok())
}

fn integral_line(inst: &SetCoverInstance, cover: IntegralCover) -> (String, CoverVerdict) {
    (cover.size().to_string(), validate_cover(inst, &cover))
}

fn fractional_verdict(first: Option<u32>) -> CoverVerdict {
    first.map_or(CoverVerdict::Ok, CoverVerdict::Uncovered)
}

fn cmd_probe(a: &ProbeArgs) -> Result<(), Failure> {
    let inst = load(&a.instance)?;
    let params = a.params.build(&inst, None)?;
    let mut ctx = ProbeContext::new(&inst, RandomTape::new(a.seed.resolve()?), params);
    match a.kind {
        ProbeKind::Set => {
            if a.id as usize >= inst.num_sets() {
                return Err(Failure::Usage(format!("set id {} out of range (0..{})", a.id, inst.num_sets())));
            }
            let kind = a.alg.kind();
            let (v, q) = ctx.measured(|c| probe_set(c, kind, a.id));
            if kind.is_integral() {
                println!("set={} in_cover={} queries={q}", a.id, v > 0.0);
            } else {
                println!("set={} weight={v} queries={q}", a.id);
            }
        }
        ProbeKind::Element => {
            if !matches!(a.alg, ProbeAlg::Integral) {
                return Err(Failure::Usage("element probes are answered by --alg integral".into()));
            }
            if a.id as usize >= inst.num_elements() {
                return Err(Failure::Usage(format!("element id {} out of range (0..{})", a.id, inst.num_elements())));
            }
            let (s, q) = ctx.measured(|c| integral_probe_element(c, a.id));
            println!("element={} set={s} queries={q}", a.id);
        }
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let params = a.params.build(&inst, Some(CacheMode::Shared))?;
    let report = lcasc::estimate_opt(&inst, &params, a.seed.resolve()?);
    println!("{}", report.csv_row());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a)?,
        Command::Solve(a) => {
            if !cmd_solve(a)? {
                return Err(Failure::Runtime(anyhow!("cover is infeasible")));
            }
        }
        Command::Probe(a) => cmd_probe(a)?,
        Command::Estimate(a) => cmd_estimate(a)?,
        Command::Bench(a) => {
            let rows = bench::run_grid(a.grid, a.seed.resolve()?, &a.out)?;
            eprintln!("appended {rows} rows to {}", a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
