//! The `bisbm` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, ClumpSpec, SweepConfig};
use crate::error::{Error, Result};
use crate::genmodel::{
    interpolate_noise, make_easy_case, make_hard_case, sample_network, Correction, EasyCaseParams,
    HardCaseParams, PlantedInstance,
};
use crate::graph::{one_mode_projection, BipartiteGraph, VertexType};
use crate::inference::{kl_fit, ModelSpec, ReplicateRecord};
use crate::io;
use crate::metrics::nmi;

#[derive(Parser, Debug)]
#[command(name = "bisbm", version, about = "Bipartite stochastic block models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a default planted instance as JSON.
    Instance(InstanceArgs),
    /// Sample a network from an instance at noise level lambda.
    Generate(GenerateArgs),
    /// Fit a block model to an edge list.
    Fit(FitArgs),
    /// One-mode projection of a bipartite edge list.
    Project(ProjectArgs),
    /// NMI between two partition files.
    Nmi(NmiArgs),
    /// Run a noise sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Bipartite vs unipartite fits: scores, times, pure-type fractions.
    Compare(CompareArgs),
    /// Clump-ring parity study.
    Clumpring(ClumpArgs),
}

#[derive(Args, Debug)]
struct CorrectionFlags {
    /// Degree-corrected model (default).
    #[arg(long, overrides_with = "no_dc")]
    dc: bool,
    /// Uncorrected model.
    #[arg(long, overrides_with = "dc")]
    no_dc: bool,
}

impl CorrectionFlags {
    fn correction(&self) -> Correction {
        Correction::from_flag(!self.no_dc)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseKind {
    Easy,
    Hard,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    A,
    B,
}

impl From<Side> for VertexType {
    fn from(s: Side) -> Self {
        match s {
            Side::A => VertexType::A,
            Side::B => VertexType::B,
        }
    }
}

#[derive(Args, Debug)]
struct InstanceArgs {
    case: CaseKind,
    /// Planted mean degree (default 10 for easy, 220 for hard).
    #[arg(long)]
    mean_degree: Option<f64>,
    /// Vertices per type (easy case).
    #[arg(long, default_value_t = 1000)]
    n_per_side: usize,
    /// epsilon / gamma (hard case).
    #[arg(long, default_value_t = 0.35)]
    ratio: f64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Edge list output (stdout if absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    types_out: Option<PathBuf>,
    /// Planted partition output.
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    edges: PathBuf,
    /// Vertex types file; without it the edge list is read as unipartite.
    #[arg(long)]
    types: Option<PathBuf>,
    #[arg(long)]
    ka: usize,
    #[arg(long)]
    kb: usize,
    #[command(flatten)]
    correction: CorrectionFlags,
    /// Fit the unipartite SBM with K = ka + kb groups.
    #[arg(long)]
    unipartite: bool,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    partition_out: PathBuf,
    /// FitResult JSON (stdout if absent).
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    edges: PathBuf,
    #[arg(long)]
    types: PathBuf,
    #[arg(long, value_enum)]
    side: Side,
    #[arg(long)]
    weighted: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// `projected_id<TAB>original_id` map.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NmiArgs {
    first: PathBuf,
    second: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    raw_out: PathBuf,
    #[arg(long)]
    agg_out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Edge list; a synthetic heterogeneous-degree graph is sampled if absent.
    edges: Option<PathBuf>,
    #[arg(long)]
    types: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    ka: usize,
    #[arg(long, default_value_t = 3)]
    kb: usize,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[command(flatten)]
    correction: CorrectionFlags,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClumpArgs {
    /// Group counts to fit.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8")]
    ks: Vec<usize>,
    /// Clump sizes `AxB`, comma separated (default 2x2,3x3,...,9x9).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<String>,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(c: Command) -> Result<()> {
    match c {
        Command::Instance(a) => instance(a),
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Project(a) => project(a),
        Command::Nmi(a) => nmi_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Clumpring(a) => clumpring(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::invalid(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn read_bipartite(edges: &Path, types: &Path) -> Result<BipartiteGraph> {
    let t = with_path(types, io::parse_types(&read(types)?))?;
    with_path(edges, io::parse_edge_list(&read(edges)?, &t))
}

fn instance(a: InstanceArgs) -> Result<()> {
    let inst = match a.case {
        CaseKind::Easy => make_easy_case(&EasyCaseParams::with_mean_degree(a.n_per_side, a.mean_degree.unwrap_or(10.0)))?,
        CaseKind::Hard => {
            let d = HardCaseParams::default();
            let p = HardCaseParams::with_mean_degree(d.sizes_a, d.sizes_b, a.mean_degree.unwrap_or(220.0), a.ratio);
            make_hard_case(&p)?
        }
    };
    emit(a.out.as_deref(), &json(&inst)?)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let inst: PlantedInstance = with_path(&a.instance, serde_json::from_str(&read(&a.instance)?).map_err(Error::from))?;
    let noisy = inst.with_omega(interpolate_noise(&inst, a.lambda)?)?;
    let g = sample_network(&noisy, seed)?;
    let text = format!("# seed {seed} lambda {}\n{}", a.lambda, io::write_edge_list(&g));
    emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.types_out {
        emit(Some(p), &io::write_types(g.types()))?;
    }
    if let Some(p) = &a.partition_out {
        emit(Some(p), &io::write_partition(&inst.partition()))?;
    }
    eprintln!("seed {seed}");
    Ok(())
}

#[derive(Serialize)]
struct FitDoc<'a> {
    model: String,
    #[serde(rename = "K_a")]
    k_a: usize,
    #[serde(rename = "K_b")]
    k_b: usize,
    best_score: f64,
    best_partition_file: String,
    seed: u64,
    replicates: &'a [ReplicateRecord],
}

fn fit(a: FitArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let correction = a.correction.correction();
    let model = if a.unipartite {
        ModelSpec::unipartite(correction)
    } else {
        ModelSpec::bipartite(correction)
    };
    let result = match &a.types {
        Some(types) => {
            let g = read_bipartite(&a.edges, types)?;
            kl_fit(&g, model, a.ka, a.kb, a.restarts, seed)?
        }
        None => {
            if !a.unipartite {
                return Err(Error::invalid("the bipartite model needs --types"));
            }
            let g = with_path(&a.edges, io::parse_unipartite_edge_list(&read(&a.edges)?, None))?;
            kl_fit(&g, model, a.ka, a.kb, a.restarts, seed)?
        }
    };
    emit(Some(&a.partition_out), &io::write_partition(&result.best_partition))?;
    let doc = FitDoc {
        model: model.to_string(),
        k_a: a.ka,
        k_b: a.kb,
        best_score: result.best_score,
        best_partition_file: a.partition_out.display().to_string(),
        seed,
        replicates: &result.replicates,
    };
    emit(a.json_out.as_deref(), &json(&doc)?)
}

fn project(a: ProjectArgs) -> Result<()> {
    let g = read_bipartite(&a.edges, &a.types)?;
    let p = one_mode_projection(&g, a.side.into(), a.weighted);
    emit(a.out.as_deref(), &io::write_unipartite_edge_list(&p))?;
    if let Some(path) = &a.labels_out {
        let mut s = String::new();
        for (i, l) in p.labels().iter().enumerate() {
            s.push_str(&format!("{i}\t{l}\n"));
        }
        emit(Some(path), &s)?;
    }
    Ok(())
}

fn nmi_cmd(a: NmiArgs) -> Result<()> {
    let x = with_path(&a.first, io::parse_partition(&read(&a.first)?))?;
    let y = with_path(&a.second, io::parse_partition(&read(&a.second)?))?;
    println!("{:?}", nmi(&x, &y)?);
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut c: SweepConfig = with_path(&a.config, serde_json::from_str(&read(&a.config)?).map_err(Error::from))?;
    if let Some(s) = a.seed {
        c.base_seed = s;
    }
    let r = bench::run_sweep(&c)?;
    let mut raw = Vec::new();
    r.write_raw_csv(&mut raw)?;
    let mut agg = Vec::new();
    r.write_aggregate_csv(&mut agg)?;
    emit(Some(&a.raw_out), &String::from_utf8_lossy(&raw))?;
    emit(Some(&a.agg_out), &String::from_utf8_lossy(&agg))?;
    eprintln!("seed {}", c.base_seed);
    Ok(())
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    seed: u64,
    #[serde(flatten)]
    result: &'a bench::PerfResult,
    bisbm_median_score: f64,
    sbm_median_score: f64,
    bisbm_mean_seconds: f64,
    sbm_mean_seconds: f64,
    time_ratio: f64,
    bisbm_pure_type_fraction: f64,
    sbm_pure_type_fraction: f64,
}

fn compare(a: CompareArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let g = match (&a.edges, &a.types) {
        (Some(e), Some(t)) => read_bipartite(e, t)?,
        (None, None) => sample_network(&bench::perf_instance()?, seed)?,
        _ => return Err(Error::invalid("give both an edge list and --types, or neither")),
    };
    let r = bench::run_perf_comparison(&g, a.ka, a.kb, a.replicates, seed, a.correction.correction())?;
    if let Some(p) = &a.csv_out {
        let mut buf = Vec::new();
        r.write_csv(&mut buf)?;
        emit(Some(p), &String::from_utf8_lossy(&buf))?;
    }
    let doc = CompareDoc {
        seed,
        result: &r,
        bisbm_median_score: r.bisbm.median_score(),
        sbm_median_score: r.sbm.median_score(),
        bisbm_mean_seconds: r.bisbm.mean_seconds(),
        sbm_mean_seconds: r.sbm.mean_seconds(),
        time_ratio: r.time_ratio(),
        bisbm_pure_type_fraction: r.bisbm.pure_type_fraction(),
        sbm_pure_type_fraction: r.sbm.pure_type_fraction(),
    };
    emit(a.json_out.as_deref(), &json(&doc)?)
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::invalid(format!("clump size {s:?} is not of the form AxB"));
    let (x, y) = s.split_once('x').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

#[derive(Serialize)]
struct ClumpDoc {
    seed: u64,
    sizes: Vec<(usize, usize)>,
    restarts: usize,
    rows: Vec<bench::ClumpParityRow>,
}

fn clumpring(a: ClumpArgs) -> Result<()> {
    let seed = seed_or_entropy(a.seed);
    let sizes = if a.sizes.is_empty() {
        bench::default_clump_sizes()
    } else {
        a.sizes.iter().map(|s| parse_size(s)).collect::<Result<_>>()?
    };
    let spec = ClumpSpec {
        sizes,
        restarts: a.restarts,
        seed,
        ..ClumpSpec::default()
    };
    let rows = bench::run_clump_parity(&a.ks, &spec)?;
    let doc = ClumpDoc {
        seed,
        sizes: spec.sizes,
        restarts: spec.restarts,
        rows,
    };
    emit(a.out.as_deref(), &json(&doc)?)
}
