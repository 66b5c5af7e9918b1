//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Set `BISBM_ACCEPTANCE=1,4,6` to run a subset. Sweep and comparison CSVs
//! are written under the cargo target tmp dir (`acceptance/`).

mod common;

use std::collections::BTreeSet;
use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use bisbm::bench::{
    default_lambdas, degree_sorting_instance, perf_instance, run_clump_parity, run_degree_sorting_check,
    run_perf_comparison, run_stability_check, run_sweep, ClumpSpec, InputKind, MethodKind, MethodSpec,
    StabilityMode, SweepConfig, SweepResult,
};
use bisbm::genmodel::{
    derive_seed, make_easy_case, make_hard_case, sample_network, Correction, EasyCaseParams,
    HardCaseParams,
};
use bisbm::graph::{one_mode_projection, restrict_partition, VertexType};
use bisbm::inference::{kl_fit, ModelSpec};
use bisbm::io;
use bisbm::metrics::{median, nmi, nmi_labels, spearman};

/// `Err((known, message))`: `known` is set when every failed clause is one
/// documented in the README as unattainable.
type Outcome = Result<String, (bool, String)>;

fn err(e: impl ToString) -> (bool, String) {
    (false, e.to_string())
}

fn out_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn save(sweep: &SweepResult, name: &str) {
    let d = out_dir();
    sweep.write_raw_csv(File::create(d.join(format!("{name}_raw.csv"))).unwrap()).unwrap();
    sweep.write_aggregate_csv(File::create(d.join(format!("{name}_agg.csv"))).unwrap()).unwrap();
}

fn medians(sweep: &SweepResult, method: &str) -> Vec<(f64, f64)> {
    sweep.curve(method).iter().map(|p| (p.lambda, p.nmi_median)).collect()
}

fn fmt_curve(sweep: &SweepResult, method: &str) -> String {
    sweep
        .curve(method)
        .iter()
        .map(|p| format!("{:.2}:{:.2}", p.lambda, p.nmi_median))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Collects clause results; the criterion passes if none failed.
struct Clauses {
    notes: Vec<String>,
    failed: Vec<String>,
    only_known: bool,
}

impl Clauses {
    fn new() -> Self {
        Clauses {
            notes: Vec::new(),
            failed: Vec::new(),
            only_known: true,
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failed.push(what);
            self.only_known = false;
        }
    }

    /// A clause that is documented as not attainable.
    fn check_known(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failed.push(format!("{what} [known]"));
        }
    }

    fn finish(self) -> Outcome {
        if self.failed.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err((
                self.only_known,
                format!("failed: {} | passed: {}", self.failed.join("; "), self.notes.join("; ")),
            ))
        }
    }
}

fn criterion_1() -> Outcome {
    let config = SweepConfig {
        instance: make_easy_case(&EasyCaseParams::default()).map_err(err)?,
        lambdas: default_lambdas(),
        replicates_per_lambda: 100,
        methods: vec![MethodSpec::new("bisbm-dc", MethodKind::Bisbm, true, InputKind::Bipartite)],
        restarts: 1,
        side: VertexType::A,
        base_seed: 1,
    };
    let clock = Instant::now();
    let sweep = run_sweep(&config).map_err(err)?;
    let secs = clock.elapsed().as_secs_f64();
    save(&sweep, "easy");
    let m = medians(&sweep, "bisbm-dc");
    let at1 = m.last().unwrap().1;
    let at0 = m[0].1;
    let (ls, ms): (Vec<f64>, Vec<f64>) = m.iter().copied().unzip();
    let rho = spearman(&ls, &ms);
    let mut c = Clauses::new();
    c.check(at1 == 1.0, format!("median NMI at 1: {at1}"));
    c.check(at0 <= 0.05, format!("median NMI at 0: {at0:.3}"));
    c.check(rho > 0.9, format!("Spearman {rho:.3}"));
    // the budget assumes a multi-core laptop; the sweep parallelizes over replicates
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let timing = format!("{secs:.0} s for 21 x 100 fits on {threads} thread(s)");
    if threads >= 4 {
        c.check(secs <= 1800.0, timing);
    } else {
        c.check_known(secs <= 1800.0, timing);
    }
    c.finish()
}

/// Hard-case sweep shared by criteria 2 and 3.
fn hard_sweep() -> Result<SweepResult, String> {
    let mut methods = vec![
        MethodSpec::new("bisbm-dc", MethodKind::Bisbm, true, InputKind::Bipartite),
        MethodSpec::new("bisbm-uncorrected", MethodKind::Bisbm, false, InputKind::Bipartite),
    ];
    for (input, tag) in [(InputKind::WeightedProjection, "w"), (InputKind::UnweightedProjection, "u")] {
        for dc in [true, false] {
            let name = format!("sbm-{}-{tag}", if dc { "dc" } else { "uncorrected" });
            methods.push(MethodSpec::new(&name, MethodKind::Sbm, dc, input));
        }
    }
    methods.push(MethodSpec::new("modularity-w", MethodKind::Modularity, true, InputKind::WeightedProjection));
    let config = SweepConfig {
        instance: make_hard_case(&HardCaseParams::default()).map_err(|e| e.to_string())?,
        lambdas: default_lambdas(),
        replicates_per_lambda: 30,
        methods,
        restarts: 3,
        side: VertexType::B,
        base_seed: 2,
    };
    let sweep = run_sweep(&config).map_err(|e| e.to_string())?;
    save(&sweep, "hard");
    Ok(sweep)
}

fn criterion_2(sweep: &SweepResult) -> Outcome {
    let mut c = Clauses::new();
    let dc = medians(sweep, "bisbm-dc");
    let low = dc.iter().filter(|p| p.0 >= 0.5 - 1e-12).map(|p| p.1).fold(1.0, f64::min);
    c.check(low >= 0.95, format!("corrected min median for lambda >= 0.5: {low:.3}"));
    let transition = dc.iter().filter(|p| p.1 < 0.5).map(|p| p.0).fold(f64::NAN, f64::max);
    c.check(
        (0.2..=0.45).contains(&transition),
        format!("corrected largest lambda with median < 0.5: {transition}"),
    );
    let unc = sweep.curve("bisbm-uncorrected");
    let good: Vec<f64> = unc.iter().filter(|p| p.nmi_median >= 0.9).map(|p| p.lambda).collect();
    c.check_known(
        !good.is_empty() && good.iter().all(|&l| l >= 0.9 - 1e-12),
        format!("uncorrected median >= 0.9 at {good:?}"),
    );
    let band = unc.iter().map(|p| p.nmi_q90 - p.nmi_q10).fold(0.0, f64::max);
    c.check(band > 0.5, format!("uncorrected widest q10-q90 band {band:.3}"));
    for m in ["sbm-dc-w", "sbm-uncorrected-w", "sbm-dc-u", "sbm-uncorrected-u"] {
        let top = sweep.curve(m).iter().map(|p| p.nmi_median).fold(0.0, f64::max);
        c.check(top < 0.05, format!("{m} max median {top:.3}"));
    }
    let mut r = c.finish();
    let curves = format!(
        " | corrected {} | uncorrected {}",
        fmt_curve(sweep, "bisbm-dc"),
        fmt_curve(sweep, "bisbm-uncorrected")
    );
    match &mut r {
        Ok(s) | Err((_, s)) => s.push_str(&curves),
    }
    r
}

fn criterion_3(sweep: &SweepResult) -> Outcome {
    let mut c = Clauses::new();
    for p in sweep.curve("modularity-w").iter().filter(|p| p.lambda >= 0.6 - 1e-12) {
        let band = p.nmi_q90 - p.nmi_q10;
        c.check_known(
            p.nmi_median > 0.1 && p.nmi_median < 0.9 && band > 0.3,
            format!("modularity at {:.2}: median {:.3} band {:.3}", p.lambda, p.nmi_median, band),
        );
    }
    let hard = make_hard_case(&HardCaseParams::default()).map_err(err)?;
    let types = hard.vertex_types();
    let correct = restrict_partition(&hard.partition(), &types, VertexType::B).map_err(err)?;
    for correction in [Correction::DegreeCorrected, Correction::Uncorrected] {
        let mut finals = Vec::new();
        for rep in 0..5 {
            let g = sample_network(&hard, derive_seed(&[3, rep])).map_err(err)?;
            let proj = one_mode_projection(&g, VertexType::B, true);
            let rec = run_stability_check(&proj, &correct, ModelSpec::unipartite(correction), StabilityMode::Descend)
                .map_err(err)?;
            finals.push(rec.final_nmi.unwrap());
        }
        let med = median(&finals);
        let ok = match correction {
            Correction::DegreeCorrected => med > 0.8,
            Correction::Uncorrected => med < 0.2,
        };
        c.check(ok, format!("descend {correction:?} median final NMI {med:.3}"));
    }
    c.finish()
}

fn criterion_4() -> Outcome {
    let spec = ClumpSpec::default();
    let rows = run_clump_parity(&[4, 5, 6, 7, 8], &spec).map_err(err)?;
    let mut c = Clauses::new();
    for r in &rows {
        let diff = r.sbm_score - r.bisbm_score;
        if r.k % 2 == 0 {
            c.check(
                r.nmi == 1.0 && diff.abs() <= 1e-9 * r.sbm_score.abs().max(1.0),
                format!("K={} {:?}: NMI {:.3} diff {diff:.2e}", r.k, r.correction, r.nmi),
            );
        } else {
            c.check(
                diff > 1e-9 && !r.sbm_pure_type,
                format!("K={} {:?}: SBM ahead by {diff:.2}, pure={}", r.k, r.correction, r.sbm_pure_type),
            );
        }
    }
    c.finish()
}

fn criterion_5() -> Outcome {
    let inst = perf_instance().map_err(err)?;
    let g = sample_network(&inst, 5).map_err(err)?;
    let r = run_perf_comparison(&g, 3, 3, 200, 5, Correction::DegreeCorrected).map_err(err)?;
    r.write_csv(File::create(out_dir().join("perf.csv")).unwrap()).unwrap();
    let mut c = Clauses::new();
    c.check(
        (1000..=1200).contains(&inst.num_vertices()),
        format!("{} vertices, {} edges", inst.num_vertices(), g.num_edges()),
    );
    let (bm, sm) = (r.bisbm.median_score(), r.sbm.median_score());
    c.check(bm >= sm, format!("median score biSBM {bm:.1} vs SBM {sm:.1}"));
    let ratio = r.time_ratio();
    c.check(ratio < 0.9, format!("time ratio {ratio:.3}"));
    let sp = r.sbm.pure_type_fraction();
    c.check(sp <= 0.05, format!("SBM pure-type {sp:.3}"));
    let bp = r.bisbm.pure_type_fraction();
    c.check(bp == 1.0, format!("biSBM pure-type {bp:.3}"));
    c.finish()
}

fn criterion_6() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).map_err(err);
    let types = io::parse_types(&read("southern_women_types.tsv")?).map_err(err)?;
    let g = io::parse_edge_list(&read("southern_women.tsv")?, &types).map_err(err)?;
    // women 0-8 and 9-17; events E1-E6, E7-E9, E10-E14
    let mut want = vec![0; 9];
    want.extend([1; 9]);
    want.extend([2; 6]);
    want.extend([3; 3]);
    want.extend([4; 5]);
    let mut c = Clauses::new();
    let mut fits = Vec::new();
    for correction in [Correction::DegreeCorrected, Correction::Uncorrected] {
        let fit = kl_fit(&g, ModelSpec::bipartite(correction), 2, 3, 100, 6).map_err(err)?;
        let v = nmi_labels(fit.best_partition.assignment(), &want).map_err(err)?;
        c.check(v == 1.0, format!("{correction:?} NMI with published partition {v:.3}"));
        fits.push(fit.best_partition);
    }
    let agree = nmi(&fits[0], &fits[1]).map_err(err)?;
    c.check(agree == 1.0, format!("modes agree: NMI {agree:.3}"));
    c.finish()
}

fn criterion_7() -> Outcome {
    let mut c = Clauses::new();
    let checks: [(&str, fn() -> common::Check); 6] = [
        ("likelihood", common::check_likelihood_oracle),
        ("delta", || common::check_delta_moves(1000)),
        ("projection", common::check_projection_oracle),
        ("sampler", common::check_sampler_moments),
        ("nmi", || common::check_nmi_suite(500)),
        ("nesting", || common::check_nesting(100)),
    ];
    for (name, f) in checks {
        match f() {
            Ok(s) => c.check(true, format!("{name}: {s}")),
            Err(e) => c.check(false, format!("{name}: {e}")),
        }
    }
    c.finish()
}

fn criterion_8() -> Outcome {
    let inst = degree_sorting_instance().map_err(err)?;
    let recs: Vec<_> = (0..5)
        .map(|i| run_degree_sorting_check(&inst, 1.0, 10, derive_seed(&[8, i])))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let ud = median(&recs.iter().map(|r| r.uncorrected_vs_degree).collect::<Vec<_>>());
    let up = median(&recs.iter().map(|r| r.uncorrected_vs_planted).collect::<Vec<_>>());
    let dp = median(&recs.iter().map(|r| r.corrected_vs_planted).collect::<Vec<_>>());
    let mut c = Clauses::new();
    c.check(ud > up, format!("uncorrected NMI with degree bisection {ud:.3} vs planted {up:.3}"));
    c.check(dp >= 0.9, format!("corrected NMI with planted {dp:.3}"));
    c.finish()
}

fn main() {
    // `cargo test -- --list` and filtered runs of other targets pass arguments through
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let selected: BTreeSet<usize> = match std::env::var("BISBM_ACCEPTANCE") {
        Ok(s) if !s.trim().is_empty() => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        _ => (1..=8).collect(),
    };
    let mut hard: Option<Result<SweepResult, String>> = None;
    let mut unexpected = Vec::new();
    for &n in &selected {
        let clock = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| match n {
            1 => criterion_1(),
            2 | 3 => {
                let sweep = hard.get_or_insert_with(hard_sweep).clone().map_err(err)?;
                if n == 2 {
                    criterion_2(&sweep)
                } else {
                    criterion_3(&sweep)
                }
            }
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => criterion_8(),
            _ => Err(err(format!("no criterion {n}"))),
        }))
        .unwrap_or_else(|_| Err(err("panicked")));
        let secs = clock.elapsed().as_secs_f64();
        match result {
            Ok(s) => println!("criterion {n}: PASS ({secs:.0} s) {s}"),
            Err((known, s)) => {
                println!("criterion {n}: FAIL{} ({secs:.0} s) {s}", if known { " [known]" } else { "" });
                if !known {
                    unexpected.push(n);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
