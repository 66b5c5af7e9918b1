//! Experiment drivers: noise sweeps over planted instances, the bipartite
//! versus unipartite speed and quality comparison, local-optimum stability
//! checks and the clump-ring parity study.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genmodel::{
    derive_seed, interpolate_noise, make_clump_ring_sized, sample_network, split_propensities, BlockAffinity,
    Correction, DegreePropensity, PlantedInstance,
};
use crate::graph::{one_mode_projection, BipartiteGraph, Network, Partition, VertexType};
use crate::inference::{
    greedy_modularity, is_local_optimum, kl_fit, kl_search, log_likelihood, modularity, ModelSpec,
};
use crate::metrics::{nmi, nmi_labels, quantile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Bisbm,
    Sbm,
    Modularity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Bipartite,
    WeightedProjection,
    UnweightedProjection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
    #[serde(default = "default_true")]
    pub dc: bool,
    pub input: InputKind,
}

fn default_true() -> bool {
    true
}

impl MethodSpec {
    pub fn new(name: &str, kind: MethodKind, dc: bool, input: InputKind) -> Self {
        MethodSpec {
            name: name.to_string(),
            kind,
            dc,
            input,
        }
    }

    fn model(&self) -> Option<ModelSpec> {
        let c = Correction::from_flag(self.dc);
        match self.kind {
            MethodKind::Bisbm => Some(ModelSpec::bipartite(c)),
            MethodKind::Sbm => Some(ModelSpec::unipartite(c)),
            MethodKind::Modularity => None,
        }
    }
}

/// The 21-point grid `0, 0.05, ..., 1`.
pub fn default_lambdas() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

fn default_replicates() -> usize {
    100
}

fn default_restarts() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub instance: PlantedInstance,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates_per_lambda: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub side: VertexType,
    #[serde(default)]
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("lambda grid must be non-empty and inside [0, 1]"));
        }
        if self.replicates_per_lambda == 0 || self.restarts == 0 {
            return Err(Error::invalid("replicates and restarts must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods configured"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::invalid(format!("duplicate method name {:?}", m.name)));
            }
            if m.kind == MethodKind::Bisbm && m.input != InputKind::Bipartite {
                return Err(Error::invalid(format!(
                    "method {:?}: the bipartite model needs the bipartite input",
                    m.name
                )));
            }
            if m.kind == MethodKind::Modularity && m.input == InputKind::Bipartite {
                return Err(Error::invalid(format!("method {:?}: modularity runs on projections only", m.name)));
            }
        }
        Ok(())
    }
}

/// One method run on one sampled network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub method: String,
    pub lambda: f64,
    pub replicate: usize,
    pub seed: u64,
    pub nmi: f64,
    pub score: f64,
    pub seconds: f64,
    pub pure_type: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub method: String,
    pub lambda: f64,
    pub nmi_q10: f64,
    pub nmi_median: f64,
    pub nmi_q90: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub records: Vec<ReplicateResult>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, method: &str, lambda: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.method == method && (p.lambda - lambda).abs() < 1e-12)
    }

    /// Points of one method in grid order.
    pub fn curve(&self, method: &str) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.method == method).collect()
    }

    pub fn write_raw_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_aggregate_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for p in &self.points {
            out.serialize(p)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Labels of the `side` vertices, in vertex order.
fn side_labels(p: &Partition, types: &[VertexType], side: VertexType) -> Vec<usize> {
    p.assignment()
        .iter()
        .zip(types)
        .filter(|(_, t)| **t == side)
        .map(|(g, _)| *g)
        .collect()
}

fn side_groups(inst: &PlantedInstance, side: VertexType) -> usize {
    match side {
        VertexType::A => inst.k_a,
        VertexType::B => inst.k_b,
    }
}

/// Seed of the network sampled for grid point `lambda_index`, replicate `replicate`.
pub fn network_seed(base_seed: u64, lambda_index: usize, replicate: usize) -> u64 {
    derive_seed(&[base_seed, lambda_index as u64, replicate as u64])
}

/// Seed handed to method `method_index` on a network sampled with `net_seed`.
pub fn method_seed(net_seed: u64, method_index: usize) -> u64 {
    derive_seed(&[net_seed, 1 + method_index as u64])
}

/// Runs every configured method on one sampled network.
pub fn run_replicate(c: &SweepConfig, lambda_index: usize, replicate: usize) -> Result<Vec<ReplicateResult>> {
    let lambda = c.lambdas[lambda_index];
    let inst = c.instance.with_omega(interpolate_noise(&c.instance, lambda)?)?;
    let net_seed = network_seed(c.base_seed, lambda_index, replicate);
    let g = sample_network(&inst, net_seed)?;
    let types = g.types();
    let planted = side_labels(&inst.partition(), types, c.side);
    let mut weighted = None;
    let mut unweighted = None;
    let mut out = Vec::with_capacity(c.methods.len());
    for (mi, m) in c.methods.iter().enumerate() {
        let seed = method_seed(net_seed, mi);
        let clock = Instant::now();
        let (labels, score, pure_type) = match m.input {
            InputKind::Bipartite => {
                let model = m
                    .model()
                    .ok_or_else(|| Error::invalid("modularity runs on projections only"))?;
                let (k_a, k_b) = if model.is_bipartite() {
                    (inst.k_a, inst.k_b)
                } else {
                    (inst.k_a + inst.k_b - 1, 1)
                };
                let fit = kl_fit(&g, model, k_a, k_b, c.restarts, seed)?;
                let pure = fit.best_partition.is_pure_type(types);
                (side_labels(&fit.best_partition, types, c.side), fit.best_score, pure)
            }
            InputKind::WeightedProjection | InputKind::UnweightedProjection => {
                let is_weighted = m.input == InputKind::WeightedProjection;
                let slot = if is_weighted { &mut weighted } else { &mut unweighted };
                let proj = slot.get_or_insert_with(|| one_mode_projection(&g, c.side, is_weighted));
                match m.model() {
                    Some(model) => {
                        let k = side_groups(&inst, c.side);
                        let (labels, score) = if k == 1 {
                            single_group_fit(&*proj, model)?
                        } else {
                            let fit = kl_fit(&*proj, model, k - 1, 1, c.restarts, seed)?;
                            (fit.best_partition.assignment().to_vec(), fit.best_score)
                        };
                        (labels, score, true)
                    }
                    None => {
                        let p = greedy_modularity(&*proj)?;
                        let q = modularity(&*proj, &p)?;
                        (p.assignment().to_vec(), q, true)
                    }
                }
            }
        };
        let seconds = clock.elapsed().as_secs_f64();
        out.push(ReplicateResult {
            method: m.name.clone(),
            lambda,
            replicate,
            seed: net_seed,
            nmi: nmi_labels(&labels, &planted)?,
            score,
            seconds,
            pure_type,
        });
    }
    Ok(out)
}

fn single_group_fit<G: Network + ?Sized>(g: &G, model: ModelSpec) -> Result<(Vec<usize>, f64)> {
    let p = Partition::untyped(vec![0; g.num_vertices()], 1)?;
    Ok((p.assignment().to_vec(), log_likelihood(g, &p, model)?))
}

/// Runs the full sweep. Replicates run in parallel; every record depends only
/// on the configuration and its (λ index, replicate) position.
pub fn run_sweep(c: &SweepConfig) -> Result<SweepResult> {
    c.validate()?;
    let tasks: Vec<(usize, usize)> = (0..c.lambdas.len())
        .flat_map(|li| (0..c.replicates_per_lambda).map(move |r| (li, r)))
        .collect();
    let per_task: Vec<Vec<ReplicateResult>> = tasks
        .par_iter()
        .map(|&(li, r)| run_replicate(c, li, r))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(per_task.len() * c.methods.len());
    for m in &c.methods {
        for recs in &per_task {
            records.extend(recs.iter().filter(|r| r.method == m.name).cloned());
        }
    }
    let mut points = Vec::new();
    for m in &c.methods {
        for &lambda in &c.lambdas {
            let v: Vec<f64> = records
                .iter()
                .filter(|r| r.method == m.name && r.lambda == lambda)
                .map(|r| r.nmi)
                .collect();
            points.push(SweepPoint {
                method: m.name.clone(),
                lambda,
                nmi_q10: quantile(&v, 0.1),
                nmi_median: quantile(&v, 0.5),
                nmi_q90: quantile(&v, 0.9),
            });
        }
    }
    Ok(SweepResult { records, points })
}

/// Recomputes one raw record of a sweep.
pub fn replay(c: &SweepConfig, method: &str, lambda_index: usize, replicate: usize) -> Result<ReplicateResult> {
    c.validate()?;
    if lambda_index >= c.lambdas.len() || replicate >= c.replicates_per_lambda {
        return Err(Error::invalid("grid position out of range"));
    }
    run_replicate(c, lambda_index, replicate)?
        .into_iter()
        .find(|r| r.method == method)
        .ok_or_else(|| Error::invalid(format!("unknown method {method:?}")))
}

/// Per-method outcome of [`run_perf_comparison`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfMethodResult {
    pub method: String,
    /// Final scores under the common unipartite objective.
    pub scores: Vec<f64>,
    pub seconds: Vec<f64>,
    pub pure_type: Vec<bool>,
    pub seeds: Vec<u64>,
}

impl PerfMethodResult {
    fn new(method: String) -> Self {
        PerfMethodResult {
            method,
            scores: Vec::new(),
            seconds: Vec::new(),
            pure_type: Vec::new(),
            seeds: Vec::new(),
        }
    }

    pub fn median_score(&self) -> f64 {
        quantile(&self.scores, 0.5)
    }

    pub fn mean_seconds(&self) -> f64 {
        self.seconds.iter().sum::<f64>() / self.seconds.len() as f64
    }

    pub fn pure_type_fraction(&self) -> f64 {
        self.pure_type.iter().filter(|p| **p).count() as f64 / self.pure_type.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfResult {
    pub correction: Correction,
    pub k_a: usize,
    pub k_b: usize,
    pub replicates: usize,
    pub bisbm: PerfMethodResult,
    pub sbm: PerfMethodResult,
}

impl PerfResult {
    /// Mean biSBM time over mean SBM time.
    pub fn time_ratio(&self) -> f64 {
        self.bisbm.mean_seconds() / self.sbm.mean_seconds()
    }

    /// CSV `method,replicate,seed,score,seconds,pure_type`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["method", "replicate", "seed", "score", "seconds", "pure_type"])?;
        for m in [&self.bisbm, &self.sbm] {
            for i in 0..m.scores.len() {
                out.write_record([
                    m.method.clone(),
                    i.to_string(),
                    m.seeds[i].to_string(),
                    m.scores[i].to_string(),
                    m.seconds[i].to_string(),
                    m.pure_type[i].to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Single-restart fits of the biSBM (`K_a`, `K_b`) and of the unipartite SBM
/// (`K_a + K_b` groups) on the same graph, alternating between the two
/// methods replicate by replicate. Both final partitions are scored under the
/// unipartite objective; on pure-type partitions it equals the bipartite one.
pub fn run_perf_comparison(
    g: &BipartiteGraph,
    k_a: usize,
    k_b: usize,
    replicates: usize,
    seed: u64,
    correction: Correction,
) -> Result<PerfResult> {
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let bi_model = ModelSpec::bipartite(correction);
    let uni_model = ModelSpec::unipartite(correction);
    let mut bisbm = PerfMethodResult::new(bi_model.to_string());
    let mut sbm = PerfMethodResult::new(uni_model.to_string());
    for i in 0..replicates {
        for (mi, (model, ka, kb, rec)) in [(bi_model, k_a, k_b, &mut bisbm), (uni_model, k_a, k_b, &mut sbm)]
            .into_iter()
            .enumerate()
        {
            let s = derive_seed(&[seed, i as u64, mi as u64]);
            let clock = Instant::now();
            let fit = kl_fit(g, model, ka, kb, 1, s)?;
            let seconds = clock.elapsed().as_secs_f64();
            rec.scores.push(log_likelihood(g, &fit.best_partition, uni_model)?);
            rec.seconds.push(seconds);
            rec.pure_type.push(fit.best_partition.is_pure_type(g.types()));
            rec.seeds.push(s);
        }
    }
    Ok(PerfResult {
        correction,
        k_a,
        k_b,
        replicates,
        bisbm,
        sbm,
    })
}

/// Degree-heterogeneous planted instance sized like a small empirical
/// bipartite network (297 + 806 vertices, about 3000 edges, 3 + 3 groups).
pub fn perf_instance() -> Result<PlantedInstance> {
    let sizes = vec![99, 99, 99, 268, 269, 269];
    let (w_in, w_out) = (700.0, 150.0);
    let mut rows = vec![vec![0.0; 6]; 6];
    for r in 0..3 {
        for s in 0..3 {
            let w = if r == s { w_in } else { w_out };
            rows[r][3 + s] = w;
            rows[3 + s][r] = w;
        }
    }
    let omega = BlockAffinity::bipartite(3, 3, rows, Correction::DegreeCorrected)?;
    let theta = split_propensities(&sizes, 4.0);
    PlantedInstance::new(
        Correction::DegreeCorrected,
        3,
        3,
        sizes,
        omega,
        Some(DegreePropensity { theta }),
        "perf".into(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityMode {
    Hold,
    Descend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub mode: StabilityMode,
    pub model: String,
    pub initial_score: f64,
    pub final_score: f64,
    /// `hold` only.
    pub is_local_optimum: Option<bool>,
    /// `descend` only: NMI between the start and the end of the search.
    pub final_nmi: Option<f64>,
    pub trajectory: Vec<f64>,
}

/// Checks whether `p_init` is a local optimum (`hold`) or where the search
/// started from it ends up (`descend`).
pub fn run_stability_check<G: Network + ?Sized>(
    g: &G,
    p_init: &Partition,
    model: ModelSpec,
    mode: StabilityMode,
) -> Result<StabilityRecord> {
    let initial_score = log_likelihood(g, p_init, model)?;
    match mode {
        StabilityMode::Hold => Ok(StabilityRecord {
            mode,
            model: model.to_string(),
            initial_score,
            final_score: initial_score,
            is_local_optimum: Some(is_local_optimum(g, p_init, model)?),
            final_nmi: None,
            trajectory: vec![initial_score],
        }),
        StabilityMode::Descend => {
            let out = kl_search(g, model, p_init)?;
            Ok(StabilityRecord {
                mode,
                model: model.to_string(),
                initial_score,
                final_score: out.score,
                is_local_optimum: None,
                final_nmi: Some(nmi(&out.partition, p_init)?),
                trajectory: out.trajectory,
            })
        }
    }
}

/// Sizes of the parity ring: 8 clumps, clump `c` is `K_{c+2, c+2}`. Unequal
/// clumps remove the ring's rotational symmetry, so each even K has a unique
/// best partition.
pub fn default_clump_sizes() -> Vec<(usize, usize)> {
    (0..8).map(|c| (c + 2, c + 2)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClumpSpec {
    pub sizes: Vec<(usize, usize)>,
    pub restarts: usize,
    pub seed: u64,
    pub corrections: Vec<Correction>,
}

impl Default for ClumpSpec {
    fn default() -> Self {
        ClumpSpec {
            sizes: default_clump_sizes(),
            restarts: 50,
            seed: 0,
            corrections: vec![Correction::Uncorrected, Correction::DegreeCorrected],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClumpParityRow {
    pub k: usize,
    pub correction: Correction,
    pub k_a: usize,
    pub k_b: usize,
    /// Both scores under the unipartite objective.
    pub bisbm_score: f64,
    pub sbm_score: f64,
    pub nmi: f64,
    pub sbm_pure_type: bool,
}

/// Fits the biSBM (`K_a = ceil(K/2)`, `K_b = floor(K/2)`) and the SBM with `K`
/// groups to the clump ring for every K.
pub fn run_clump_parity(ks: &[usize], spec: &ClumpSpec) -> Result<Vec<ClumpParityRow>> {
    let (g, _) = make_clump_ring_sized(&spec.sizes)?;
    let mut rows = Vec::new();
    for &correction in &spec.corrections {
        for &k in ks {
            if k < 2 {
                return Err(Error::invalid("K must be at least 2"));
            }
            let (k_a, k_b) = (k.div_ceil(2), k / 2);
            let uni = ModelSpec::unipartite(correction);
            let seed = derive_seed(&[spec.seed, k as u64]);
            let bi = kl_fit(&g, ModelSpec::bipartite(correction), k_a, k_b, spec.restarts, seed)?;
            let un = kl_fit(&g, uni, k - 1, 1, spec.restarts, derive_seed(&[seed, 1]))?;
            rows.push(ClumpParityRow {
                k,
                correction,
                k_a,
                k_b,
                bisbm_score: log_likelihood(&g, &bi.best_partition, uni)?,
                sbm_score: un.best_score,
                nmi: nmi(&bi.best_partition, &un.best_partition)?,
                sbm_pure_type: un.best_partition.is_pure_type(g.types()),
            });
        }
    }
    Ok(rows)
}

/// Two-by-two assortative instance whose degrees vary more than its blocks:
/// half of every group has six times the propensity of the other half.
pub fn degree_sorting_instance() -> Result<PlantedInstance> {
    let sizes = vec![200; 4];
    let (w_in, w_out) = (8000.0, 1000.0);
    let rows = vec![
        vec![0.0, 0.0, w_in, w_out],
        vec![0.0, 0.0, w_out, w_in],
        vec![w_in, w_out, 0.0, 0.0],
        vec![w_out, w_in, 0.0, 0.0],
    ];
    let omega = BlockAffinity::bipartite(2, 2, rows, Correction::DegreeCorrected)?;
    let theta = split_propensities(&sizes, 6.0);
    PlantedInstance::new(
        Correction::DegreeCorrected,
        2,
        2,
        sizes,
        omega,
        Some(DegreePropensity { theta }),
        "degree-sorting".into(),
    )
}

/// Splits each vertex type at its median degree: labels 0/1 for type a
/// (low/high), 2/3 for type b.
pub fn degree_bisection(g: &BipartiteGraph) -> Vec<usize> {
    let mut labels = vec![0; g.num_vertices()];
    for (side, base) in [(VertexType::A, 0), (VertexType::B, 2)] {
        let vs = g.side_vertices(side);
        let d: Vec<f64> = vs.iter().map(|&v| g.degree(v) as f64).collect();
        let med = quantile(&d, 0.5);
        for &v in &vs {
            labels[v] = base + usize::from(g.degree(v) as f64 > med);
        }
    }
    labels
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeSortingRecord {
    pub seed: u64,
    pub uncorrected_vs_degree: f64,
    pub uncorrected_vs_planted: f64,
    pub corrected_vs_planted: f64,
}

/// Fits both biSBM variants to one sample of `inst` at noise level `lambda`
/// and compares them with the planted partition and the degree bisection.
pub fn run_degree_sorting_check(
    inst: &PlantedInstance,
    lambda: f64,
    restarts: usize,
    seed: u64,
) -> Result<DegreeSortingRecord> {
    let noisy = inst.with_omega(interpolate_noise(inst, lambda)?)?;
    let g = sample_network(&noisy, seed)?;
    let planted = inst.partition();
    let by_degree = degree_bisection(&g);
    let fit = |c: Correction, i: u64| kl_fit(&g, ModelSpec::bipartite(c), inst.k_a, inst.k_b, restarts, derive_seed(&[seed, i]));
    let u = fit(Correction::Uncorrected, 1)?;
    let d = fit(Correction::DegreeCorrected, 2)?;
    Ok(DegreeSortingRecord {
        seed,
        uncorrected_vs_degree: nmi_labels(u.best_partition.assignment(), &by_degree)?,
        uncorrected_vs_planted: nmi(&u.best_partition, &planted)?,
        corrected_vs_planted: nmi(&d.best_partition, &planted)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::{make_easy_case, EasyCaseParams};

    fn small_config() -> SweepConfig {
        SweepConfig {
            instance: make_easy_case(&EasyCaseParams::with_mean_degree(80, 8.0)).unwrap(),
            lambdas: vec![0.0, 1.0],
            replicates_per_lambda: 3,
            methods: vec![
                MethodSpec::new("bisbm", MethodKind::Bisbm, true, InputKind::Bipartite),
                MethodSpec::new("sbm-w", MethodKind::Sbm, true, InputKind::WeightedProjection),
                MethodSpec::new("cnm", MethodKind::Modularity, true, InputKind::WeightedProjection),
                MethodSpec::new("sbm-bip", MethodKind::Sbm, false, InputKind::Bipartite),
            ],
            restarts: 2,
            side: VertexType::A,
            base_seed: 9,
        }
    }

    #[test]
    fn sweep_shape_and_ordering() {
        let c = small_config();
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.records.len(), 4 * 2 * 3);
        assert_eq!(r.points.len(), 4 * 2);
        for p in &r.points {
            assert!(p.nmi_q10 <= p.nmi_median && p.nmi_median <= p.nmi_q90);
        }
        assert_eq!(r.point("bisbm", 1.0).unwrap().nmi_median, 1.0);
        let again = replay(&c, "cnm", 1, 2).unwrap();
        let orig = r
            .records
            .iter()
            .find(|x| x.method == "cnm" && x.lambda == 1.0 && x.replicate == 2)
            .unwrap();
        assert_eq!(again.nmi, orig.nmi);
        assert_eq!(again.score, orig.score);
        assert_eq!(again.seed, orig.seed);
    }

    #[test]
    fn csv_headers() {
        let mut c = small_config();
        c.lambdas = vec![1.0];
        c.replicates_per_lambda = 1;
        let r = run_sweep(&c).unwrap();
        let mut raw = Vec::new();
        r.write_raw_csv(&mut raw).unwrap();
        let raw = String::from_utf8(raw).unwrap();
        assert!(raw.starts_with("method,lambda,replicate,seed,nmi,score,seconds,pure_type\n"));
        let mut agg = Vec::new();
        r.write_aggregate_csv(&mut agg).unwrap();
        let agg = String::from_utf8(agg).unwrap();
        assert!(agg.starts_with("method,lambda,nmi_q10,nmi_median,nmi_q90\n"));
        assert_eq!(agg.lines().count(), 1 + 4);
    }

    #[test]
    fn config_validation() {
        let mut c = small_config();
        c.methods.push(MethodSpec::new("bad", MethodKind::Bisbm, true, InputKind::WeightedProjection));
        assert!(run_sweep(&c).is_err());
        let mut c = small_config();
        c.lambdas = vec![1.5];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.methods.push(c.methods[0].clone());
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let inst = serde_json::to_value(make_easy_case(&EasyCaseParams::with_mean_degree(40, 4.0)).unwrap()).unwrap();
        let doc = serde_json::json!({
            "instance": inst,
            "methods": [{"name": "b", "kind": "bisbm", "input": "bipartite"}],
            "side": "a"
        });
        let c: SweepConfig = serde_json::from_value(doc).unwrap();
        assert_eq!(c.lambdas.len(), 21);
        assert_eq!(c.replicates_per_lambda, 100);
        assert!(c.methods[0].dc);
    }

    #[test]
    fn perf_lists_have_replicate_length() {
        let inst = make_easy_case(&EasyCaseParams::with_mean_degree(40, 6.0)).unwrap();
        let g = sample_network(&inst, 1).unwrap();
        let r = run_perf_comparison(&g, 2, 2, 3, 5, Correction::DegreeCorrected).unwrap();
        for m in [&r.bisbm, &r.sbm] {
            assert_eq!(m.scores.len(), 3);
            assert_eq!(m.seconds.len(), 3);
            assert_eq!(m.pure_type.len(), 3);
        }
        assert_eq!(r.bisbm.pure_type_fraction(), 1.0);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn perf_instance_size() {
        let inst = perf_instance().unwrap();
        assert_eq!(inst.n_a(), 297);
        assert_eq!(inst.n_b(), 806);
        assert!((inst.expected_edges() - 3000.0).abs() < 1e-9);
    }

    #[test]
    fn stability_modes() {
        let inst = make_easy_case(&EasyCaseParams::with_mean_degree(80, 8.0)).unwrap();
        let g = sample_network(&inst, 2).unwrap();
        let p = inst.partition();
        let model = ModelSpec::bipartite(Correction::DegreeCorrected);
        let hold = run_stability_check(&g, &p, model, StabilityMode::Hold).unwrap();
        assert_eq!(hold.is_local_optimum, Some(true));
        let d = run_stability_check(&g, &p, model, StabilityMode::Descend).unwrap();
        assert_eq!(d.final_nmi, Some(1.0));
        assert_eq!(d.final_score, d.initial_score);
    }

    #[test]
    fn degree_bisection_splits_each_side() {
        let inst = degree_sorting_instance().unwrap();
        let g = sample_network(&inst, 1).unwrap();
        let b = degree_bisection(&g);
        for l in 0..4 {
            let c = b.iter().filter(|x| **x == l).count();
            assert!((150..=250).contains(&c), "label {l}: {c}");
        }
    }
}
