//! Poisson sampling from the bipartite block model and the synthetic
//! benchmark instances (easy case, hard case, clump ring).

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition, VertexType};
use crate::io::types_from_split;

/// The seedable generator used everywhere in this crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes several integers into one well-spread seed (splitmix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    Uncorrected,
    DegreeCorrected,
}

impl Correction {
    pub fn from_flag(dc: bool) -> Self {
        if dc {
            Correction::DegreeCorrected
        } else {
            Correction::Uncorrected
        }
    }

    pub fn is_corrected(self) -> bool {
        self == Correction::DegreeCorrected
    }
}

/// Symmetric group-affinity matrix.
///
/// Uncorrected: expected multiplicity of each vertex pair between the groups.
/// Degree-corrected: expected number of edges between the groups.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockAffinity {
    k: usize,
    matrix: Vec<f64>,
    group_types: Option<Vec<VertexType>>,
    mode: Correction,
}

impl BlockAffinity {
    /// Bipartite affinity over `k_a` type-a groups followed by `k_b` type-b groups.
    pub fn bipartite(k_a: usize, k_b: usize, rows: Vec<Vec<f64>>, mode: Correction) -> Result<Self> {
        let mut gt = vec![VertexType::A; k_a];
        gt.extend(std::iter::repeat_n(VertexType::B, k_b));
        Self::build(rows, Some(gt), mode)
    }

    pub fn unipartite(rows: Vec<Vec<f64>>, mode: Correction) -> Result<Self> {
        Self::build(rows, None, mode)
    }

    fn build(rows: Vec<Vec<f64>>, group_types: Option<Vec<VertexType>>, mode: Correction) -> Result<Self> {
        let k = rows.len();
        if let Some(gt) = &group_types {
            if gt.len() != k {
                return Err(Error::LengthMismatch {
                    expected: gt.len(),
                    found: k,
                });
            }
        }
        let mut matrix = Vec::with_capacity(k * k);
        for row in &rows {
            if row.len() != k {
                return Err(Error::invalid("affinity matrix must be square"));
            }
            matrix.extend_from_slice(row);
        }
        for r in 0..k {
            for s in 0..k {
                let x = matrix[r * k + s];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::invalid(format!("affinity[{r}][{s}] = {x} is not a nonnegative number")));
                }
                if (x - matrix[s * k + r]).abs() > 1e-12 * x.abs().max(1.0) {
                    return Err(Error::invalid("affinity matrix must be symmetric"));
                }
                if let Some(gt) = &group_types {
                    if gt[r] == gt[s] && x != 0.0 {
                        return Err(Error::invalid(format!(
                            "affinity[{r}][{s}] joins two groups of type {}",
                            gt[r]
                        )));
                    }
                }
            }
        }
        Ok(BlockAffinity {
            k,
            matrix,
            group_types,
            mode,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.k
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.matrix[r * self.k + s]
    }

    pub fn mode(&self) -> Correction {
        self.mode
    }

    pub fn group_types(&self) -> Option<&[VertexType]> {
        self.group_types.as_deref()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.k).map(|c| c.to_vec()).collect()
    }
}

/// Per-vertex degree propensities, normalized to sum to one within each group.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreePropensity {
    pub theta: Vec<f64>,
}

impl DegreePropensity {
    /// Largest deviation of a per-group sum from one.
    pub fn normalization_error(&self, p: &Partition) -> f64 {
        let mut sums = vec![0.0; p.num_groups()];
        let mut present = vec![false; p.num_groups()];
        for (v, &t) in self.theta.iter().enumerate() {
            sums[p.group_of(v)] += t;
            present[p.group_of(v)] = true;
        }
        sums.iter()
            .zip(&present)
            .filter(|(_, p)| **p)
            .map(|(s, _)| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// A planted bipartite block structure. Vertices are laid out group by group:
/// type-a groups first (ids `0..N_a`), then type-b groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct PlantedInstance {
    pub mode: Correction,
    pub k_a: usize,
    pub k_b: usize,
    pub sizes: Vec<usize>,
    pub omega: BlockAffinity,
    pub theta: Option<DegreePropensity>,
    pub label: String,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    mode: Correction,
    #[serde(rename = "K_a")]
    k_a: usize,
    #[serde(rename = "K_b")]
    k_b: usize,
    sizes: Vec<usize>,
    omega: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<Vec<f64>>,
    #[serde(default)]
    label: String,
}

impl TryFrom<InstanceDoc> for PlantedInstance {
    type Error = Error;

    fn try_from(d: InstanceDoc) -> Result<Self> {
        let omega = BlockAffinity::bipartite(d.k_a, d.k_b, d.omega, d.mode)?;
        PlantedInstance::new(
            d.mode,
            d.k_a,
            d.k_b,
            d.sizes,
            omega,
            d.theta.map(|theta| DegreePropensity { theta }),
            d.label,
        )
    }
}

impl From<PlantedInstance> for InstanceDoc {
    fn from(p: PlantedInstance) -> Self {
        InstanceDoc {
            mode: p.mode,
            k_a: p.k_a,
            k_b: p.k_b,
            sizes: p.sizes,
            omega: p.omega.rows(),
            theta: p.theta.map(|t| t.theta),
            label: p.label,
        }
    }
}

impl PlantedInstance {
    pub fn new(
        mode: Correction,
        k_a: usize,
        k_b: usize,
        sizes: Vec<usize>,
        omega: BlockAffinity,
        theta: Option<DegreePropensity>,
        label: String,
    ) -> Result<Self> {
        if k_a == 0 || k_b == 0 {
            return Err(Error::invalid("K_a and K_b must both be at least 1"));
        }
        if sizes.len() != k_a + k_b {
            return Err(Error::LengthMismatch {
                expected: k_a + k_b,
                found: sizes.len(),
            });
        }
        if omega.num_groups() != k_a + k_b {
            return Err(Error::invalid("omega dimension does not match group counts"));
        }
        if omega.mode() != mode {
            return Err(Error::invalid("omega mode does not match instance mode"));
        }
        let inst = PlantedInstance {
            mode,
            k_a,
            k_b,
            sizes,
            omega,
            theta,
            label,
        };
        let n: usize = inst.sizes.iter().sum();
        match (&inst.theta, mode) {
            (Some(t), _) => {
                if t.theta.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: t.theta.len(),
                    });
                }
                if t.theta.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::invalid("theta entries must be nonnegative"));
                }
                if t.normalization_error(&inst.partition()) > 1e-9 {
                    return Err(Error::invalid("theta must sum to 1 within every group"));
                }
            }
            (None, Correction::DegreeCorrected) => {
                return Err(Error::invalid("a degree-corrected instance needs theta"));
            }
            (None, Correction::Uncorrected) => {}
        }
        Ok(inst)
    }

    pub fn num_groups(&self) -> usize {
        self.k_a + self.k_b
    }

    pub fn num_vertices(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn n_a(&self) -> usize {
        self.sizes[..self.k_a].iter().sum()
    }

    pub fn n_b(&self) -> usize {
        self.sizes[self.k_a..].iter().sum()
    }

    pub fn vertex_types(&self) -> Vec<VertexType> {
        types_from_split(self.n_a(), self.n_b())
    }

    /// The planted group assignment.
    pub fn partition(&self) -> Partition {
        let assignment = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect();
        Partition::typed(assignment, self.k_a, self.k_b).unwrap()
    }

    /// Same planted partition and theta, different affinity matrix.
    pub fn with_omega(&self, omega: BlockAffinity) -> Result<Self> {
        PlantedInstance::new(
            self.mode,
            self.k_a,
            self.k_b,
            self.sizes.clone(),
            omega,
            self.theta.clone(),
            self.label.clone(),
        )
    }

    /// Expected number of edges between groups `r` and `s` (`r != s`).
    pub fn expected_block_edges(&self, r: usize, s: usize) -> f64 {
        let w = self.omega.get(r, s);
        match self.mode {
            Correction::Uncorrected => self.sizes[r] as f64 * self.sizes[s] as f64 * w,
            Correction::DegreeCorrected => w,
        }
    }

    pub fn expected_edges(&self) -> f64 {
        (0..self.k_a)
            .flat_map(|r| (self.k_a..self.num_groups()).map(move |s| (r, s)))
            .map(|(r, s)| self.expected_block_edges(r, s))
            .sum()
    }

    /// Expected total degree of every group.
    pub fn expected_group_degrees(&self) -> Vec<f64> {
        let k = self.num_groups();
        (0..k)
            .map(|r| (0..k).filter(|&s| s != r).map(|s| self.expected_block_edges(r, s)).sum())
            .collect()
    }

    /// Expected degree of every vertex.
    pub fn expected_degrees(&self) -> Vec<f64> {
        let kappa = self.expected_group_degrees();
        let p = self.partition();
        (0..self.num_vertices())
            .map(|v| {
                let g = p.group_of(v);
                match &self.theta {
                    Some(t) if self.mode.is_corrected() => t.theta[v] * kappa[g],
                    _ => kappa[g] / self.sizes[g] as f64,
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMethod {
    /// One Poisson draw per cross-type vertex pair.
    PerPair,
    /// One Poisson draw per block pair, endpoints placed independently.
    GroupTotals,
}

/// Vertex count up to which [`sample_network`] draws every pair individually.
pub const PER_PAIR_LIMIT: usize = 20_000;

/// Draws a multigraph from the instance. Deterministic for a fixed seed.
pub fn sample_network(inst: &PlantedInstance, seed: u64) -> Result<BipartiteGraph> {
    let method = if inst.num_vertices() <= PER_PAIR_LIMIT {
        SamplingMethod::PerPair
    } else {
        SamplingMethod::GroupTotals
    };
    sample_network_with(inst, seed, method)
}

pub fn sample_network_with(inst: &PlantedInstance, seed: u64, method: SamplingMethod) -> Result<BipartiteGraph> {
    let mut rng = rng_from_seed(seed);
    let k = inst.num_groups();
    let mut starts = vec![0usize; k + 1];
    for g in 0..k {
        starts[g + 1] = starts[g] + inst.sizes[g];
    }
    let theta = match (&inst.theta, inst.mode) {
        (Some(t), Correction::DegreeCorrected) => Some(&t.theta),
        _ => None,
    };
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    for r in 0..inst.k_a {
        for s in inst.k_a..k {
            let w = inst.omega.get(r, s);
            if w == 0.0 || inst.sizes[r] == 0 || inst.sizes[s] == 0 {
                continue;
            }
            let (ra, sb) = (starts[r]..starts[r + 1], starts[s]..starts[s + 1]);
            match method {
                SamplingMethod::PerPair => match theta {
                    None => {
                        let dist = poisson(w)?;
                        for i in ra.clone() {
                            for j in sb.clone() {
                                let x = dist.sample(&mut rng) as u64;
                                if x > 0 {
                                    edges.push((i, j, x));
                                }
                            }
                        }
                    }
                    Some(t) => {
                        for i in ra.clone() {
                            for j in sb.clone() {
                                let mean = t[i] * t[j] * w;
                                if mean <= 0.0 {
                                    continue;
                                }
                                let x = poisson(mean)?.sample(&mut rng) as u64;
                                if x > 0 {
                                    edges.push((i, j, x));
                                }
                            }
                        }
                    }
                },
                SamplingMethod::GroupTotals => {
                    let total = poisson(inst.expected_block_edges(r, s))?.sample(&mut rng) as u64;
                    if total == 0 {
                        continue;
                    }
                    let pick_r = EndpointSampler::new(ra, theta)?;
                    let pick_s = EndpointSampler::new(sb, theta)?;
                    for _ in 0..total {
                        let i = pick_r.sample(&mut rng);
                        let j = pick_s.sample(&mut rng);
                        edges.push((i, j, 1));
                    }
                }
            }
        }
    }
    BipartiteGraph::from_edges(inst.vertex_types(), edges)
}

fn poisson(mean: f64) -> Result<Poisson<f64>> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::invalid(format!("Poisson mean {mean} is not a finite nonnegative number")));
    }
    Poisson::new(mean.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))
}

enum EndpointSampler {
    Uniform(usize, Uniform<usize>),
    Weighted(usize, WeightedIndex<f64>),
}

impl EndpointSampler {
    fn new(range: std::ops::Range<usize>, theta: Option<&Vec<f64>>) -> Result<Self> {
        let start = range.start;
        Ok(match theta {
            None => EndpointSampler::Uniform(
                start,
                Uniform::new(0, range.len()).map_err(|e| Error::invalid(e.to_string()))?,
            ),
            Some(t) => EndpointSampler::Weighted(
                start,
                WeightedIndex::new(&t[range]).map_err(|e| Error::invalid(e.to_string()))?,
            ),
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            EndpointSampler::Uniform(s, d) => s + d.sample(rng),
            EndpointSampler::Weighted(s, d) => s + d.sample(rng),
        }
    }
}

/// Structureless affinity with the instance's expected edge count (and, when
/// degree-corrected, its expected degrees), nonzero on cross-type pairs only.
pub fn random_affinity(inst: &PlantedInstance) -> BlockAffinity {
    let k = inst.num_groups();
    let m = inst.expected_edges();
    let mut rows = vec![vec![0.0; k]; k];
    match inst.mode {
        Correction::Uncorrected => {
            let rate = if m > 0.0 {
                m / (inst.n_a() as f64 * inst.n_b() as f64)
            } else {
                0.0
            };
            for r in 0..inst.k_a {
                for s in inst.k_a..k {
                    rows[r][s] = rate;
                    rows[s][r] = rate;
                }
            }
        }
        Correction::DegreeCorrected => {
            let kappa = inst.expected_group_degrees();
            for r in 0..inst.k_a {
                for s in inst.k_a..k {
                    let w = if m > 0.0 { kappa[r] * kappa[s] / m } else { 0.0 };
                    rows[r][s] = w;
                    rows[s][r] = w;
                }
            }
        }
    }
    BlockAffinity::bipartite(inst.k_a, inst.k_b, rows, inst.mode).expect("valid by construction")
}

/// `lambda * planted + (1 - lambda) * random`.
pub fn interpolate_noise(inst: &PlantedInstance, lambda: f64) -> Result<BlockAffinity> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda = {lambda} outside [0, 1]")));
    }
    let random = random_affinity(inst);
    let k = inst.num_groups();
    let rows = (0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let planted = inst.omega.get(r, s);
                    if lambda == 1.0 {
                        planted
                    } else {
                        lambda * planted + (1.0 - lambda) * random.get(r, s)
                    }
                })
                .collect()
        })
        .collect();
    BlockAffinity::bipartite(inst.k_a, inst.k_b, rows, inst.mode)
}

/// Parameters of the four-component benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EasyCaseParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub n_per_side: usize,
}

impl EasyCaseParams {
    /// Equal couplings giving mean degree `mean_degree`.
    pub fn with_mean_degree(n_per_side: usize, mean_degree: f64) -> Self {
        let c = mean_degree / (n_per_side as f64 / 4.0);
        EasyCaseParams {
            alpha: c,
            beta: c,
            gamma: c,
            delta: c,
            n_per_side,
        }
    }
}

impl Default for EasyCaseParams {
    fn default() -> Self {
        Self::with_mean_degree(1000, 10.0)
    }
}

pub fn make_easy_case(p: &EasyCaseParams) -> Result<PlantedInstance> {
    let couplings = [p.alpha, p.beta, p.gamma, p.delta];
    if couplings.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return Err(Error::invalid("couplings must be positive"));
    }
    if p.n_per_side == 0 || !p.n_per_side.is_multiple_of(4) {
        return Err(Error::invalid(format!(
            "n_per_side = {} is not a positive multiple of 4",
            p.n_per_side
        )));
    }
    let mut rows = vec![vec![0.0; 8]; 8];
    for (r, c) in couplings.iter().enumerate() {
        rows[r][4 + r] = *c;
        rows[4 + r][r] = *c;
    }
    let omega = BlockAffinity::bipartite(4, 4, rows, Correction::Uncorrected)?;
    PlantedInstance::new(
        Correction::Uncorrected,
        4,
        4,
        vec![p.n_per_side / 4; 8],
        omega,
        None,
        "easy".into(),
    )
}

/// Parameters of the overlapping, degree-heterogeneous benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCaseParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub sizes_a: Vec<usize>,
    pub sizes_b: Vec<usize>,
    pub degree_factor: f64,
}

impl HardCaseParams {
    /// `epsilon / gamma = ratio`, total expected edges giving mean degree `mean_degree`.
    pub fn with_mean_degree(sizes_a: Vec<usize>, sizes_b: Vec<usize>, mean_degree: f64, ratio: f64) -> Self {
        let n: usize = sizes_a.iter().sum::<usize>() + sizes_b.iter().sum::<usize>();
        let m = mean_degree * n as f64 / 2.0;
        // m = 2 epsilon + 2 gamma
        let gamma = m / (2.0 * (ratio + 1.0));
        HardCaseParams {
            epsilon: ratio * gamma,
            gamma,
            sizes_a,
            sizes_b,
            degree_factor: 2.0,
        }
    }
}

impl Default for HardCaseParams {
    fn default() -> Self {
        Self::with_mean_degree(vec![100, 150, 50], vec![350, 350], 220.0, 0.35)
    }
}

/// Within each group the first half of the vertices get propensity `x`, the
/// rest `factor * x`, with `x` fixed by the per-group normalization.
pub fn split_propensities(sizes: &[usize], factor: f64) -> Vec<f64> {
    let mut theta = Vec::with_capacity(sizes.iter().sum());
    for &n in sizes {
        let low = n / 2;
        let high = n - low;
        let x = 1.0 / (low as f64 + factor * high as f64);
        theta.extend(std::iter::repeat_n(x, low));
        theta.extend(std::iter::repeat_n(factor * x, high));
    }
    theta
}

pub fn make_hard_case(p: &HardCaseParams) -> Result<PlantedInstance> {
    if !(p.epsilon > 0.0 && p.gamma > 0.0 && p.degree_factor > 0.0) {
        return Err(Error::invalid("epsilon, gamma and degree_factor must be positive"));
    }
    if p.sizes_a.len() != 3 || p.sizes_b.len() != 2 {
        return Err(Error::invalid("the hard case has three type-a and two type-b groups"));
    }
    if p.sizes_a.iter().chain(&p.sizes_b).any(|&n| n == 0) {
        return Err(Error::invalid("group sizes must be positive"));
    }
    let (e, g) = (p.epsilon, p.gamma);
    let rows = vec![
        vec![0.0, 0.0, 0.0, e, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, e],
        vec![0.0, 0.0, 0.0, g, g],
        vec![e, 0.0, g, 0.0, 0.0],
        vec![0.0, e, g, 0.0, 0.0],
    ];
    let omega = BlockAffinity::bipartite(3, 2, rows, Correction::DegreeCorrected)?;
    let sizes: Vec<usize> = p.sizes_a.iter().chain(&p.sizes_b).copied().collect();
    let theta = split_propensities(&sizes, p.degree_factor);
    PlantedInstance::new(
        Correction::DegreeCorrected,
        3,
        2,
        sizes,
        omega,
        Some(DegreePropensity { theta }),
        "hard".into(),
    )
}

/// Ring of complete bipartite clumps of equal size. See [`make_clump_ring_sized`].
pub fn make_clump_ring(num_clumps: usize, clump_a: usize, clump_b: usize) -> Result<(BipartiteGraph, Partition)> {
    make_clump_ring_sized(&vec![(clump_a, clump_b); num_clumps])
}

/// Ring of complete bipartite clumps; clump `c` is `K_{sizes[c].0, sizes[c].1}`.
///
/// Type-a vertices come first, clump by clump, then the type-b vertices in the
/// same clump order. The first type-a vertex of clump `c` is joined to the
/// first type-b vertex of clump `c + 1 (mod num_clumps)`. Returns the graph
/// and the (mixed-type) one-group-per-clump partition.
pub fn make_clump_ring_sized(sizes: &[(usize, usize)]) -> Result<(BipartiteGraph, Partition)> {
    let num_clumps = sizes.len();
    if num_clumps < 3 || sizes.iter().any(|&(a, b)| a == 0 || b == 0) {
        return Err(Error::invalid("need at least 3 clumps of positive size"));
    }
    let mut a_start = Vec::with_capacity(num_clumps);
    let mut n_a = 0;
    for &(a, _) in sizes {
        a_start.push(n_a);
        n_a += a;
    }
    let mut b_start = Vec::with_capacity(num_clumps);
    let mut n = n_a;
    for &(_, b) in sizes {
        b_start.push(n);
        n += b;
    }
    let types = types_from_split(n_a, n - n_a);
    let mut edges = Vec::new();
    for (c, &(a, b)) in sizes.iter().enumerate() {
        for i in 0..a {
            for j in 0..b {
                edges.push((a_start[c] + i, b_start[c] + j, 1));
            }
        }
        edges.push((a_start[c], b_start[(c + 1) % num_clumps], 1));
    }
    let g = BipartiteGraph::from_edges(types, edges)?;
    let mut assignment: Vec<usize> = Vec::with_capacity(n);
    for (c, &(a, _)) in sizes.iter().enumerate() {
        assignment.extend(std::iter::repeat_n(c, a));
    }
    for (c, &(_, b)) in sizes.iter().enumerate() {
        assignment.extend(std::iter::repeat_n(c, b));
    }
    Ok((g, Partition::untyped(assignment, num_clumps)?))
}
