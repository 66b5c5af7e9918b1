use std::ops::Range;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_partition, objective_from_stats, LnTable, ModelSpec};
use crate::error::{Error, Result};
use crate::genmodel::{derive_seed, rng_from_seed};
use crate::graph::{BlockStats, Network, Partition, VertexType};

/// A sweep must raise the objective by more than this fraction of its
/// magnitude to count as an improvement; smaller gains are rounding noise
/// from accumulating move deltas on plateaus.
const SWEEP_TOLERANCE: f64 = 1e-10;

/// Largest delta still treated as "no improving move" by [`is_local_optimum`].
const LOCAL_OPTIMUM_TOLERANCE: f64 = 1e-12;

/// Partition plus incrementally maintained block statistics.
///
/// Besides `m_rs`, `n_r` and `κ_r` the state keeps, for every vertex, its edge
/// multiplicity into each group. With those, the change in the objective for
/// a single-vertex move touches only the two rows of `m` that change.
pub struct SearchState<'g, G: Network + ?Sized> {
    graph: &'g G,
    model: ModelSpec,
    k: usize,
    /// For bipartite models: groups `0..k_a` take type-a vertices.
    k_a: usize,
    side_b: Vec<bool>,
    assignment: Vec<usize>,
    group_types: Option<Vec<VertexType>>,
    m: Vec<i64>,
    size: Vec<i64>,
    kappa: Vec<i64>,
    to_group: Vec<i64>,
    degree: Vec<i64>,
    score: f64,
    table: Arc<LnTable>,
}

impl<'g, G: Network + ?Sized> SearchState<'g, G> {
    pub fn new(graph: &'g G, partition: &Partition, model: ModelSpec) -> Result<Self> {
        let table = Arc::new(LnTable::for_network(graph));
        Self::with_table(graph, partition, model, table)
    }

    pub(crate) fn with_table(
        graph: &'g G,
        partition: &Partition,
        model: ModelSpec,
        table: Arc<LnTable>,
    ) -> Result<Self> {
        check_partition(graph, partition, model)?;
        let n = graph.num_vertices();
        let k = partition.num_groups();
        let (k_a, side_b) = if model.is_bipartite() {
            let k_a = partition
                .k_a()
                .ok_or_else(|| Error::invalid("the bipartite search needs a typed partition"))?;
            let types = graph.vertex_types().expect("checked above");
            (k_a, types.iter().map(|t| *t == VertexType::B).collect())
        } else {
            (0, vec![false; n])
        };
        let adj = graph.adjacency();
        let degree: Vec<i64> = (0..n).map(|v| adj.degree(v) as i64).collect();
        let assignment = partition.assignment().to_vec();
        let mut state = SearchState {
            graph,
            model,
            k,
            k_a,
            side_b,
            group_types: partition.group_types().map(|t| t.to_vec()),
            m: vec![0; k * k],
            size: vec![0; k],
            kappa: vec![0; k],
            to_group: vec![0; n * k],
            degree,
            assignment,
            score: 0.0,
            table,
        };
        state.rebuild();
        Ok(state)
    }

    fn rebuild(&mut self) {
        let k = self.k;
        let adj = self.graph.adjacency();
        self.m.iter_mut().for_each(|x| *x = 0);
        self.size.iter_mut().for_each(|x| *x = 0);
        self.kappa.iter_mut().for_each(|x| *x = 0);
        self.to_group.iter_mut().for_each(|x| *x = 0);
        for v in 0..self.assignment.len() {
            let r = self.assignment[v];
            self.size[r] += 1;
            self.kappa[r] += self.degree[v];
            for (u, w) in adj.neighbors(v) {
                let s = self.assignment[u];
                self.m[r * k + s] += w as i64;
                self.to_group[v * k + s] += w as i64;
            }
        }
        self.score = self.exact_score();
    }

    /// Objective recomputed from the current block statistics.
    pub fn exact_score(&self) -> f64 {
        let t = &*self.table;
        let edge: f64 = self.m.iter().map(|&x| t.xlnx(x)).sum();
        let norm: f64 = (0..self.k)
            .map(|r| t.norm(self.model.correction, self.kappa[r], self.size[r]))
            .sum();
        edge - 2.0 * norm
    }

    /// Running objective value (updated by move deltas).
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn partition(&self) -> Partition {
        match &self.group_types {
            Some(gt) => {
                let k_a = gt.iter().filter(|t| **t == VertexType::A).count();
                Partition::typed(self.assignment.clone(), k_a, self.k - k_a).unwrap()
            }
            None => Partition::untyped(self.assignment.clone(), self.k).unwrap(),
        }
    }

    pub fn stats(&self) -> BlockStats {
        BlockStats {
            num_groups: self.k,
            edge_counts: self.m.iter().map(|&x| x as u64).collect(),
            group_sizes: self.size.iter().map(|&x| x as usize).collect(),
            group_degrees: self.kappa.iter().map(|&x| x as u64).collect(),
        }
    }

    /// Groups vertex `v` may belong to.
    pub fn allowed_groups(&self, v: usize) -> Range<usize> {
        if !self.model.is_bipartite() {
            0..self.k
        } else if self.side_b[v] {
            self.k_a..self.k
        } else {
            0..self.k_a
        }
    }

    /// Groups whose block rows enter a move of `v`.
    #[inline]
    fn partner_groups(&self, v: usize) -> Range<usize> {
        if !self.model.is_bipartite() {
            0..self.k
        } else if self.side_b[v] {
            0..self.k_a
        } else {
            self.k_a..self.k
        }
    }

    /// Objective change from taking `v` out of its group (bipartite models).
    #[inline]
    fn removal_gain(&self, v: usize) -> f64 {
        let k = self.k;
        let g = self.assignment[v];
        let t = &*self.table;
        let c = &self.to_group[v * k..(v + 1) * k];
        let mut acc = 0.0;
        for s in self.partner_groups(v) {
            let cs = c[s];
            if cs != 0 {
                let mg = self.m[g * k + s];
                acc += t.xlnx(mg - cs) - t.xlnx(mg);
            }
        }
        let corr = self.model.correction;
        let kv = self.degree[v];
        2.0 * acc
            - 2.0 * (t.norm(corr, self.kappa[g] - kv, self.size[g] - 1) - t.norm(corr, self.kappa[g], self.size[g]))
    }

    /// Objective change from adding `v` to group `u` (bipartite models).
    #[inline]
    fn insertion_gain(&self, v: usize, u: usize) -> f64 {
        let k = self.k;
        let t = &*self.table;
        let c = &self.to_group[v * k..(v + 1) * k];
        let mut acc = 0.0;
        for s in self.partner_groups(v) {
            let cs = c[s];
            if cs != 0 {
                let mu = self.m[u * k + s];
                acc += t.xlnx(mu + cs) - t.xlnx(mu);
            }
        }
        let corr = self.model.correction;
        let kv = self.degree[v];
        2.0 * acc
            - 2.0 * (t.norm(corr, self.kappa[u] + kv, self.size[u] + 1) - t.norm(corr, self.kappa[u], self.size[u]))
    }

    /// Objective change for a unipartite move of `v` from `g` to `u`.
    fn unipartite_delta(&self, v: usize, u: usize) -> f64 {
        let k = self.k;
        let g = self.assignment[v];
        let t = &*self.table;
        let c = &self.to_group[v * k..(v + 1) * k];
        let mut acc = 0.0;
        for s in 0..k {
            let cs = c[s];
            if cs == 0 || s == g || s == u {
                continue;
            }
            let mg = self.m[g * k + s];
            let mu = self.m[u * k + s];
            acc += t.xlnx(mg - cs) - t.xlnx(mg) + t.xlnx(mu + cs) - t.xlnx(mu);
        }
        let (cg, cu) = (c[g], c[u]);
        let (mgg, muu, mgu) = (self.m[g * k + g], self.m[u * k + u], self.m[g * k + u]);
        let diag = t.xlnx(mgg - 2 * cg) - t.xlnx(mgg) + t.xlnx(muu + 2 * cu) - t.xlnx(muu)
            + 2.0 * (t.xlnx(mgu + cg - cu) - t.xlnx(mgu));
        let corr = self.model.correction;
        let kv = self.degree[v];
        let norm = t.norm(corr, self.kappa[g] - kv, self.size[g] - 1) - t.norm(corr, self.kappa[g], self.size[g])
            + t.norm(corr, self.kappa[u] + kv, self.size[u] + 1)
            - t.norm(corr, self.kappa[u], self.size[u]);
        2.0 * acc + diag - 2.0 * norm
    }

    #[inline]
    fn raw_delta(&self, v: usize, u: usize) -> f64 {
        if self.model.is_bipartite() {
            self.removal_gain(v) + self.insertion_gain(v, u)
        } else {
            self.unipartite_delta(v, u)
        }
    }

    /// Exact change in the objective if `v` moved to `target`.
    pub fn delta(&self, v: usize, target: usize) -> Result<f64> {
        self.check_move(v, target)?;
        Ok(self.raw_delta(v, target))
    }

    fn check_move(&self, v: usize, target: usize) -> Result<()> {
        if v >= self.assignment.len() {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        if target >= self.k || !self.allowed_groups(v).contains(&target) {
            return Err(Error::TypeMismatch { vertex: v, group: target });
        }
        if self.assignment[v] == target {
            return Err(Error::AlreadyInGroup { vertex: v, group: target });
        }
        Ok(())
    }

    /// Best admissible move of `v`: highest delta, ties to the lowest group.
    #[inline]
    pub fn best_move(&self, v: usize) -> Option<(f64, usize)> {
        let g = self.assignment[v];
        let targets = self.allowed_groups(v);
        if targets.len() < 2 {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        if self.model.is_bipartite() {
            let removal = self.removal_gain(v);
            for u in targets {
                if u == g {
                    continue;
                }
                let d = removal + self.insertion_gain(v, u);
                if best.is_none_or(|b| d > b.0) {
                    best = Some((d, u));
                }
            }
        } else {
            for u in targets {
                if u == g {
                    continue;
                }
                let d = self.unipartite_delta(v, u);
                if best.is_none_or(|b| d > b.0) {
                    best = Some((d, u));
                }
            }
        }
        best
    }

    /// Moves `v` to `target` and returns the objective change.
    pub fn move_vertex(&mut self, v: usize, target: usize) -> Result<f64> {
        self.check_move(v, target)?;
        let d = self.raw_delta(v, target);
        self.apply(v, target);
        self.score += d;
        Ok(d)
    }

    /// Updates the statistics for a move; leaves `score` alone.
    fn apply(&mut self, v: usize, to: usize) {
        let k = self.k;
        let from = self.assignment[v];
        if from == to {
            return;
        }
        for s in 0..k {
            let cs = self.to_group[v * k + s];
            if cs == 0 || s == from || s == to {
                continue;
            }
            self.m[from * k + s] -= cs;
            self.m[s * k + from] -= cs;
            self.m[to * k + s] += cs;
            self.m[s * k + to] += cs;
        }
        let cg = self.to_group[v * k + from];
        let cu = self.to_group[v * k + to];
        self.m[from * k + from] -= 2 * cg;
        self.m[to * k + to] += 2 * cu;
        self.m[from * k + to] += cg - cu;
        self.m[to * k + from] += cg - cu;
        let kv = self.degree[v];
        self.kappa[from] -= kv;
        self.kappa[to] += kv;
        self.size[from] -= 1;
        self.size[to] += 1;
        for (u, w) in self.graph.adjacency().neighbors(v) {
            self.to_group[u * k + from] -= w as i64;
            self.to_group[u * k + to] += w as i64;
        }
        self.assignment[v] = to;
    }

    /// True when some group has no vertices.
    pub fn has_empty_group(&self) -> bool {
        self.size.contains(&0)
    }

    /// Recomputes everything from scratch and compares (test/debug helper).
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let p = self.partition();
        let fresh = SearchState::with_table(self.graph, &p, self.model, self.table.clone())
            .map_err(|e| e.to_string())?;
        if fresh.m != self.m || fresh.kappa != self.kappa || fresh.size != self.size || fresh.to_group != self.to_group {
            return Err("block statistics diverged from the partition".into());
        }
        let stats_score = objective_from_stats(&self.stats(), self.model.correction);
        if (stats_score - fresh.score).abs() > 1e-9 * stats_score.abs().max(1.0) {
            return Err("table and direct objective disagree".into());
        }
        Ok(())
    }
}

/// Result of one search run from a given starting partition.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub partition: Partition,
    pub score: f64,
    /// Objective at the start and after every sweep.
    pub trajectory: Vec<f64>,
    pub sweeps: usize,
    /// Number of single-vertex moves made, including those later undone.
    pub moves: usize,
    pub has_empty_group: bool,
}

/// Kernighan–Lin style local search started from `init`.
///
/// In each sweep the best admissible single-vertex move among the vertices
/// not yet moved is applied, even when it lowers the objective, until every
/// vertex has moved once. The sweep then rewinds to the best state it passed
/// through. Search stops after a sweep that does not improve the objective.
pub fn kl_search<G: Network + ?Sized>(graph: &G, model: ModelSpec, init: &Partition) -> Result<SearchOutcome> {
    let table = Arc::new(LnTable::for_network(graph));
    let mut state = SearchState::with_table(graph, init, model, table)?;
    Ok(run_sweeps(&mut state))
}

fn run_sweeps<G: Network + ?Sized>(state: &mut SearchState<'_, G>) -> SearchOutcome {
    let n = state.assignment.len();
    let movable: Vec<usize> = (0..n).filter(|&v| state.allowed_groups(v).len() > 1).collect();
    let mut trajectory = vec![state.score];
    let mut moved = vec![false; n];
    let mut history: Vec<(usize, usize)> = Vec::with_capacity(movable.len());
    let mut sweeps = 0;
    let mut moves = 0;
    loop {
        sweeps += 1;
        let start = state.score;
        let mut best = start;
        let mut best_len = 0;
        moved.iter_mut().for_each(|x| *x = false);
        history.clear();
        loop {
            let mut choice: Option<(f64, usize, usize)> = None;
            for &v in &movable {
                if moved[v] {
                    continue;
                }
                if let Some((d, u)) = state.best_move(v) {
                    if choice.is_none_or(|c| d > c.0) {
                        choice = Some((d, v, u));
                    }
                }
            }
            let Some((d, v, u)) = choice else { break };
            history.push((v, state.assignment[v]));
            state.apply(v, u);
            state.score += d;
            moved[v] = true;
            moves += 1;
            if state.score > best {
                best = state.score;
                best_len = history.len();
            }
        }
        for &(v, from) in history[best_len..].iter().rev() {
            state.apply(v, from);
        }
        state.score = state.exact_score();
        debug_assert!(state.check_consistency().is_ok());
        trajectory.push(state.score);
        if best_len == 0 || state.score <= start + SWEEP_TOLERANCE * start.abs().max(1.0) {
            break;
        }
    }
    SearchOutcome {
        partition: state.partition(),
        score: state.score,
        trajectory,
        sweeps,
        moves,
        has_empty_group: state.has_empty_group(),
    }
}

/// Uniform random initial partition. Bipartite models draw type-a vertices
/// from groups `0..k_a` and type-b vertices from `k_a..k_a + k_b`; unipartite
/// models ignore types and draw from all `k_a + k_b` groups.
pub fn random_partition<G: Network + ?Sized, R: Rng>(
    graph: &G,
    model: ModelSpec,
    k_a: usize,
    k_b: usize,
    rng: &mut R,
) -> Result<Partition> {
    let n = graph.num_vertices();
    if model.is_bipartite() {
        let types = graph
            .vertex_types()
            .ok_or_else(|| Error::invalid("the bipartite model needs vertex types"))?;
        let assignment = types
            .iter()
            .map(|t| match t {
                VertexType::A => rng.random_range(0..k_a),
                VertexType::B => k_a + rng.random_range(0..k_b),
            })
            .collect();
        Partition::typed(assignment, k_a, k_b)
    } else {
        let k = k_a + k_b;
        Partition::untyped((0..n).map(|_| rng.random_range(0..k)).collect(), k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub seed: u64,
    pub score: f64,
    pub seconds: f64,
    pub pure_type: bool,
    pub empty_groups: bool,
}

/// Outcome of [`kl_fit`]: the best partition over all restarts plus one
/// record per restart.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub model: ModelSpec,
    pub k_a: usize,
    pub k_b: usize,
    pub best_partition: Partition,
    pub best_score: f64,
    pub replicates: Vec<ReplicateRecord>,
}

impl FitResult {
    pub fn replicate_scores(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.score).collect()
    }

    pub fn replicate_times(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.seconds).collect()
    }

    pub fn pure_type_flags(&self) -> Vec<bool> {
        self.replicates.iter().map(|r| r.pure_type).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.replicates.iter().map(|r| r.seed).collect()
    }
}

/// Runs `restarts` independent searches from random partitions and keeps the best.
///
/// Unipartite models use `k_a + k_b` groups. Restart `i` is seeded with
/// `derive_seed(&[seed, i])`; ties in score go to the lower restart index.
pub fn kl_fit<G: Network + ?Sized>(
    graph: &G,
    model: ModelSpec,
    k_a: usize,
    k_b: usize,
    restarts: usize,
    seed: u64,
) -> Result<FitResult> {
    if restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    if k_a == 0 || k_b == 0 {
        return Err(Error::invalid("K_a and K_b must both be at least 1"));
    }
    if graph.adjacency().total_weight() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = graph.num_vertices();
    if model.is_bipartite() {
        let types = graph
            .vertex_types()
            .ok_or_else(|| Error::invalid("the bipartite model needs vertex types"))?;
        let n_a = types.iter().filter(|t| **t == VertexType::A).count();
        if k_a > n_a || k_b > n - n_a {
            return Err(Error::invalid(format!(
                "K_a = {k_a}, K_b = {k_b} exceed the side sizes {n_a}, {}",
                n - n_a
            )));
        }
    } else if k_a + k_b > n {
        return Err(Error::invalid(format!("K = {} exceeds N = {n}", k_a + k_b)));
    }
    let table = Arc::new(LnTable::for_network(graph));
    let runs: Vec<(Partition, ReplicateRecord)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let rseed = derive_seed(&[seed, i as u64]);
            let clock = Instant::now();
            let mut rng = rng_from_seed(rseed);
            let init = random_partition(graph, model, k_a, k_b, &mut rng)?;
            let mut state = SearchState::with_table(graph, &init, model, table.clone())?;
            let out = run_sweeps(&mut state);
            let seconds = clock.elapsed().as_secs_f64();
            let pure_type = graph
                .vertex_types()
                .map(|t| out.partition.is_pure_type(t))
                .unwrap_or(true);
            Ok((
                out.partition,
                ReplicateRecord {
                    seed: rseed,
                    score: out.score,
                    seconds,
                    pure_type,
                    empty_groups: out.has_empty_group,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (_, rec)) in runs.iter().enumerate() {
        if rec.score > runs[best].1.score {
            best = i;
        }
    }
    let best_partition = runs[best].0.clone();
    let best_score = runs[best].1.score;
    Ok(FitResult {
        model,
        k_a,
        k_b,
        best_partition,
        best_score,
        replicates: runs.into_iter().map(|(_, r)| r).collect(),
    })
}

/// True when no admissible single-vertex move raises the objective by more than 1e-12.
pub fn is_local_optimum<G: Network + ?Sized>(graph: &G, p: &Partition, model: ModelSpec) -> Result<bool> {
    let state = SearchState::new(graph, p, model)?;
    for v in 0..graph.num_vertices() {
        if let Some((d, _)) = state.best_move(v) {
            if d > LOCAL_OPTIMUM_TOLERANCE {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
