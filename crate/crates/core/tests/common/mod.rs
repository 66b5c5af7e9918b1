//! Brute-force oracles shared by the oracle tests and the acceptance run.
//! Each check returns a short summary or a description of the first mismatch.

#![allow(dead_code)]

use std::collections::HashSet;

use bisbm::genmodel::{
    derive_seed, make_easy_case, make_hard_case, rng_from_seed, sample_network, Correction, EasyCaseParams,
    HardCaseParams, PlantedInstance,
};
use bisbm::graph::{one_mode_projection, BipartiteGraph, Network, Partition, VertexType};
use bisbm::inference::{log_likelihood, random_partition, ModelSpec, SearchState};
use bisbm::metrics::{nmi_labels, spearman};
use rand::Rng;

pub type Check = Result<String, String>;

/// Dense symmetric adjacency of a bipartite graph.
pub fn dense(g: &BipartiteGraph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in g.edges() {
        a[u][v] += w as f64;
        a[v][u] += w as f64;
    }
    a
}

/// Objective in the ratio form `sum_rs m_rs ln(m_rs / (x_r x_s))`, where
/// `x` is the group size (uncorrected) or group degree (corrected), with
/// block counts taken straight from the dense matrix.
pub fn oracle_likelihood(a: &[Vec<f64>], labels: &[usize], k: usize, correction: Correction) -> f64 {
    let n = a.len();
    let mut m = vec![vec![0.0; k]; k];
    let mut size = vec![0.0; k];
    let mut kappa = vec![0.0; k];
    for i in 0..n {
        size[labels[i]] += 1.0;
        for j in 0..n {
            m[labels[i]][labels[j]] += a[i][j];
            kappa[labels[i]] += a[i][j];
        }
    }
    let x = match correction {
        Correction::Uncorrected => size,
        Correction::DegreeCorrected => kappa,
    };
    let mut l = 0.0;
    for r in 0..k {
        for s in 0..k {
            if m[r][s] > 0.0 {
                l += m[r][s] * (m[r][s] / (x[r] * x[s])).ln();
            }
        }
    }
    l
}

pub fn random_graph(seed: u64, n_a: usize, n_b: usize, p: f64) -> BipartiteGraph {
    let mut rng = rng_from_seed(seed);
    let mut types = vec![VertexType::A; n_a];
    types.extend(std::iter::repeat_n(VertexType::B, n_b));
    let mut edges = Vec::new();
    for u in 0..n_a {
        for v in n_a..n_a + n_b {
            if rng.random::<f64>() < p {
                edges.push((u, v, rng.random_range(1..4)));
            }
        }
    }
    edges.push((0, n_a, 1));
    BipartiteGraph::from_edges(types, edges).unwrap()
}

fn small_hard_case() -> PlantedInstance {
    make_hard_case(&HardCaseParams::with_mean_degree(vec![20, 30, 10], vec![30, 30], 8.0, 0.5)).unwrap()
}

pub fn check_likelihood_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let g = random_graph(seed, 9, 12, 0.3);
        let a = dense(&g);
        let mut rng = rng_from_seed(derive_seed(&[seed, 99]));
        for model in ModelSpec::all() {
            let p = random_partition(&g, model, 3, 2, &mut rng).unwrap();
            let got = log_likelihood(&g, &p, model).unwrap();
            let want = oracle_likelihood(&a, p.assignment(), p.num_groups(), model.correction);
            let err = (got - want).abs() / want.abs().max(1.0);
            if err > 1e-9 {
                return Err(format!("{model} seed {seed}: {got} vs {want}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!("80 partitions, max rel. error {worst:.1e}"))
}

/// Applies `moves` random moves per model and compares every incremental
/// change with two full evaluations.
pub fn check_delta_moves(moves: usize) -> Check {
    let inst =
        make_hard_case(&HardCaseParams::with_mean_degree(vec![10, 15, 5], vec![12, 18], 6.0, 0.5)).unwrap();
    let g = sample_network(&inst, 3).unwrap();
    let mut worst: f64 = 0.0;
    for (mi, model) in ModelSpec::all().into_iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(&[17, mi as u64]));
        let init = random_partition(&g, model, 3, 2, &mut rng).unwrap();
        let mut st = SearchState::new(&g, &init, model).unwrap();
        let mut checked = 0;
        while checked < moves {
            let v = rng.random_range(0..g.num_vertices());
            let t = rng.random_range(st.allowed_groups(v));
            if t == st.assignment()[v] {
                continue;
            }
            let before = log_likelihood(&g, &st.partition(), model).unwrap();
            let d = st.delta(v, t).unwrap();
            st.move_vertex(v, t).unwrap();
            let after = log_likelihood(&g, &st.partition(), model).unwrap();
            let err = (after - before - d).abs();
            if err > 1e-9 {
                return Err(format!("{model}: delta {d} vs {}", after - before));
            }
            if (st.score() - after).abs() > 1e-9 * after.abs().max(1.0) {
                return Err(format!("{model}: running score {} vs {after}", st.score()));
            }
            worst = worst.max(err);
            checked += 1;
        }
        st.check_consistency()?;
    }
    Ok(format!("{moves} moves x 4 models, max error {worst:.1e}"))
}

pub fn check_projection_oracle() -> Check {
    for seed in 0..20 {
        let g = random_graph(100 + seed, 7, 9, 0.35);
        let a = dense(&g);
        let n = a.len();
        let mut a2 = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a2[i][j] = (0..n).map(|k| a[i][k] * a[k][j]).sum();
            }
        }
        for side in [VertexType::A, VertexType::B] {
            for weighted in [true, false] {
                let p = one_mode_projection(&g, side, weighted);
                let ids = p.labels();
                let mut got = vec![vec![0.0; ids.len()]; ids.len()];
                for &(u, v, w) in p.edges() {
                    got[u][v] += w as f64;
                    got[v][u] += w as f64;
                }
                if ids.len() != g.count_of(side) || ids.iter().any(|&i| g.types()[i] != side) {
                    return Err(format!("seed {seed}: projection onto {side} has wrong vertices"));
                }
                for (x, &i) in ids.iter().enumerate() {
                    for (y, &j) in ids.iter().enumerate() {
                        let want = if x == y {
                            0.0
                        } else if weighted {
                            a2[i][j]
                        } else {
                            f64::from(u8::from(a2[i][j] > 0.0))
                        };
                        if got[x][y] != want {
                            return Err(format!(
                                "seed {seed} side {side} weighted={weighted} ({i},{j}): {} vs {want}",
                                got[x][y]
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok("20 graphs x 2 sides x weighted/unweighted".into())
}

/// Mean block counts over `seeds` samples lie within 3 standard errors of
/// their Poisson expectation.
fn block_moments(inst: &PlantedInstance, seeds: u64) -> Result<f64, String> {
    let p = inst.partition();
    let k = inst.num_groups();
    let mut sums = vec![vec![0.0; k]; k];
    for seed in 0..seeds {
        let g = sample_network(inst, derive_seed(&[5, seed])).unwrap();
        for &(u, v, w) in g.edges() {
            let (r, s) = (p.group_of(u), p.group_of(v));
            sums[r.min(s)][r.max(s)] += w as f64;
        }
    }
    let mut worst: f64 = 0.0;
    for r in 0..inst.k_a {
        for s in inst.k_a..k {
            let e = inst.expected_block_edges(r, s);
            let mean = sums[r][s] / seeds as f64;
            let z = if e > 0.0 {
                (mean - e).abs() / (e / seeds as f64).sqrt()
            } else if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if z > 3.0 {
                return Err(format!("{} block ({r},{s}): mean {mean}, expected {e}", inst.label));
            }
            worst = worst.max(z);
        }
    }
    Ok(worst)
}

pub fn check_sampler_moments() -> Check {
    let z1 = block_moments(&make_easy_case(&EasyCaseParams::with_mean_degree(60, 5.0)).unwrap(), 100)?;
    let z2 = block_moments(&small_hard_case(), 100)?;
    Ok(format!("100 seeds, max |z| {:.2}", z1.max(z2)))
}

/// Symmetry, relabeling invariance, bounds and self-information of NMI on
/// one pair of labelings.
pub fn nmi_properties(x: &[usize], y: &[usize], shift: usize) -> Result<(), String> {
    let a = nmi_labels(x, y).map_err(|e| e.to_string())?;
    if !(0.0..=1.0).contains(&a) {
        return Err(format!("NMI {a} out of [0, 1]"));
    }
    let b = nmi_labels(y, x).map_err(|e| e.to_string())?;
    if (a - b).abs() > 1e-12 {
        return Err(format!("asymmetric: {a} vs {b}"));
    }
    let relabeled: Vec<usize> = x.iter().map(|l| l * 31 + shift).collect();
    let c = nmi_labels(&relabeled, y).map_err(|e| e.to_string())?;
    if (a - c).abs() > 1e-12 {
        return Err(format!("not relabeling invariant: {a} vs {c}"));
    }
    let distinct = x.iter().collect::<HashSet<_>>().len();
    let own = nmi_labels(x, x).map_err(|e| e.to_string())?;
    let want = if distinct > 1 { 1.0 } else { 0.0 };
    if own != want {
        return Err(format!("NMI with itself {own}, expected {want}"));
    }
    Ok(())
}

pub fn check_nmi_suite(cases: usize) -> Check {
    let mut rng = rng_from_seed(4242);
    for case in 0..cases {
        let n = rng.random_range(1..80);
        let kx = rng.random_range(1..7);
        let ky = rng.random_range(1..6);
        let x: Vec<usize> = (0..n).map(|_| rng.random_range(0..kx)).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..ky)).collect();
        nmi_properties(&x, &y, rng.random_range(1..50)).map_err(|e| format!("case {case}: {e}"))?;
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..3 {
        for j in 0..4 {
            x.push(i);
            y.push(j);
        }
    }
    let z = nmi_labels(&x, &y).unwrap();
    if z.abs() > 1e-12 {
        return Err(format!("independent product has NMI {z}"));
    }
    Ok(format!("{cases} random cases"))
}

/// Bipartite and unipartite objectives agree, hence rank identically, on
/// pure-type partitions.
pub fn check_nesting(partitions: usize) -> Check {
    let g = sample_network(&small_hard_case(), 8).unwrap();
    for correction in [Correction::Uncorrected, Correction::DegreeCorrected] {
        let bi = ModelSpec::bipartite(correction);
        let uni = ModelSpec::unipartite(correction);
        let mut rng = rng_from_seed(21);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for _ in 0..partitions {
            let p = random_partition(&g, bi, 3, 2, &mut rng).unwrap();
            let x = log_likelihood(&g, &p, bi).unwrap();
            let y = log_likelihood(&g, &Partition::from_labels(p.assignment()), uni).unwrap();
            if (x - y).abs() > 1e-9 * x.abs().max(1.0) {
                return Err(format!("{correction:?}: {x} vs {y}"));
            }
            xs.push(x);
            ys.push(y);
        }
        let rho = spearman(&xs, &ys);
        if rho != 1.0 {
            return Err(format!("{correction:?}: rank correlation {rho}"));
        }
    }
    Ok(format!("{partitions} partitions x 2 corrections, Spearman 1"))
}
