//! Profile log-likelihoods of the (bipartite) stochastic block model,
//! the Kernighan–Lin style search, and the modularity baseline.
//!
//! All objectives share one form. With `m_rs` summed over ordered vertex
//! pairs and `X_r` equal to the group degree `κ_r` (degree-corrected) or the
//! group size `n_r` (uncorrected):
//!
//! ```text
//! L = Σ_rs m_rs ln m_rs − 2 Σ_r κ_r ln X_r      (0 ln 0 = 0)
//! ```
//!
//! which equals `Σ_rs m_rs ln(m_rs / X_r X_s)`. The bipartite model restricts
//! the sum to groups of different type; for a pure-type partition of a
//! bipartite graph the same-type blocks are empty, so the bipartite and
//! unipartite objectives coincide on every pure-type partition.

mod modularity;
mod search;

pub use modularity::{greedy_modularity, modularity};
pub use search::{
    is_local_optimum, kl_fit, kl_search, random_partition, FitResult, ReplicateRecord, SearchOutcome,
    SearchState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genmodel::{BlockAffinity, Correction, DegreePropensity};
use crate::graph::{block_stats, BlockStats, Network, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Bipartite,
    Unipartite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub structure: Structure,
    pub correction: Correction,
}

impl ModelSpec {
    pub const fn new(structure: Structure, correction: Correction) -> Self {
        ModelSpec {
            structure,
            correction,
        }
    }

    pub const fn bipartite(correction: Correction) -> Self {
        Self::new(Structure::Bipartite, correction)
    }

    pub const fn unipartite(correction: Correction) -> Self {
        Self::new(Structure::Unipartite, correction)
    }

    pub fn is_bipartite(&self) -> bool {
        self.structure == Structure::Bipartite
    }

    pub fn all() -> [ModelSpec; 4] {
        [
            Self::bipartite(Correction::Uncorrected),
            Self::bipartite(Correction::DegreeCorrected),
            Self::unipartite(Correction::Uncorrected),
            Self::unipartite(Correction::DegreeCorrected),
        ]
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self.structure {
            Structure::Bipartite => "bisbm",
            Structure::Unipartite => "sbm",
        };
        let c = match self.correction {
            Correction::Uncorrected => "uncorrected",
            Correction::DegreeCorrected => "dc",
        };
        write!(f, "{s}-{c}")
    }
}

/// Precomputed `x ln x` and `ln x` for the integer arguments the objective
/// needs. Arguments past the table (heavy weighted graphs) are computed directly.
#[derive(Debug)]
pub(crate) struct LnTable {
    xlnx: Vec<f64>,
    ln: Vec<f64>,
}

const MAX_TABLE: usize = 1 << 22;

impl LnTable {
    pub(crate) fn new(max_count: usize, max_size: usize) -> Self {
        let xlnx = (0..=max_count.min(MAX_TABLE))
            .map(|x| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() })
            .collect();
        let ln = (0..=max_size)
            .map(|x| if x == 0 { 0.0 } else { (x as f64).ln() })
            .collect();
        LnTable { xlnx, ln }
    }

    pub(crate) fn for_network<G: Network + ?Sized>(g: &G) -> Self {
        let adj = g.adjacency();
        Self::new(2 * adj.total_weight() as usize, adj.num_vertices())
    }

    #[inline(always)]
    pub(crate) fn xlnx(&self, x: i64) -> f64 {
        debug_assert!(x >= 0);
        match self.xlnx.get(x as usize) {
            Some(v) => *v,
            None => x as f64 * (x as f64).ln(),
        }
    }

    /// Normalization term `κ ln X` of one group.
    #[inline(always)]
    pub(crate) fn norm(&self, correction: Correction, kappa: i64, size: i64) -> f64 {
        if kappa == 0 {
            return 0.0;
        }
        match correction {
            Correction::DegreeCorrected => self.xlnx(kappa),
            Correction::Uncorrected => kappa as f64 * self.ln[size as usize],
        }
    }
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Objective value from block statistics.
pub fn objective_from_stats(stats: &BlockStats, correction: Correction) -> f64 {
    let k = stats.num_groups;
    let mut edge_term = 0.0;
    for r in 0..k {
        for s in 0..k {
            edge_term += xlnx(stats.m(r, s) as f64);
        }
    }
    let norm: f64 = (0..k)
        .map(|r| {
            let kappa = stats.group_degrees[r] as f64;
            if kappa == 0.0 {
                0.0
            } else {
                match correction {
                    Correction::DegreeCorrected => xlnx(kappa),
                    Correction::Uncorrected => kappa * (stats.group_sizes[r] as f64).ln(),
                }
            }
        })
        .sum();
    edge_term - 2.0 * norm
}

/// Checks that `p` is admissible for `model` on `g`.
pub(crate) fn check_partition<G: Network + ?Sized>(g: &G, p: &Partition, model: ModelSpec) -> Result<()> {
    let n = g.num_vertices();
    if p.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: p.len(),
        });
    }
    if model.is_bipartite() {
        let types = g
            .vertex_types()
            .ok_or_else(|| Error::invalid("the bipartite model needs vertex types"))?;
        if !p.is_pure_type(types) {
            return Err(Error::MixedTypePartition);
        }
    }
    Ok(())
}

/// Profile log-likelihood of `p` under `model`.
pub fn log_likelihood<G: Network + ?Sized>(g: &G, p: &Partition, model: ModelSpec) -> Result<f64> {
    if g.adjacency().total_weight() == 0 {
        return Err(Error::EmptyGraph);
    }
    check_partition(g, p, model)?;
    let stats = block_stats(g, p)?;
    Ok(objective_from_stats(&stats, model.correction))
}

/// Plug-in maximum-likelihood parameters for a fixed partition.
///
/// Uncorrected: `ω_rs = m_rs / (n_r n_s)`. Degree-corrected: `ω_rs = m_rs` and
/// `θ_i = k_i / κ_{g_i}`.
pub fn estimate_parameters<G: Network + ?Sized>(
    g: &G,
    p: &Partition,
    model: ModelSpec,
) -> Result<(BlockAffinity, Option<DegreePropensity>)> {
    check_partition(g, p, model)?;
    let stats = block_stats(g, p)?;
    let k = stats.num_groups;
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let m = stats.m(r, s) as f64;
                    match model.correction {
                        Correction::DegreeCorrected => m,
                        Correction::Uncorrected => {
                            let nn = stats.group_sizes[r] as f64 * stats.group_sizes[s] as f64;
                            if nn == 0.0 {
                                0.0
                            } else {
                                m / nn
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    let omega = match p.group_types() {
        Some(_) if model.is_bipartite() => {
            BlockAffinity::bipartite(p.k_a().unwrap(), p.k_b().unwrap(), rows, model.correction)?
        }
        _ => BlockAffinity::unipartite(rows, model.correction)?,
    };
    let theta = match model.correction {
        Correction::Uncorrected => None,
        Correction::DegreeCorrected => {
            for r in 0..k {
                if stats.group_sizes[r] > 0 && stats.group_degrees[r] == 0 {
                    return Err(Error::ZeroDegreeGroup(r));
                }
            }
            let adj = g.adjacency();
            let theta = (0..g.num_vertices())
                .map(|v| adj.degree(v) as f64 / stats.group_degrees[p.group_of(v)] as f64)
                .collect();
            Some(DegreePropensity { theta })
        }
    };
    Ok((omega, theta))
}
