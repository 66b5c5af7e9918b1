//! Newman–Girvan modularity and the greedy agglomerative (CNM) maximizer.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{block_stats, Network, Partition};

/// Modularity `Q = Σ_r (m_rr / 2W − (κ_r / 2W)²)` of `p` on `g`.
pub fn modularity<G: Network + ?Sized>(g: &G, p: &Partition) -> Result<f64> {
    let two_w = 2.0 * g.adjacency().total_weight() as f64;
    if two_w == 0.0 {
        return Err(Error::EmptyGraph);
    }
    let stats = block_stats(g, p)?;
    Ok((0..stats.num_groups)
        .map(|r| {
            let a = stats.group_degrees[r] as f64 / two_w;
            stats.m(r, r) as f64 / two_w - a * a
        })
        .sum())
}

#[derive(Debug, PartialEq)]
struct Candidate {
    gain: f64,
    i: usize,
    j: usize,
    vi: u32,
    vj: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.i.cmp(&self.i))
            .then_with(|| other.j.cmp(&self.j))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy modularity maximization: start from singletons and repeatedly merge
/// the pair of adjacent communities with the largest modularity gain until no
/// merge increases `Q`. Ties go to the lowest community indices.
pub fn greedy_modularity<G: Network + ?Sized>(g: &G) -> Result<Partition> {
    let adj = g.adjacency();
    let n = adj.num_vertices();
    let two_w = 2.0 * adj.total_weight() as f64;
    if two_w == 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut a: Vec<f64> = (0..n).map(|v| adj.degree(v) as f64 / two_w).collect();
    let mut links: Vec<HashMap<usize, f64>> = (0..n)
        .map(|v| adj.neighbors(v).filter(|&(u, _)| u != v).map(|(u, w)| (u, w as f64 / two_w)).collect())
        .collect();
    let mut version = vec![0u32; n];
    let mut alive = vec![true; n];
    let mut label: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();

    let mut heap = BinaryHeap::new();
    for i in 0..n {
        for (&j, &e) in &links[i] {
            if i < j {
                heap.push(Candidate { gain: 2.0 * (e - a[i] * a[j]), i, j, vi: 0, vj: 0 });
            }
        }
    }
    while let Some(c) = heap.pop() {
        if !alive[c.i] || !alive[c.j] || version[c.i] != c.vi || version[c.j] != c.vj {
            continue;
        }
        if c.gain <= 0.0 {
            break;
        }
        // merge the smaller neighbourhood into the larger one
        let (keep, gone) = if links[c.i].len() >= links[c.j].len() { (c.i, c.j) } else { (c.j, c.i) };
        let gone_links = std::mem::take(&mut links[gone]);
        for (k, e) in gone_links {
            if k == keep {
                continue;
            }
            *links[keep].entry(k).or_insert(0.0) += e;
            let lk = &mut links[k];
            let moved = lk.remove(&gone).unwrap_or(0.0);
            *lk.entry(keep).or_insert(0.0) += moved;
        }
        links[keep].remove(&gone);
        a[keep] += a[gone];
        a[gone] = 0.0;
        alive[gone] = false;
        version[keep] += 1;
        let moved = std::mem::take(&mut members[gone]);
        for &v in &moved {
            label[v] = keep;
        }
        members[keep].extend(moved);
        let mut fresh: Vec<(usize, f64)> = links[keep].iter().map(|(&k, &e)| (k, e)).collect();
        fresh.sort_by_key(|&(k, _)| k);
        for (k, e) in fresh {
            let (i, j) = if keep < k { (keep, k) } else { (k, keep) };
            heap.push(Candidate {
                gain: 2.0 * (e - a[keep] * a[k]),
                i,
                j,
                vi: version[i],
                vj: version[j],
            });
        }
    }
    Ok(Partition::from_labels(&label))
}
