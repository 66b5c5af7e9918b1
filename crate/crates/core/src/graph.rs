//! Bipartite and unipartite multigraphs, partitions, and block statistics.
//!
//! Graphs are immutable once built. Both graph kinds expose the same
//! [`Network`] view (a weighted CSR adjacency plus optional vertex types),
//! which is what the likelihood code and the search operate on.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexType {
    A,
    B,
}

impl VertexType {
    pub fn opposite(self) -> Self {
        match self {
            VertexType::A => VertexType::B,
            VertexType::B => VertexType::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VertexType::A => "a",
            VertexType::B => "b",
        }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VertexType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "A" => Ok(VertexType::A),
            "b" | "B" => Ok(VertexType::B),
            other => Err(Error::invalid(format!("unknown vertex type {other:?}"))),
        }
    }
}

/// Compressed adjacency of an undirected multigraph without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<u64>,
    degrees: Vec<u64>,
    total: u64,
}

impl Adjacency {
    /// Builds from canonical edges (u < v, unique, positive weight).
    fn from_canonical(n: usize, edges: &[(usize, usize, u64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in edges {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0usize; 2 * edges.len()];
        let mut weights = vec![0u64; 2 * edges.len()];
        let mut degrees = vec![0u64; n];
        let mut total = 0u64;
        for &(u, v, w) in edges {
            neighbors[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
            degrees[u] += w;
            degrees[v] += w;
            total += w;
        }
        Adjacency {
            offsets,
            neighbors,
            weights,
            degrees,
            total,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.degrees.len()
    }

    /// Neighbors of `v` with edge multiplicities.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, v: usize) -> u64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Total edge multiplicity `m` (half the degree sum).
    pub fn total_weight(&self) -> u64 {
        self.total
    }
}

/// Read-only view shared by bipartite graphs and projections.
pub trait Network: Sync {
    fn adjacency(&self) -> &Adjacency;

    /// Per-vertex types, when the graph carries them.
    fn vertex_types(&self) -> Option<&[VertexType]>;

    fn num_vertices(&self) -> usize {
        self.adjacency().num_vertices()
    }
}

/// Merges raw edges into canonical form: u < v, sorted, multiplicities summed.
fn canonicalize(mut raw: Vec<(usize, usize, u64)>) -> Vec<(usize, usize, u64)> {
    for e in raw.iter_mut() {
        if e.0 > e.1 {
            std::mem::swap(&mut e.0, &mut e.1);
        }
    }
    raw.retain(|e| e.2 > 0);
    raw.sort_unstable_by_key(|e| (e.0, e.1));
    let mut out: Vec<(usize, usize, u64)> = Vec::with_capacity(raw.len());
    for (u, v, w) in raw {
        match out.last_mut() {
            Some(last) if last.0 == u && last.1 == v => last.2 += w,
            _ => out.push((u, v, w)),
        }
    }
    out
}

/// Multigraph over type-a and type-b vertices with edges only across types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    types: Vec<VertexType>,
    edges: Vec<(usize, usize, u64)>,
    adj: Adjacency,
}

impl BipartiteGraph {
    /// Validates and builds a graph. Repeated pairs accumulate multiplicity.
    pub fn from_edges(
        types: Vec<VertexType>,
        edges: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self> {
        let n = types.len();
        let n_a = types.iter().filter(|t| **t == VertexType::A).count();
        if n_a == 0 || n_a == n {
            return Err(Error::invalid(
                "a bipartite graph needs at least one vertex of each type",
            ));
        }
        let raw: Vec<_> = edges.into_iter().collect();
        for &(u, v, _) in &raw {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::UnknownVertex { line: 0, id });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if types[u] == types[v] {
                return Err(Error::SameTypeEdge {
                    u,
                    v,
                    kind: types[u],
                });
            }
        }
        let edges = canonicalize(raw);
        let adj = Adjacency::from_canonical(n, &edges);
        Ok(BipartiteGraph { types, edges, adj })
    }

    pub fn types(&self) -> &[VertexType] {
        &self.types
    }

    pub fn vertex_type(&self, v: usize) -> VertexType {
        self.types[v]
    }

    /// Canonical edge list: `(u, v, multiplicity)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn num_edges(&self) -> u64 {
        self.adj.total_weight()
    }

    pub fn count_of(&self, t: VertexType) -> usize {
        self.types.iter().filter(|x| **x == t).count()
    }

    pub fn n_a(&self) -> usize {
        self.count_of(VertexType::A)
    }

    pub fn n_b(&self) -> usize {
        self.count_of(VertexType::B)
    }

    pub fn degree(&self, v: usize) -> u64 {
        self.adj.degree(v)
    }

    pub fn degrees(&self) -> &[u64] {
        self.adj.degrees()
    }

    /// Vertex ids of one side, ascending.
    pub fn side_vertices(&self, side: VertexType) -> Vec<usize> {
        (0..self.types.len())
            .filter(|&v| self.types[v] == side)
            .collect()
    }

    /// Multiplicity of the edge between `u` and `v` (0 when absent).
    pub fn multiplicity(&self, u: usize, v: usize) -> u64 {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by_key(&(lo, hi), |e| (e.0, e.1))
            .map(|i| self.edges[i].2)
            .unwrap_or(0)
    }
}

impl Network for BipartiteGraph {
    fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    fn vertex_types(&self) -> Option<&[VertexType]> {
        Some(&self.types)
    }
}

/// Weighted multigraph without vertex types, e.g. a one-mode projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnipartiteGraph {
    edges: Vec<(usize, usize, u64)>,
    adj: Adjacency,
    labels: Vec<usize>,
}

impl UnipartiteGraph {
    pub fn from_edges(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self> {
        let raw: Vec<_> = edges.into_iter().collect();
        for &(u, v, _) in &raw {
            for id in [u, v] {
                if id >= num_vertices {
                    return Err(Error::UnknownVertex { line: 0, id });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
        }
        let edges = canonicalize(raw);
        let adj = Adjacency::from_canonical(num_vertices, &edges);
        Ok(UnipartiteGraph {
            edges,
            adj,
            labels: (0..num_vertices).collect(),
        })
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    /// Original vertex id of each vertex (identity unless this is a projection).
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn total_weight(&self) -> u64 {
        self.adj.total_weight()
    }

    pub fn strength(&self, v: usize) -> u64 {
        self.adj.degree(v)
    }
}

impl Network for UnipartiteGraph {
    fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    fn vertex_types(&self) -> Option<&[VertexType]> {
        None
    }
}

/// One-mode projection onto `side`.
///
/// Vertex `j` of the result is the `j`-th smallest id of that side. In weighted
/// mode the weight of `(i, j)` is the number of length-2 paths between them
/// (shared neighbors counted with multiplicity); unweighted mode caps it at 1.
/// The diagonal of the path-count matrix is dropped.
pub fn one_mode_projection(g: &BipartiteGraph, side: VertexType, weighted: bool) -> UnipartiteGraph {
    let labels = g.side_vertices(side);
    let n = g.types.len();
    let mut local = vec![usize::MAX; n];
    for (j, &v) in labels.iter().enumerate() {
        local[v] = j;
    }
    let mut acc = vec![0u64; labels.len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    for (li, &v) in labels.iter().enumerate() {
        for (w, a) in g.adj.neighbors(v) {
            for (u, b) in g.adj.neighbors(w) {
                let lj = local[u];
                if lj <= li {
                    continue;
                }
                if acc[lj] == 0 {
                    touched.push(lj);
                }
                acc[lj] += a * b;
            }
        }
        touched.sort_unstable();
        for &lj in &touched {
            let w = if weighted { acc[lj] } else { 1 };
            edges.push((li, lj, w));
            acc[lj] = 0;
        }
        touched.clear();
    }
    let adj = Adjacency::from_canonical(labels.len(), &edges);
    UnipartiteGraph { edges, adj, labels }
}

/// Group assignment, optionally with per-group vertex types.
///
/// Typed partitions number type-a groups `0..k_a` and type-b groups
/// `k_a..k_a + k_b`. Untyped partitions carry no type constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    group_types: Option<Vec<VertexType>>,
    num_groups: usize,
}

impl Partition {
    pub fn typed(assignment: Vec<usize>, k_a: usize, k_b: usize) -> Result<Self> {
        let k = k_a + k_b;
        if let Some(&bad) = assignment.iter().find(|&&g| g >= k) {
            return Err(Error::invalid(format!("group {bad} out of range 0..{k}")));
        }
        let mut group_types = vec![VertexType::A; k_a];
        group_types.extend(std::iter::repeat_n(VertexType::B, k_b));
        Ok(Partition {
            assignment,
            group_types: Some(group_types),
            num_groups: k,
        })
    }

    pub fn untyped(assignment: Vec<usize>, num_groups: usize) -> Result<Self> {
        if let Some(&bad) = assignment.iter().find(|&&g| g >= num_groups) {
            return Err(Error::invalid(format!(
                "group {bad} out of range 0..{num_groups}"
            )));
        }
        Ok(Partition {
            assignment,
            group_types: None,
            num_groups,
        })
    }

    /// Untyped partition from arbitrary labels, renumbered in ascending label order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment = labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap())
            .collect();
        Partition {
            assignment,
            group_types: None,
            num_groups: distinct.len(),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn group_types(&self) -> Option<&[VertexType]> {
        self.group_types.as_deref()
    }

    pub fn is_typed(&self) -> bool {
        self.group_types.is_some()
    }

    pub fn k_a(&self) -> Option<usize> {
        self.group_types
            .as_ref()
            .map(|t| t.iter().filter(|x| **x == VertexType::A).count())
    }

    pub fn k_b(&self) -> Option<usize> {
        self.group_types
            .as_ref()
            .map(|t| t.iter().filter(|x| **x == VertexType::B).count())
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_groups];
        for &g in &self.assignment {
            sizes[g] += 1;
        }
        sizes
    }

    /// True when every group holds vertices of a single type, and, for typed
    /// partitions, that type is the group's declared type.
    pub fn is_pure_type(&self, types: &[VertexType]) -> bool {
        if types.len() != self.assignment.len() {
            return false;
        }
        match &self.group_types {
            Some(gt) => self
                .assignment
                .iter()
                .zip(types)
                .all(|(&g, &t)| gt[g] == t),
            None => {
                let mut seen: Vec<Option<VertexType>> = vec![None; self.num_groups];
                for (&g, &t) in self.assignment.iter().zip(types) {
                    match seen[g] {
                        None => seen[g] = Some(t),
                        Some(prev) if prev != t => return false,
                        _ => {}
                    }
                }
                true
            }
        }
    }

    /// Relabels group ids by first appearance in vertex order.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.num_groups];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&g| {
                if map[g] == usize::MAX {
                    map[g] = next;
                    next += 1;
                }
                map[g]
            })
            .collect()
    }
}

/// Sub-partition over the vertices of `side`, groups renumbered to `0..k`
/// in ascending order of the original group ids present.
pub fn restrict_partition(p: &Partition, types: &[VertexType], side: VertexType) -> Result<Partition> {
    if types.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: types.len(),
            found: p.len(),
        });
    }
    if !p.is_pure_type(types) {
        return Err(Error::MixedTypePartition);
    }
    let labels: Vec<usize> = p
        .assignment
        .iter()
        .zip(types)
        .filter(|(_, t)| **t == side)
        .map(|(g, _)| *g)
        .collect();
    Ok(Partition::from_labels(&labels))
}

/// Sufficient statistics of a (graph, partition) pair.
///
/// `edge_counts` is the dense `K x K` matrix `m_rs` summed over ordered vertex
/// pairs, so within-group edges count twice on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStats {
    pub num_groups: usize,
    pub edge_counts: Vec<u64>,
    pub group_sizes: Vec<usize>,
    pub group_degrees: Vec<u64>,
}

impl BlockStats {
    pub fn m(&self, r: usize, s: usize) -> u64 {
        self.edge_counts[r * self.num_groups + s]
    }
}

pub fn block_stats<G: Network + ?Sized>(g: &G, p: &Partition) -> Result<BlockStats> {
    let adj = g.adjacency();
    let n = adj.num_vertices();
    if p.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let k = p.num_groups();
    let mut edge_counts = vec![0u64; k * k];
    let mut group_degrees = vec![0u64; k];
    for v in 0..n {
        let r = p.group_of(v);
        group_degrees[r] += adj.degree(v);
        for (u, w) in adj.neighbors(v) {
            edge_counts[r * k + p.group_of(u)] += w;
        }
    }
    Ok(BlockStats {
        num_groups: k,
        edge_counts,
        group_sizes: p.group_sizes(),
        group_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use VertexType::{A, B};

    fn complete_bipartite(na: usize, nb: usize) -> BipartiteGraph {
        let mut types = vec![A; na];
        types.extend(vec![B; nb]);
        let edges = (0..na).flat_map(|i| (0..nb).map(move |j| (i, na + j, 1)));
        BipartiteGraph::from_edges(types, edges).unwrap()
    }

    #[test]
    fn degrees_sum_to_twice_edges() {
        let g = BipartiteGraph::from_edges(vec![A, A, B], [(0, 2, 1), (1, 2, 1), (2, 0, 2)]).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.degrees(), &[3, 1, 4]);
        assert_eq!(g.multiplicity(2, 0), 3);
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn rejects_same_type_edges_and_loops() {
        let err = BipartiteGraph::from_edges(vec![A, A, B], [(0, 1, 1)]).unwrap_err();
        assert!(matches!(err, Error::SameTypeEdge { u: 0, v: 1, .. }));
        assert!(BipartiteGraph::from_edges(vec![A, B], [(1, 1, 1)]).is_err());
        assert!(BipartiteGraph::from_edges(vec![A, A], []).is_err());
    }

    #[test]
    fn projection_of_path_and_complete_bipartite() {
        // a0 - b2 - a1
        let g = BipartiteGraph::from_edges(vec![A, A, B], [(0, 2, 1), (1, 2, 1)]).unwrap();
        let p = one_mode_projection(&g, A, true);
        assert_eq!(p.edges(), &[(0, 1, 1)]);

        let k23 = complete_bipartite(2, 3);
        let p = one_mode_projection(&k23, A, true);
        assert_eq!(p.edges(), &[(0, 1, 3)]);
        let p = one_mode_projection(&k23, A, false);
        assert_eq!(p.edges(), &[(0, 1, 1)]);
        let pb = one_mode_projection(&k23, B, true);
        assert_eq!(pb.labels(), &[2, 3, 4]);
        assert_eq!(pb.edges().len(), 3);
        assert!(pb.edges().iter().all(|e| e.2 == 2));
    }

    #[test]
    fn block_stats_complete_bipartite() {
        let g = complete_bipartite(2, 2);
        let p = Partition::typed(vec![0, 0, 1, 1], 1, 1).unwrap();
        let s = block_stats(&g, &p).unwrap();
        assert_eq!(s.m(0, 1), 4);
        assert_eq!(s.m(1, 0), 4);
        assert_eq!(s.m(0, 0), 0);
        assert_eq!(s.group_sizes, vec![2, 2]);
        assert_eq!(s.group_degrees, vec![4, 4]);
    }

    #[test]
    fn block_stats_singletons_reproduce_adjacency() {
        let g = BipartiteGraph::from_edges(vec![A, A, B, B], [(0, 2, 2), (1, 2, 1), (1, 3, 1)]).unwrap();
        let p = Partition::untyped(vec![0, 1, 2, 3], 4).unwrap();
        let s = block_stats(&g, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.m(i, j), g.multiplicity(i, j));
            }
            assert_eq!(s.group_degrees[i], g.degree(i));
        }
    }

    #[test]
    fn block_stats_length_mismatch() {
        let g = complete_bipartite(2, 2);
        let p = Partition::untyped(vec![0, 0, 0], 1).unwrap();
        assert!(matches!(
            block_stats(&g, &p),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn restrict_relabels_contiguously() {
        let types = vec![A, A, A, B, B];
        let p = Partition::typed(vec![2, 0, 2, 3, 3], 3, 2).unwrap();
        let ra = restrict_partition(&p, &types, A).unwrap();
        assert_eq!(ra.assignment(), &[1, 0, 1]);
        assert_eq!(ra.num_groups(), 2);
        let rb = restrict_partition(&p, &types, B).unwrap();
        assert_eq!(rb.num_groups(), 1);
        let mixed = Partition::untyped(vec![0, 0, 1, 0, 1], 2).unwrap();
        assert!(matches!(
            restrict_partition(&mixed, &types, A),
            Err(Error::MixedTypePartition)
        ));
    }

    #[test]
    fn pure_type_checks() {
        let types = vec![A, B, A, B];
        assert!(Partition::untyped(vec![0, 1, 0, 1], 3).unwrap().is_pure_type(&types));
        assert!(!Partition::untyped(vec![0, 0, 1, 1], 2).unwrap().is_pure_type(&types));
        assert!(!Partition::typed(vec![1, 0, 1, 0], 1, 1).unwrap().is_pure_type(&types));
    }
}
