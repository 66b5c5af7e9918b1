//! Tab-separated text formats.
//!
//! * edge list: `u<TAB>v[<TAB>multiplicity]`, 0-based ids, `#` starts a comment line
//! * types file: `id<TAB>a|b`
//! * partition file: `id<TAB>group`

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition, UnipartiteGraph, VertexType};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {:?}", field.trim()),
    })
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Raw `(line, u, v, multiplicity)` records of an edge list.
fn parse_edge_records(text: &str) -> Result<Vec<(usize, usize, usize, u64)>> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let fields = split_fields(l);
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", fields.len()),
            });
        }
        let u = parse_field(line, fields[0], "vertex id")?;
        let v = parse_field(line, fields[1], "vertex id")?;
        let w: u64 = match fields.get(2) {
            Some(f) => parse_field(line, f, "multiplicity")?,
            None => 1,
        };
        if w == 0 {
            return Err(Error::Parse {
                line,
                message: "multiplicity must be positive".into(),
            });
        }
        out.push((line, u, v, w));
    }
    Ok(out)
}

/// Parses a bipartite edge list against a per-vertex type table.
pub fn parse_edge_list(text: &str, types: &[VertexType]) -> Result<BipartiteGraph> {
    let records = parse_edge_records(text)?;
    let n = types.len();
    for &(line, u, v, _) in &records {
        for id in [u, v] {
            if id >= n {
                return Err(Error::UnknownVertex { line, id });
            }
        }
        if u == v {
            return Err(Error::Parse {
                line,
                message: format!("self-loop on vertex {u}"),
            });
        }
    }
    BipartiteGraph::from_edges(
        types.to_vec(),
        records.into_iter().map(|(_, u, v, w)| (u, v, w)),
    )
}

/// Parses an untyped edge list. `num_vertices` defaults to one past the largest id.
pub fn parse_unipartite_edge_list(text: &str, num_vertices: Option<usize>) -> Result<UnipartiteGraph> {
    let records = parse_edge_records(text)?;
    let max_id = records.iter().map(|r| r.1.max(r.2) + 1).max().unwrap_or(0);
    let n = num_vertices.unwrap_or(max_id);
    for &(line, u, v, _) in &records {
        for id in [u, v] {
            if id >= n {
                return Err(Error::UnknownVertex { line, id });
            }
        }
        if u == v {
            return Err(Error::Parse {
                line,
                message: format!("self-loop on vertex {u}"),
            });
        }
    }
    UnipartiteGraph::from_edges(n, records.into_iter().map(|(_, u, v, w)| (u, v, w)))
}

/// Types file: every id in `0..N` must appear exactly once.
pub fn parse_types(text: &str) -> Result<Vec<VertexType>> {
    let mut entries: Vec<(usize, usize, VertexType)> = Vec::new();
    for (line, l) in data_lines(text) {
        let fields = split_fields(l);
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let id: usize = parse_field(line, fields[0], "vertex id")?;
        let t: VertexType = fields[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid vertex type {:?}", fields[1].trim()),
        })?;
        entries.push((line, id, t));
    }
    let n = entries.len();
    let mut types: Vec<Option<VertexType>> = vec![None; n];
    for (line, id, t) in entries {
        if id >= n {
            return Err(Error::Parse {
                line,
                message: format!("vertex id {id} outside 0..{n}; ids must be contiguous"),
            });
        }
        if types[id].replace(t).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate vertex id {id}"),
            });
        }
    }
    Ok(types.into_iter().map(|t| t.unwrap()).collect())
}

/// The convention "ids `0..n_a` are type a, the next `n_b` are type b".
pub fn types_from_split(n_a: usize, n_b: usize) -> Vec<VertexType> {
    let mut t = vec![VertexType::A; n_a];
    t.extend(std::iter::repeat_n(VertexType::B, n_b));
    t
}

fn write_edges(edges: &[(usize, usize, u64)]) -> String {
    let mut s = String::new();
    for &(u, v, w) in edges {
        if w == 1 {
            writeln!(s, "{u}\t{v}").unwrap();
        } else {
            writeln!(s, "{u}\t{v}\t{w}").unwrap();
        }
    }
    s
}

pub fn write_edge_list(g: &BipartiteGraph) -> String {
    write_edges(g.edges())
}

pub fn write_unipartite_edge_list(g: &UnipartiteGraph) -> String {
    write_edges(g.edges())
}

pub fn write_types(types: &[VertexType]) -> String {
    let mut s = String::new();
    for (i, t) in types.iter().enumerate() {
        writeln!(s, "{i}\t{t}").unwrap();
    }
    s
}

/// Partition file to raw labels (index = vertex id). Every id in `0..N` must appear.
pub fn parse_partition_labels(text: &str) -> Result<Vec<usize>> {
    let mut entries = Vec::new();
    for (line, l) in data_lines(text) {
        let fields = split_fields(l);
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let id: usize = parse_field(line, fields[0], "vertex id")?;
        let g: usize = parse_field(line, fields[1], "group")?;
        entries.push((line, id, g));
    }
    let n = entries.len();
    let mut labels = vec![usize::MAX; n];
    for (line, id, g) in entries {
        if id >= n || labels[id] != usize::MAX {
            return Err(Error::Parse {
                line,
                message: format!("vertex id {id} duplicated or outside 0..{n}"),
            });
        }
        labels[id] = g;
    }
    Ok(labels)
}

/// Untyped partition read from a partition file, groups renumbered.
pub fn parse_partition(text: &str) -> Result<Partition> {
    Ok(Partition::from_labels(&parse_partition_labels(text)?))
}

pub fn write_partition(p: &Partition) -> String {
    let mut s = String::new();
    for (i, g) in p.assignment().iter().enumerate() {
        writeln!(s, "{i}\t{g}").unwrap();
    }
    s
}
