//! Partition comparison.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Partition;
use crate::inference::FitResult;

/// Joint label counts of two partitions of the same vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Labels are compacted, so empty groups do not produce zero rows.
    pub fn from_labels(x: &[usize], y: &[usize]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        let xs = compact(x);
        let ys = compact(y);
        let r = xs.iter().copied().max().map_or(0, |m| m + 1);
        let s = ys.iter().copied().max().map_or(0, |m| m + 1);
        let mut counts = vec![0u64; r * s];
        let mut rows = vec![0u64; r];
        let mut cols = vec![0u64; s];
        for (&a, &b) in xs.iter().zip(&ys) {
            counts[a * s + b] += 1;
            rows[a] += 1;
            cols[b] += 1;
        }
        Ok(ContingencyTable {
            counts,
            rows,
            cols,
            total: x.len() as u64,
        })
    }

    pub fn new(x: &Partition, y: &Partition) -> Result<Self> {
        Self::from_labels(x.assignment(), y.assignment())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn count(&self, r: usize, s: usize) -> u64 {
        self.counts[r * self.cols.len() + s]
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn entropy(marginal: &[u64], total: f64) -> f64 {
        -marginal
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total;
                p * p.ln()
            })
            .sum::<f64>()
    }

    pub fn row_entropy(&self) -> f64 {
        Self::entropy(&self.rows, self.total as f64)
    }

    pub fn col_entropy(&self) -> f64 {
        Self::entropy(&self.cols, self.total as f64)
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.total as f64;
        let s = self.cols.len();
        let mut i = 0.0;
        for (idx, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (r, t) = (idx / s, idx % s);
            let c = c as f64;
            i += c / n * (c * n / (self.rows[r] as f64 * self.cols[t] as f64)).ln();
        }
        i.max(0.0)
    }

    /// Every row and every column has exactly one nonzero cell.
    fn is_bijective(&self) -> bool {
        self.rows.len() == self.cols.len() && self.counts.iter().filter(|&&c| c > 0).count() == self.rows.len()
    }
}

fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// `2 I(X,Y) / (H(X) + H(Y))`, natural logs; 0 when both entropies vanish.
pub fn nmi_labels(x: &[usize], y: &[usize]) -> Result<f64> {
    let t = ContingencyTable::from_labels(x, y)?;
    if t.total == 0 {
        return Ok(0.0);
    }
    let hx = t.row_entropy();
    let hy = t.col_entropy();
    if hx + hy <= 0.0 {
        return Ok(0.0);
    }
    if t.is_bijective() {
        return Ok(1.0);
    }
    Ok((2.0 * t.mutual_information() / (hx + hy)).clamp(0.0, 1.0))
}

pub fn nmi(x: &Partition, y: &Partition) -> Result<f64> {
    nmi_labels(x.assignment(), y.assignment())
}

/// Fraction of a fit's restarts that ended in a pure-type partition.
pub fn pure_type_fraction(fit: &FitResult) -> Result<f64> {
    if fit.replicates.is_empty() {
        return Err(Error::MissingFlags);
    }
    let pure = fit.replicates.iter().filter(|r| r.pure_type).count();
    Ok(pure as f64 / fit.replicates.len() as f64)
}

/// Linearly interpolated quantile of unsorted data; `q` in `[0, 1]`.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
