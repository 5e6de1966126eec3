//! Canonical commute-graph data model.
//!
//! Directed origin-destination flows are aggregated, symmetrized as
//! `w(i,j) = (f(i→j) + f(j→i)) / 2`, and stored as a sparse symmetric
//! matrix with a zero diagonal. Raw directed totals are kept separately so
//! summary statistics still reflect the original directed data.

use ndarray::Array2;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Compressed sparse rows. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    /// Builds from a map keyed by (row, col); zero entries are kept out.
    fn from_map(n: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for (&(i, j), &v) in entries {
            if v == 0.0 {
                continue;
            }
            offsets[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        SparseRows {
            n,
            offsets,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let (_, vals) = self.row(i);
        vals.iter().sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// Transposed copy (rows of the result are columns of `self`).
    pub fn transposed(&self) -> SparseRows {
        let mut entries = BTreeMap::new();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                entries.insert((j, i), v);
            }
        }
        SparseRows::from_map(self.n, &entries)
    }
}

/// Undirected weighted commute graph over census tracts.
#[derive(Debug, Clone, PartialEq)]
pub struct CommuteGraph {
    n: usize,
    node_ids: Vec<String>,
    weights: SparseRows,
    total_directed_flow: f64,
    directed_nonzero_count: usize,
}

/// Row-stochastic propagation matrix `D̃⁻¹(W + I)` used for neighborhood
/// aggregation. A transposed copy is kept for backpropagation.
#[derive(Debug, Clone)]
pub struct PropagationMatrix {
    n: usize,
    rows: SparseRows,
    rows_t: SparseRows,
}

/// Summary statistics of the raw directed flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub nonzero_edges: usize,
    pub avg_edge_weight: f64,
}

/// Aggregates directed flow records into a symmetric graph.
///
/// Duplicate (origin, dest) pairs are summed before symmetrization.
/// Diagonal (intra-tract) flows count toward `total_directed_flow` and
/// `directed_nonzero_count` but are dropped from the edge weights.
pub fn build_graph(records: &[(String, String, f64)]) -> Result<CommuteGraph> {
    if records.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut directed: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (origin, dest, flow) in records {
        if !flow.is_finite() || *flow < 0.0 {
            return Err(Error::NegativeFlow {
                origin: origin.clone(),
                dest: dest.clone(),
                flow: *flow,
            });
        }
        if origin.is_empty() || dest.is_empty() {
            return Err(Error::InvalidConfig("empty node id in flow record".into()));
        }
        *directed.entry((origin.as_str(), dest.as_str())).or_insert(0.0) += flow;
    }

    let mut ids: Vec<&str> = directed
        .keys()
        .flat_map(|&(o, d)| [o, d])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = ids.len();

    let mut total_directed_flow = 0.0;
    let mut directed_nonzero_count = 0usize;
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(o, d), &f) in &directed {
        total_directed_flow += f;
        if f != 0.0 {
            directed_nonzero_count += 1;
        }
        let (i, j) = (index[o], index[d]);
        if i == j {
            continue;
        }
        let half = f / 2.0;
        *sym.entry((i, j)).or_insert(0.0) += half;
        *sym.entry((j, i)).or_insert(0.0) += half;
    }

    Ok(CommuteGraph {
        n,
        node_ids: ids.into_iter().map(String::from).collect(),
        weights: SparseRows::from_map(n, &sym),
        total_directed_flow,
        directed_nonzero_count,
    })
}

impl CommuteGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn weights(&self) -> &SparseRows {
        &self.weights
    }

    pub fn total_directed_flow(&self) -> f64 {
        self.total_directed_flow
    }

    pub fn directed_nonzero_count(&self) -> usize {
        self.directed_nonzero_count
    }

    /// Weighted degree of node `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row_sum(i)
    }

    /// Sum of all weighted degrees (2m in modularity notation).
    pub fn degree_total(&self) -> f64 {
        (0..self.n).map(|i| self.degree(i)).sum()
    }
}

/// Directed-flow summary statistics matching the data tables:
/// node count, raw non-zero O-D pair count, and mean flow per ordered pair.
pub fn graph_stats(g: &CommuteGraph) -> Result<GraphStats> {
    if g.n == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(GraphStats {
        nodes: g.n,
        nonzero_edges: g.directed_nonzero_count,
        avg_edge_weight: g.total_directed_flow / (g.n as f64 * g.n as f64),
    })
}

/// Mean-aggregation normalization `D̃⁻¹(W + I)` with unit self-loops.
/// Every row sums to 1; isolated nodes reduce to a pure self-loop.
pub fn normalize_adjacency(g: &CommuteGraph) -> Result<PropagationMatrix> {
    if g.n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut entries = BTreeMap::new();
    for i in 0..g.n {
        let denom = g.degree(i) + 1.0;
        entries.insert((i, i), 1.0 / denom);
        let (cols, vals) = g.weights.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if w != 0.0 {
                entries.insert((i, j), w / denom);
            }
        }
    }
    let rows = SparseRows::from_map(g.n, &entries);
    let rows_t = rows.transposed();
    Ok(PropagationMatrix {
        n: g.n,
        rows,
        rows_t,
    })
}

impl PropagationMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &SparseRows {
        &self.rows
    }

    /// Dense product `P · X` (row-parallel).
    pub fn mul_dense(&self, x: &Array2<f64>) -> Array2<f64> {
        sparse_mul_dense(&self.rows, x)
    }

    /// Dense product `Pᵀ · X` (row-parallel over the cached transpose).
    pub fn mul_dense_transposed(&self, x: &Array2<f64>) -> Array2<f64> {
        sparse_mul_dense(&self.rows_t, x)
    }
}

pub(crate) fn sparse_mul_dense(a: &SparseRows, x: &Array2<f64>) -> Array2<f64> {
    let n = a.n();
    let d = x.ncols();
    assert_eq!(x.nrows(), n, "sparse-dense product shape mismatch");
    let mut out = Array2::zeros((n, d));
    let xs = x.as_slice().expect("dense operand must be contiguous");
    let out_slice = out.as_slice_mut().expect("output must be contiguous");
    crate::exec::fill_rows(out_slice, d, |i, row| {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let src = &xs[j * d..(j + 1) * d];
            for (r, s) in row.iter_mut().zip(src) {
                *r += v * s;
            }
        }
    });
    out
}

/// Elementwise training target `ln(1 + w)`; symmetric with a zero diagonal.
pub fn log_transform(g: &CommuteGraph) -> Array2<f64> {
    let n = g.n;
    let mut out = Array2::zeros((n, n));
    let slice = out.as_slice_mut().expect("contiguous");
    crate::exec::fill_rows(slice, n, |i, row| {
        let (cols, vals) = g.weights.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            row[j] = w.ln_1p();
        }
    });
    out
}

/// Raw adjacency as a dense matrix (the non-log training target).
pub fn dense_weights(g: &CommuteGraph) -> Array2<f64> {
    g.weights.to_dense()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(o: &str, d: &str, f: f64) -> (String, String, f64) {
        (o.to_string(), d.to_string(), f)
    }

    #[test]
    fn symmetrization_and_directed_totals() {
        let g = build_graph(&[rec("A", "B", 2.0), rec("B", "A", 4.0), rec("A", "A", 5.0)]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.weights().get(0, 1), 3.0);
        assert_eq!(g.weights().get(1, 0), 3.0);
        assert_eq!(g.weights().get(0, 0), 0.0);
        assert_eq!(g.total_directed_flow(), 11.0);
        assert_eq!(g.directed_nonzero_count(), 3);
    }

    #[test]
    fn duplicates_summed_then_halved() {
        let g = build_graph(&[rec("A", "B", 1.0), rec("A", "B", 2.0)]).unwrap();
        assert_eq!(g.weights().get(0, 1), 1.5);
        assert_eq!(g.directed_nonzero_count(), 1);
    }

    #[test]
    fn negative_flow_rejected_with_context() {
        let err = build_graph(&[rec("A", "B", -1.0)]).unwrap_err();
        match err {
            Error::NegativeFlow { origin, dest, flow } => {
                assert_eq!(origin, "A");
                assert_eq!(dest, "B");
                assert_eq!(flow, -1.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(build_graph(&[]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn node_ids_sorted_ascending() {
        let g = build_graph(&[rec("B", "A", 1.0), rec("C", "B", 1.0)]).unwrap();
        assert_eq!(g.node_ids(), &["A", "B", "C"]);
    }

    #[test]
    fn stats_single_edge() {
        let g = build_graph(&[rec("A", "B", 4.0)]).unwrap();
        let s = graph_stats(&g).unwrap();
        assert_eq!(s.nodes, 2);
        assert_eq!(s.nonzero_edges, 1);
        assert_eq!(s.avg_edge_weight, 1.0);
    }

    #[test]
    fn normalization_two_nodes() {
        let g = build_graph(&[rec("A", "B", 1.0), rec("B", "A", 1.0)]).unwrap();
        let p = normalize_adjacency(&g).unwrap();
        let d = p.rows().to_dense();
        for v in d.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_isolated_node() {
        // C only ever appears in a self-flow, so it is isolated in the graph.
        let g = build_graph(&[rec("A", "B", 2.0), rec("C", "C", 7.0)]).unwrap();
        let p = normalize_adjacency(&g).unwrap();
        let d = p.rows().to_dense();
        assert_eq!(d[[2, 2]], 1.0);
        assert_eq!(d[[2, 0]], 0.0);
        assert_eq!(d[[2, 1]], 0.0);
    }

    #[test]
    fn normalization_path_middle_row() {
        let g = build_graph(&[
            rec("A", "B", 1.0),
            rec("B", "A", 1.0),
            rec("B", "C", 1.0),
            rec("C", "B", 1.0),
        ])
        .unwrap();
        let p = normalize_adjacency(&g).unwrap();
        let d = p.rows().to_dense();
        for j in 0..3 {
            assert!((d[[1, j]] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn row_sums_are_one() {
        let g = build_graph(&[rec("A", "B", 0.3), rec("B", "C", 2.5), rec("D", "D", 1.0)]).unwrap();
        let p = normalize_adjacency(&g).unwrap();
        for i in 0..g.n() {
            assert!((p.rows().row_sum(i) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn log_target_values() {
        let g = build_graph(&[
            rec("A", "B", 3.0),
            rec("B", "C", std::f64::consts::E - 1.0),
        ])
        .unwrap();
        let t = log_transform(&g);
        assert!((t[[0, 1]] - 1.5_f64.ln_1p()).abs() < 1e-15); // 3 halved one-sided
        assert_eq!(t[[0, 0]], 0.0);
        assert!((t[[1, 2]] - ((std::f64::consts::E - 1.0) / 2.0).ln_1p()).abs() < 1e-15);
    }

    #[test]
    fn log_of_known_weight() {
        let g = build_graph(&[rec("A", "B", 3.0), rec("B", "A", 3.0)]).unwrap();
        let t = log_transform(&g);
        assert!((t[[0, 1]] - 1.3862944).abs() < 1e-6); // ln(4)
    }

    #[test]
    fn transpose_roundtrip() {
        let g = build_graph(&[rec("A", "B", 1.0), rec("B", "C", 2.0), rec("A", "C", 0.5)]).unwrap();
        let p = normalize_adjacency(&g).unwrap();
        let t_of_t = p.rows_t.transposed();
        assert_eq!(t_of_t, p.rows);
    }

    #[test]
    fn sparse_dense_product_matches_dense() {
        let g = build_graph(&[rec("A", "B", 1.0), rec("B", "C", 2.0), rec("C", "A", 3.0)]).unwrap();
        let p = normalize_adjacency(&g).unwrap();
        let x = Array2::from_shape_fn((3, 2), |(i, j)| (i * 2 + j) as f64 + 0.5);
        let got = p.mul_dense(&x);
        let want = p.rows().to_dense().dot(&x);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let got_t = p.mul_dense_transposed(&x);
        let want_t = p.rows().to_dense().t().dot(&x);
        for (a, b) in got_t.iter().zip(want_t.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
