//! Weighted undirected graphs, their edge-incidence factorization
//! `L = Bᵀ W B`, and the plain-text graph / vector file formats.
//!
//! Edge-list file:
//!
//! ```text
//! # comment lines start with '#'
//! n m
//! u v w      (m lines, 0-based vertex ids, decimal weight)
//! ```
//!
//! Vector file: one decimal number per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl GraphError {
    fn parse(line: usize, msg: impl Into<String>) -> Self {
        GraphError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// One undirected edge with positive conductance `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Edge { u, v, weight }
    }

    /// Endpoints ordered as (+1 column, -1 column) of the incidence row.
    pub fn oriented(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// A graph on `n` vertices with an ordered list of positively weighted edges.
///
/// Edge `i` keeps its index in every derived object (incidence rows,
/// leverage scores, sampling probabilities).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

fn check_edge(n: usize, e: &Edge) -> Result<(), String> {
    if e.u >= n || e.v >= n {
        return Err(format!(
            "vertex index out of range in edge ({}, {}) for n = {}",
            e.u, e.v, n
        ));
    }
    if e.u == e.v {
        return Err(format!("self-loop on vertex {}", e.u));
    }
    if !e.weight.is_finite() || e.weight <= 0.0 {
        return Err(format!("non-positive or non-finite weight {}", e.weight));
    }
    Ok(())
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::Invalid(format!(
                "vertex count must be at least 2, got {n}"
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            check_edge(n, e).map_err(|msg| GraphError::Invalid(format!("edge {i}: {msg}")))?;
        }
        Ok(WeightedGraph { n, edges })
    }

    /// Builds from `(u, v, w)` triples.
    pub fn from_triples(
        n: usize,
        triples: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, GraphError> {
        let edges = triples
            .into_iter()
            .map(|(u, v, w)| Edge::new(u, v, w))
            .collect();
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.u, e.v, e.weight * factor))
            .collect();
        Self::new(self.n, edges)
    }

    /// Component label per vertex (labels are `0..k` in order of first vertex).
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.u);
            let b = find(&mut parent, e.v);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        (0..self.n)
            .map(|v| {
                let root = find(&mut parent, v);
                if label[root] == usize::MAX {
                    label[root] = next;
                    next += 1;
                }
                label[root]
            })
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |c| c + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Σ_c (n_c − 1), the rank of the Laplacian.
    pub fn laplacian_rank(&self) -> usize {
        self.n - self.component_count()
    }
}

/// Sparse symmetric Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: CsrMatrix<f64>,
}

impl Laplacian {
    pub(crate) fn from_weighted_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        // merge parallel edges first so both triangles sum in the same order
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut degree = vec![0.0; n];
        for (a, b, w) in pairs {
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
            degree[a] += w;
            degree[b] += w;
        }
        let mut coo = CooMatrix::new(n, n);
        for (v, &d) in degree.iter().enumerate() {
            if d != 0.0 {
                coo.push(v, v, d);
            }
        }
        for (&(a, b), &w) in &merged {
            coo.push(a, b, -w);
            coo.push(b, a, -w);
        }
        Laplacian {
            matrix: CsrMatrix::from(&coo),
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn csr(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from(&self.matrix)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n(), "dimension mismatch in Laplacian product");
        self.matrix
            .row_iter()
            .map(|row| {
                row.col_indices()
                    .iter()
                    .zip(row.values())
                    .map(|(&j, &a)| a * x[j])
                    .sum()
            })
            .collect()
    }

    /// `xᵀ L x` evaluated through the matrix entries.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `L_ij = −Σ w_ij` off the diagonal, weighted degree on it. Parallel edges sum.
pub fn laplacian_of(g: &WeightedGraph) -> Laplacian {
    Laplacian::from_weighted_pairs(
        g.n(),
        g.edges().iter().map(|e| (e.u, e.v, e.weight)),
    )
}

/// The factors `B` (m×n signed incidence), `W` (edge weights) and
/// `Φ = W^{1/2} B` of a graph.
///
/// Row `i` of `B` is `e_a − e_b` with `a = min(u_i, v_i)`, `b = max(u_i, v_i)`.
#[derive(Debug, Clone)]
pub struct IncidenceFactors {
    n: usize,
    endpoints: Vec<(usize, usize)>,
    incidence: CsrMatrix<f64>,
    weights: Vec<f64>,
}

pub fn incidence_factors(g: &WeightedGraph) -> IncidenceFactors {
    let endpoints: Vec<(usize, usize)> = g.edges().iter().map(Edge::oriented).collect();
    let mut coo = CooMatrix::new(g.m(), g.n());
    for (i, &(a, b)) in endpoints.iter().enumerate() {
        coo.push(i, a, 1.0);
        coo.push(i, b, -1.0);
    }
    IncidenceFactors {
        n: g.n(),
        endpoints,
        incidence: CsrMatrix::from(&coo),
        weights: g.weights(),
    }
}

impl IncidenceFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    /// Signed incidence matrix `B`.
    pub fn incidence(&self) -> &CsrMatrix<f64> {
        &self.incidence
    }

    /// Diagonal of `W`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(+1 column, −1 column)` of each incidence row.
    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    /// Dense `Φ = W^{1/2} B`.
    pub fn phi_dense(&self) -> DMatrix<f64> {
        let mut phi = DMatrix::zeros(self.m(), self.n);
        for (i, (&(a, b), &w)) in self.endpoints.iter().zip(&self.weights).enumerate() {
            let s = w.sqrt();
            phi[(i, a)] = s;
            phi[(i, b)] = -s;
        }
        phi
    }

    /// `Φ x`, one entry per edge.
    pub fn apply_phi(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch in Φx");
        self.endpoints
            .iter()
            .zip(&self.weights)
            .map(|(&(a, b), &w)| w.sqrt() * (x[a] - x[b]))
            .collect()
    }

    /// `Bᵀ diag(W) B` assembled from the incidence rows.
    pub fn laplacian(&self) -> Laplacian {
        let bt = self.incidence.transpose();
        let mut wb = self.incidence.clone();
        for (mut row, &w) in wb.row_iter_mut().zip(&self.weights) {
            for v in row.values_mut() {
                *v *= w;
            }
        }
        Laplacian { matrix: &bt * &wb }
    }
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| GraphError::parse(line, format!("cannot parse {what} from '{tok}'")))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), GraphError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(GraphError::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        })
}

/// Reads the edge-list format. Edge order follows the file.
pub fn load_graph<R: BufRead>(reader: R) -> Result<WeightedGraph, GraphError> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| GraphError::parse(1, "missing header 'n m'"))?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_field(toks.next(), hline, "vertex count")?;
    let m: usize = parse_field(toks.next(), hline, "edge count")?;
    if toks.next().is_some() {
        return Err(GraphError::parse(hline, "header has trailing fields"));
    }
    if n < 2 {
        return Err(GraphError::parse(hline, format!("vertex count must be at least 2, got {n}")));
    }

    let mut edges = Vec::with_capacity(m);
    let mut last_line = hline;
    for item in lines {
        let (line, text) = item?;
        last_line = line;
        if edges.len() == m {
            return Err(GraphError::parse(line, format!("more than {m} edge lines")));
        }
        let mut toks = text.split_whitespace();
        let u: usize = parse_field(toks.next(), line, "vertex u")?;
        let v: usize = parse_field(toks.next(), line, "vertex v")?;
        let w: f64 = parse_field(toks.next(), line, "weight")?;
        if toks.next().is_some() {
            return Err(GraphError::parse(line, "edge line has trailing fields"));
        }
        let e = Edge::new(u, v, w);
        if u == v {
            return Err(GraphError::parse(line, format!("self-loop at line {line}")));
        }
        check_edge(n, &e).map_err(|msg| GraphError::parse(line, msg))?;
        edges.push(e);
    }
    if edges.len() != m {
        return Err(GraphError::parse(
            last_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    WeightedGraph::new(n, edges)
}

pub fn load_graph_file(path: impl AsRef<Path>) -> Result<WeightedGraph, GraphError> {
    load_graph(BufReader::new(File::open(path)?))
}

/// Writes the edge-list format; weights use the shortest round-trip decimal.
pub fn write_graph<W: Write>(g: &WeightedGraph, mut out: W) -> io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(s, "{} {} {:?}", e.u, e.v, e.weight);
    }
    out.write_all(s.as_bytes())
}

pub fn load_vector<R: BufRead>(reader: R) -> Result<Vec<f64>, GraphError> {
    content_lines(reader)
        .map(|item| {
            let (line, text) = item?;
            let x: f64 = text
                .parse()
                .map_err(|_| GraphError::parse(line, format!("cannot parse number from '{text}'")))?;
            if !x.is_finite() {
                return Err(GraphError::parse(line, "non-finite entry"));
            }
            Ok(x)
        })
        .collect()
}

pub fn load_vector_file(path: impl AsRef<Path>) -> Result<Vec<f64>, GraphError> {
    load_vector(BufReader::new(File::open(path)?))
}

pub fn write_vector<W: Write>(x: &[f64], mut out: W) -> io::Result<()> {
    let mut s = String::new();
    for v in x {
        let _ = writeln!(s, "{v:?}");
    }
    out.write_all(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(l: &Laplacian) -> Vec<Vec<f64>> {
        let d = l.to_dense();
        (0..d.nrows())
            .map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect())
            .collect()
    }

    #[test]
    fn load_single_edge() {
        let g = load_graph("2 1\n0 1 1.0".as_bytes()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[Edge::new(0, 1, 1.0)]);
    }

    #[test]
    fn load_triangle_with_comments() {
        let g = load_graph("# unit triangle\n3 3\n0 1 1\n# edge two\n1 2 1\n0 2 1\n".as_bytes()).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.edges()[2], Edge::new(0, 2, 1.0));
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let err = load_graph("2 1\n0 0 1.0".as_bytes()).unwrap_err();
        match err {
            GraphError::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("self-loop"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("3 2\n0 1 1\n1 2 -1\n", 3),
            ("3 2\n0 1 1\n1 5 1\n", 3),
            ("3 2\n0 1 x\n1 2 1\n", 2),
            ("3 2\n0 1 0\n1 2 1\n", 2),
            ("3 2\n0 1 1\n", 2),
            ("3 1\n0 1 1\n1 2 1\n", 3),
            ("three 1\n0 1 1\n", 1),
        ];
        for (text, want) in cases {
            match load_graph(text.as_bytes()) {
                Err(GraphError::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn incidence_orientation() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 1.0)]).unwrap();
        let f = incidence_factors(&g);
        let b = DMatrix::from(f.incidence());
        assert_eq!(b, DMatrix::from_row_slice(1, 2, &[1.0, -1.0]));
        assert_eq!(f.weights(), &[1.0]);

        let g = WeightedGraph::from_triples(3, [(2, 0, 3.0)]).unwrap();
        let f = incidence_factors(&g);
        let b = DMatrix::from(f.incidence());
        assert_eq!(b, DMatrix::from_row_slice(1, 3, &[1.0, 0.0, -1.0]));
        assert_eq!(f.weights(), &[3.0]);
    }

    #[test]
    fn triangle_btb() {
        let g = WeightedGraph::from_triples(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let b = DMatrix::from(incidence_factors(&g).incidence());
        let btb = b.transpose() * &b;
        let want = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        assert_eq!(btb, want);
    }

    #[test]
    fn laplacian_examples() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(dense(&laplacian_of(&g)), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);

        let g = WeightedGraph::from_triples(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(
            dense(&laplacian_of(&g)),
            vec![vec![2.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]]
        );

        let g = WeightedGraph::from_triples(3, [(0, 1, 2.0), (1, 2, 3.0)]).unwrap();
        assert_eq!(
            dense(&laplacian_of(&g)),
            vec![vec![2.0, -2.0, 0.0], vec![-2.0, 5.0, -3.0], vec![0.0, -3.0, 3.0]]
        );
    }

    #[test]
    fn parallel_edges_sum() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 1.5), (1, 0, 2.5)]).unwrap();
        assert_eq!(incidence_factors(&g).m(), 2);
        assert_eq!(dense(&laplacian_of(&g)), vec![vec![4.0, -4.0], vec![-4.0, 4.0]]);
    }

    #[test]
    fn components_of_disjoint_edges() {
        let g = WeightedGraph::from_triples(5, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.components(), vec![0, 0, 1, 1, 2]);
        assert_eq!(g.laplacian_rank(), 2);
        assert!(!g.is_connected());
    }

    #[test]
    fn invalid_constructions() {
        assert!(WeightedGraph::from_triples(1, []).is_err());
        assert!(WeightedGraph::from_triples(2, [(0, 1, f64::NAN)]).is_err());
        assert!(WeightedGraph::from_triples(2, [(0, 1, f64::INFINITY)]).is_err());
        assert!(WeightedGraph::from_triples(2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn vector_io() {
        let x = vec![0.1, -2.5, 1e-300, 3.0];
        let mut buf = Vec::new();
        write_vector(&x, &mut buf).unwrap();
        assert_eq!(load_vector(buf.as_slice()).unwrap(), x);
        assert!(matches!(
            load_vector("1\nfoo\n".as_bytes()),
            Err(GraphError::Parse { line: 2, .. })
        ));
    }
}
