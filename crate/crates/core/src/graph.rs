//! Signed graph data model and matrix-free layer operators.
//!
//! A signed graph is a pair of symmetric nonnegative adjacency layers over a
//! shared vertex set: `W+` holds attractive weights, `W-` repulsive ones. A
//! pair of vertices may carry an edge in both layers at once. The layer
//! operators expose `L_sym^+ + eps*I` (normalized Laplacian of the positive
//! layer) and `Q_sym^- + eps*I` (normalized signless Laplacian of the
//! negative layer) as `O(nnz)` matrix-vector products.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::dense::SymMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One symmetric sparse adjacency layer in compressed-row form. Both `(i,j)`
/// and `(j,i)` are stored, so row scans see every neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrLayer<F> {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<F>,
}

impl<F: Real> CsrLayer<F> {
    fn from_upper(n: usize, upper: &BTreeMap<(usize, usize), F>) -> Self {
        let mut counts = vec![0usize; n];
        for &(i, j) in upper.keys() {
            counts[i] += 1;
            counts[j] += 1;
        }
        let mut indptr = vec![0usize; n + 1];
        for i in 0..n {
            indptr[i + 1] = indptr[i] + counts[i];
        }
        let nnz = indptr[n];
        let mut indices = vec![0usize; nnz];
        let mut weights = vec![F::zero(); nnz];
        let mut cursor = indptr.clone();
        for (&(i, j), &w) in upper {
            indices[cursor[i]] = j;
            weights[cursor[i]] = w;
            cursor[i] += 1;
            indices[cursor[j]] = i;
            weights[cursor[j]] = w;
            cursor[j] += 1;
        }
        Self { indptr, indices, weights }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.nnz() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, F)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .zip(&self.weights[span])
            .map(|(&j, &w)| (j, w))
    }

    fn degrees(&self, n: usize) -> Vec<F> {
        let mut d = vec![F::zero(); n];
        for i in 0..n {
            for (_, w) in self.neighbors(i) {
                d[i] += w;
            }
        }
        d
    }

    /// Upper-triangle edges `(i, j, w)` with `i < j`, sorted.
    pub fn upper_edges(&self, n: usize) -> Vec<(usize, usize, F)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..n {
            for (j, w) in self.neighbors(i) {
                if i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

/// Two symmetric nonnegative sparse adjacency layers over a shared vertex
/// set. Immutable after construction; no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph<F> {
    n: usize,
    pos: CsrLayer<F>,
    neg: CsrLayer<F>,
}

/// Per-vertex degree sums of both layers.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeData<F> {
    pub d_pos: Vec<F>,
    pub d_neg: Vec<F>,
    pub d_bar: Vec<F>,
}

/// Which normalized layer operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// `L_sym^+ = I - (D+)^(-1/2) W+ (D+)^(-1/2)`
    PositiveLaplacian,
    /// `Q_sym^- = I + (D-)^(-1/2) W- (D-)^(-1/2)`
    NegativeSignless,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::PositiveLaplacian => "positive",
            Layer::NegativeSignless => "negative",
        }
    }
}

impl<F: Real> SignedGraph<F> {
    /// Builds from per-layer unordered edge weights (`i != j`, `w > 0`).
    /// Keys may come in either orientation; duplicates across orientations
    /// are resolved by the maximum.
    pub fn from_layer_maps(
        n: usize,
        pos: impl IntoIterator<Item = ((usize, usize), F)>,
        neg: impl IntoIterator<Item = ((usize, usize), F)>,
    ) -> Result<Self> {
        let canon = |m: BTreeMap<(usize, usize), F>| -> Result<BTreeMap<(usize, usize), F>> {
            let mut out = BTreeMap::new();
            for ((i, j), w) in m {
                if i == j {
                    return Err(Error::Parameter(format!("self-loop at vertex {i}")));
                }
                if i >= n || j >= n {
                    return Err(Error::Parameter(format!(
                        "edge ({i},{j}) out of range for n={n}"
                    )));
                }
                if !w.is_finite() || w <= F::zero() {
                    return Err(Error::Parameter(format!("invalid weight on edge ({i},{j})")));
                }
                let key = (i.min(j), i.max(j));
                let entry = out.entry(key).or_insert(F::zero());
                *entry = (*entry).max(w);
            }
            Ok(out)
        };
        let pos_map = canon(pos.into_iter().collect())?;
        let neg_map = canon(neg.into_iter().collect())?;
        Ok(Self {
            n,
            pos: CsrLayer::from_upper(n, &pos_map),
            neg: CsrLayer::from_upper(n, &neg_map),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn positive(&self) -> &CsrLayer<F> {
        &self.pos
    }

    pub fn negative(&self) -> &CsrLayer<F> {
        &self.neg
    }

    pub fn layer(&self, layer: Layer) -> &CsrLayer<F> {
        match layer {
            Layer::PositiveLaplacian => &self.pos,
            Layer::NegativeSignless => &self.neg,
        }
    }

    /// Exact per-vertex row sums of both layers.
    pub fn degrees(&self) -> DegreeData<F> {
        let d_pos = self.pos.degrees(self.n);
        let d_neg = self.neg.degrees(self.n);
        let d_bar = d_pos.iter().zip(&d_neg).map(|(&a, &b)| a + b).collect();
        DegreeData { d_pos, d_neg, d_bar }
    }

    /// Vertices with zero degree in at least one layer.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        let deg = self.degrees();
        (0..self.n)
            .filter(|&v| deg.d_pos[v] == F::zero() || deg.d_neg[v] == F::zero())
            .collect()
    }

    /// Restriction to the given (sorted, deduplicated) vertex subset.
    /// Returns the subgraph and the kept original vertex ids.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.iter().any(|&v| v >= self.n) {
            return Err(Error::Parameter("vertex out of range in subgraph".into()));
        }
        let mut remap = vec![usize::MAX; self.n];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let filter = |layer: &CsrLayer<F>| {
            let mut edges = Vec::new();
            for (i, j, w) in layer.upper_edges(self.n) {
                if remap[i] != usize::MAX && remap[j] != usize::MAX {
                    edges.push(((remap[i], remap[j]), w));
                }
            }
            edges
        };
        let sub = Self::from_layer_maps(kept.len(), filter(&self.pos), filter(&self.neg))?;
        Ok((sub, kept))
    }

    /// The shifted normalized operator of one layer.
    ///
    /// Every vertex must have strictly positive degree in that layer;
    /// `D^(-1/2)` is undefined otherwise and silently repairing it would
    /// distort the block-model experiments.
    pub fn layer_operator(&self, layer: Layer, shift: F) -> Result<LayerOperator<'_, F>> {
        let deg = self.layer(layer).degrees(self.n);
        let mut inv_sqrt = vec![F::zero(); self.n];
        for (v, &d) in deg.iter().enumerate() {
            if d <= F::zero() {
                return Err(Error::DegenerateDegree { vertex: v, layer: layer.name() });
            }
            inv_sqrt[v] = F::one() / d.sqrt();
        }
        Ok(LayerOperator { graph: self, layer, shift, inv_sqrt })
    }
}

/// Matrix-free `L_sym^+ + shift*I` or `Q_sym^- + shift*I`.
///
/// Application costs `O(nnz)`; the spectrum lies in `[shift, 2 + shift]`.
/// Pure and reentrant: concurrent applies on a shared graph are safe.
#[derive(Debug, Clone)]
pub struct LayerOperator<'g, F> {
    graph: &'g SignedGraph<F>,
    layer: Layer,
    shift: F,
    inv_sqrt: Vec<F>,
}

impl<'g, F: Real> LayerOperator<'g, F> {
    pub fn dim(&self) -> usize {
        self.graph.n
    }

    pub fn shift(&self) -> F {
        self.shift
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// `y = (I -/+ D^(-1/2) W D^(-1/2)) x + shift*x`.
    pub fn apply(&self, x: &[F], y: &mut [F]) {
        debug_assert_eq!(x.len(), self.graph.n);
        debug_assert_eq!(y.len(), self.graph.n);
        let csr = self.graph.layer(self.layer);
        let sign = match self.layer {
            Layer::PositiveLaplacian => -F::one(),
            Layer::NegativeSignless => F::one(),
        };
        let diag = F::one() + self.shift;
        for i in 0..self.graph.n {
            let mut acc = F::zero();
            for (j, w) in csr.neighbors(i) {
                acc += w * self.inv_sqrt[j] * x[j];
            }
            y[i] = diag * x[i] + sign * self.inv_sqrt[i] * acc;
        }
    }

    /// Owned-convenience wrapper over [`Self::apply`].
    pub fn apply_vec(&self, x: &[F]) -> Vec<F> {
        let mut y = vec![F::zero(); x.len()];
        self.apply(x, &mut y);
        y
    }

    /// Dense materialization with the identical spectrum; oracle only, the
    /// caller is responsible for the size being reasonable.
    pub fn dense_matrix(&self) -> SymMatrix<F> {
        let n = self.graph.n;
        let csr = self.graph.layer(self.layer);
        let sign = match self.layer {
            Layer::PositiveLaplacian => -F::one(),
            Layer::NegativeSignless => F::one(),
        };
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set_sym(i, i, F::one() + self.shift);
            for (j, w) in csr.neighbors(i) {
                if i < j {
                    m.set_sym(i, j, sign * w * self.inv_sqrt[i] * self.inv_sqrt[j]);
                }
            }
        }
        m
    }
}

/// Parses the "signed-edgelist v1" text format.
///
/// Lines are `<i> <j> <w>` with 0-based indices; positive weights feed the
/// positive layer, negative weights contribute `|w|` to the negative layer.
/// `#`-prefixed lines are comments, except an optional `# n=<N>` header
/// declaring the vertex count (otherwise inferred as max index + 1).
/// Repeated oriented records accumulate; the two orientations of a pair are
/// then reconciled by the per-layer maximum.
pub fn from_edge_list<F: Real>(reader: impl BufRead) -> Result<SignedGraph<F>> {
    let mut declared_n: Option<usize> = None;
    let mut pos: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut neg: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut max_index = 0usize;
    let mut saw_edge = false;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("n=") {
                let n: usize = v.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid vertex count {v:?}"),
                })?;
                declared_n = Some(n);
            }
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let mut next = |what: &str| {
            parts.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what}"),
            })
        };
        let i: usize = next("source index")?.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: "invalid source index".into(),
        })?;
        let j: usize = next("target index")?.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: "invalid target index".into(),
        })?;
        let w: f64 = next("weight")?.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: "invalid weight".into(),
        })?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: lineno, message: "trailing fields".into() });
        }
        if !w.is_finite() {
            return Err(Error::Parse { line: lineno, message: "non-finite weight".into() });
        }
        if w == 0.0 {
            return Err(Error::Parse { line: lineno, message: "zero weight".into() });
        }
        if i == j {
            return Err(Error::Parse { line: lineno, message: format!("self-loop at {i}") });
        }
        if let Some(n) = declared_n {
            if i >= n || j >= n {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("index out of range for n={n}"),
                });
            }
        }
        max_index = max_index.max(i).max(j);
        saw_edge = true;
        let target = if w > 0.0 { &mut pos } else { &mut neg };
        *target.entry((i, j)).or_insert(0.0) += w.abs();
    }

    let n = match declared_n {
        Some(n) => n,
        None if saw_edge => max_index + 1,
        None => {
            return Err(Error::Parse {
                line: 0,
                message: "empty input without a '# n=<N>' header".into(),
            })
        }
    };
    let conv = |m: BTreeMap<(usize, usize), f64>| {
        m.into_iter().map(|(k, w)| (k, F::real(w)))
    };
    SignedGraph::from_layer_maps(n, conv(pos), conv(neg))
}

/// Writes the canonical "signed-edgelist v1" form: `# n=<N>` header, then
/// edges sorted by `(min(i,j), max(i,j), layer)` with the positive layer
/// first; negative-layer weights are emitted with a minus sign.
pub fn write_edge_list<F: Real>(g: &SignedGraph<F>, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# n={}", g.n)?;
    let mut edges: Vec<(usize, usize, u8, F)> = Vec::new();
    for (i, j, wt) in g.pos.upper_edges(g.n) {
        edges.push((i, j, 0, wt));
    }
    for (i, j, wt) in g.neg.upper_edges(g.n) {
        edges.push((i, j, 1, wt));
    }
    edges.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    for (i, j, layer, wt) in edges {
        if layer == 0 {
            writeln!(w, "{i} {j} {wt}")?;
        } else {
            writeln!(w, "{i} {j} -{wt}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::eigh;
    use std::io::Cursor;

    type G = SignedGraph<f64>;

    fn parse(text: &str) -> Result<G> {
        from_edge_list(Cursor::new(text))
    }

    #[test]
    fn edge_list_layers_split_by_sign() {
        let g = parse("0 1 1.0\n1 2 -1.0\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.positive().edge_count(), 1);
        assert_eq!(g.negative().edge_count(), 1);
        assert_eq!(g.positive().upper_edges(3), vec![(0, 1, 1.0)]);
        assert_eq!(g.negative().upper_edges(3), vec![(1, 2, 1.0)]);
    }

    #[test]
    fn simultaneous_edges_allowed() {
        let g = parse("0 1 1.0\n0 1 -1.0\n").unwrap();
        assert_eq!(g.positive().edge_count(), 1);
        assert_eq!(g.negative().edge_count(), 1);
    }

    #[test]
    fn empty_input_with_header() {
        let g = parse("# n=3\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.positive().edge_count(), 0);
        let deg = g.degrees();
        assert!(deg.d_bar.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("0 0 1.0\n", 1),
            ("0 1 1.0\n1 2 nan\n", 2),
            ("# n=2\n0 5 1.0\n", 2),
            ("0 1 0.0\n", 1),
        ] {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "input {text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn asymmetric_records_resolve_by_max() {
        let g = parse("0 1 2.0\n1 0 3.0\n").unwrap();
        assert_eq!(g.positive().upper_edges(2), vec![(0, 1, 3.0)]);
    }

    #[test]
    fn accumulation_before_symmetrization() {
        // two records on the same orientation add up
        let g = parse("0 1 1.0\n0 1 1.5\n").unwrap();
        assert_eq!(g.positive().upper_edges(2), vec![(0, 1, 2.5)]);
    }

    #[test]
    fn degrees_of_triangle() {
        let g = parse("0 1 1\n1 2 1\n0 2 1\n").unwrap();
        let d = g.degrees();
        assert_eq!(d.d_pos, vec![2.0, 2.0, 2.0]);
        assert_eq!(d.d_neg, vec![0.0, 0.0, 0.0]);
        assert_eq!(d.d_bar, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn single_negative_edge_degrees() {
        let g = parse("0 1 -1\n").unwrap();
        assert_eq!(g.degrees().d_neg, vec![1.0, 1.0]);
    }

    #[test]
    fn dense_matrix_p2_laplacian() {
        let g = parse("0 1 1\n").unwrap();
        let op = g.layer_operator(Layer::PositiveLaplacian, 0.0).unwrap();
        let m = op.dense_matrix();
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((m.get(0, 1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_matrix_signless_p2() {
        let g = parse("0 1 -1\n").unwrap();
        let op = g.layer_operator(Layer::NegativeSignless, 0.0).unwrap();
        let m = op.dense_matrix();
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_degree_vertex_is_an_error() {
        let g = parse("# n=3\n0 1 1.0\n").unwrap();
        match g.layer_operator(Layer::PositiveLaplacian, 0.0) {
            Err(Error::DegenerateDegree { vertex: 2, layer: "positive" }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn harmonic_vector_annihilated() {
        // x = D^(1/2) 1 is in the kernel of L_sym on each connected graph
        let g = parse("0 1 1\n1 2 2\n0 2 1\n2 3 1\n").unwrap();
        let op = g.layer_operator(Layer::PositiveLaplacian, 0.0).unwrap();
        let d = g.degrees();
        let x: Vec<f64> = d.d_pos.iter().map(|&v| v.sqrt()).collect();
        let y = op.apply_vec(&x);
        assert!(y.iter().all(|&v| v.abs() < 1e-10));
    }

    #[test]
    fn shift_additivity() {
        let g = parse("0 1 1\n").unwrap();
        let base = g.layer_operator(Layer::PositiveLaplacian, 0.0).unwrap();
        let shifted = g.layer_operator(Layer::PositiveLaplacian, 1.0).unwrap();
        let x = vec![0.3, -0.7];
        let want: Vec<f64> = base.apply_vec(&x).iter().zip(&x).map(|(&l, &v)| l + v).collect();
        let got = shifted.apply_vec(&x);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn signless_bipartite_kernel() {
        // even cycle (bipartite): smallest eigenvalue of Q_sym is 0
        let even = parse("0 1 -1\n1 2 -1\n2 3 -1\n3 0 -1\n").unwrap();
        let op = even.layer_operator(Layer::NegativeSignless, 0.0).unwrap();
        let eig = eigh(&op.dense_matrix()).unwrap();
        assert!(eig.values[0].abs() < 1e-10);

        // odd cycle (not bipartite): strictly positive
        let odd = parse("0 1 -1\n1 2 -1\n2 0 -1\n").unwrap();
        let op = odd.layer_operator(Layer::NegativeSignless, 0.0).unwrap();
        let eig = eigh(&op.dense_matrix()).unwrap();
        assert!(eig.values[0] > 1e-6);
    }

    #[test]
    fn canonical_writer_round_trip() {
        let g = parse("2 1 -0.5\n0 1 1.25\n0 2 1.0\n0 2 -2.0\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# n=3\n0 1 1.25\n0 2 1\n0 2 -2\n1 2 -0.5\n");
        let back = parse(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn induced_subgraph_drops_isolated() {
        let g = parse("# n=4\n0 1 1\n0 1 -1\n2 0 1\n").unwrap();
        // vertex 3 isolated everywhere, vertex 2 isolated in negative layer
        assert_eq!(g.isolated_vertices(), vec![2, 3]);
        let keep: Vec<usize> = (0..4).filter(|v| !g.isolated_vertices().contains(v)).collect();
        let (sub, ids) = g.induced_subgraph(&keep).unwrap();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(sub.vertex_count(), 2);
        assert_eq!(sub.positive().edge_count(), 1);
        assert_eq!(sub.negative().edge_count(), 1);
    }
}
