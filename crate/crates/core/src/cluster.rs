//! Spectral clustering pipeline: eigenvector embedding, k-means, and the
//! clustering-error metric.
//!
//! The pipeline follows the one-parameter clustering algorithm: take the
//! `k'` eigenvectors designated by the method (`k' = k-1` for power means
//! with `p >= 1`, `k' = k` otherwise; the `k-1` most negative eigenvalues
//! for the Bethe Hessian; the bottom `k` for the remaining signed
//! Laplacians), embed each vertex as the corresponding row, and run k-means
//! with k-means++ seeding and restarts. Embedding rows are not row-normalized.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{build_am, build_bethe, build_gm, build_signed_laplacian, MethodSpec, SignedVariant};
use crate::dense::ColMat;
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::krylov::{bottom_eigs_dense, smallest_eigs_dense, smallest_eigs_matrix_free, KrylovOptions};
use crate::scalar::Real;

/// Cluster assignment, one index per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    assignments: Vec<usize>,
}

impl Labels {
    pub fn new(assignments: Vec<usize>) -> Self {
        Self { assignments }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.assignments[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignments
    }

    /// Number of distinct names assumed, `max + 1`.
    pub fn name_count(&self) -> usize {
        self.assignments.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// k-means controls.
#[derive(Debug, Clone, Copy)]
pub struct KmeansOptions<F> {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: F,
    pub seed: u64,
}

impl<F: Real> Default for KmeansOptions<F> {
    fn default() -> Self {
        Self { restarts: 10, max_iters: 300, tol: F::real(1e-9), seed: 0 }
    }
}

fn squared_distance<F: Real>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Lloyd's algorithm with k-means++ seeding and restarts; rows of `points`
/// are the samples. Returns the best-inertia assignment.
///
/// Empty clusters are repaired by reseeding at the point farthest from its
/// current centroid.
pub fn kmeans<F: Real>(points: &ColMat<F>, k: usize, opts: &KmeansOptions<F>) -> Result<Labels> {
    let n = points.rows();
    let d = points.cols();
    if d == 0 {
        return Err(Error::Parameter("k-means needs at least one coordinate".into()));
    }
    if k == 0 || n < k {
        return Err(Error::Parameter(format!("cannot split {n} points into {k} clusters")));
    }
    if opts.restarts == 0 {
        return Err(Error::Parameter("k-means needs at least one restart".into()));
    }
    let rows: Vec<Vec<F>> = (0..n).map(|i| points.row_vec(i)).collect();

    let mut best: Option<(F, Vec<usize>)> = None;
    for restart in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let (labels, inertia) = lloyd(&rows, k, opts, &mut rng);
        if best.as_ref().map_or(true, |(bi, _)| inertia < *bi) {
            best = Some((inertia, labels));
        }
    }
    let (_, labels) = best.expect("at least one restart");
    Ok(Labels::new(labels))
}

fn lloyd<F: Real>(
    rows: &[Vec<F>],
    k: usize,
    opts: &KmeansOptions<F>,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, F) {
    let n = rows.len();
    let d = rows[0].len();

    // k-means++ seeding
    let mut centroids: Vec<Vec<F>> = Vec::with_capacity(k);
    centroids.push(rows[rng.gen_range(0..n)].clone());
    let mut dist2: Vec<F> = rows.iter().map(|r| squared_distance(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: F = dist2.iter().copied().sum();
        let next = if total <= F::zero() {
            rng.gen_range(0..n)
        } else {
            let mut target = F::real(rng.gen::<f64>()) * total;
            let mut chosen = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centroids.push(rows[next].clone());
        for (i, r) in rows.iter().enumerate() {
            let nd = squared_distance(r, centroids.last().unwrap());
            if nd < dist2[i] {
                dist2[i] = nd;
            }
        }
    }

    let mut labels = vec![0usize; n];
    let mut inertia = F::infinity();
    for _iter in 0..opts.max_iters {
        // assignment step
        let mut new_inertia = F::zero();
        for (i, r) in rows.iter().enumerate() {
            let mut best_c = 0;
            let mut best_d = squared_distance(r, &centroids[0]);
            for (c, cen) in centroids.iter().enumerate().skip(1) {
                let dist = squared_distance(r, cen);
                if dist < best_d {
                    best_d = dist;
                    best_c = c;
                }
            }
            labels[i] = best_c;
            new_inertia += best_d;
        }
        debug_assert!(
            new_inertia <= inertia * (F::one() + F::real(1e-12)) || !inertia.is_finite(),
            "Lloyd iteration increased inertia"
        );
        inertia = new_inertia;

        // update step
        let mut sums = vec![vec![F::zero(); d]; k];
        let mut counts = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, &x) in sums[l].iter_mut().zip(r) {
                *s += x;
            }
        }
        // repair empty clusters at the farthest point from its centroid
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = squared_distance(&rows[a], &centroids[labels[a]]);
                        let db = squared_distance(&rows[b], &centroids[labels[b]]);
                        da.partial_cmp(&db).expect("finite distances")
                    })
                    .expect("nonempty rows");
                sums[c] = rows[far].clone();
                counts[c] = 1;
            }
        }
        let mut shift = F::zero();
        for c in 0..k {
            let inv = F::one() / F::real(counts[c] as f64);
            let new_c: Vec<F> = sums[c].iter().map(|&s| s * inv).collect();
            shift = shift.max(squared_distance(&new_c, &centroids[c]));
            centroids[c] = new_c;
        }
        if shift.sqrt() < opts.tol {
            break;
        }
    }
    // final assignment against the last centroids
    let mut final_inertia = F::zero();
    for (i, r) in rows.iter().enumerate() {
        let mut best_c = 0;
        let mut best_d = squared_distance(r, &centroids[0]);
        for (c, cen) in centroids.iter().enumerate().skip(1) {
            let dist = squared_distance(r, cen);
            if dist < best_d {
                best_d = dist;
                best_c = c;
            }
        }
        labels[i] = best_c;
        final_inertia += best_d;
    }
    (labels, final_inertia)
}

/// Minimum misclassified fraction over all matchings of predicted cluster
/// names to ground-truth names, resolved by Hungarian assignment on the
/// confusion matrix. Zero iff the partitions are identical; symmetric in
/// its arguments.
pub fn clustering_error(pred: &Labels, truth: &Labels) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: pred.len() });
    }
    let n = pred.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k = pred.name_count().max(truth.name_count());
    let mut confusion = vec![vec![0i64; k]; k];
    for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
        confusion[p][t] += 1;
    }
    let matched = hungarian_max(&confusion);
    Ok(1.0 - matched as f64 / n as f64)
}

/// Maximum-weight perfect matching on a square nonnegative matrix
/// (Hungarian algorithm with potentials, O(k^3)).
fn hungarian_max(weights: &[Vec<i64>]) -> i64 {
    let k = weights.len();
    if k == 0 {
        return 0;
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0);
    // convert to min-cost
    let cost: Vec<Vec<i64>> = weights
        .iter()
        .map(|row| row.iter().map(|&w| max_w - w).collect())
        .collect();
    // potentials over rows/columns, 1-indexed sentinel scheme
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut way = vec![0usize; k + 1];
    let mut assignment = vec![0usize; k + 1]; // column -> row
    for i in 1..=k {
        assignment[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = assignment[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[assignment[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assignment[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assignment[j0] = assignment[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0i64;
    for j in 1..=k {
        if assignment[j] != 0 {
            total += weights[assignment[j] - 1][j - 1];
        }
    }
    total
}

/// The spectral embedding a method designates: its eigenvector block and
/// the number of columns `k'`.
pub fn spectral_embedding<F: Real>(
    g: &SignedGraph<F>,
    method: &MethodSpec<F>,
    k: usize,
) -> Result<(ColMat<F>, usize)> {
    if k < 2 {
        return Err(Error::Parameter(format!("need k >= 2 clusters, got {k}")));
    }
    if k > g.vertex_count() {
        return Err(Error::Parameter(format!(
            "k={k} exceeds the vertex count {}",
            g.vertex_count()
        )));
    }
    let kopts = KrylovOptions::default();
    match method {
        MethodSpec::PowerMean { param, matrix_free } => {
            let k_prime = param.p.informative_count(k);
            let eigs = if *matrix_free {
                let p = param.p.as_negative_integer().ok_or_else(|| {
                    Error::UnsupportedPower(format!(
                        "matrix-free path needs a negative integer p, got {}",
                        param.p
                    ))
                })?;
                smallest_eigs_matrix_free(g, p, param.shift, k_prime, &kopts)?
            } else {
                smallest_eigs_dense(g, param, k_prime)?
            };
            Ok((eigs.vectors, k_prime))
        }
        MethodSpec::Sn => {
            let m = build_signed_laplacian(g, SignedVariant::Sn)?;
            let (_, vectors, _) = bottom_eigs_dense(&m, k, &kopts)?;
            Ok((vectors, k))
        }
        MethodSpec::Bn => {
            let m = build_signed_laplacian(g, SignedVariant::Bn)?;
            let (_, vectors, _) = bottom_eigs_dense(&m, k, &kopts)?;
            Ok((vectors, k))
        }
        MethodSpec::Am => {
            let m = build_am(g)?;
            let (_, vectors, _) = bottom_eigs_dense(&m, k, &kopts)?;
            Ok((vectors, k))
        }
        MethodSpec::Gm { shift } => {
            let m = build_gm(g, *shift)?;
            let (_, vectors, _) = bottom_eigs_dense(&m, k, &kopts)?;
            Ok((vectors, k))
        }
        MethodSpec::Bethe => {
            let bethe = build_bethe(g)?;
            let needed = k - 1;
            let (values, vectors, _) = bottom_eigs_dense(&bethe.matrix, needed, &kopts)?;
            let found = values.iter().filter(|&&v| v < F::zero()).count();
            if found < needed {
                return Err(Error::NoClusterSignal { found, needed });
            }
            Ok((vectors, needed))
        }
    }
}

/// End-to-end spectral clustering: designated eigenvectors, row embedding,
/// best-of-restarts k-means.
pub fn spectral_cluster<F: Real>(
    g: &SignedGraph<F>,
    method: &MethodSpec<F>,
    k: usize,
    opts: &KmeansOptions<F>,
) -> Result<Labels> {
    let (embedding, _k_prime) = spectral_embedding(g, method, k)?;
    kmeans(&embedding, k, opts)
}
