//! Dense comparison operators for signed-graph clustering: the signed ratio
//! and balance ratio Laplacians with their normalizations, arithmetic and
//! geometric mean Laplacians, and the Bethe Hessian.
//!
//! Definitions, with `D+`, `D-` the layer degree matrices and
//! `Dbar = D+ + D-`:
//!
//! ```text
//! L_SR = Dbar - W+ + W-          L_SN = Dbar^(-1/2) L_SR Dbar^(-1/2)
//! L_BR = D+   - W+ + W-          L_BN = Dbar^(-1/2) L_BR Dbar^(-1/2)
//! L_AM = L_sym^+ + Q_sym^-       L_GM = L_sym^+ # Q_sym^-
//! H    = (alpha - 1) I - sqrt(alpha) (W+ - W-) + Dbar
//! ```
//!
//! where `alpha` is the average node degree of `Dbar`. The Bethe Hessian is
//! deliberately indefinite: its informative eigenvectors are the ones with
//! negative eigenvalues, and clustering takes the `k-1` most negative.

use crate::dense::{geometric_mean, SymMatrix};
use crate::error::{Error, Result};
use crate::graph::{Layer, SignedGraph};
use crate::means::{Power, PowerParam};
use crate::scalar::Real;

/// The four signed Laplacian variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignedVariant {
    Sr,
    Sn,
    Br,
    Bn,
}

/// Clustering method selector; the CLI names are `pm:<p>`, `sn`, `bn`,
/// `am`, `gm`, `bethe`.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec<F> {
    PowerMean { param: PowerParam<F>, matrix_free: bool },
    Sn,
    Bn,
    Am,
    Gm { shift: F },
    Bethe,
}

/// Default shift applied to the geometric mean factors when one of them is
/// numerically singular.
pub const GM_DEFAULT_SHIFT: f64 = 1e-6;

impl<F: Real> MethodSpec<F> {
    /// Parses a CLI method string. Power means get the experiment default
    /// shift `log10(1+|p|) + 1e-6` and the dense path; callers override
    /// both as needed.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "sn" => return Ok(MethodSpec::Sn),
            "bn" => return Ok(MethodSpec::Bn),
            "am" => return Ok(MethodSpec::Am),
            "gm" => return Ok(MethodSpec::Gm { shift: F::real(GM_DEFAULT_SHIFT) }),
            "bethe" => return Ok(MethodSpec::Bethe),
            _ => {}
        }
        if let Some(p_str) = lower.strip_prefix("pm:") {
            let power = match p_str {
                "inf" | "+inf" => {
                    return Err(Error::UnsupportedPower(
                        "pm:inf exists only in the recovery predicates; use a large finite p".into(),
                    ))
                }
                "-inf" => {
                    return Err(Error::UnsupportedPower(
                        "pm:-inf exists only in the recovery predicates; use a large negative p".into(),
                    ))
                }
                _ => p_str.parse::<f64>().map_err(|_| {
                    Error::Parameter(format!("invalid power mean exponent {p_str:?}"))
                })?,
            };
            if !power.is_finite() {
                return Err(Error::Parameter(format!("non-finite exponent {p_str:?}")));
            }
            return Ok(MethodSpec::PowerMean {
                param: PowerParam::with_default_shift(F::real(power)),
                matrix_free: false,
            });
        }
        Err(Error::Parameter(format!(
            "unknown method {s:?}; expected pm:<p>, sn, bn, am, gm, or bethe"
        )))
    }

    /// Canonical CLI name.
    pub fn name(&self) -> String {
        match self {
            MethodSpec::PowerMean { param, .. } => match param.p {
                Power::Finite(p) => format!("pm:{p}"),
                Power::PosInf => "pm:inf".into(),
                Power::NegInf => "pm:-inf".into(),
            },
            MethodSpec::Sn => "sn".into(),
            MethodSpec::Bn => "bn".into(),
            MethodSpec::Am => "am".into(),
            MethodSpec::Gm { .. } => "gm".into(),
            MethodSpec::Bethe => "bethe".into(),
        }
    }
}

fn degree_checked<F: Real>(g: &SignedGraph<F>) -> Result<(Vec<F>, Vec<F>, Vec<F>)> {
    let deg = g.degrees();
    for (v, &d) in deg.d_bar.iter().enumerate() {
        if d <= F::zero() {
            return Err(Error::DegenerateDegree { vertex: v, layer: "combined" });
        }
    }
    Ok((deg.d_pos, deg.d_neg, deg.d_bar))
}

/// Dense signed ratio / balance ratio Laplacians and their normalized forms.
pub fn build_signed_laplacian<F: Real>(
    g: &SignedGraph<F>,
    variant: SignedVariant,
) -> Result<SymMatrix<F>> {
    let n = g.vertex_count();
    let (d_pos, _d_neg, d_bar) = degree_checked(g)?;
    let mut m = SymMatrix::zeros(n);
    for v in 0..n {
        let diag = match variant {
            SignedVariant::Sr | SignedVariant::Sn => d_bar[v],
            SignedVariant::Br | SignedVariant::Bn => d_pos[v],
        };
        m.set_sym(v, v, diag);
    }
    for (i, j, w) in g.positive().upper_edges(n) {
        let prev = m.get(i, j);
        m.set_sym(i, j, prev - w);
    }
    for (i, j, w) in g.negative().upper_edges(n) {
        let prev = m.get(i, j);
        m.set_sym(i, j, prev + w);
    }
    match variant {
        SignedVariant::Sr | SignedVariant::Br => Ok(m),
        SignedVariant::Sn | SignedVariant::Bn => {
            let inv_sqrt: Vec<F> = d_bar.iter().map(|&d| F::one() / d.sqrt()).collect();
            let mut out = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    out.set_sym(i, j, m.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
                }
            }
            Ok(out)
        }
    }
}

/// Arithmetic mean Laplacian `L_AM = L_sym^+ + Q_sym^-` (twice the power
/// mean at `p = 1`; same eigenvectors, eigenvalues scaled by two).
pub fn build_am<F: Real>(g: &SignedGraph<F>) -> Result<SymMatrix<F>> {
    let pos = g.layer_operator(Layer::PositiveLaplacian, F::zero())?.dense_matrix();
    let neg = g.layer_operator(Layer::NegativeSignless, F::zero())?.dense_matrix();
    pos.add(&neg)
}

/// Geometric mean Laplacian `L_GM = L_sym^+ # Q_sym^-`.
///
/// The normalized Laplacian factor is singular by construction, so whenever
/// a factor's smallest eigenvalue falls below `1e-10` both factors are
/// shifted by `shift` before the mean.
pub fn build_gm<F: Real>(g: &SignedGraph<F>, shift: F) -> Result<SymMatrix<F>> {
    let pos = g.layer_operator(Layer::PositiveLaplacian, F::zero())?.dense_matrix();
    let neg = g.layer_operator(Layer::NegativeSignless, F::zero())?.dense_matrix();
    let tol = F::real(1e-10);
    let min_pos = crate::dense::eigh(&pos)?.values[0];
    let min_neg = crate::dense::eigh(&neg)?.values[0];
    if min_pos < tol || min_neg < tol {
        let a = pos.add_scaled_identity(shift);
        let b = neg.add_scaled_identity(shift);
        geometric_mean(&a, &b)
    } else {
        geometric_mean(&pos, &neg)
    }
}

/// Bethe Hessian with its eigenvector-selection metadata.
#[derive(Debug, Clone)]
pub struct BetheMatrix<F> {
    pub matrix: SymMatrix<F>,
    /// Average node degree used in the construction.
    pub alpha: F,
}

impl<F> BetheMatrix<F> {
    /// Selection rule: the eigenvectors of the `k-1` most negative
    /// eigenvalues carry the cluster signal for a `k`-way split.
    pub fn informative_count(&self, k: usize) -> usize {
        k.saturating_sub(1)
    }
}

/// Dense Bethe Hessian `H = (alpha-1) I - sqrt(alpha) (W+ - W-) + Dbar`.
///
/// An empty graph has `alpha = 0` and is rejected: the construction
/// degenerates and carries no signal.
pub fn build_bethe<F: Real>(g: &SignedGraph<F>) -> Result<BetheMatrix<F>> {
    let n = g.vertex_count();
    let deg = g.degrees();
    let total: F = deg.d_bar.iter().copied().sum();
    if total <= F::zero() || n == 0 {
        return Err(Error::ZeroAverageDegree);
    }
    let alpha = total / F::real(n as f64);
    let sqrt_alpha = alpha.sqrt();
    let mut m = SymMatrix::zeros(n);
    for v in 0..n {
        m.set_sym(v, v, alpha - F::one() + deg.d_bar[v]);
    }
    for (i, j, w) in g.positive().upper_edges(n) {
        let prev = m.get(i, j);
        m.set_sym(i, j, prev - sqrt_alpha * w);
    }
    for (i, j, w) in g.negative().upper_edges(n) {
        let prev = m.get(i, j);
        m.set_sym(i, j, prev + sqrt_alpha * w);
    }
    Ok(BetheMatrix { matrix: m, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::eigh;
    use crate::graph::from_edge_list;
    use std::io::Cursor;

    fn g(text: &str) -> SignedGraph<f64> {
        from_edge_list(Cursor::new(text)).unwrap()
    }

    #[test]
    fn sr_of_single_positive_edge() {
        let m = build_signed_laplacian(&g("0 1 1\n"), SignedVariant::Sr).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), -1.0);
    }

    #[test]
    fn sr_of_single_negative_edge_is_psd_with_zero() {
        let m = build_signed_laplacian(&g("0 1 -1\n"), SignedVariant::Sr).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 1.0);
        let e = eigh(&m).unwrap();
        assert!(e.values[0].abs() < 1e-12);
        assert!((e.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sn_zero_eigenvalue_iff_two_balanced() {
        // two positive cliques joined by negative edges: 2-balanced
        let balanced = g("0 1 1\n2 3 1\n0 2 -1\n1 3 -1\n0 3 -1\n");
        let m = build_signed_laplacian(&balanced, SignedVariant::Sn).unwrap();
        let e = eigh(&m).unwrap();
        assert!(e.values[0].abs() < 1e-10, "smallest {}", e.values[0]);

        // a negative edge inside a positive triangle breaks balance
        let frustrated = g("0 1 1\n1 2 1\n0 2 -1\n0 1 -0.5\n1 2 -0.5\n");
        let m = build_signed_laplacian(&frustrated, SignedVariant::Sn).unwrap();
        let e = eigh(&m).unwrap();
        assert!(e.values[0] > 1e-4, "smallest {}", e.values[0]);
    }

    #[test]
    fn sr_equals_unnormalized_arithmetic_sum() {
        // L_SR = L+ + Q- entrywise
        let graph = g("0 1 1\n1 2 -2\n0 2 0.5\n");
        let sr = build_signed_laplacian(&graph, SignedVariant::Sr).unwrap();
        let n = graph.vertex_count();
        let deg = graph.degrees();
        let mut lp = SymMatrix::zeros(n);
        for v in 0..n {
            lp.set_sym(v, v, deg.d_pos[v]);
        }
        for (i, j, w) in graph.positive().upper_edges(n) {
            lp.set_sym(i, j, lp.get(i, j) - w);
        }
        let mut qn = SymMatrix::zeros(n);
        for v in 0..n {
            qn.set_sym(v, v, deg.d_neg[v]);
        }
        for (i, j, w) in graph.negative().upper_edges(n) {
            qn.set_sym(i, j, qn.get(i, j) + w);
        }
        let sum = lp.add(&qn).unwrap();
        assert!(sr.sub(&sum).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn zero_total_degree_rejected() {
        let graph = g("# n=3\n0 1 1\n");
        assert!(matches!(
            build_signed_laplacian(&graph, SignedVariant::Sn),
            Err(Error::DegenerateDegree { vertex: 2, .. })
        ));
    }

    #[test]
    fn am_is_twice_the_unit_power_mean() {
        let graph = g("0 1 1\n1 2 1\n0 2 -1\n1 2 -1\n0 1 -1\n2 0 1\n");
        let am = build_am(&graph).unwrap();
        let m1 = crate::means::dense_spm_laplacian(
            &graph,
            &crate::means::PowerParam::unchecked(Power::Finite(1.0), 0.0),
        )
        .unwrap();
        assert!(am.sub(&m1.scale(2.0)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn signed_laplacians_are_psd_on_random_graphs() {
        // SR and SN stay positive semidefinite on block model draws
        let params = crate::ssbm::SsbmParams::new(2, 12, 0.5, 0.3, 0.3, 0.5).unwrap();
        for seed in 0..6u64 {
            let s = crate::ssbm::sample(&params, 700 + seed).unwrap();
            if !s.graph.isolated_vertices().is_empty() {
                continue;
            }
            for variant in [SignedVariant::Sr, SignedVariant::Sn] {
                let m = build_signed_laplacian(&s.graph, variant).unwrap();
                let min = eigh(&m).unwrap().values[0];
                assert!(min >= -1e-10, "seed {seed}, {variant:?}: min eigenvalue {min}");
            }
        }
    }

    #[test]
    fn am_spectrum_within_zero_four() {
        let graph = g("0 1 1\n1 2 1\n0 2 -1\n1 2 -1\n0 1 -1\n2 0 1\n");
        let m = build_am(&graph).unwrap();
        let e = eigh(&m).unwrap();
        assert!(e.values[0] > -1e-12);
        assert!(*e.values.last().unwrap() < 4.0 + 1e-12);
    }

    #[test]
    fn bethe_alpha_one_equals_sr() {
        // P2 with one positive and one negative edge on disjoint pairs:
        // total degree sum = 4 over 4 vertices, alpha = 1
        let graph = g("0 1 1\n2 3 -1\n");
        let bethe = build_bethe(&graph).unwrap();
        assert!((bethe.alpha - 1.0).abs() < 1e-15);
        let sr = build_signed_laplacian(&graph, SignedVariant::Sr).unwrap();
        assert!(bethe.matrix.sub(&sr).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn bethe_rejects_empty_graph() {
        let graph = g("# n=4\n");
        assert!(matches!(build_bethe(&graph), Err(Error::ZeroAverageDegree)));
    }

    #[test]
    fn bethe_selection_count() {
        let graph = g("0 1 1\n");
        let bethe = build_bethe(&graph).unwrap();
        assert_eq!(bethe.informative_count(4), 3);
    }

    #[test]
    fn method_parsing() {
        assert!(matches!(MethodSpec::<f64>::parse("sn").unwrap(), MethodSpec::Sn));
        assert!(matches!(MethodSpec::<f64>::parse("BETHE").unwrap(), MethodSpec::Bethe));
        match MethodSpec::<f64>::parse("pm:-10").unwrap() {
            MethodSpec::PowerMean { param, matrix_free } => {
                assert_eq!(param.p, Power::Finite(-10.0));
                assert!((param.shift - (11f64.log10() + 1e-6)).abs() < 1e-12);
                assert!(!matrix_free);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(MethodSpec::<f64>::parse("pm:argh").is_err());
        assert!(MethodSpec::<f64>::parse("pm:inf").is_err());
        assert!(MethodSpec::<f64>::parse("spectral").is_err());
    }
}
