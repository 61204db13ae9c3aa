//! Signed stochastic block model laboratory: sampling, parameter mappings,
//! exact expected operators, and executable forms of the recovery and
//! concentration statements.
//!
//! The model plants `k` ground-truth clusters of equal size and draws each
//! unordered vertex pair independently per layer: probability `pin_pos` /
//! `pout_pos` of a positive edge inside / between clusters, `pin_neg` /
//! `pout_neg` for negative edges. Both layers may carry an edge on the same
//! pair. The expected adjacency matrices are block-constant, which makes
//! every expected operator diagonalizable in closed form over the
//! informative basis
//!
//! ```text
//! chi_1 = 1,   chi_i = (k-1) * 1_{C_i} - 1_{complement},  i = 2..k
//! ```
//!
//! and turns the recovery statements into scalar power mean inequalities:
//! the informative vectors occupy the bottom of the expected spectrum of
//! `L_p` exactly when `m_p(rho_pos_eps, rho_neg_eps) < 1 + eps`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::Labels;
use crate::dense::{ColMat, SymMatrix};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::means::{dense_power_mean, scalar_power_mean, Power, PowerParam};
use crate::scalar::Real;

/// Block model parameters: `k` clusters of `cluster_size` vertices each and
/// the four layer probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbmParams<F> {
    pub k: usize,
    pub cluster_size: usize,
    pub pin_pos: F,
    pub pout_pos: F,
    pub pin_neg: F,
    pub pout_neg: F,
}

impl<F: Real> SsbmParams<F> {
    pub fn new(
        k: usize,
        cluster_size: usize,
        pin_pos: F,
        pout_pos: F,
        pin_neg: F,
        pout_neg: F,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter(format!("need k >= 2 clusters, got {k}")));
        }
        if cluster_size < 1 {
            return Err(Error::Parameter("cluster size must be at least 1".into()));
        }
        for (name, p) in [
            ("pin_pos", pin_pos),
            ("pout_pos", pout_pos),
            ("pin_neg", pin_neg),
            ("pout_neg", pout_neg),
        ] {
            if !(p >= F::zero() && p <= F::one()) {
                return Err(Error::Parameter(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(Self { k, cluster_size, pin_pos, pout_pos, pin_neg, pout_neg })
    }

    pub fn n(&self) -> usize {
        self.k * self.cluster_size
    }

    /// Ground-truth label of a vertex.
    pub fn label_of(&self, v: usize) -> usize {
        v / self.cluster_size
    }

    /// Ground-truth assignment for all vertices.
    pub fn ground_truth(&self) -> Labels {
        Labels::new((0..self.n()).map(|v| self.label_of(v)).collect())
    }

    /// Expected degrees `delta± = |C| (p_in + (k-1) p_out)` per layer.
    pub fn expected_degrees(&self) -> (F, F) {
        let c = F::real(self.cluster_size as f64);
        let k1 = F::real((self.k - 1) as f64);
        (
            c * (self.pin_pos + k1 * self.pout_pos),
            c * (self.pin_neg + k1 * self.pout_neg),
        )
    }
}

/// Labelled block model: edges appear with probability `p_bar_in` /
/// `p_bar_out`, then receive a positive label with probability `mu_pos`
/// inside clusters and `nu_pos` between them (negative otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsbmParams<F> {
    pub p_bar_in: F,
    pub p_bar_out: F,
    pub mu_pos: F,
    pub nu_pos: F,
}

/// Censored block model: one edge probability and a sign-flip noise
/// `eta` in `[0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbmParams<F> {
    pub p_bar: F,
    pub eta: F,
}

/// The labelled model is the signed model with probabilities multiplied by
/// the label frequencies.
pub fn lsbm_to_ssbm<F: Real>(l: &LsbmParams<F>, k: usize, cluster_size: usize) -> Result<SsbmParams<F>> {
    for (name, v) in [
        ("p_bar_in", l.p_bar_in),
        ("p_bar_out", l.p_bar_out),
        ("mu_pos", l.mu_pos),
        ("nu_pos", l.nu_pos),
    ] {
        if !(v >= F::zero() && v <= F::one()) {
            return Err(Error::Parameter(format!("{name} = {v} outside [0, 1]")));
        }
    }
    SsbmParams::new(
        k,
        cluster_size,
        l.p_bar_in * l.mu_pos,
        l.p_bar_out * l.nu_pos,
        l.p_bar_in * (F::one() - l.mu_pos),
        l.p_bar_out * (F::one() - l.nu_pos),
    )
}

/// The censored model: equal edge probability, labels flipped with
/// probability `eta` (`mu+ = nu- = 1 - eta`).
pub fn cbm_to_ssbm<F: Real>(c: &CbmParams<F>, k: usize, cluster_size: usize) -> Result<SsbmParams<F>> {
    if !(c.eta >= F::zero() && c.eta <= F::real(0.5)) {
        return Err(Error::Parameter(format!("eta = {} outside [0, 0.5]", c.eta)));
    }
    lsbm_to_ssbm(
        &LsbmParams {
            p_bar_in: c.p_bar,
            p_bar_out: c.p_bar,
            mu_pos: F::one() - c.eta,
            nu_pos: c.eta,
        },
        k,
        cluster_size,
    )
}

/// A sampled graph with its planted assignment.
#[derive(Debug, Clone)]
pub struct SsbmSample<F> {
    pub graph: SignedGraph<F>,
    pub truth: Labels,
}

/// Draws one signed graph.
///
/// Each unordered pair gets its own ChaCha8 generator seeded with
/// `seed ^ (i*n + j)` (`i < j`), so per-edge draws do not depend on
/// iteration order; the first draw decides the positive layer, the second
/// the negative one. Deterministic for a fixed seed. Zero-degree vertices
/// are permitted here and detected downstream.
pub fn sample<F: Real>(params: &SsbmParams<F>, seed: u64) -> Result<SsbmSample<F>> {
    let n = params.n();
    let pin_pos = params.pin_pos.to_f64().unwrap_or(0.0);
    let pout_pos = params.pout_pos.to_f64().unwrap_or(0.0);
    let pin_neg = params.pin_neg.to_f64().unwrap_or(0.0);
    let pout_neg = params.pout_neg.to_f64().unwrap_or(0.0);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..n {
        let li = params.label_of(i);
        for j in (i + 1)..n {
            let same = li == params.label_of(j);
            let (p_pos, p_neg) = if same { (pin_pos, pin_neg) } else { (pout_pos, pout_neg) };
            if p_pos <= 0.0 && p_neg <= 0.0 {
                continue;
            }
            let pair_index = (i * n + j) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ pair_index);
            let u_pos: f64 = rng.gen();
            let u_neg: f64 = rng.gen();
            if u_pos < p_pos {
                pos.push(((i, j), F::one()));
            }
            if u_neg < p_neg {
                neg.push(((i, j), F::one()));
            }
        }
    }
    Ok(SsbmSample { graph: SignedGraph::from_layer_maps(n, pos, neg)?, truth: params.ground_truth() })
}

/// Closed-form expected model: block-constant adjacencies, normalized
/// operators, informative basis, and the layer eigenvalues on it.
#[derive(Debug, Clone)]
pub struct ExpectedModel<F> {
    pub params: SsbmParams<F>,
    /// `(p_in - p_out) / (p_in + (k-1) p_out)` per layer, before any shift.
    pub rho_pos: F,
    pub rho_neg: F,
    /// Eigenvalues of the expected adjacencies on `chi_1` and on
    /// `chi_2..chi_k`.
    pub adj_lambda1_pos: F,
    pub adj_lambda_i_pos: F,
    pub adj_lambda1_neg: F,
    pub adj_lambda_i_neg: F,
    /// Informative basis as raw (unnormalized) columns `chi_1..chi_k`.
    pub chi: ColMat<F>,
    /// Expected `L_sym^+` and `Q_sym^-` (dense, exact).
    pub lap_pos: SymMatrix<F>,
    pub q_neg: SymMatrix<F>,
}

/// Builds the expected operators exactly (block-constant, never sampled)
/// and verifies the eigen-relations on the informative basis to `1e-10`.
///
/// The expected adjacency keeps its diagonal (`p_in` on same-cluster pairs
/// including `i = i`), which is what makes the expected graph exactly
/// regular with degrees `delta±`.
pub fn expected_model<F: Real>(params: &SsbmParams<F>) -> Result<ExpectedModel<F>> {
    let n = params.n();
    let k = params.k;
    let (d_pos, d_neg) = params.expected_degrees();
    if d_pos <= F::zero() {
        return Err(Error::ZeroExpectedDegree { layer: "positive" });
    }
    if d_neg <= F::zero() {
        return Err(Error::ZeroExpectedDegree { layer: "negative" });
    }
    let c = F::real(params.cluster_size as f64);
    let k1 = F::real((k - 1) as f64);

    let rho_pos = (params.pin_pos - params.pout_pos) / (params.pin_pos + k1 * params.pout_pos);
    let rho_neg = (params.pin_neg - params.pout_neg) / (params.pin_neg + k1 * params.pout_neg);

    let lap_pos = SymMatrix::from_fn(n, |i, j| {
        let same = params.label_of(i) == params.label_of(j);
        let w = if same { params.pin_pos } else { params.pout_pos };
        let id = if i == j { F::one() } else { F::zero() };
        id - w / d_pos
    });
    let q_neg = SymMatrix::from_fn(n, |i, j| {
        let same = params.label_of(i) == params.label_of(j);
        let w = if same { params.pin_neg } else { params.pout_neg };
        let id = if i == j { F::one() } else { F::zero() };
        id + w / d_neg
    });

    let mut chi = ColMat::zeros(n, k);
    for v in 0..n {
        chi.col_mut(0)[v] = F::one();
    }
    for i in 1..k {
        let col = chi.col_mut(i);
        for (v, x) in col.iter_mut().enumerate() {
            *x = if v / params.cluster_size == i { k1 } else { -F::one() };
        }
    }

    let model = ExpectedModel {
        params: *params,
        rho_pos,
        rho_neg,
        adj_lambda1_pos: d_pos,
        adj_lambda_i_pos: c * (params.pin_pos - params.pout_pos),
        adj_lambda1_neg: d_neg,
        adj_lambda_i_neg: c * (params.pin_neg - params.pout_neg),
        chi,
        lap_pos,
        q_neg,
    };

    // Internal consistency: the informative basis diagonalizes both
    // operators with the closed-form eigenvalues.
    let tol = F::real(1e-10);
    let mut buf = vec![F::zero(); n];
    for i in 0..k {
        let chi_i = model.chi.col(i);
        let scale = chi_i.iter().fold(F::zero(), |m, &x| m.max(x.abs()));
        let lam_pos = if i == 0 { F::zero() } else { F::one() - rho_pos };
        model.lap_pos.matvec(chi_i, &mut buf);
        for (got, &x) in buf.iter().zip(chi_i) {
            if (*got - lam_pos * x).abs() > tol * scale {
                return Err(Error::Parameter(format!(
                    "expected positive operator failed its eigen-relation on chi_{}",
                    i + 1
                )));
            }
        }
        let lam_neg = if i == 0 { F::real(2.0) } else { F::one() + rho_neg };
        model.q_neg.matvec(chi_i, &mut buf);
        for (got, &x) in buf.iter().zip(chi_i) {
            if (*got - lam_neg * x).abs() > tol * scale {
                return Err(Error::Parameter(format!(
                    "expected negative operator failed its eigen-relation on chi_{}",
                    i + 1
                )));
            }
        }
    }
    Ok(model)
}

impl<F: Real> ExpectedModel<F> {
    /// Expected `L_p` as a dense matrix.
    pub fn spm_laplacian(&self, param: &PowerParam<F>) -> Result<SymMatrix<F>> {
        dense_power_mean(&self.lap_pos, &self.q_neg, param)
    }

    /// Orthonormal basis of the informative span: `chi_2..chi_k` when the
    /// constant vector is excluded (`p >= 1`), `chi_1..chi_k` otherwise.
    pub fn informative_basis(&self, skip_constant: bool) -> ColMat<F> {
        let n = self.chi.rows();
        let start = usize::from(skip_constant);
        let mut basis = ColMat::zeros(n, 0);
        for i in start..self.params.k {
            basis.push_col(self.chi.col(i));
        }
        basis.orthonormalize(0);
        basis
    }

    /// Closed-form eigenvalues of the expected `L_p`: on the constant
    /// vector, on the informative vectors, and on the rest of the spectrum.
    pub fn spm_eigenvalues(&self, p: Power<F>, shift: F) -> Result<(F, F, F)> {
        let two = F::real(2.0);
        let l1 = scalar_power_mean(p, shift, two + shift)?;
        let li = scalar_power_mean(p, F::one() - self.rho_pos + shift, F::one() + self.rho_neg + shift)?;
        Ok((l1, li, F::one() + shift))
    }

    /// Closed-form eigenvalues of the expected Bethe Hessian
    /// `(lambda_1, lambda_i, lambda_rest)` together with the expected
    /// average degree `alpha`.
    pub fn bethe_eigenvalues(&self) -> (F, F, F, F) {
        let alpha = self.adj_lambda1_pos + self.adj_lambda1_neg;
        let base = F::real(2.0) * alpha - F::one();
        let sq = alpha.sqrt();
        let mu1 = self.adj_lambda1_pos - self.adj_lambda1_neg;
        let mui = self.adj_lambda_i_pos - self.adj_lambda_i_neg;
        (base - sq * mu1, base - sq * mui, base, alpha)
    }
}

/// Evaluated recovery statement for one `(params, p, eps)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryReport<F> {
    pub rho_pos_eps: F,
    pub rho_neg_eps: F,
    pub m_value: F,
    pub threshold: F,
    pub recovered: bool,
    /// Spectral gap `(1 + eps) - m_p`; positive exactly when recovered.
    pub gap: F,
    pub k_prime: usize,
}

/// Whether the informative vectors occupy the bottom of the expected
/// spectrum: `m_p(1 - rho_pos + eps, 1 + rho_neg + eps) < 1 + eps`,
/// strictly. Requires `eps > 0` when `p <= 0` and positive expected degrees
/// in both layers.
pub fn recovery_predicate<F: Real>(
    params: &SsbmParams<F>,
    p: Power<F>,
    eps: F,
) -> Result<RecoveryReport<F>> {
    if p.requires_shift() && eps <= F::zero() {
        return Err(Error::ShiftRequired { shift: eps.to_f64().unwrap_or(f64::NAN) });
    }
    let (d_pos, d_neg) = params.expected_degrees();
    if d_pos <= F::zero() {
        return Err(Error::ZeroExpectedDegree { layer: "positive" });
    }
    if d_neg <= F::zero() {
        return Err(Error::ZeroExpectedDegree { layer: "negative" });
    }
    let k1 = F::real((params.k - 1) as f64);
    let rho_pos = (params.pin_pos - params.pout_pos) / (params.pin_pos + k1 * params.pout_pos);
    let rho_neg = (params.pin_neg - params.pout_neg) / (params.pin_neg + k1 * params.pout_neg);
    let rho_pos_eps = F::one() - rho_pos + eps;
    let rho_neg_eps = F::one() + rho_neg + eps;
    let m_value = scalar_power_mean(p, rho_pos_eps, rho_neg_eps)?;
    let threshold = F::one() + eps;
    let gap = threshold - m_value;
    Ok(RecoveryReport {
        rho_pos_eps,
        rho_neg_eps,
        m_value,
        threshold,
        recovered: m_value < threshold,
        gap,
        k_prime: p.informative_count(params.k),
    })
}

/// The two equivalent conditions for the normalized signed Laplacians to
/// carry the informative basis at the bottom of their expected spectrum:
/// `(p_in^- + (k-1) p_out^- < p_in^+ + (k-1) p_out^+,
///   p_in^- + p_out^+ < p_in^+ + p_out^-)`.
pub fn arithmetic_family_predicate<F: Real>(params: &SsbmParams<F>) -> (bool, bool) {
    let k1 = F::real((params.k - 1) as f64);
    let first =
        params.pin_neg + k1 * params.pout_neg < params.pin_pos + k1 * params.pout_pos;
    let second = params.pin_neg + params.pout_pos < params.pin_pos + params.pout_neg;
    (first, second)
}

/// Expected-case conditions for the Bethe Hessian: finite-size form and the
/// infinite-size limit.
///
/// Finite: `max{0, (2(d+ + d-) - 1) / (sqrt(d+ + d-) |C|)} <
/// (p_in^+ - p_out^+) - (p_in^- - p_out^-)` together with
/// `p_out^+ < p_out^-`; the limit replaces the first condition by
/// `p_in^- + p_out^+ < p_in^+ + p_out^-`.
pub fn bethe_predicate<F: Real>(params: &SsbmParams<F>) -> Result<(bool, bool)> {
    let (d_pos, d_neg) = params.expected_degrees();
    let total = d_pos + d_neg;
    if total <= F::zero() {
        return Err(Error::ZeroAverageDegree);
    }
    let c = F::real(params.cluster_size as f64);
    let lhs = ((F::real(2.0) * total - F::one()) / (total.sqrt() * c)).max(F::zero());
    let rhs = (params.pin_pos - params.pout_pos) - (params.pin_neg - params.pout_neg);
    let cond2 = params.pout_pos < params.pout_neg;
    let finite = lhs < rhs && cond2;
    let limit_cond1 = params.pin_neg + params.pout_pos < params.pin_pos + params.pout_neg;
    let limit = limit_cond1 && cond2;
    Ok((finite, limit))
}

/// Evaluated concentration statement for `||L_p - expected L_p||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBound<F> {
    pub c_p: F,
    pub delta_pos: F,
    pub delta_neg: F,
    pub degree_condition_met: bool,
    /// `C_p * m_|p|(sqrt(3 ln(8n/conf)/delta+), sqrt(3 ln(8n/conf)/delta-))^(1/|p|)`
    /// when the degree condition holds.
    pub bound: Option<F>,
    pub confidence: F,
}

/// The norm-concentration constant and bound for nonzero integer `p`:
/// `C_p = (2p)^(1/p) (2+eps)^(1-1/p)` for `p >= 1` and
/// `C_p = |2p|^(1/|p|) eps^-(3+1/|p|)` for `p <= -1`; the bound holds with
/// probability at least `1 - epsilon_conf` once both expected degrees
/// exceed `3 ln(8n/epsilon_conf)`.
///
/// This is the block model specialization. In the general inhomogeneous
/// model with per-pair edge probabilities, the same statement holds with
/// the minimum expected degrees `delta±` in place of the block expressions,
/// constants `C_p+ = p^(1/p) beta^(1-1/p)` and
/// `C_p- = |p|^(1/|p|) alpha^-(3+1/|p|)` for operator spectra confined to
/// `[alpha, beta]`, and an extra factor two inside the power mean; with
/// `alpha = eps` and `beta = 2 + eps` that factor folds into the constants
/// above. No sampler for arbitrary probability matrices is provided here.
pub fn concentration_bound<F: Real>(
    params: &SsbmParams<F>,
    p: i64,
    eps: F,
    epsilon_conf: F,
) -> Result<ConcentrationBound<F>> {
    if p == 0 {
        return Err(Error::UnsupportedPower("concentration bound needs p != 0".into()));
    }
    if !(epsilon_conf > F::zero() && epsilon_conf < F::one()) {
        return Err(Error::Parameter(format!(
            "confidence parameter {epsilon_conf} outside (0, 1)"
        )));
    }
    if eps <= F::zero() {
        return Err(Error::ShiftRequired { shift: eps.to_f64().unwrap_or(f64::NAN) });
    }
    let abs_p = F::real(p.unsigned_abs() as f64);
    let inv_abs = F::one() / abs_p;
    let two = F::real(2.0);
    let c_p = if p >= 1 {
        let pf = F::real(p as f64);
        (two * pf).powf(F::one() / pf) * (two + eps).powf(F::one() - F::one() / pf)
    } else {
        (two * abs_p).powf(inv_abs) * eps.powf(-(F::real(3.0) + inv_abs))
    };
    let (delta_pos, delta_neg) = params.expected_degrees();
    let n = F::real(params.n() as f64);
    let log_term = F::real(3.0) * (F::real(8.0) * n / epsilon_conf).ln();
    let degree_condition_met = delta_pos > log_term && delta_neg > log_term;
    let bound = if degree_condition_met {
        let gamma_pos = (log_term / delta_pos).sqrt();
        let gamma_neg = (log_term / delta_neg).sqrt();
        let mean = scalar_power_mean(Power::Finite(abs_p), gamma_pos, gamma_neg)?;
        Some(c_p * mean.powf(inv_abs))
    } else {
        None
    };
    Ok(ConcentrationBound {
        c_p,
        delta_pos,
        delta_neg,
        degree_condition_met,
        bound,
        confidence: F::one() - epsilon_conf,
    })
}

/// Bound on the eigenvector deviation `||V_ktilde - expected V_ktilde O||`:
/// `sqrt(8 ktilde) * C_p * m_|p|(...)^(1/|p|) / gap`, with
/// `ktilde = k - 1` for `p >= 1` and `k` for `p <= -1`.
///
/// Requires a positive spectral gap (recovery holds) and the degree
/// conditions.
pub fn eigenvector_bound<F: Real>(
    params: &SsbmParams<F>,
    p: i64,
    eps: F,
    epsilon_conf: F,
) -> Result<F> {
    let report = recovery_predicate(params, Power::Finite(F::real(p as f64)), eps)?;
    if report.gap <= F::zero() {
        return Err(Error::NonPositiveGap { gap: report.gap.to_f64().unwrap_or(f64::NAN) });
    }
    let conc = concentration_bound(params, p, eps, epsilon_conf)?;
    let bound = conc.bound.ok_or_else(|| {
        Error::Parameter("degree conditions unmet; eigenvector bound undefined".into())
    })?;
    let k_tilde = if p >= 1 { params.k - 1 } else { params.k };
    Ok((F::real(8.0) * F::real(k_tilde as f64)).sqrt() * bound / report.gap)
}

/// Constraint region for the proportion study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Both layers informative: assortative `W+` and disassortative `W-`.
    And,
    /// At least one layer informative.
    Or,
    /// Informative on average: `p_in^- + p_out^+ < p_in^+ + p_out^-`.
    Average,
    /// The whole parameter cube.
    All,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::And => "and",
            Scenario::Or => "or",
            Scenario::Average => "average",
            Scenario::All => "all",
        }
    }
}

/// A predicate participating in the proportion study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionMethod<F> {
    PowerMean { p: Power<F>, shift: F },
    /// The shared condition pair of the normalized signed Laplacians.
    ArithmeticFamily,
    /// Bethe Hessian, infinite-size form (the finite form depends on the
    /// graph size, which the proportion study abstracts away).
    BetheLimit,
}

enum PmMode<F> {
    SumLess(F),
    SumGreater(F),
    BothLess,
    EitherLess,
}

/// Fraction of the (midpoint-discretized) parameter region satisfying each
/// method's expected-recovery conditions, sharing one sweep over the grid.
///
/// Each probability axis takes `steps` midpoints `(i + 0.5)/steps`; the
/// scenario constraint restricts the counted region.
pub fn region_proportions_batch<F: Real>(
    methods: &[RegionMethod<F>],
    k: usize,
    steps: usize,
    scenario: Scenario,
) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Parameter("region grid needs at least 2 steps".into()));
    }
    if k < 2 {
        return Err(Error::Parameter("region study needs k >= 2".into()));
    }
    let k1 = F::real((k - 1) as f64);
    let grid: Vec<F> = (0..steps)
        .map(|i| F::real((i as f64 + 0.5) / steps as f64))
        .collect();

    // Per-pair precomputation over one layer's (p_in, p_out) grid.
    let pairs = steps * steps;
    let mut rho = vec![F::zero(); pairs];
    let mut strength = vec![F::zero(); pairs]; // p_in + (k-1) p_out
    let mut diff = vec![F::zero(); pairs]; // p_in - p_out
    let mut pouts = vec![F::zero(); pairs];
    for (a, &pin) in grid.iter().enumerate() {
        for (b, &pout) in grid.iter().enumerate() {
            let idx = a * steps + b;
            let s = pin + k1 * pout;
            strength[idx] = s;
            diff[idx] = pin - pout;
            pouts[idx] = pout;
            rho[idx] = (pin - pout) / s;
        }
    }

    // Per-method transformed side values.
    struct Prepared<F> {
        mode: PmMode<F>,
        fpos: Vec<F>,
        fneg: Vec<F>,
        bpos: Vec<bool>,
        bneg: Vec<bool>,
        kind: u8, // 0 = power mean, 1 = arithmetic family, 2 = bethe limit
    }
    let mut prepared: Vec<Prepared<F>> = Vec::with_capacity(methods.len());
    for method in methods {
        match *method {
            RegionMethod::PowerMean { p, shift } => {
                if p.requires_shift() && shift <= F::zero() {
                    return Err(Error::ShiftRequired {
                        shift: shift.to_f64().unwrap_or(f64::NAN),
                    });
                }
                let one = F::one();
                let xs_pos: Vec<F> = rho.iter().map(|&r| one - r + shift).collect();
                let xs_neg: Vec<F> = rho.iter().map(|&r| one + r + shift).collect();
                let t = one + shift;
                let (mode, fpos, fneg, bpos, bneg) = match p {
                    Power::PosInf => (
                        PmMode::BothLess,
                        vec![],
                        vec![],
                        xs_pos.iter().map(|&x| x < t).collect(),
                        xs_neg.iter().map(|&x| x < t).collect(),
                    ),
                    Power::NegInf => (
                        PmMode::EitherLess,
                        vec![],
                        vec![],
                        xs_pos.iter().map(|&x| x < t).collect(),
                        xs_neg.iter().map(|&x| x < t).collect(),
                    ),
                    Power::Finite(pf) if pf == F::zero() => (
                        PmMode::SumLess(F::real(2.0) * t.ln()),
                        xs_pos.iter().map(|&x| x.ln()).collect(),
                        xs_neg.iter().map(|&x| x.ln()).collect(),
                        vec![],
                        vec![],
                    ),
                    Power::Finite(pf) if pf > F::zero() => (
                        PmMode::SumLess(F::real(2.0) * t.powf(pf)),
                        xs_pos.iter().map(|&x| x.powf(pf)).collect(),
                        xs_neg.iter().map(|&x| x.powf(pf)).collect(),
                        vec![],
                        vec![],
                    ),
                    Power::Finite(pf) => (
                        PmMode::SumGreater(F::real(2.0) * t.powf(pf)),
                        xs_pos.iter().map(|&x| x.powf(pf)).collect(),
                        xs_neg.iter().map(|&x| x.powf(pf)).collect(),
                        vec![],
                        vec![],
                    ),
                };
                prepared.push(Prepared { mode, fpos, fneg, bpos, bneg, kind: 0 });
            }
            RegionMethod::ArithmeticFamily => prepared.push(Prepared {
                mode: PmMode::BothLess,
                fpos: vec![],
                fneg: vec![],
                bpos: vec![],
                bneg: vec![],
                kind: 1,
            }),
            RegionMethod::BetheLimit => prepared.push(Prepared {
                mode: PmMode::BothLess,
                fpos: vec![],
                fneg: vec![],
                bpos: vec![],
                bneg: vec![],
                kind: 2,
            }),
        }
    }

    let mut hits = vec![0u64; methods.len()];
    let mut total = 0u64;
    let zero = F::zero();
    for ia in 0..pairs {
        let diff_pos = diff[ia];
        let s_pos = strength[ia];
        let pout_pos = pouts[ia];
        for ib in 0..pairs {
            let diff_neg = diff[ib];
            let in_scenario = match scenario {
                Scenario::And => diff_pos > zero && diff_neg < zero,
                Scenario::Or => diff_pos > zero || diff_neg < zero,
                Scenario::Average => diff_neg < diff_pos,
                Scenario::All => true,
            };
            if !in_scenario {
                continue;
            }
            total += 1;
            for (m, prep) in prepared.iter().enumerate() {
                let ok = match prep.kind {
                    0 => match &prep.mode {
                        PmMode::SumLess(t) => prep.fpos[ia] + prep.fneg[ib] < *t,
                        PmMode::SumGreater(t) => prep.fpos[ia] + prep.fneg[ib] > *t,
                        PmMode::BothLess => prep.bpos[ia] && prep.bneg[ib],
                        PmMode::EitherLess => prep.bpos[ia] || prep.bneg[ib],
                    },
                    1 => strength[ib] < s_pos && diff_neg < diff_pos,
                    _ => diff_neg < diff_pos && pout_pos < pouts[ib],
                };
                if ok {
                    hits[m] += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::Parameter("scenario constraint excludes the whole grid".into()));
    }
    Ok(hits.iter().map(|&h| h as f64 / total as f64).collect())
}

/// Proportion of the scenario-constrained grid on which the power mean
/// recovery condition holds.
pub fn region_proportion<F: Real>(
    p: Power<F>,
    eps: F,
    k: usize,
    steps: usize,
    scenario: Scenario,
) -> Result<f64> {
    region_proportions_batch(&[RegionMethod::PowerMean { p, shift: eps }], k, steps, scenario)
        .map(|v| v[0])
}
