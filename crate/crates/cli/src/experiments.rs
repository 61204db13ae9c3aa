//! The experiment implementations behind the subcommands.
//!
//! Sweep-type experiments share one primitive: a grid cell is a block model
//! parameter point, and each `(cell, sample)` unit draws one graph, runs
//! every configured method on it, and reports per-method clustering errors.
//! Units are dispatched to a thread pool and collected in key order, so the
//! output is independent of scheduling.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use spml::baselines::MethodSpec;
use spml::cluster::{clustering_error, spectral_cluster, spectral_embedding, KmeansOptions, Labels};
use spml::dense::{spectral_norm, subspace_distance, Cholesky, SymMatrix};
use spml::graph::{Layer, SignedGraph};
use spml::krylov::{smallest_eigs_dense, smallest_eigs_matrix_free, KrylovOptions};
use spml::means::{dense_power_mean, Power, PowerParam};
use spml::ssbm::{
    cbm_to_ssbm, concentration_bound, eigenvector_bound, expected_model, recovery_predicate,
    region_proportions_batch, sample, CbmParams, Scenario, SsbmParams,
};

use crate::config::KvConfig;
use crate::csv::{Cell, CsvDoc};
use crate::methods::{parse_method, parse_region_method, region_method_name, ShiftChoice};
use crate::mix_seed;

/// What to do with samples containing vertices isolated in some layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneratePolicy {
    /// Redraw with an incremented sub-seed (counted); the right choice at
    /// the phase diagram densities where isolation is rare.
    Resample,
    /// Drop isolated vertices and cluster the rest; the only viable choice
    /// in sparse regimes where isolation is almost certain.
    Drop,
}

impl DegeneratePolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "resample" => Ok(Self::Resample),
            "drop" => Ok(Self::Drop),
            other => bail!("unknown degenerate policy {other:?}; expected resample or drop"),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Resample => "resample",
            Self::Drop => "drop",
        }
    }
}

const MAX_RESAMPLE_ATTEMPTS: u64 = 60;

/// One usable draw from the block model.
pub struct PreparedSample {
    pub graph: SignedGraph<f64>,
    pub truth: Labels,
    pub seed_used: u64,
    pub resamples: u64,
    pub dropped: usize,
}

/// Draws a graph every method can run on, per the degeneracy policy.
pub fn prepare_sample(
    params: &SsbmParams<f64>,
    seed: u64,
    policy: DegeneratePolicy,
) -> Result<PreparedSample> {
    let mut resamples = 0u64;
    loop {
        let seed_used = mix_seed(seed, &[resamples]);
        let drawn = sample(params, seed_used)?;
        // under the drop policy the raw draw is returned as-is and each
        // method later takes its own usable subgraph
        let degenerate = policy == DegeneratePolicy::Resample
            && !drawn.graph.isolated_vertices().is_empty();
        if !degenerate {
            return Ok(PreparedSample {
                graph: drawn.graph,
                truth: drawn.truth,
                seed_used,
                resamples,
                dropped: 0,
            });
        }
        resamples += 1;
        if resamples >= MAX_RESAMPLE_ATTEMPTS {
            bail!(
                "resampling exhausted after {MAX_RESAMPLE_ATTEMPTS} attempts; \
                 the parameters are too sparse for the resample policy"
            );
        }
    }
}

/// What a method needs from the vertex degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DegreeNeed {
    /// Positive degree in each layer separately (power means, AM, GM).
    BothLayers,
    /// Positive combined degree (SN, BN).
    Combined,
    /// Nothing (Bethe Hessian).
    None,
}

fn degree_need(method: &MethodSpec<f64>) -> DegreeNeed {
    match method {
        MethodSpec::PowerMean { .. } | MethodSpec::Am | MethodSpec::Gm { .. } => {
            DegreeNeed::BothLayers
        }
        MethodSpec::Sn | MethodSpec::Bn => DegreeNeed::Combined,
        MethodSpec::Bethe => DegreeNeed::None,
    }
}

/// Iteratively removes vertices violating the degree requirement (removal
/// can create new violations); returns the usable subgraph and the original
/// vertex ids it kept.
fn usable_subgraph(
    graph: &SignedGraph<f64>,
    need: DegreeNeed,
) -> Result<(SignedGraph<f64>, Vec<usize>)> {
    let mut g = graph.clone();
    let mut ids: Vec<usize> = (0..g.vertex_count()).collect();
    loop {
        let deg = g.degrees();
        let violating: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| match need {
                DegreeNeed::BothLayers => deg.d_pos[v] == 0.0 || deg.d_neg[v] == 0.0,
                DegreeNeed::Combined => deg.d_bar[v] == 0.0,
                DegreeNeed::None => false,
            })
            .collect();
        if violating.is_empty() {
            return Ok((g, ids));
        }
        let keep: Vec<usize> =
            (0..g.vertex_count()).filter(|v| !violating.contains(v)).collect();
        let (sub, kept_local) = g.induced_subgraph(&keep)?;
        ids = kept_local.iter().map(|&v| ids[v]).collect();
        g = sub;
    }
}

/// Per-method outcome on one sample: clustering error over the vertices
/// the method could label, or `None` when it declined the graph (e.g. the
/// Bethe Hessian found no negative eigenvalues to select).
pub struct SampleRun {
    pub errors: Vec<Option<f64>>,
    pub statuses: Vec<&'static str>,
    pub labeled: Vec<usize>,
    pub wall_ms: Vec<f64>,
    pub prepared: PreparedSample,
}

/// Runs every method on one prepared sample.
///
/// Under the `Drop` policy each method sees its own maximal usable
/// subgraph: the power mean family needs positive degrees in both layers,
/// the normalized signed Laplacians only a positive combined degree, the
/// Bethe Hessian the full graph. Errors are measured over the vertices the
/// method labels.
pub fn run_methods_on_sample(
    params: &SsbmParams<f64>,
    methods: &[MethodSpec<f64>],
    k: usize,
    seed: u64,
    policy: DegeneratePolicy,
) -> Result<SampleRun> {
    let prepared = prepare_sample(params, seed, policy)?;
    let mut errors = Vec::with_capacity(methods.len());
    let mut statuses = Vec::with_capacity(methods.len());
    let mut labeled = Vec::with_capacity(methods.len());
    let mut wall_ms = Vec::with_capacity(methods.len());
    let mut cache: Vec<(DegreeNeed, SignedGraph<f64>, Labels)> = Vec::new();
    for (m_ix, method) in methods.iter().enumerate() {
        let need = degree_need(method);
        let cached = cache.iter().position(|(n, _, _)| *n == need);
        let slot = match cached {
            Some(i) => i,
            None => {
                let (sub, ids) = usable_subgraph(&prepared.graph, need)?;
                let truth = Labels::new(ids.iter().map(|&v| prepared.truth.get(v)).collect());
                cache.push((need, sub, truth));
                cache.len() - 1
            }
        };
        let (_, graph, truth) = &cache[slot];
        let kopts = KmeansOptions {
            seed: mix_seed(prepared.seed_used, &[0xC1, m_ix as u64]),
            ..Default::default()
        };
        let t0 = Instant::now();
        let outcome = if graph.vertex_count() < 2 * k {
            Err(spml::Error::Parameter("usable subgraph too small".into()))
        } else {
            spectral_cluster(graph, method, k, &kopts)
        };
        wall_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        labeled.push(graph.vertex_count());
        match outcome {
            Ok(found) => {
                let err = clustering_error(&found, truth)?;
                errors.push(Some(err));
                statuses.push("ok");
            }
            Err(spml::Error::NoClusterSignal { .. }) => {
                errors.push(None);
                statuses.push("no_signal");
            }
            Err(spml::Error::Parameter(_)) if graph.vertex_count() < 2 * k => {
                errors.push(None);
                statuses.push("too_small");
            }
            Err(e) => return Err(e).context("clustering failed"),
        }
    }
    Ok(SampleRun { errors, statuses, labeled, wall_ms, prepared })
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn parse_methods(cfg: &KvConfig, default: &str) -> Result<Vec<MethodSpec<f64>>> {
    let shift = ShiftChoice::parse(&cfg.get_or("shift", "auto"))?;
    let matrix_free = match cfg.get("matrix_free") {
        None | Some("auto") => None,
        Some(v) => Some(
            v.parse::<bool>()
                .map_err(|_| anyhow!("matrix_free must be auto, true, or false"))?,
        ),
    };
    cfg.list_or("methods", default)
        .iter()
        .map(|name| parse_method(name, shift, matrix_free))
        .collect()
}

fn thread_pool(cfg: &KvConfig) -> Result<rayon::ThreadPool> {
    let threads = cfg.usize_or("threads", 0)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    builder.build().context("building the worker pool")
}

fn expected_recovery_cell(params: &SsbmParams<f64>, method: &MethodSpec<f64>) -> Cell {
    if let MethodSpec::PowerMean { param, .. } = method {
        if let Ok(report) = recovery_predicate(params, param.p, param.shift) {
            return Cell::from(report.recovered);
        }
    }
    Cell::Empty
}

const SWEEP_COLUMNS: &[&str] = &[
    "experiment",
    "cell",
    "diff_pos",
    "diff_neg",
    "pin_pos",
    "pout_pos",
    "pin_neg",
    "pout_neg",
    "method",
    "sample",
    "seed",
    "resamples",
    "labeled",
    "status",
    "expected_recovered",
    "error",
    "wall_ms",
];

struct SweepCell {
    key: u64,
    params: SsbmParams<f64>,
    diff_pos: f64,
    diff_neg: f64,
}

/// Shared driver: samples x methods over a list of parameter cells.
fn run_sweep(
    experiment: &str,
    cells: &[SweepCell],
    methods: &[MethodSpec<f64>],
    k: usize,
    samples: usize,
    seed: u64,
    policy: DegeneratePolicy,
    pool: &rayon::ThreadPool,
    cfg: &KvConfig,
) -> Result<CsvDoc> {
    let units: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..samples).map(move |s| (c, s)))
        .collect();
    let outcomes: Vec<Result<(usize, usize, SampleRun)>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(c, s)| {
                let cell = &cells[c];
                let unit_seed = mix_seed(seed, &[cell.key, s as u64]);
                let run = run_methods_on_sample(&cell.params, methods, k, unit_seed, policy)?;
                Ok((c, s, run))
            })
            .collect()
    });

    let mut doc = CsvDoc::new(SWEEP_COLUMNS);
    doc.echo_config(experiment, cfg);
    doc.comment(&format!("degenerate_policy = {}", policy.name()));
    let mut total_resamples = 0u64;
    let mut total_draws = 0u64;
    let mut rows: Vec<(u64, usize, usize, Vec<Cell>)> = Vec::new();
    for outcome in outcomes {
        let (c, s, run) = outcome?;
        let cell = &cells[c];
        total_resamples += run.prepared.resamples;
        total_draws += 1 + run.prepared.resamples;
        for (m_ix, method) in methods.iter().enumerate() {
            let row = vec![
                Cell::from(experiment),
                Cell::from(cell.key),
                Cell::from(cell.diff_pos),
                Cell::from(cell.diff_neg),
                Cell::from(cell.params.pin_pos),
                Cell::from(cell.params.pout_pos),
                Cell::from(cell.params.pin_neg),
                Cell::from(cell.params.pout_neg),
                Cell::from(method.name()),
                Cell::from(s),
                Cell::from(run.prepared.seed_used),
                Cell::from(run.prepared.resamples),
                Cell::from(run.labeled[m_ix]),
                Cell::from(run.statuses[m_ix]),
                expected_recovery_cell(&cell.params, method),
                run.errors[m_ix].map_or(Cell::Empty, Cell::from),
                Cell::from(run.wall_ms[m_ix]),
            ];
            rows.push((cell.key, s, m_ix, row));
        }
    }
    rows.sort_by_key(|(key, s, m, _)| (*key, *s, *m));
    let resample_rate = total_resamples as f64 / total_draws.max(1) as f64;
    if resample_rate > 0.05 {
        doc.comment(&format!(
            "warning: resample rate {resample_rate:.4} exceeds the 5% budget"
        ));
    }
    doc.comment(&format!("resample_rate = {resample_rate}"));
    for (_, _, _, row) in rows {
        doc.push_row(row);
    }
    Ok(doc)
}

/// Clustering-error map over the `(diff_pos, diff_neg)` grid at fixed layer
/// sparsities, with the expected-recovery flag per power mean cell.
pub fn phase_diagram(cfg: &KvConfig) -> Result<CsvDoc> {
    let k = cfg.usize_or("k", 2)?;
    let cluster_size = cfg.usize_or("cluster_size", 100)?;
    let steps = cfg.usize_or("grid_steps", 9)?;
    let samples = cfg.usize_or("samples", 10)?;
    let seed = cfg.u64_or("seed", 0)?;
    let sparsity_pos = cfg.f64_or("sparsity_pos", 0.1)?;
    let sparsity_neg = cfg.f64_or("sparsity_neg", 0.1)?;
    let span = cfg.f64_or("grid_span", 0.8)?;
    if !(span > 0.0 && span < 1.0) {
        bail!("grid_span must lie in (0, 1)");
    }
    let methods = parse_methods(cfg, "pm:-10,pm:-1,pm:0,pm:1,pm:10")?;
    let policy = DegeneratePolicy::parse(&cfg.get_or("degenerate", "resample"))?;
    let pool = thread_pool(cfg)?;

    let axis_pos = linspace(-span * sparsity_pos, span * sparsity_pos, steps);
    let axis_neg = linspace(-span * sparsity_neg, span * sparsity_neg, steps);
    let mut cells = Vec::new();
    for (i, &dp) in axis_pos.iter().enumerate() {
        for (j, &dn) in axis_neg.iter().enumerate() {
            let params = SsbmParams::new(
                k,
                cluster_size,
                (sparsity_pos + dp) / 2.0,
                (sparsity_pos - dp) / 2.0,
                (sparsity_neg + dn) / 2.0,
                (sparsity_neg - dn) / 2.0,
            )?;
            cells.push(SweepCell { key: (i * steps + j) as u64, params, diff_pos: dp, diff_neg: dn });
        }
    }
    run_sweep("phase-diagram", &cells, &methods, k, samples, seed, policy, &pool, cfg)
}

/// Output of the layer sweep: the error curves and the designated-cell
/// embedding panel.
pub struct LayerSweepOutput {
    pub sweep: CsvDoc,
    pub embedding: CsvDoc,
}

/// One layer fixed informative, the other swept from informative to
/// anti-informative; also emits the eigenvector embedding at a designated
/// parameter point.
pub fn layer_sweep(cfg: &KvConfig) -> Result<LayerSweepOutput> {
    let k = cfg.usize_or("k", 2)?;
    let cluster_size = cfg.usize_or("cluster_size", 100)?;
    let steps = cfg.usize_or("grid_steps", 9)?;
    let samples = cfg.usize_or("samples", 10)?;
    let seed = cfg.u64_or("seed", 0)?;
    let sparsity = cfg.f64_or("sparsity", 0.1)?;
    let span = cfg.f64_or("grid_span", 0.8)?;
    let direction = cfg.get_or("fixed_layer", "pos");
    let methods = parse_methods(cfg, "pm:-10,pm:-1,pm:0,pm:1,pm:10,sn,bn,am,gm,bethe")?;
    let policy = DegeneratePolicy::parse(&cfg.get_or("degenerate", "resample"))?;
    let pool = thread_pool(cfg)?;

    let fixed_informative = (0.09, 0.01);
    let axis = linspace(-span * sparsity, span * sparsity, steps);
    let mut cells = Vec::new();
    for (i, &d) in axis.iter().enumerate() {
        let (pp, pn) = match direction.as_str() {
            // positive layer fixed assortative, negative layer swept
            "pos" => (fixed_informative, ((sparsity + d) / 2.0, (sparsity - d) / 2.0)),
            // negative layer fixed disassortative, positive layer swept
            "neg" => (((sparsity + d) / 2.0, (sparsity - d) / 2.0), (0.01, 0.09)),
            other => bail!("fixed_layer must be pos or neg, got {other:?}"),
        };
        let params = SsbmParams::new(k, cluster_size, pp.0, pp.1, pn.0, pn.1)?;
        let (diff_pos, diff_neg) = (params.pin_pos - params.pout_pos, params.pin_neg - params.pout_neg);
        cells.push(SweepCell { key: i as u64, params, diff_pos, diff_neg });
    }
    let sweep = run_sweep("layer-sweep", &cells, &methods, k, samples, seed, policy, &pool, cfg)?;

    // Embedding panel at the designated cell.
    let embed_params = SsbmParams::new(
        k,
        cluster_size,
        cfg.f64_or("embed_pin_pos", 0.025)?,
        cfg.f64_or("embed_pout_pos", 0.075)?,
        cfg.f64_or("embed_pin_neg", 0.01)?,
        cfg.f64_or("embed_pout_neg", 0.09)?,
    )?;
    let embed_seed = mix_seed(seed, &[0xE3]);
    let prepared = prepare_sample(&embed_params, embed_seed, policy)?;
    let mut embedding = CsvDoc::new(&[
        "experiment", "method", "k_prime", "vertex", "truth", "coord0", "coord1",
    ]);
    embedding.echo_config("layer-sweep-embedding", cfg);
    embedding.comment(&format!("embed_seed = {}", prepared.seed_used));
    for method in &methods {
        match spectral_embedding(&prepared.graph, method, k) {
            Ok((cols, k_prime)) => {
                for v in 0..cols.rows() {
                    embedding.push_row(vec![
                        Cell::from("layer-sweep-embedding"),
                        Cell::from(method.name()),
                        Cell::from(k_prime),
                        Cell::from(v),
                        Cell::from(prepared.truth.get(v)),
                        Cell::from(cols.get(v, 0)),
                        if k_prime > 1 { Cell::from(cols.get(v, 1)) } else { Cell::Empty },
                    ]);
                }
            }
            Err(spml::Error::NoClusterSignal { .. }) => {
                embedding.comment(&format!("method {} reported no cluster signal", method.name()));
            }
            Err(e) => return Err(e).context("embedding failed"),
        }
    }
    Ok(LayerSweepOutput { sweep, embedding })
}

/// Censored block model sweeps: noise at fixed edge probability, and edge
/// probability at fixed noise.
pub fn cbm_sweep(cfg: &KvConfig) -> Result<CsvDoc> {
    let k = cfg.usize_or("k", 2)?;
    let cluster_size = cfg.usize_or("cluster_size", 250)?;
    let samples = cfg.usize_or("samples", 10)?;
    let seed = cfg.u64_or("seed", 0)?;
    let p_bar = cfg.f64_or("p_bar", 0.03)?;
    let eta_fixed = cfg.f64_or("eta_fixed", 0.25)?;
    let methods = parse_methods(cfg, "pm:-10,pm:-1,pm:1,sn,am,bethe")?;
    let policy = DegeneratePolicy::parse(&cfg.get_or("degenerate", "drop"))?;
    let pool = thread_pool(cfg)?;

    let etas: Vec<f64> = cfg
        .list_or("etas", "0.0,0.1,0.2,0.3,0.4,0.5")
        .iter()
        .map(|s| s.parse::<f64>().context("parsing etas"))
        .collect::<Result<_>>()?;
    let p_bars: Vec<f64> = cfg
        .list_or("p_bars", "0.004,0.008,0.015,0.03")
        .iter()
        .map(|s| s.parse::<f64>().context("parsing p_bars"))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (i, &eta) in etas.iter().enumerate() {
        let params = cbm_to_ssbm(&CbmParams { p_bar, eta }, k, cluster_size)?;
        cells.push(SweepCell {
            key: i as u64,
            params,
            diff_pos: eta,
            diff_neg: p_bar,
        });
    }
    for (j, &pb) in p_bars.iter().enumerate() {
        let params = cbm_to_ssbm(&CbmParams { p_bar: pb, eta: eta_fixed }, k, cluster_size)?;
        cells.push(SweepCell {
            key: (etas.len() + j) as u64,
            params,
            diff_pos: eta_fixed,
            diff_neg: pb,
        });
    }
    // cell coordinates of the CBM sweep are (eta, p_bar)
    let mut doc = run_sweep("cbm-sweep", &cells, &methods, k, samples, seed, policy, &pool, cfg)?;
    doc.comment("cbm cell coordinates: diff_pos column holds eta, diff_neg column holds p_bar");
    Ok(doc)
}

/// Dense `L_p` of a pair of shifted layer matrices, with closed construction
/// for `|p| = 1` and the eigendecomposition route otherwise.
fn spm_dense_from_operators(
    a: &SymMatrix<f64>,
    b: &SymMatrix<f64>,
    p: i64,
    shift: f64,
) -> Result<SymMatrix<f64>> {
    match p {
        1 => Ok(a
            .add_scaled_identity(shift)
            .add(&b.add_scaled_identity(shift))?
            .scale(0.5)),
        -1 => {
            let ia = Cholesky::factor(&a.add_scaled_identity(shift))?.inverse();
            let ib = Cholesky::factor(&b.add_scaled_identity(shift))?.inverse();
            let s = ia.add(&ib)?.scale(0.5);
            Ok(Cholesky::factor(&s)?.inverse())
        }
        other => {
            let param = PowerParam::new(Power::Finite(other as f64), shift)?;
            Ok(dense_power_mean(a, b, &param)?)
        }
    }
}

/// Concentration measurements: sampled-vs-expected operator norm and
/// eigenspace distance against the analytic bounds.
pub fn concentration(cfg: &KvConfig) -> Result<CsvDoc> {
    let k = cfg.usize_or("k", 2)?;
    let seeds = cfg.usize_or("seeds", 30)?;
    let seed = cfg.u64_or("seed", 0)?;
    let eps_conf = cfg.f64_or("epsilon_conf", 0.1)?;
    let dense_cap = cfg.usize_or("dense_cap", 1200)?;
    let pin_pos = cfg.f64_or("pin_pos", 0.18)?;
    let pout_pos = cfg.f64_or("pout_pos", 0.02)?;
    let pin_neg = cfg.f64_or("pin_neg", 0.02)?;
    let pout_neg = cfg.f64_or("pout_neg", 0.18)?;
    let shift_choice = ShiftChoice::parse(&cfg.get_or("shift", "auto"))?;
    let n_list: Vec<usize> = cfg
        .list_or("n_list", "200,400,800")
        .iter()
        .map(|s| s.parse::<usize>().context("parsing n_list"))
        .collect::<Result<_>>()?;
    let p_list: Vec<i64> = cfg
        .list_or("p_list", "-1,1")
        .iter()
        .map(|s| s.parse::<i64>().context("parsing p_list"))
        .collect::<Result<_>>()?;
    let pool = thread_pool(cfg)?;

    let mut doc = CsvDoc::new(&[
        "experiment",
        "n",
        "p",
        "shift",
        "sample",
        "seed",
        "resamples",
        "degree_condition_met",
        "measured_norm",
        "norm_bound",
        "measured_subspace_distance",
        "subspace_bound",
        "wall_ms",
    ]);
    doc.echo_config("concentration", cfg);

    struct Point {
        n: usize,
        p: i64,
        shift: f64,
        sample: usize,
        seed_used: u64,
        resamples: u64,
        cond_met: bool,
        measured_norm: f64,
        bound6: Option<f64>,
        measured_dist: f64,
        bound7: Option<f64>,
        wall_ms: f64,
    }

    let mut rows: Vec<Point> = Vec::new();
    for &n in &n_list {
        if n > dense_cap {
            doc.comment(&format!("n = {n} exceeds dense_cap = {dense_cap}; skipped"));
            continue;
        }
        if n % k != 0 {
            bail!("n = {n} not divisible by k = {k}");
        }
        let params = SsbmParams::new(k, n / k, pin_pos, pout_pos, pin_neg, pout_neg)?;
        let model = expected_model(&params)?;
        for &p in &p_list {
            if p == 0 {
                bail!("concentration requires nonzero integer p");
            }
            let shift = shift_choice.resolve(Power::Finite(p as f64))?;
            let expected_lp =
                spm_dense_from_operators(&model.lap_pos, &model.q_neg, p, shift)?;
            let k_tilde = if p >= 1 { k - 1 } else { k };
            let expected_basis = model.informative_basis(p >= 1);
            let conc = concentration_bound(&params, p, shift, eps_conf)?;
            let bound7 = if conc.degree_condition_met {
                eigenvector_bound(&params, p, shift, eps_conf).ok()
            } else {
                None
            };
            let outcomes: Vec<Result<Point>> = pool.install(|| {
                (0..seeds)
                    .into_par_iter()
                    .map(|s| {
                        let t0 = Instant::now();
                        let unit_seed = mix_seed(seed, &[n as u64, p as u64, s as u64]);
                        let prepared =
                            prepare_sample(&params, unit_seed, DegeneratePolicy::Resample)?;
                        let pos = prepared
                            .graph
                            .layer_operator(Layer::PositiveLaplacian, 0.0)?
                            .dense_matrix();
                        let neg = prepared
                            .graph
                            .layer_operator(Layer::NegativeSignless, 0.0)?
                            .dense_matrix();
                        let sampled_lp = spm_dense_from_operators(&pos, &neg, p, shift)?;
                        let diff = sampled_lp.sub(&expected_lp)?;
                        let measured_norm = spectral_norm(&diff)?;
                        let (_, vectors, _) = spml::krylov::bottom_eigs_dense(
                            &sampled_lp,
                            k_tilde,
                            &KrylovOptions::default(),
                        )?;
                        let measured_dist = subspace_distance(&vectors, &expected_basis)?;
                        Ok(Point {
                            n,
                            p,
                            shift,
                            sample: s,
                            seed_used: prepared.seed_used,
                            resamples: prepared.resamples,
                            cond_met: conc.degree_condition_met,
                            measured_norm,
                            bound6: conc.bound,
                            measured_dist,
                            bound7,
                            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
                        })
                    })
                    .collect()
            });
            for o in outcomes {
                rows.push(o?);
            }
        }
    }
    rows.sort_by_key(|r| (r.n, r.p, r.sample));
    for r in rows {
        doc.push_row(vec![
            Cell::from("concentration"),
            Cell::from(r.n),
            Cell::from(r.p),
            Cell::from(r.shift),
            Cell::from(r.sample),
            Cell::from(r.seed_used),
            Cell::from(r.resamples),
            Cell::from(r.cond_met),
            Cell::from(r.measured_norm),
            r.bound6.map_or(Cell::Empty, Cell::from),
            Cell::from(r.measured_dist),
            r.bound7.map_or(Cell::Empty, Cell::from),
            Cell::from(r.wall_ms),
        ]);
    }
    Ok(doc)
}

/// Proportion of block model parameter space on which each method's
/// expected-recovery conditions hold, per scenario and cluster count.
pub fn regions(cfg: &KvConfig) -> Result<CsvDoc> {
    let steps = cfg.usize_or("steps", 100)?;
    let shift_choice = ShiftChoice::parse(&cfg.get_or("shift", "auto"))?;
    let method_names =
        cfg.list_or("methods", "pm:-inf,pm:-10,pm:-1,pm:0,pm:1,pm:10,pm:inf,sn,bethe");
    let methods = method_names
        .iter()
        .map(|m| parse_region_method(m, shift_choice))
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<usize> = cfg
        .list_or("ks", "2,3")
        .iter()
        .map(|s| s.parse::<usize>().context("parsing ks"))
        .collect::<Result<_>>()?;
    let scenario_names = cfg.list_or("scenarios", "and,or,average,all");
    let scenarios: Vec<Scenario> = scenario_names
        .iter()
        .map(|s| match s.as_str() {
            "and" => Ok(Scenario::And),
            "or" => Ok(Scenario::Or),
            "average" => Ok(Scenario::Average),
            "all" => Ok(Scenario::All),
            other => bail!("unknown scenario {other:?}"),
        })
        .collect::<Result<_>>()?;
    let pool = thread_pool(cfg)?;

    let combos: Vec<(usize, Scenario)> = ks
        .iter()
        .flat_map(|&k| scenarios.iter().map(move |&s| (k, s)))
        .collect();
    let results: Vec<Result<(usize, Scenario, Vec<f64>)>> = pool.install(|| {
        combos
            .par_iter()
            .map(|&(k, sc)| {
                let fracs = region_proportions_batch(&methods, k, steps, sc)?;
                Ok((k, sc, fracs))
            })
            .collect()
    });

    let mut doc = CsvDoc::new(&["experiment", "scenario", "k", "steps", "method", "proportion"]);
    doc.echo_config("regions", cfg);
    let mut rows = Vec::new();
    for r in results {
        let (k, sc, fracs) = r?;
        for (m_ix, frac) in fracs.iter().enumerate() {
            rows.push((k, sc.name(), m_ix, *frac));
        }
    }
    rows.sort_by_key(|&(k, sc, m, _)| (k, sc, m));
    for (k, sc, m_ix, frac) in rows {
        doc.push_row(vec![
            Cell::from("regions"),
            Cell::from(sc),
            Cell::from(k),
            Cell::from(steps),
            Cell::from(region_method_name(&methods[m_ix])),
            Cell::from(frac),
        ]);
    }
    Ok(doc)
}

/// Wall-time comparison of the matrix-free and dense eigensolver paths,
/// single-threaded, with the leading eigenvalues recorded so the paths can
/// be cross-validated.
pub fn timing(cfg: &KvConfig) -> Result<CsvDoc> {
    let k = cfg.usize_or("k", 2)?;
    let runs = cfg.usize_or("runs", 10)?;
    let seed = cfg.u64_or("seed", 0)?;
    let dense_cap = cfg.usize_or("dense_cap", 2000)?;
    let shift_choice = ShiftChoice::parse(&cfg.get_or("shift", "auto"))?;
    let n_list: Vec<usize> = cfg
        .list_or("n_list", "2000,5000,10000")
        .iter()
        .map(|s| s.parse::<usize>().context("parsing n_list"))
        .collect::<Result<_>>()?;
    let p_list: Vec<i64> = cfg
        .list_or("p_list", "-1,-2,-5,-10")
        .iter()
        .map(|s| s.parse::<i64>().context("parsing p_list"))
        .collect::<Result<_>>()?;

    let mut doc = CsvDoc::new(&[
        "experiment", "n", "p", "path", "run", "seed", "k_prime", "lambda0", "lambda1", "wall_ms",
    ]);
    doc.echo_config("timing", cfg);
    doc.comment("single-threaded; paths: free = power method with PKSM, dense = dense eigensolver");

    for &n in &n_list {
        if n % k != 0 {
            bail!("n = {n} not divisible by k = {k}");
        }
        // benchmark block model: equal clusters, mixed informativeness
        let params = SsbmParams::new(k, n / k, 0.05, 0.025, 0.025, 0.05)?;
        for &p in &p_list {
            if p >= 0 {
                bail!("timing exercises the matrix-free regime; p must be negative");
            }
            let shift = shift_choice.resolve(Power::Finite(p as f64))?;
            for run in 0..runs {
                let unit_seed = mix_seed(seed, &[n as u64, p as u64, run as u64]);
                let prepared = prepare_sample(&params, unit_seed, DegeneratePolicy::Resample)?;
                let k_prime = Power::Finite(p as f64).informative_count(k);

                let t0 = Instant::now();
                let free = smallest_eigs_matrix_free(
                    &prepared.graph,
                    p,
                    shift,
                    k_prime,
                    &KrylovOptions::default(),
                )?;
                let free_ms = t0.elapsed().as_secs_f64() * 1e3;
                doc.push_row(vec![
                    Cell::from("timing"),
                    Cell::from(n),
                    Cell::from(p),
                    Cell::from("free"),
                    Cell::from(run),
                    Cell::from(prepared.seed_used),
                    Cell::from(k_prime),
                    Cell::from(free.values[0]),
                    free.values.get(1).copied().map_or(Cell::Empty, Cell::from),
                    Cell::from(free_ms),
                ]);

                if n <= dense_cap {
                    let param = PowerParam::new(Power::Finite(p as f64), shift)?;
                    let t1 = Instant::now();
                    let dense = smallest_eigs_dense(&prepared.graph, &param, k_prime)?;
                    let dense_ms = t1.elapsed().as_secs_f64() * 1e3;
                    doc.push_row(vec![
                        Cell::from("timing"),
                        Cell::from(n),
                        Cell::from(p),
                        Cell::from("dense"),
                        Cell::from(run),
                        Cell::from(prepared.seed_used),
                        Cell::from(k_prime),
                        Cell::from(dense.values[0]),
                        dense.values.get(1).copied().map_or(Cell::Empty, Cell::from),
                        Cell::from(dense_ms),
                    ]);
                }
            }
        }
    }
    Ok(doc)
}

/// Parameters for the `generate` subcommand.
pub fn generate_params(cfg: &KvConfig) -> Result<SsbmParams<f64>> {
    let k = cfg.usize_or("k", 2)?;
    let cluster_size = cfg.usize_or("cluster_size", 100)?;
    let model = cfg.get_or("model", "ssbm");
    match model.as_str() {
        "ssbm" => Ok(SsbmParams::new(
            k,
            cluster_size,
            cfg.f64_or("pin_pos", 0.09)?,
            cfg.f64_or("pout_pos", 0.01)?,
            cfg.f64_or("pin_neg", 0.01)?,
            cfg.f64_or("pout_neg", 0.09)?,
        )?),
        "lsbm" => {
            let l = spml::ssbm::LsbmParams {
                p_bar_in: cfg.f64_or("p_bar_in", 0.1)?,
                p_bar_out: cfg.f64_or("p_bar_out", 0.1)?,
                mu_pos: cfg.f64_or("mu_pos", 0.9)?,
                nu_pos: cfg.f64_or("nu_pos", 0.1)?,
            };
            Ok(spml::ssbm::lsbm_to_ssbm(&l, k, cluster_size)?)
        }
        "cbm" => {
            let c = CbmParams { p_bar: cfg.f64_or("p_bar", 0.03)?, eta: cfg.f64_or("eta", 0.1)? };
            Ok(cbm_to_ssbm(&c, k, cluster_size)?)
        }
        other => bail!("unknown model {other:?}; expected ssbm, lsbm, or cbm"),
    }
}

/// The file-clustering entry point shared by the `cluster` subcommand and
/// the tests: parses, optionally drops isolated vertices, clusters, and
/// renders the labels document.
pub struct ClusterFileOutcome {
    pub labels: Labels,
    pub kept: Vec<usize>,
    pub rendered: String,
}

pub fn cluster_file(
    input: &std::path::Path,
    method: &MethodSpec<f64>,
    k: usize,
    seed: u64,
    drop_isolated: bool,
) -> Result<ClusterFileOutcome> {
    let file = std::fs::File::open(input)
        .with_context(|| format!("opening {}", input.display()))?;
    let graph: SignedGraph<f64> = spml::graph::from_edge_list(std::io::BufReader::new(file))?;
    let original_n = graph.vertex_count();
    let (graph, kept) = if drop_isolated {
        usable_subgraph(&graph, DegreeNeed::BothLayers)?
    } else {
        let n = graph.vertex_count();
        (graph, (0..n).collect())
    };
    if k > graph.vertex_count() {
        bail!("k = {k} exceeds the usable vertex count {}", graph.vertex_count());
    }
    let kopts = KmeansOptions { seed, ..Default::default() };
    let labels = spectral_cluster(&graph, method, k, &kopts)?;

    let mut rendered = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(rendered, "# method = {}", method.name());
    if let MethodSpec::PowerMean { param, matrix_free } = method {
        let _ = writeln!(rendered, "# p = {}", param.p);
        let _ = writeln!(rendered, "# shift = {}", param.shift);
        let _ = writeln!(rendered, "# matrix_free = {matrix_free}");
        let _ = writeln!(rendered, "# k_prime = {}", param.p.informative_count(k));
    } else {
        let k_prime = match method {
            MethodSpec::Bethe => k - 1,
            _ => k,
        };
        let _ = writeln!(rendered, "# k_prime = {k_prime}");
    }
    let _ = writeln!(rendered, "# k = {k}");
    let _ = writeln!(rendered, "# seed = {seed}");
    let _ = writeln!(rendered, "# restarts = {}", kopts.restarts);
    let _ = writeln!(rendered, "# dropped = {}", original_n - kept.len());
    for (local, &original) in kept.iter().enumerate() {
        let _ = writeln!(rendered, "{original} {}", labels.get(local));
    }
    Ok(ClusterFileOutcome { labels, kept, rendered })
}
