//! Behavioural tests of the experiment operations beyond the acceptance
//! criteria: sweep orderings, the embedding separability panel, the
//! expected-recovery map, and the timing comparison.

use std::collections::BTreeMap;

use spml_cli::config::KvConfig;
use spml_cli::experiments;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// 1-D threshold classifier: best single-coordinate split of the embedding
/// against the ground truth (both orientations).
fn threshold_classifier_error(coords: &[f64], truth: &[usize]) -> f64 {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].partial_cmp(&coords[b]).unwrap());
    let total_ones: usize = truth.iter().sum();
    let n = truth.len();
    // sweeping the threshold: left side classified 0, right side 1
    let mut ones_left = 0usize;
    let mut best = usize::MAX;
    for cut in 0..=n {
        if cut > 0 {
            ones_left += truth[order[cut - 1]];
        }
        let zeros_left = cut - ones_left;
        let ones_right = total_ones - ones_left;
        let miss_a = ones_left + (n - cut - ones_right); // left=0, right=1
        let miss_b = zeros_left + ones_right; // left=1, right=0
        best = best.min(miss_a).min(miss_b);
    }
    best as f64 / n as f64
}

#[test]
fn layer_sweep_embedding_separability_and_ordering() {
    let mut cfg = KvConfig::new();
    cfg.set("grid_steps", "3");
    cfg.set("samples", "4");
    cfg.set("cluster_size", "100");
    cfg.set("methods", "pm:-10,pm:-1,pm:0,pm:1,pm:10");
    cfg.set("fixed_layer", "pos");
    cfg.set("seed", "31");
    let output = experiments::layer_sweep(&cfg).unwrap();

    // ordering at the anti-informative end of the negative-layer sweep:
    // smaller exponents do at least as well (up to sampling noise)
    let doc = &output.sweep;
    let (diff_ix, method_ix, err_ix) = (
        doc.col("diff_neg").unwrap(),
        doc.col("method").unwrap(),
        doc.col("error").unwrap(),
    );
    let mut end_errors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in doc.rows() {
        let diff: f64 = row[diff_ix].parse().unwrap();
        if (diff - 0.08).abs() < 1e-12 {
            let err: f64 = row[err_ix].parse().unwrap_or(1.0);
            end_errors.entry(row[method_ix].clone()).or_default().push(err);
        }
    }
    let minus10 = mean(&end_errors["pm:-10"]);
    let plus10 = mean(&end_errors["pm:10"]);
    assert!(
        minus10 <= plus10 + 1e-9,
        "ordering violated at the uninformative end: pm:-10 {minus10} vs pm:10 {plus10}"
    );

    // at the informative end every power mean recovers
    let mut informative_end: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in doc.rows() {
        let diff: f64 = row[diff_ix].parse().unwrap();
        if (diff + 0.08).abs() < 1e-12 {
            let err: f64 = row[err_ix].parse().unwrap_or(1.0);
            informative_end
                .entry(row[method_ix].clone())
                .or_default()
                .push(err);
        }
    }
    for (method, errs) in &informative_end {
        let m = mean(errs);
        assert!(m < 0.05, "{method} at the informative end: mean error {m}");
    }

    // embedding panel: negative exponents separate linearly, positive do not
    let emb = &output.embedding;
    let (m_ix, t_ix, c0_ix, c1_ix, kp_ix) = (
        emb.col("method").unwrap(),
        emb.col("truth").unwrap(),
        emb.col("coord0").unwrap(),
        emb.col("coord1").unwrap(),
        emb.col("k_prime").unwrap(),
    );
    let mut per_method: BTreeMap<String, (Vec<f64>, Vec<f64>, Vec<usize>, usize)> =
        BTreeMap::new();
    for row in emb.rows() {
        let entry = per_method
            .entry(row[m_ix].clone())
            .or_insert_with(|| (vec![], vec![], vec![], 0));
        entry.0.push(row[c0_ix].parse().unwrap());
        entry.1.push(row[c1_ix].parse().unwrap_or(0.0));
        entry.2.push(row[t_ix].parse().unwrap());
        entry.3 = row[kp_ix].parse().unwrap();
    }
    let classify = |name: &str| -> f64 {
        let (c0, c1, truth, k_prime) = &per_method[name];
        let mut best = threshold_classifier_error(c0, truth);
        if *k_prime > 1 {
            best = best.min(threshold_classifier_error(c1, truth));
        }
        best
    };
    for name in ["pm:-10", "pm:-1", "pm:0"] {
        let err = classify(name);
        assert!(err < 0.1, "{name} embedding should separate: threshold error {err}");
    }
    for name in ["pm:1", "pm:10"] {
        let err = classify(name);
        assert!(err > 0.3, "{name} embedding should not separate: threshold error {err}");
    }
}

#[test]
fn phase_diagram_expected_map_equals_predicate() {
    let mut cfg = KvConfig::new();
    cfg.set("grid_steps", "3");
    cfg.set("samples", "1");
    cfg.set("cluster_size", "30");
    cfg.set("methods", "pm:-2,pm:2");
    // the map check only reads the predicate column; small sparse graphs
    // are fine under the drop policy
    cfg.set("degenerate", "drop");
    let doc = experiments::phase_diagram(&cfg).unwrap();
    let (pin_pos_ix, pout_pos_ix, pin_neg_ix, pout_neg_ix, method_ix, exp_ix) = (
        doc.col("pin_pos").unwrap(),
        doc.col("pout_pos").unwrap(),
        doc.col("pin_neg").unwrap(),
        doc.col("pout_neg").unwrap(),
        doc.col("method").unwrap(),
        doc.col("expected_recovered").unwrap(),
    );
    for row in doc.rows() {
        let params = spml::ssbm::SsbmParams::new(
            2,
            30,
            row[pin_pos_ix].parse().unwrap(),
            row[pout_pos_ix].parse().unwrap(),
            row[pin_neg_ix].parse().unwrap(),
            row[pout_neg_ix].parse().unwrap(),
        )
        .unwrap();
        let p: f64 = row[method_ix].strip_prefix("pm:").unwrap().parse().unwrap();
        let shift = spml::means::default_shift(spml::Power::Finite(p)).unwrap();
        let report =
            spml::ssbm::recovery_predicate(&params, spml::Power::Finite(p), shift).unwrap();
        let cell: u64 = row[exp_ix].parse().unwrap();
        assert_eq!(cell == 1, report.recovered, "row {row:?}");
    }
}

#[test]
fn concentration_expected_operator_matches_power_mean() {
    // the fast closed construction for |p| = 1 agrees with the full
    // eigendecomposition route on the expected operators
    let params = spml::ssbm::SsbmParams::new(2, 60, 0.18, 0.02, 0.02, 0.18).unwrap();
    let model = spml::ssbm::expected_model(&params).unwrap();
    for p in [-1.0f64, 1.0] {
        let shift = spml::means::default_shift(spml::Power::Finite(p)).unwrap();
        let param = spml::PowerParam::new(spml::Power::Finite(p), shift).unwrap();
        let oracle = spml::means::dense_power_mean(&model.lap_pos, &model.q_neg, &param).unwrap();
        let fast = if p == 1.0 {
            model
                .lap_pos
                .add_scaled_identity(shift)
                .add(&model.q_neg.add_scaled_identity(shift))
                .unwrap()
                .scale(0.5)
        } else {
            let ia = spml::dense::Cholesky::factor(&model.lap_pos.add_scaled_identity(shift))
                .unwrap()
                .inverse();
            let ib = spml::dense::Cholesky::factor(&model.q_neg.add_scaled_identity(shift))
                .unwrap()
                .inverse();
            let s = ia.add(&ib).unwrap().scale(0.5);
            spml::dense::Cholesky::factor(&s).unwrap().inverse()
        };
        let gap = spml::dense::spectral_norm(&oracle.sub(&fast).unwrap()).unwrap();
        assert!(gap < 1e-10, "p={p}: construction gap {gap}");
    }
}

#[test]
fn timing_matrix_free_beats_dense_and_agrees() {
    let mut cfg = KvConfig::new();
    cfg.set("n_list", "2000");
    cfg.set("p_list", "-1");
    cfg.set("runs", "1");
    cfg.set("dense_cap", "2000");
    cfg.set("seed", "2");
    let doc = experiments::timing(&cfg).unwrap();
    let (path_ix, l0_ix, l1_ix, ms_ix) = (
        doc.col("path").unwrap(),
        doc.col("lambda0").unwrap(),
        doc.col("lambda1").unwrap(),
        doc.col("wall_ms").unwrap(),
    );
    let mut free = None;
    let mut dense = None;
    for row in doc.rows() {
        let rec = (
            row[l0_ix].parse::<f64>().unwrap(),
            row[l1_ix].parse::<f64>().unwrap(),
            row[ms_ix].parse::<f64>().unwrap(),
        );
        match row[path_ix].as_str() {
            "free" => free = Some(rec),
            "dense" => dense = Some(rec),
            other => panic!("unexpected path {other}"),
        }
    }
    let free = free.expect("matrix-free row");
    let dense = dense.expect("dense row");
    assert!((free.0 - dense.0).abs() < 1e-5, "lambda0: {} vs {}", free.0, dense.0);
    assert!((free.1 - dense.1).abs() < 1e-5, "lambda1: {} vs {}", free.1, dense.1);
    assert!(
        dense.2 / free.2 > 1.0,
        "matrix-free should be faster at n=2000: {}ms vs {}ms",
        free.2,
        dense.2
    );
}

#[test]
fn timing_grows_with_n_matrix_free() {
    // At small sizes the timing parameters sit near the detection
    // threshold and iteration counts fluctuate wildly, so the scaling
    // claim is only meaningful at the benchmark's own sizes; the fastest
    // run per size is the cleanest scaling proxy (noise only adds time).
    let mut cfg = KvConfig::new();
    cfg.set("n_list", "2000,5000,10000");
    cfg.set("p_list", "-1");
    cfg.set("runs", "2");
    cfg.set("dense_cap", "0");
    cfg.set("seed", "3");
    let doc = experiments::timing(&cfg).unwrap();
    let (n_ix, ms_ix) = (doc.col("n").unwrap(), doc.col("wall_ms").unwrap());
    let mut per_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in doc.rows() {
        per_n
            .entry(row[n_ix].parse().unwrap())
            .or_default()
            .push(row[ms_ix].parse().unwrap());
    }
    let mut sizes: Vec<usize> = per_n.keys().copied().collect();
    sizes.sort_unstable();
    let fastest: Vec<f64> = sizes
        .iter()
        .map(|n| per_n[n].iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    assert!(
        fastest.windows(2).all(|w| w[1] > w[0]),
        "solver time should grow with n: {fastest:?} for {sizes:?}"
    );
}

#[test]
fn cbm_sparse_end_favours_bethe() {
    // scaled down from the full-size two-clusters-of-500 setting: the detection
    // threshold scales as p_bar * n, so p_bar = 0.012 at n = 500 sits where
    // the Bethe Hessian detects and degree-normalized methods suffer from
    // vertex loss
    let mut cfg = KvConfig::new();
    cfg.set("samples", "8");
    cfg.set("etas", "");
    cfg.set("p_bars", "0.012");
    cfg.set("eta_fixed", "0.25");
    cfg.set("methods", "pm:-10,bethe");
    cfg.set("seed", "44");
    let doc = experiments::cbm_sweep(&cfg).unwrap();
    let (method_ix, err_ix) = (doc.col("method").unwrap(), doc.col("error").unwrap());
    let mut errs: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in doc.rows() {
        // a method that declines counts as complete failure
        let err: f64 = row[err_ix].parse().unwrap_or(0.5);
        errs.entry(row[method_ix].clone()).or_default().push(err);
    }
    let bethe = mean(&errs["bethe"]);
    let pm = mean(&errs["pm:-10"]);
    assert!(
        bethe <= pm + 0.05,
        "sparse regime should favour the Bethe Hessian: bethe {bethe} vs pm:-10 {pm}"
    );
}
