//! Properties of scalar and matrix power means.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spml::dense::{eigh, SymMatrix};
use spml::means::{dense_power_mean, dense_spm_laplacian, scalar_power_mean, Power, PowerParam};
use spml::ssbm::{sample, SsbmParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Monotonicity in the exponent, with equality only on the diagonal.
    #[test]
    fn prop_scalar_mean_monotone_in_p(
        a in 0.05f64..4.0,
        b in 0.05f64..4.0,
        p in -6.0f64..6.0,
        dq in 0.05f64..6.0,
    ) {
        let q = p + dq;
        let mp = scalar_power_mean(Power::Finite(p), a, b).unwrap();
        let mq = scalar_power_mean(Power::Finite(q), a, b).unwrap();
        prop_assert!(mp <= mq * (1.0 + 1e-12), "m_{p}({a},{b}) = {mp} > m_{q} = {mq}");
        if (a - b).abs() > 1e-3 {
            prop_assert!(mp < mq, "strict monotonicity failed off the diagonal");
        }
    }

    /// Equality across exponents exactly on the diagonal.
    #[test]
    fn prop_scalar_mean_equality_at_diagonal(a in 0.05f64..4.0, p in -6.0f64..6.0) {
        let m = scalar_power_mean(Power::Finite(p), a, a).unwrap();
        prop_assert!((m - a).abs() <= 1e-12 * a.max(1.0));
    }

    /// Harmonic <= geometric <= arithmetic.
    #[test]
    fn prop_agh_inequality(a in 0.01f64..10.0, b in 0.01f64..10.0) {
        let h = scalar_power_mean(Power::Finite(-1.0), a, b).unwrap();
        let g = scalar_power_mean(Power::Finite(0.0), a, b).unwrap();
        let m = scalar_power_mean(Power::Finite(1.0), a, b).unwrap();
        prop_assert!(h <= g * (1.0 + 1e-12));
        prop_assert!(g <= m * (1.0 + 1e-12));
    }

    /// The infinite limits bracket every finite exponent.
    #[test]
    fn prop_limits_bracket(a in 0.05f64..4.0, b in 0.05f64..4.0, p in -8.0f64..8.0) {
        let lo = scalar_power_mean(Power::NegInf, a, b).unwrap();
        let hi = scalar_power_mean(Power::PosInf, a, b).unwrap();
        let mid = scalar_power_mean(Power::Finite(p), a, b).unwrap();
        prop_assert!(lo <= mid * (1.0 + 1e-12) && mid <= hi * (1.0 + 1e-12));
        prop_assert_eq!(lo, a.min(b));
        prop_assert_eq!(hi, a.max(b));
    }
}

/// Simultaneously diagonalizable pair: eigenvalues of the matrix mean are
/// the scalar means of paired eigenvalues.
#[test]
fn commuting_pair_reduces_to_scalar_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(4301);
    for &p in &[-3.0f64, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0] {
        for _case in 0..6 {
            let n = rng.gen_range(2..7);
            // shared random orthogonal basis from a symmetric eigh
            let q = {
                let seed = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                eigh(&seed).unwrap().vectors
            };
            let alphas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
            let betas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
            let assemble = |vals: &[f64]| {
                SymMatrix::from_fn(n, |i, j| {
                    (0..n).map(|l| vals[l] * q.get(i, l) * q.get(j, l)).sum()
                })
            };
            let a = assemble(&alphas);
            let b = assemble(&betas);
            let param = PowerParam::unchecked(Power::Finite(p), 0.0);
            let mean = dense_power_mean(&a, &b, &param).unwrap();
            let got = eigh(&mean).unwrap().values;
            let mut want: Vec<f64> = alphas
                .iter()
                .zip(&betas)
                .map(|(&x, &y)| scalar_power_mean(Power::Finite(p), x, y).unwrap())
                .collect();
            want.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-8 * w.max(1.0), "p={p}: {g} vs {w}");
            }
        }
    }
}

/// Spectrum confinement of the signed power mean Laplacian.
#[test]
fn spm_spectrum_sits_in_shifted_band() {
    let params = SsbmParams::new(2, 20, 0.5, 0.2, 0.2, 0.5).unwrap();
    for (i, &p) in [-5.0f64, -1.0, 0.0, 1.0, 3.0].iter().enumerate() {
        let shift = spml::means::default_shift(Power::Finite(p)).unwrap();
        let s = sample(&params, 900 + i as u64).unwrap();
        let param = PowerParam::new(Power::Finite(p), shift).unwrap();
        let lp = dense_spm_laplacian(&s.graph, &param).unwrap();
        let eig = eigh(&lp).unwrap();
        let lo = eig.values[0];
        let hi = *eig.values.last().unwrap();
        assert!(lo >= shift - 1e-9, "p={p}: eigenvalue {lo} below shift {shift}");
        assert!(hi <= 2.0 + shift + 1e-9, "p={p}: eigenvalue {hi} above 2+shift");
    }
}

/// Norm bound on the difference of matrix power means (a light draw count
/// here; the acceptance suite runs the full 200 draws per exponent).
#[test]
fn power_mean_difference_norm_bound_smoke() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let alpha = 0.4f64;
    let beta = 2.5f64;
    for &p in &[-2i64, 2] {
        for _case in 0..20 {
            let n = rng.gen_range(2..6);
            let draw = |rng: &mut ChaCha8Rng| {
                let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let eig = eigh(&m).unwrap();
                // remap the spectrum into [alpha, beta]
                eig.assemble(|l: f64| {
                    let t = (l.tanh() + 1.0) / 2.0;
                    alpha + t * (beta - alpha)
                })
            };
            let a1 = draw(&mut rng);
            let a2 = draw(&mut rng);
            let b1 = draw(&mut rng);
            let b2 = draw(&mut rng);
            let param = PowerParam::unchecked(Power::Finite(p as f64), 0.0);
            let ma = dense_power_mean(&a1, &a2, &param).unwrap();
            let mb = dense_power_mean(&b1, &b2, &param).unwrap();
            let lhs = spml::dense::spectral_norm(&ma.sub(&mb).unwrap()).unwrap();
            let d1 = spml::dense::spectral_norm(&a1.sub(&b1).unwrap()).unwrap();
            let d2 = spml::dense::spectral_norm(&a2.sub(&b2).unwrap()).unwrap();
            let abs_p = p.unsigned_abs() as f64;
            let c_p = if p >= 1 {
                (p as f64).powf(1.0 / p as f64) * beta.powf(1.0 - 1.0 / p as f64)
            } else {
                abs_p.powf(1.0 / abs_p) * alpha.powf(-(3.0 + 1.0 / abs_p))
            };
            let rhs = c_p
                * scalar_power_mean(Power::Finite(abs_p), d1, d2)
                    .unwrap()
                    .powf(1.0 / abs_p);
            assert!(
                lhs <= rhs * (1.0 + 1e-9),
                "p={p}: ||Mp(A)-Mp(B)|| = {lhs} exceeds bound {rhs}"
            );
        }
    }
}
