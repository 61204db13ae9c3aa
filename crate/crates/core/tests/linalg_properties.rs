//! Property tests for the dense linear algebra oracle layer.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spml::dense::{
    eigh, geometric_mean, spectral_norm, subspace_distance, sym_power, ColMat, SymMatrix,
};

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix<f64> {
    SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix<f64> {
    let b = random_symmetric(n, rng);
    let mut m = b.mul_sym(&b).unwrap();
    m = m.add_scaled_identity(0.5 + rng.gen_range(0.0..1.0));
    m
}

fn reconstruction_error(a: &SymMatrix<f64>) -> f64 {
    let eig = eigh(a).unwrap();
    let back = eig.assemble(|l| l);
    let diff = back.sub(a).unwrap();
    spectral_norm(&diff).unwrap()
}

#[test]
fn eigh_reconstructs_up_to_n_200() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [5usize, 50, 120, 200] {
        let a = random_symmetric(n, &mut rng);
        let scale = spectral_norm(&a).unwrap().max(1.0);
        let err = reconstruction_error(&a);
        assert!(err <= 1e-8 * scale, "n={n}: reconstruction error {err}");
        // orthonormality of the basis
        let eig = eigh(&a).unwrap();
        let defect = eig.vectors.orthonormality_defect();
        assert!(defect <= 1e-10, "n={n}: basis defect {defect}");
        // per-pair residuals
        let mut buf = vec![0.0; n];
        for (j, &lambda) in eig.values.iter().enumerate() {
            a.matvec(eig.vectors.col(j), &mut buf);
            let r: f64 = buf
                .iter()
                .zip(eig.vectors.col(j))
                .map(|(&x, &v)| (x - lambda * v).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-8 * scale, "n={n}, j={j}: residual {r}");
        }
    }
}

#[test]
fn sym_power_group_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for &p in &[-3.0f64, -1.0, 2.0, 3.0] {
        for n in [3usize, 8, 16] {
            let a = random_spd(n, &mut rng);
            let powered = sym_power(&a, p, 1e-12).unwrap();
            let back = sym_power(&powered, 1.0 / p, 1e-12).unwrap();
            let err = back.sub(&a).unwrap().max_abs();
            let scale = a.max_abs().max(1.0);
            assert!(err <= 1e-7 * scale, "p={p}, n={n}: group law error {err}");
        }
    }
}

#[test]
fn geometric_mean_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [2usize, 5, 9, 14] {
        let a = random_spd(n, &mut rng);
        let b = random_spd(n, &mut rng);
        let ab = geometric_mean(&a, &b).unwrap();
        let ba = geometric_mean(&b, &a).unwrap();
        let err = ab.sub(&ba).unwrap().max_abs();
        let scale = ab.max_abs().max(1.0);
        assert!(err <= 1e-7 * scale, "n={n}: symmetry error {err}");
    }
}

#[test]
fn geometric_mean_solves_riccati() {
    // X A^{-1} X = B characterizes the geometric mean
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for n in [3usize, 7] {
        let a = random_spd(n, &mut rng);
        let b = random_spd(n, &mut rng);
        let x = geometric_mean(&a, &b).unwrap();
        let a_inv = sym_power(&a, -1.0, 1e-12).unwrap();
        let back = x.congruence(&a_inv).unwrap();
        let err = back.sub(&b).unwrap().max_abs();
        let scale = b.max_abs().max(1.0);
        assert!(err <= 1e-6 * scale, "n={n}: Riccati error {err}");
    }
}

fn random_orthonormal(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ColMat<f64> {
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut m = ColMat::from_columns(n, &cols).unwrap();
    m.orthonormalize(rng.gen());
    m
}

#[test]
fn subspace_distance_is_a_metric_on_spans() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _case in 0..25 {
        let n = rng.gen_range(6..20);
        let k = rng.gen_range(1..4.min(n));
        let u = random_orthonormal(n, k, &mut rng);
        let v = random_orthonormal(n, k, &mut rng);
        let w = random_orthonormal(n, k, &mut rng);

        let duv = subspace_distance(&u, &v).unwrap();
        let dvu = subspace_distance(&v, &u).unwrap();
        assert!((duv - dvu).abs() < 1e-10, "symmetry: {duv} vs {dvu}");

        // identity of indiscernibles on spans: rotate u's columns
        let mut rot = vec![0.0; k * k];
        let q = random_orthonormal(k, k, &mut rng);
        for i in 0..k {
            for j in 0..k {
                rot[i * k + j] = q.get(i, j);
            }
        }
        let u_rot = u.mul_small(&rot, k);
        let d_same = subspace_distance(&u, &u_rot).unwrap();
        assert!(d_same < 1e-7, "rotation invariance: {d_same}");

        // triangle inequality
        let duw = subspace_distance(&u, &w).unwrap();
        let dvw = subspace_distance(&v, &w).unwrap();
        assert!(duw <= duv + dvw + 1e-9, "triangle: {duw} > {duv} + {dvw}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_eigh_values_sorted_and_reconstruct(entries in proptest::collection::vec(-5.0f64..5.0, 9)) {
        let a = SymMatrix::from_fn(3, |i, j| entries[i * 3 + j].max(entries[j * 3 + i]));
        let eig = eigh(&a).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let back = eig.assemble(|l| l);
        prop_assert!(back.sub(&a).unwrap().max_abs() < 1e-9 * a.max_abs().max(1.0));
    }

    #[test]
    fn prop_spectral_norm_dominates_action(entries in proptest::collection::vec(-3.0f64..3.0, 16), x in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let a = SymMatrix::from_fn(4, |i, j| entries[i * 4 + j].max(entries[j * 4 + i]));
        let norm = spectral_norm(&a).unwrap();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(xn > 1e-6);
        let mut y = vec![0.0; 4];
        a.matvec(&x, &mut y);
        let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(yn <= norm * xn * (1.0 + 1e-9));
    }
}
