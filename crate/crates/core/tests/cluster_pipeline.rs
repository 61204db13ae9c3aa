//! Pipeline-level clustering properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spml::cluster::{clustering_error, kmeans, spectral_embedding, KmeansOptions, Labels};
use spml::dense::{eigh, ColMat, SymMatrix};
use spml::ssbm::{sample, SsbmParams};
use spml::MethodSpec;
use spml::means::PowerParam;

/// The partition is invariant under orthogonal rotation of the embedding.
#[test]
fn embedding_rotation_invariance() {
    let params = SsbmParams::new(2, 40, 0.3, 0.05, 0.05, 0.3).unwrap();
    let s = sample(&params, 21).unwrap();
    let method = MethodSpec::PowerMean {
        param: PowerParam::with_default_shift(-2.0),
        matrix_free: false,
    };
    let (embedding, k_prime) = spectral_embedding(&s.graph, &method, 2).unwrap();
    let opts = KmeansOptions { seed: 7, ..Default::default() };
    let base = kmeans(&embedding, 2, &opts).unwrap();

    // random orthogonal k' x k' rotation from an eigendecomposition
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let q = eigh(&SymMatrix::from_fn(k_prime, |_, _| rng.gen_range(-1.0..1.0)))
        .unwrap()
        .vectors;
    let mut rot = vec![0.0; k_prime * k_prime];
    for i in 0..k_prime {
        for j in 0..k_prime {
            rot[i * k_prime + j] = q.get(i, j);
        }
    }
    let rotated: ColMat<f64> = embedding.mul_small(&rot, k_prime);
    let turned = kmeans(&rotated, 2, &opts).unwrap();
    assert_eq!(clustering_error(&base, &turned).unwrap(), 0.0);
}

#[test]
fn error_is_permutation_invariant_and_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _case in 0..30 {
        let n = rng.gen_range(5..40);
        let k = rng.gen_range(2..5);
        let a = Labels::new((0..n).map(|_| rng.gen_range(0..k)).collect());
        let b = Labels::new((0..n).map(|_| rng.gen_range(0..k)).collect());
        let ab = clustering_error(&a, &b).unwrap();
        let ba = clustering_error(&b, &a).unwrap();
        assert_eq!(ab, ba);
        // renaming clusters of one side leaves the error unchanged
        let shift = Labels::new(a.as_slice().iter().map(|&l| (l + 1) % k).collect());
        let shifted = clustering_error(&shift, &b).unwrap();
        assert!((ab - shifted).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&ab));
    }
}
