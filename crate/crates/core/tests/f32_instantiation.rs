//! The numeric layer is generic over the scalar; a single-precision
//! instantiation keeps that property honest (tolerances here are f32-wide).

use spml::dense::{eigh, sym_power, SymMatrix};
use spml::graph::{from_edge_list, Layer};
use spml::means::{dense_spm_laplacian, scalar_power_mean, Power, PowerParam};
use std::io::Cursor;

#[test]
fn single_precision_pipeline() {
    let a: SymMatrix<f32> = SymMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
    let eig = eigh(&a).unwrap();
    assert_eq!(eig.values, vec![1.0f32, 2.0, 3.0]);

    let m = scalar_power_mean(Power::Finite(-1.0f32), 1.0, 3.0).unwrap();
    assert!((m - 1.5).abs() < 1e-6);

    let spd = SymMatrix::<f32>::from_diagonal(&[4.0, 9.0]);
    let root = sym_power(&spd, 0.5, 1e-6).unwrap();
    assert!((root.get(0, 0) - 2.0).abs() < 1e-5);

    let g = from_edge_list::<f32>(Cursor::new("0 1 1\n1 2 1\n0 2 1\n0 1 -1\n1 2 -1\n0 2 -1\n"))
        .unwrap();
    let op = g.layer_operator(Layer::PositiveLaplacian, 0.5f32).unwrap();
    let y = op.apply_vec(&[1.0, 1.0, 1.0]);
    for v in y {
        assert!((v - 0.5).abs() < 1e-6); // harmonic vector plus shift
    }
    let param = PowerParam::new(Power::Finite(-1.0f32), 0.5).unwrap();
    let lp = dense_spm_laplacian(&g, &param).unwrap();
    let eig = eigh(&lp).unwrap();
    assert!(eig.values[0] >= 0.5 - 1e-5);
    assert!(*eig.values.last().unwrap() <= 2.5 + 1e-5);
}
