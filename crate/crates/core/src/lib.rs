//! Spectral clustering of signed graphs with the signed power mean Laplacian.
//!
//! A signed graph carries two nonnegative edge layers: attractive relations
//! `W+` and repulsive relations `W-`. This crate blends the normalized
//! Laplacian of the positive layer with the normalized signless Laplacian of
//! the negative layer through the one-parameter family of matrix power means,
//!
//! ```text
//! L_p = M_p(L_sym^+ + eps*I, Q_sym^- + eps*I),   M_p(A, B) = ((A^p + B^p)/2)^(1/p)
//! ```
//!
//! and clusters vertices with k-means on the bottom eigenvectors of `L_p`.
//! The exponent interpolates between requiring both layers to be informative
//! (`p -> +inf`) and requiring only one of them (`p -> -inf`).
//!
//! Alongside the clustering pipeline the crate ships a signed stochastic
//! block model laboratory: exact expected operators, closed-form recovery
//! predicates, concentration bounds, and samplers, so that the analytic
//! claims about `L_p` can be checked against direct eigenspace computations.
//!
//! Modules:
//! - [`dense`]: self-contained dense symmetric linear algebra (Jacobi
//!   eigendecomposition, matrix functions, subspace geometry) used as the
//!   exact oracle everywhere else.
//! - [`graph`]: the signed graph data model and matrix-free layer operators.
//! - [`means`]: scalar and matrix power means, the dense `L_p`.
//! - [`krylov`]: Krylov-subspace machinery, the matrix-free eigensolver for
//!   `L_p` with negative integer `p`, and the dense eigensolver routes.
//! - [`ssbm`]: signed stochastic block model sampling, expected models, and
//!   executable recovery/concentration predicates.
//! - [`cluster`]: spectral clustering, k-means, and the clustering error.
//! - [`baselines`]: dense comparison operators (signed Laplacians, arithmetic
//!   and geometric mean Laplacians, Bethe Hessian).
//!
//! All core math is generic over the scalar type through [`scalar::Real`];
//! the aliases below fix `f64`, which is what the command line tools and the
//! test suite use.

pub mod baselines;
pub mod cluster;
pub mod dense;
pub mod error;
pub mod graph;
pub mod krylov;
pub mod means;
pub mod scalar;
pub mod ssbm;

pub use error::{Error, Result};
pub use scalar::Real;

/// Dense symmetric matrix over `f64`.
pub type SymMat = dense::SymMatrix<f64>;
/// Column block (eigenvector basis, embedding) over `f64`.
pub type Cols = dense::ColMat<f64>;
/// Full spectral factorization over `f64`.
pub type Eigen = dense::EigenDecomposition<f64>;
/// Signed graph over `f64` edge weights.
pub type Graph = graph::SignedGraph<f64>;
/// Extended-real power mean exponent over `f64`.
pub type Power = means::Power<f64>;
/// Exponent plus diagonal shift for `L_p` over `f64`.
pub type PowerParam = means::PowerParam<f64>;
/// Clustering method selector over `f64`.
pub type MethodSpec = baselines::MethodSpec<f64>;
