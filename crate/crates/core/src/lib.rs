//! Covariance matching for vector ARMA models.
//!
//! Given matrix covariances `C_0..C_n` and a fixed moving-average part
//! `B(z)`, find an autoregressive polynomial `A(z) = sum_k A_k z^{-k}` in the
//! Schur class such that the model `A(z) y = B(z) w` has exactly those first
//! `n + 1` covariances. The problem is rewritten as the quadratic system
//! `f_C(A) = B B^*` and solved by continuation from the spectral
//! factorization problem `A A^* = B B^*`.
//!
//! ```
//! use varmatch::{homotopy_solve, CovSequence, HomotopyConfig, MaInput};
//!
//! let data = CovSequence::from_scalars(&[4.0 / 3.0, 2.0 / 3.0]).unwrap();
//! let report = homotopy_solve(&data, &MaInput::Trivial, &HomotopyConfig::default()).unwrap();
//! assert!((report.a.coeff(1)[(0, 0)] + 0.5).abs() < 1e-10);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod covdata;
pub mod error;
pub mod factor;
pub mod generator;
pub mod linalg;
pub mod matchmap;
pub mod matpoly;
pub mod solver;

pub use covariance::{
    max_deviation, varma_cov_fft, varma_cov_linear, verify_match, CovOracleConfig, MatchVerdict,
    OracleMethod,
};
pub use covdata::{
    build_toeplitz, build_u, check_pd, denormalize_solution, existence_check, normalize,
    CovSequence, ExistenceReport, ToeplitzReport,
};
pub use error::{Error, ErrorClass, Result};
pub use factor::{solve_symmetric_eq, spectral_factor, FactorConfig};
pub use generator::{random_problem, random_schur, GenConfig, GeneratedProblem};
pub use matchmap::{
    coord_len, devectorize, f_map, f_o, homotopy_dt, homotopy_map, jacobian_apply,
    jacobian_fd_deviation, jacobian_matrix, vectorize, vectorize_pseudo, ResidualCoords,
    SchurCoords,
};
pub use matpoly::{
    is_schur, min_eig_on_grid, poly_product_full, sym_outer, trunc_product, MatPoly, PseudoPoly,
    SchurClassSpec, SchurVerdict, SchurWitness,
};
pub use solver::{
    homotopy_solve, newton_solve, yule_walker_solve, HomotopyConfig, MaInput, NewtonOutcome,
    PathPoint, SolveFailure, SolveReport,
};

pub use nalgebra::DMatrix;
