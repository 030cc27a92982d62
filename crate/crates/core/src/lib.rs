//! Weighted Cauchy matrices `C_jk = √(A_j A_k)/(a_j + a_k)` and the spectral
//! map `Ω(a, A) = (b, B)` built from their eigendecomposition.
//!
//! Everything numerical is generic over [`Scalar`], implemented for `f64` and
//! the software [`DoubleDouble`]; the aliases below name the two concrete
//! instantiations.

pub mod cauchy;
pub mod dd;
pub mod eig;
pub mod error;
pub mod io;
pub mod lyapunov;
pub mod matrix;
pub mod measure;
pub mod pair;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod specmap;

pub use cauchy::{build_cauchy, cholesky_check, displacement_residual, CauchyMatrix};
pub use dd::DoubleDouble;
pub use eig::{eigh, krylov_rank, EigenSystem};
pub use error::{Error, Result};
pub use lyapunov::{solve_eigenbasis, solve_integral, uniqueness_probe, LyapunovProblem};
pub use matrix::Matrix;
pub use measure::{g_alpha_matrix, hankel_kernel, moment_check, PointMeasure};
pub use pair::{inverse_weight_vector, validate_pair, weight_vector, SpectralPair, WeightVector};
pub use report::{Check, CheckStatus, Tolerances, VerificationReport};
pub use scalar::{Scalar, ScalarMode};
pub use specmap::{spectral_map, verify_all, CheckGroup, SpectralMapOutput};

pub type SpectralPairF64 = SpectralPair<f64>;
pub type SpectralPairDd = SpectralPair<DoubleDouble>;
pub type MatrixF64 = Matrix<f64>;
pub type MatrixDd = Matrix<DoubleDouble>;
pub type CauchyMatrixF64 = CauchyMatrix<f64>;
pub type CauchyMatrixDd = CauchyMatrix<DoubleDouble>;
pub type EigenSystemF64 = EigenSystem<f64>;
pub type EigenSystemDd = EigenSystem<DoubleDouble>;
pub type SpectralMapOutputF64 = SpectralMapOutput<f64>;
pub type SpectralMapOutputDd = SpectralMapOutput<DoubleDouble>;
pub type LyapunovProblemF64 = LyapunovProblem<f64>;
pub type LyapunovProblemDd = LyapunovProblem<DoubleDouble>;
pub type PointMeasureF64 = PointMeasure<f64>;
pub type PointMeasureDd = PointMeasure<DoubleDouble>;
