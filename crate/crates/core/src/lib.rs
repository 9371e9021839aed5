//! Pivoted and randomized QLP factorizations for low-rank approximation and
//! singular value tracking.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the precision for common use.

pub mod analysis;
pub mod error;
pub mod io;
pub mod matrix;
pub mod qlp;
pub mod qr;
pub mod random;
pub mod scalar;
pub mod svd;
pub mod testmat;

pub use analysis::{err_metric, frobenius_bound, BoundReport, TrackReport, TrackedMethod};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Operator};
pub use qlp::{
    brqlp, erqlp, error_indicator, pivoted_qlp, rqlp, truncate, Algorithm, QlpFactorization, RandomizedRun,
    SketchConfig, Triangle,
};
pub use qr::{qr_column_pivoted, qr_unpivoted, PivotedQrResult};
pub use random::RngState;
pub use scalar::Scalar;
pub use svd::{singular_values, SingularValueList};
pub use testmat::{Family, SpectrumKind, SpectrumSpec, TestProblem};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Qlp = QlpFactorization<f64>;
pub type Qlp32 = QlpFactorization<f32>;
pub type SingularValues = SingularValueList<f64>;
