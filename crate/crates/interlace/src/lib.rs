// `!(x > 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod cli;
pub mod discrepancy;
pub mod engine;
pub mod error;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod lyapunov;
pub mod mixed;
pub mod oracle;
pub mod poly;
pub mod verify;
pub mod sum;

pub use error::{Error, Result};
pub use linalg::{ensemble_stats, EnsembleStats, HermitianMatrix, MatrixEnsemble};
pub use mixed::{DerivativeSpec, SubsetDerivativeTable};
pub use poly::{RealPolynomial, RootReport};
