//! QAOA ground-state preparation for the fully-connected p-spin ferromagnet
//!
//! ```text
//! H = -(Sum_j sigma^z_j)^p / N^(p-1) - h Sum_j sigma^x_j
//! ```
//!
//! simulated exactly in the (N+1)-dimensional maximum-spin sector.
//!
//! - [`sector`]: Dicke basis, collective operators, exact diagonalisation.
//! - [`engine`]: circuit layers, energies, fidelities and adjoint gradients.
//! - [`optimizer`]: BFGS with strong-Wolfe line search, r-init / l-init, restarts.
//! - [`analytic`]: closed-form single-layer solutions and parameter symmetries.
//! - [`experiment`]: parameter sweeps, fits and table output.

pub mod analytic;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod optimizer;
pub mod par;
pub mod phase;
pub mod sector;
pub mod tridiag;

pub use engine::{EvaluationRecord, QaoaModel, QaoaParams};
pub use error::{Error, Result};
pub use sector::{ProblemSpec, StateVector, SymmetricBasis, TargetSpectrum};
