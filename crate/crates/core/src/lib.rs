//! Desk-scale quantum state mechanics for a Ramsey interferometer coupled to
//! a which-path detector: dense complex linear algebra, multi-subsystem
//! density operators, complementarity measures, and the exact analytic
//! engine relating coherence, fringe visibility, entanglement, and
//! distinguishability.

pub mod eigen;
pub mod error;
pub mod interferometer;
pub mod linalg;
pub mod measures;
pub mod state;

pub use eigen::{general_eigenvalues, hermitian_eigensystem, hermitian_sqrt, trace_norm};
pub use error::{CoreError, Result};
pub use linalg::{c, tensor, C64, ComplexMatrix};
pub use state::{DensityOperator, HilbertLayout, StateVector};
