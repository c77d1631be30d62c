//! Scenario runner for the interferometer experiments: the analytic sweep,
//! the pulse-level conditional-phase sweep, the detector-delay sweep, and a
//! tomography demonstration, with deterministic CSV/key-value emission.

pub mod error;
pub mod output;
pub mod scenario;
pub mod sweeps;

pub use error::{HarnessError, Result};
pub use output::{emit_fringes, emit_results, parse_results_csv, OutputFormat};
pub use scenario::{FringeTrace, Scenario, ScenarioKind, SweepRow};
pub use sweeps::{fit_fringe, run_scenario, run_tomo_demo, TomoDemo};
