//! Pulse-level model of a superconducting Ramsey interferometer with a
//! resonator which-path detector: single-qubit rotation pulses, a resonant
//! ancilla-resonator swap, a detuning-controlled conditional phase on the
//! interfering qubit's upper transition, Lindblad decoherence, and a
//! simulated tomography/readout chain.

pub mod error;
pub mod gates;
pub mod lindblad;
pub mod params;
pub mod pipeline;
pub mod sequence;
pub mod tomography;

pub use error::{DeviceError, Result};
pub use gates::{conditional_phase, delta_for_beta, evolve_closed, jc_generator, rotation_operator, QubitId};
pub use lindblad::{integrate_constant, integrate_master_equation, lindblad_rhs, CollapseOp, EvolutionSegment};
pub use params::{DeviceParams, QubitParams};
pub use pipeline::{fringe_point, run_single_qubit_tomography, run_two_qubit_tomography, ShotMode};
pub use sequence::{simulate_sequence, simulate_sequence_monitored, PulseSegment, PulseSequence};
pub use tomography::{
    apply_readout_error, correct_readout, derive_seed, fidelity, measure_probabilities,
    reconstruct_two_qubit, sample_counts, tomography_rotation, trace_distance, MeasurementRecord,
    PauliAxis, ReadoutMatrix,
};
