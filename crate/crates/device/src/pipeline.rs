//! Measurement pipelines on top of the pulse simulator: fringe points with
//! readout error and correction, joint two-qubit tomography of the
//! interfering qubit and the ancilla, and single-qubit tomography of the
//! source coherence.

use ramsey_core::linalg::{c, ComplexMatrix};
use ramsey_core::state::{DensityOperator, HilbertLayout};

use crate::error::{DeviceError, Result};
use crate::gates::{embed_rotation, QubitId};
use crate::params::DeviceParams;
use crate::sequence::PulseSequence;
use crate::tomography::{
    apply_readout_error, basis_pairs, correct_readout, derive_seed,
    reconstruct_single_qubit_from_probabilities, reconstruct_two_qubit_from_probabilities,
    sample_counts, tomography_rotation, MeasurementRecord, PauliAxis,
};

/// Finite statistics or the infinite-shot limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMode {
    Exact,
    Counts(u64),
}

impl ShotMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, ShotMode::Exact)
    }
}

/// Reduces the full three-subsystem state to the interfering-qubit (levels
/// 0/1) x ancilla two-qubit block, renormalized; returns the discarded
/// leakage population.
pub fn two_qubit_block(rho: &DensityOperator) -> Result<(DensityOperator, f64)> {
    let reduced = rho.partial_trace(&[0, 1])?;
    if reduced.layout().dims() != [3, 2] {
        return Err(DeviceError::Config(format!(
            "expected a [3, 2, resonator] layout, got {:?}",
            rho.layout().dims()
        )));
    }
    let mut block = ComplexMatrix::zeros(4, 4);
    for r in 0..4 {
        for s in 0..4 {
            let (q, a) = (r / 2, r % 2);
            let (p, b) = (s / 2, s % 2);
            block[(r, s)] = reduced.matrix()[(q * 2 + a, p * 2 + b)];
        }
    }
    let captured = block.trace().re;
    let leakage = 1.0 - captured;
    if captured <= 0.0 {
        return Err(DeviceError::NumericalConsistency(
            "no population left in the two-level block".into(),
        ));
    }
    let block = block.scale(c(1.0 / captured, 0.0));
    Ok((
        DensityOperator::from_parts_unchecked(block, HilbertLayout::new(vec![2, 2])?).scrubbed(),
        leakage,
    ))
}

/// Reduces the full state to the interfering qubit's 0/1 block alone.
pub fn single_qubit_block(rho: &DensityOperator) -> Result<(DensityOperator, f64)> {
    let reduced = rho.partial_trace(&[0])?;
    let mut block = ComplexMatrix::zeros(2, 2);
    for r in 0..2 {
        for s in 0..2 {
            block[(r, s)] = reduced.matrix()[(r, s)];
        }
    }
    let captured = block.trace().re;
    let leakage = 1.0 - captured;
    if captured <= 0.0 {
        return Err(DeviceError::NumericalConsistency(
            "no population left in the qubit block".into(),
        ));
    }
    let block = block.scale(c(1.0 / captured, 0.0));
    Ok((
        DensityOperator::from_parts_unchecked(block, HilbertLayout::flat(2)).scrubbed(),
        leakage,
    ))
}

/// One fringe point: simulate the sequence, read the interfering qubit
/// through the confusion matrix, optionally sample finite shots, and invert
/// the confusion. Returns (P0, P1).
pub fn fringe_point(
    params: &DeviceParams,
    seq: &PulseSequence,
    mode: ShotMode,
    seed: u64,
) -> Result<(f64, f64)> {
    let rho = crate::sequence::simulate_sequence(seq, params)?;
    let p1 = rho.subsystem_population(0, 1)?;
    let truth = [1.0 - p1, p1];
    let f1 = params.q1.readout_matrix()?;
    let measured = apply_readout_error(&truth, &[&f1])?;
    let observed = match mode {
        ShotMode::Exact => measured,
        ShotMode::Counts(shots) => {
            let counts = sample_counts(&measured, shots, seed)?;
            counts.iter().map(|&n| n as f64 / shots as f64).collect()
        }
    };
    let corrected = correct_readout(&observed, &[&f1])?;
    Ok((corrected[0], corrected[1]))
}

/// Result of a simulated tomography run.
#[derive(Debug, Clone)]
pub struct TomographyRun {
    pub reconstructed: DensityOperator,
    /// Population discarded outside the measured two-level blocks, averaged
    /// over bases.
    pub mean_leakage: f64,
    /// Raw counts; None in exact mode.
    pub record: Option<MeasurementRecord>,
}

/// Joint two-qubit tomography of the pre-measurement state: per basis pair,
/// apply the basis pulses, reduce to the two-qubit block, push through
/// readout confusion, optionally sample, correct, and reconstruct. Basis
/// pulses are instantaneous; every readout-chain imperfection is carried by
/// the confusion matrix.
pub fn run_two_qubit_tomography(
    params: &DeviceParams,
    pre_measurement: &DensityOperator,
    mode: ShotMode,
    seed: u64,
) -> Result<TomographyRun> {
    let f1 = params.q1.readout_matrix()?;
    let f2 = params.q2.readout_matrix()?;
    let mut probs_per_basis = Vec::with_capacity(9);
    let mut counts = Vec::with_capacity(9);
    let mut labels = Vec::with_capacity(9);
    let mut leakage_acc = 0.0;

    for (k, (axis_a, axis_b)) in basis_pairs().into_iter().enumerate() {
        let rotated = apply_basis_pulses(params, pre_measurement, axis_a, axis_b)?;
        let (block, leakage) = two_qubit_block(&rotated)?;
        leakage_acc += leakage;
        // The block is already in the measurement frame; its diagonal is the
        // outcome distribution.
        let truth: Vec<f64> = (0..4).map(|i| block.matrix()[(i, i)].re.max(0.0)).collect();
        let total: f64 = truth.iter().sum();
        let truth: Vec<f64> = truth.iter().map(|p| p / total).collect();
        let measured = apply_readout_error(&truth, &[&f1, &f2])?;
        let observed = match mode {
            ShotMode::Exact => measured,
            ShotMode::Counts(shots) => {
                let basis_seed = derive_seed(seed, k as u64);
                let histogram = sample_counts(&measured, shots, basis_seed)?;
                let freqs = histogram.iter().map(|&n| n as f64 / shots as f64).collect();
                counts.push(histogram);
                freqs
            }
        };
        labels.push(format!("{}{}", axis_a.label(), axis_b.label()));
        probs_per_basis.push(correct_readout(&observed, &[&f1, &f2])?);
    }

    let reconstructed = reconstruct_two_qubit_from_probabilities(&probs_per_basis)?;
    let record = match mode {
        ShotMode::Exact => None,
        ShotMode::Counts(shots) => Some(MeasurementRecord {
            basis_labels: labels,
            counts,
            shots,
            seed,
        }),
    };
    Ok(TomographyRun { reconstructed, mean_leakage: leakage_acc / 9.0, record })
}

/// Single-qubit tomography of the interfering qubit (the source-coherence
/// measurement).
pub fn run_single_qubit_tomography(
    params: &DeviceParams,
    pre_measurement: &DensityOperator,
    mode: ShotMode,
    seed: u64,
) -> Result<TomographyRun> {
    let f1 = params.q1.readout_matrix()?;
    let mut probs_per_axis = Vec::with_capacity(3);
    let mut counts = Vec::with_capacity(3);
    let mut labels = Vec::with_capacity(3);
    let mut leakage_acc = 0.0;

    for (k, axis) in PauliAxis::ALL.into_iter().enumerate() {
        let rotated = apply_single_basis_pulse(params, pre_measurement, axis)?;
        let (block, leakage) = single_qubit_block(&rotated)?;
        leakage_acc += leakage;
        let truth = [
            block.matrix()[(0, 0)].re.max(0.0),
            block.matrix()[(1, 1)].re.max(0.0),
        ];
        let total = truth[0] + truth[1];
        let truth = [truth[0] / total, truth[1] / total];
        let measured = apply_readout_error(&truth, &[&f1])?;
        let observed = match mode {
            ShotMode::Exact => measured,
            ShotMode::Counts(shots) => {
                let histogram = sample_counts(&measured, shots, derive_seed(seed, 100 + k as u64))?;
                let freqs = histogram.iter().map(|&n| n as f64 / shots as f64).collect();
                counts.push(histogram);
                freqs
            }
        };
        labels.push(axis.label().to_string());
        probs_per_axis.push(correct_readout(&observed, &[&f1])?);
    }

    let reconstructed = reconstruct_single_qubit_from_probabilities(&probs_per_axis)?;
    let record = match mode {
        ShotMode::Exact => None,
        ShotMode::Counts(shots) => Some(MeasurementRecord {
            basis_labels: labels,
            counts,
            shots,
            seed,
        }),
    };
    Ok(TomographyRun { reconstructed, mean_leakage: leakage_acc / 3.0, record })
}

/// Applies both qubits' tomography pulses as one instantaneous unitary.
fn apply_basis_pulses(
    params: &DeviceParams,
    rho: &DensityOperator,
    axis_a: PauliAxis,
    axis_b: PauliAxis,
) -> Result<DensityOperator> {
    let u = embed_rotation(params, QubitId::Q1, &tomography_rotation(axis_a)).matmul(
        &embed_rotation(params, QubitId::Q2, &tomography_rotation(axis_b)),
    );
    Ok(rho.conjugate_by(&u)?)
}

fn apply_single_basis_pulse(
    params: &DeviceParams,
    rho: &DensityOperator,
    axis: PauliAxis,
) -> Result<DensityOperator> {
    let u = embed_rotation(params, QubitId::Q1, &tomography_rotation(axis));
    Ok(rho.conjugate_by(&u)?)
}
