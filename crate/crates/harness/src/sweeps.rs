//! Sweep execution: each row measures fringe visibility, concurrence,
//! distinguishability, and source coherence through either the analytic
//! engine or the pulse-level device pipeline.

use rayon::prelude::*;

use ramsey_core::interferometer::{
    self, phase_detector_unitary, prepare_input, reference_detector_state, run_ideal_sweep,
};
use ramsey_core::measures::{
    concurrence, distinguishability, embed_effective_two_qubit, l1_coherence,
    wpd_orthonormal_complement,
};
use ramsey_core::{CoreError, StateVector};
use ramsey_device::sequence::programs;
use ramsey_device::{
    delta_for_beta, derive_seed, fringe_point, run_single_qubit_tomography,
    run_two_qubit_tomography, simulate_sequence, DeviceParams,
};

use crate::error::Result;
use crate::scenario::{FringeTrace, Scenario, ScenarioKind, SweepRow};

/// Least-squares fringe fit: (visibility, phase, offset, rms residual).
pub fn fit_fringe(thetas: &[f64], p1: &[f64]) -> Result<(f64, f64, f64, f64)> {
    Ok(interferometer::fit_fringe(thetas, p1)?)
}

/// Runs whichever sweep the scenario describes.
pub fn run_scenario(scenario: &Scenario) -> Result<(Vec<SweepRow>, Vec<FringeTrace>)> {
    scenario.validate()?;
    match &scenario.kind {
        ScenarioKind::IdealSweep { c0, betas } => run_ideal_scenario(scenario, *c0, betas),
        ScenarioKind::BetaSweep { betas } => {
            let rows: Vec<(f64, f64)> = betas.iter().map(|&b| (b, 0.0)).collect();
            run_device_rows(scenario, &rows, ControlAxis::Beta)
        }
        ScenarioKind::DelaySweep { beta, delays } => {
            let rows: Vec<(f64, f64)> = delays.iter().map(|&d| (*beta, d)).collect();
            run_device_rows(scenario, &rows, ControlAxis::DelayMicroseconds)
        }
    }
}

/// Analytic-engine sweep: exact states, fitted fringes, closed-path
/// concurrence and distinguishability.
fn run_ideal_scenario(
    scenario: &Scenario,
    c0: f64,
    betas: &[f64],
) -> Result<(Vec<SweepRow>, Vec<FringeTrace>)> {
    let thetas = scenario.theta_grid();
    let alpha = std::f64::consts::FRAC_PI_4;
    let w0 = reference_detector_state();

    let results: Vec<Result<(SweepRow, FringeTrace)>> = betas
        .par_iter()
        .map(|&beta| {
            let u = phase_detector_unitary(beta, 2);
            let record = run_ideal_sweep(&thetas, c0, alpha, &w0, &u)?;

            let rho_q = prepare_input(c0, 0.0, alpha)?;
            let joint = interferometer::couple_wpd(&rho_q, &w0, &u)?;
            let w1 = detector_partner(&w0, &u)?;
            let embedded = embed_effective_two_qubit(&joint, &w0, &w1)?;
            let e = concurrence(&embedded)?;
            let d = distinguishability(&joint, 0)?;

            let row = SweepRow::assemble(beta, record.fitted_visibility, e, d, c0)?;
            let trace = FringeTrace {
                control: beta,
                thetas: record.thetas.clone(),
                p0: record.p0(),
                p1: record.p1.clone(),
            };
            Ok((row, trace))
        })
        .collect();

    split_results(results)
}

/// The orthonormal partner of the reference detector state, falling back to
/// an arbitrary orthogonal unit vector when the detector transform is too
/// close to the identity for the moved branch to define one.
fn detector_partner(
    w0: &StateVector,
    u: &ramsey_core::ComplexMatrix,
) -> Result<StateVector> {
    match wpd_orthonormal_complement(w0, u) {
        Ok(w1) => Ok(w1),
        Err(CoreError::DegenerateComplement { .. }) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Ok(StateVector::new(
                vec![ramsey_core::c(s, 0.0), ramsey_core::c(s, 0.0)],
                w0.layout().clone(),
            )?)
        }
        Err(e) => Err(e.into()),
    }
}

enum ControlAxis {
    Beta,
    DelayMicroseconds,
}

/// Device-pipeline rows: (beta, delay) pairs, evaluated concurrently with
/// per-row derived seeds; assembly preserves input order.
fn run_device_rows(
    scenario: &Scenario,
    rows: &[(f64, f64)],
    axis: ControlAxis,
) -> Result<(Vec<SweepRow>, Vec<FringeTrace>)> {
    let thetas = scenario.theta_grid();
    let params = &scenario.device;

    let results: Vec<Result<(SweepRow, FringeTrace)>> = rows
        .par_iter()
        .enumerate()
        .map(|(row_idx, &(beta, delay))| {
            let row_seed = derive_seed(scenario.seed, row_idx as u64);
            let (row, trace) =
                device_row(params, scenario, &thetas, beta, delay, row_seed)?;
            let control = match axis {
                ControlAxis::Beta => beta,
                ControlAxis::DelayMicroseconds => delay * 1e6,
            };
            Ok((
                SweepRow { control, ..row },
                FringeTrace { control, ..trace },
            ))
        })
        .collect();

    split_results(results)
}

/// One full device measurement at (beta, delay): fringe sweep for V, joint
/// tomography for E and D, single-qubit tomography for C0.
fn device_row(
    params: &DeviceParams,
    scenario: &Scenario,
    thetas: &[f64],
    beta: f64,
    delay: f64,
    row_seed: u64,
) -> Result<(SweepRow, FringeTrace)> {
    let delta = delta_for_beta(beta, params.g1)?;
    let noise = scenario.noise;

    // Fringe points, evaluated concurrently.
    let points: Vec<Result<(f64, f64)>> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let seq = programs::fringe(params, theta, delta, delay, noise)?;
            Ok(fringe_point(params, &seq, scenario.shots, derive_seed(row_seed, i as u64))?)
        })
        .collect();
    let mut p0 = Vec::with_capacity(thetas.len());
    let mut p1 = Vec::with_capacity(thetas.len());
    for point in points {
        let (a, b) = point?;
        p0.push(a);
        p1.push(b);
    }
    let (visibility, _phase, _offset, _rms) = fit_fringe(thetas, &p1)?;

    // Entanglement and path information from joint tomography.
    let tomo_seq = programs::entanglement(params, 0.0, delta, delay, noise)?;
    let pre_tomo = simulate_sequence(&tomo_seq, params)?;
    let tomo = run_two_qubit_tomography(params, &pre_tomo, scenario.shots, derive_seed(row_seed, 1_000))?;
    let e = concurrence(&tomo.reconstructed)?;
    let d = distinguishability(&tomo.reconstructed, 0)?;

    // Source coherence without any detector preparation.
    let c0_seq = programs::coherence(params, 0.0, delay, noise)?;
    let pre_c0 = simulate_sequence(&c0_seq, params)?;
    let c0_tomo =
        run_single_qubit_tomography(params, &pre_c0, scenario.shots, derive_seed(row_seed, 2_000))?;
    let c0 = l1_coherence(&c0_tomo.reconstructed)?;

    let row = SweepRow::assemble(beta, visibility, e, d, c0)?;
    let trace = FringeTrace { control: beta, thetas: thetas.to_vec(), p0, p1 };
    Ok((row, trace))
}

fn split_results(
    results: Vec<Result<(SweepRow, FringeTrace)>>,
) -> Result<(Vec<SweepRow>, Vec<FringeTrace>)> {
    let mut rows = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let (row, trace) = r?;
        rows.push(row);
        traces.push(trace);
    }
    Ok((rows, traces))
}

/// Summary of one tomography demonstration run.
#[derive(Debug, Clone)]
pub struct TomoDemo {
    pub beta: f64,
    pub concurrence_true: f64,
    pub concurrence_reconstructed: f64,
    pub fidelity: f64,
    pub trace_distance: f64,
    pub mean_leakage: f64,
    pub record_text: Option<String>,
}

/// Prepares the entangling sequence at `beta`, tomographs the result, and
/// reports reconstruction quality against the simulated truth.
pub fn run_tomo_demo(scenario: &Scenario, beta: f64) -> Result<TomoDemo> {
    scenario.device.validate()?;
    let params = &scenario.device;
    let delta = delta_for_beta(beta, params.g1)?;
    let seq = programs::entanglement(params, 0.0, delta, 0.0, scenario.noise)?;
    let pre_tomo = simulate_sequence(&seq, params)?;
    let (truth, _) = ramsey_device::pipeline::two_qubit_block(&pre_tomo)?;
    let run = run_two_qubit_tomography(params, &pre_tomo, scenario.shots, scenario.seed)?;
    Ok(TomoDemo {
        beta,
        concurrence_true: concurrence(&truth)?,
        concurrence_reconstructed: concurrence(&run.reconstructed)?,
        fidelity: ramsey_device::fidelity(&truth, &run.reconstructed)?,
        trace_distance: ramsey_device::trace_distance(&truth, &run.reconstructed)?,
        mean_leakage: run.mean_leakage,
        record_text: run.record.map(|r| r.to_text()),
    })
}
