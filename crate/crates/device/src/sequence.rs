//! Pulse sequences and their simulation: ordered rotation / swap /
//! conditional-coupling / idle segments over the three-subsystem layout,
//! with optional Lindblad decoherence.
//!
//! All dynamics run in the rotating frame, so idle periods are pure
//! decoherence and the conditional phase appears directly. Rotations are
//! instantaneous unitaries; with noise enabled each one is bracketed by two
//! half-length decoherence idles standing in for its real pulse window.

use ramsey_core::state::{DensityOperator, StateVector};

use crate::error::{DeviceError, Result};
use crate::gates::{
    collapse_operators, conditional_phase, embed_rotation, evolve_closed, jc_generator,
    rotation_operator, swap_generator, QubitId,
};
use crate::lindblad::{integrate_master_equation, EvolutionSegment};
use crate::params::DeviceParams;

/// One step of a pulse program. Durations in seconds, angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSegment {
    Rotation { target: QubitId, polar: f64, azimuth: f64, angle: f64 },
    /// Two rotations fired in the same pulse window, one per qubit; they
    /// commute, and with noise enabled they share one decoherence window.
    SimultaneousRotations {
        q1: (f64, f64, f64),
        q2: (f64, f64, f64),
    },
    Swap { duration: f64 },
    ConditionalCoupling { delta: f64, duration: f64 },
    Idle { duration: f64 },
}

/// Ordered pulse program plus the decoherence switch.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
    pub noise_enabled: bool,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>, noise_enabled: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(DeviceError::InvalidPulse("empty sequence".into()));
        }
        for seg in &segments {
            match seg {
                PulseSegment::Rotation { polar, azimuth, angle, .. } => {
                    if !(polar.is_finite() && azimuth.is_finite() && angle.is_finite()) {
                        return Err(DeviceError::InvalidPulse("non-finite rotation angle".into()));
                    }
                }
                PulseSegment::SimultaneousRotations { q1, q2 } => {
                    for v in [q1.0, q1.1, q1.2, q2.0, q2.1, q2.2] {
                        if !v.is_finite() {
                            return Err(DeviceError::InvalidPulse(
                                "non-finite rotation angle".into(),
                            ));
                        }
                    }
                }
                PulseSegment::Swap { duration }
                | PulseSegment::ConditionalCoupling { duration, .. }
                | PulseSegment::Idle { duration } => {
                    if !duration.is_finite() || *duration < 0.0 {
                        return Err(DeviceError::InvalidPulse(format!(
                            "segment duration must be >= 0, got {duration}"
                        )));
                    }
                }
            }
        }
        Ok(Self { segments, noise_enabled })
    }
}

/// Runs a sequence from the joint ground state and returns the final state.
pub fn simulate_sequence(seq: &PulseSequence, params: &DeviceParams) -> Result<DensityOperator> {
    Ok(simulate_sequence_monitored(seq, params)?.0)
}

/// As `simulate_sequence`, additionally reporting the largest population
/// observed outside the single-excitation manifold at segment boundaries
/// (excitation = [q1 at level 2] + [ancilla excited] + photon number).
pub fn simulate_sequence_monitored(
    seq: &PulseSequence,
    params: &DeviceParams,
) -> Result<(DensityOperator, f64)> {
    params.validate()?;
    let layout = params.layout();
    let ground = StateVector::basis_state(layout.clone(), &[0, 0, 0])?;
    let mut rho = ground.to_density();
    let mut max_leakage: f64 = 0.0;

    for segment in &seq.segments {
        rho = apply_segment(&rho, segment, params, seq.noise_enabled)?;
        max_leakage = max_leakage.max(excitation_leakage(&rho, params));
    }
    // One final scrub-and-validate so downstream consumers get a certified
    // state even after long noisy integrations.
    let scrubbed = rho.scrubbed();
    let validated = DensityOperator::new(scrubbed.matrix().clone(), layout)?;
    Ok((validated, max_leakage))
}

/// Applies one segment to an arbitrary starting state, for composing
/// partial programs.
pub fn apply_segment(
    rho: &DensityOperator,
    segment: &PulseSegment,
    params: &DeviceParams,
    noise: bool,
) -> Result<DensityOperator> {
    match segment {
        PulseSegment::Rotation { target, polar, azimuth, angle } => {
            let u = embed_rotation(params, *target, &rotation_operator(*polar, *azimuth, *angle));
            apply_pulse_window(rho, params, &u, noise)
        }
        PulseSegment::SimultaneousRotations { q1, q2 } => {
            let u = embed_rotation(params, QubitId::Q1, &rotation_operator(q1.0, q1.1, q1.2))
                .matmul(&embed_rotation(params, QubitId::Q2, &rotation_operator(q2.0, q2.1, q2.2)));
            apply_pulse_window(rho, params, &u, noise)
        }
        PulseSegment::Swap { duration } => {
            evolve(rho, params, Some(swap_generator(params)), *duration, noise)
        }
        PulseSegment::ConditionalCoupling { delta, duration } => {
            conditional_phase(*delta, params.g1)?; // validates the detuning
            evolve(rho, params, Some(jc_generator(params, *delta)), *duration, noise)
        }
        PulseSegment::Idle { duration } => {
            if noise {
                decohere(rho, params, *duration)
            } else {
                Ok(rho.clone())
            }
        }
    }
}

fn evolve(
    rho: &DensityOperator,
    params: &DeviceParams,
    h: Option<ramsey_core::ComplexMatrix>,
    duration: f64,
    noise: bool,
) -> Result<DensityOperator> {
    if duration == 0.0 {
        return Ok(rho.clone());
    }
    if noise {
        integrate_master_equation(
            rho,
            &[EvolutionSegment {
                hamiltonian: h,
                collapse: collapse_operators(params),
                duration,
            }],
            params.dt,
        )
    } else {
        match h {
            Some(h) => evolve_closed(rho, &h, duration),
            None => Ok(rho.clone()),
        }
    }
}

fn decohere(rho: &DensityOperator, params: &DeviceParams, duration: f64) -> Result<DensityOperator> {
    evolve(rho, params, None, duration, true)
}

/// Instantaneous unitary bracketed by half-window decoherence idles when
/// noise is on.
pub(crate) fn apply_pulse_window(
    rho: &DensityOperator,
    params: &DeviceParams,
    u: &ramsey_core::ComplexMatrix,
    noise: bool,
) -> Result<DensityOperator> {
    if noise {
        let half = params.rotation_duration / 2.0;
        let before = decohere(rho, params, half)?;
        let rotated = before.conjugate_by(u)?;
        decohere(&rotated, params, half)
    } else {
        Ok(rho.conjugate_by(u)?)
    }
}

/// Total population outside the single-excitation manifold.
fn excitation_leakage(rho: &DensityOperator, params: &DeviceParams) -> f64 {
    let layout = params.layout();
    let mut leak = 0.0;
    for i in 0..layout.dim() {
        let d = layout.decompose(i);
        let excitations = usize::from(d[0] >= 2) + d[1] + d[2];
        if excitations >= 2 {
            leak += rho.matrix()[(i, i)].re;
        }
    }
    leak
}

/// Standard pulse programs for the interferometer experiment. The common
/// spine is: Ramsey preparation pulse on the interfering qubit (azimuth =
/// theta), an optional delay, detector preparation (ancilla pulse + swap into
/// the resonator), and the conditional coupling; fringe programs append the
/// recombination pulse, and every program maps the resonator back onto the
/// ancilla before readout.
pub mod programs {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn spine(params: &DeviceParams, theta: f64, delta: f64, delay: f64) -> Result<Vec<PulseSegment>> {
        let tau = conditional_phase(delta, params.g1)?.duration;
        let mut segments = Vec::new();
        if delay > 0.0 {
            // Delayed-detector variant: the Ramsey pulse fires first and the
            // interfering qubit decoheres before the detector is prepared.
            segments.push(PulseSegment::Rotation {
                target: QubitId::Q1,
                polar: FRAC_PI_2,
                azimuth: theta,
                angle: FRAC_PI_2,
            });
            segments.push(PulseSegment::Idle { duration: delay });
            segments.push(PulseSegment::Rotation {
                target: QubitId::Q2,
                polar: FRAC_PI_2,
                azimuth: 0.0,
                angle: FRAC_PI_2,
            });
        } else {
            // Standard variant: the Ramsey pulse and the ancilla preparation
            // pulse share one window.
            segments.push(PulseSegment::SimultaneousRotations {
                q1: (FRAC_PI_2, theta, FRAC_PI_2),
                q2: (FRAC_PI_2, 0.0, FRAC_PI_2),
            });
        }
        segments.push(PulseSegment::Swap { duration: params.swap_duration() });
        segments.push(PulseSegment::ConditionalCoupling { delta, duration: tau });
        Ok(segments)
    }

    /// Ramsey fringe program: spine + recombination pulse + map-back swap.
    pub fn fringe(
        params: &DeviceParams,
        theta: f64,
        delta: f64,
        delay: f64,
        noise: bool,
    ) -> Result<PulseSequence> {
        let mut segments = spine(params, theta, delta, delay)?;
        segments.push(PulseSegment::Rotation {
            target: QubitId::Q1,
            polar: FRAC_PI_2,
            azimuth: 0.0,
            angle: FRAC_PI_2,
        });
        segments.push(PulseSegment::Swap { duration: params.swap_duration() });
        PulseSequence::new(segments, noise)
    }

    /// Entanglement-characterization program: spine + map-back swap, no
    /// recombination pulse (tomography pulses are appended per basis).
    pub fn entanglement(
        params: &DeviceParams,
        theta: f64,
        delta: f64,
        delay: f64,
        noise: bool,
    ) -> Result<PulseSequence> {
        let mut segments = spine(params, theta, delta, delay)?;
        segments.push(PulseSegment::Swap { duration: params.swap_duration() });
        PulseSequence::new(segments, noise)
    }

    /// Source-coherence program: just the Ramsey preparation pulse and the
    /// delay; no detector is prepared.
    pub fn coherence(
        _params: &DeviceParams,
        theta: f64,
        delay: f64,
        noise: bool,
    ) -> Result<PulseSequence> {
        let mut segments = vec![PulseSegment::Rotation {
            target: QubitId::Q1,
            polar: FRAC_PI_2,
            azimuth: theta,
            angle: FRAC_PI_2,
        }];
        if delay > 0.0 {
            segments.push(PulseSegment::Idle { duration: delay });
        }
        PulseSequence::new(segments, noise)
    }
}
