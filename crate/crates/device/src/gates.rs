//! Gate-level building blocks: single-qubit rotation pulses, the
//! detuning-controlled conditional phase of the qubit-resonator exchange,
//! and the generators (Hamiltonians, collapse operators) over the full
//! three-subsystem layout.

use std::f64::consts::PI;

use ramsey_core::linalg::{c, tensor_chain, C64, ComplexMatrix};
use ramsey_core::CoreError;

use crate::error::{DeviceError, Result};
use crate::params::DeviceParams;

/// Rotation by `angle` about the Bloch axis with polar angle `polar` and
/// azimuth `azimuth`:
///
/// ```text
/// [ cos(g/2) - i sin(g/2) cos(p)      -i sin(g/2) sin(p) e^{-i a} ]
/// [ -i sin(g/2) sin(p) e^{+i a}       cos(g/2) + i sin(g/2) cos(p) ]
/// ```
pub fn rotation_operator(polar: f64, azimuth: f64, angle: f64) -> ComplexMatrix {
    let ch = (angle / 2.0).cos();
    let sh = (angle / 2.0).sin();
    let (sp, cp) = polar.sin_cos();
    let phase = c(azimuth.cos(), azimuth.sin());
    ComplexMatrix::from_rows(&[
        vec![c(ch, -sh * cp), c(0.0, -sh * sp) * phase.conj()],
        vec![c(0.0, -sh * sp) * phase, c(ch, sh * cp)],
    ])
}

/// Outcome of tuning the upper-transition detuning: conditional phase
/// beta = pi [1 - delta/(2 Omega)], effective exchange frequency
/// Omega = sqrt(2 g1^2 + delta^2/4), and the full-cycle duration pi/Omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPhase {
    pub beta: f64,
    pub omega: f64,
    pub duration: f64,
}

pub fn conditional_phase(delta: f64, g1: f64) -> Result<ConditionalPhase> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(DeviceError::Config(format!(
            "delta must be >= 0 (supported range keeps beta in (0, pi]), got {delta}"
        )));
    }
    if !g1.is_finite() || g1 <= 0.0 {
        return Err(DeviceError::Config(format!("g1 must be positive, got {g1}")));
    }
    let omega = (2.0 * g1 * g1 + delta * delta / 4.0).sqrt();
    Ok(ConditionalPhase {
        beta: PI * (1.0 - delta / (2.0 * omega)),
        omega,
        duration: PI / omega,
    })
}

/// Inverse of the beta(delta) map: the detuning that realizes a target
/// conditional phase, delta = 2 sqrt(2) g1 c / sqrt(1 - c^2) with
/// c = 1 - beta/pi.
pub fn delta_for_beta(beta_target: f64, g1: f64) -> Result<f64> {
    if !(beta_target > 0.0 && beta_target <= PI) {
        return Err(DeviceError::Config(format!(
            "beta must lie in (0, pi], got {beta_target}"
        )));
    }
    let ratio = 1.0 - beta_target / PI;
    Ok(2.0 * 2.0f64.sqrt() * g1 * ratio / (1.0 - ratio * ratio).sqrt())
}

/// Truncated harmonic annihilation operator on `dim` levels.
pub fn annihilation(dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator on `dim` levels.
pub fn number_operator(dim: usize) -> ComplexMatrix {
    ComplexMatrix::diag(&(0..dim).map(|n| n as f64).collect::<Vec<_>>())
}

/// Which qubit a rotation pulse addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitId {
    /// The interfering three-level qubit.
    Q1,
    /// The two-level ancilla.
    Q2,
}

/// Embeds a 2x2 rotation into the full layout; on the three-level qubit it
/// acts on the {|0>, |1>} block and leaves |2> alone.
pub fn embed_rotation(params: &DeviceParams, target: QubitId, r: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(r.rows(), 2);
    let ir = ComplexMatrix::identity(params.n_max + 1);
    match target {
        QubitId::Q1 => {
            let mut r3 = ComplexMatrix::identity(3);
            for i in 0..2 {
                for j in 0..2 {
                    r3[(i, j)] = r[(i, j)];
                }
            }
            tensor_chain(&[&r3, &ComplexMatrix::identity(2), &ir])
        }
        QubitId::Q2 => tensor_chain(&[&ComplexMatrix::identity(3), r, &ir]),
    }
}

/// Rotating-frame generator of the conditional coupling: the |1> <-> |2>
/// ladder of the interfering qubit exchanging one photon with the resonator
/// at strength sqrt(2) g1, detuned by `delta`. In the single-excitation
/// block {|1>|1r>, |2>|0r>} this is [[0, sqrt(2) g1], [sqrt(2) g1, delta]].
pub fn jc_generator(params: &DeviceParams, delta: f64) -> ComplexMatrix {
    let i2 = ComplexMatrix::identity(2);
    let ir = ComplexMatrix::identity(params.n_max + 1);
    let a = annihilation(params.n_max + 1);

    // |2><2| on the interfering qubit.
    let mut p2 = ComplexMatrix::zeros(3, 3);
    p2[(2, 2)] = C64::ONE;
    // |1><2| lowers the upper transition while a photon is emitted.
    let mut lower = ComplexMatrix::zeros(3, 3);
    lower[(1, 2)] = C64::ONE;
    let raise = lower.adjoint();

    let g = 2.0f64.sqrt() * params.g1;
    let detune = tensor_chain(&[&p2, &i2, &ir]).scale(c(delta, 0.0));
    let exchange = tensor_chain(&[&lower, &i2, &a.adjoint()])
        .add(&tensor_chain(&[&raise, &i2, &a]))
        .scale(c(g, 0.0));
    detune.add(&exchange)
}

/// Lab-frame version of the conditional-coupling generator, with explicit
/// level energies. Used as a verification path: the gauge-invariant
/// conditional phase it produces must match the rotating-frame beta.
pub fn jc_generator_lab(params: &DeviceParams, delta: f64, omega_1: f64) -> ComplexMatrix {
    let i2 = ComplexMatrix::identity(2);
    let nr = number_operator(params.n_max + 1);
    let ir = ComplexMatrix::identity(params.n_max + 1);
    let omega_2 = omega_1 + params.omega_r + delta;

    let mut p1 = ComplexMatrix::zeros(3, 3);
    p1[(1, 1)] = C64::ONE;
    let mut p2 = ComplexMatrix::zeros(3, 3);
    p2[(2, 2)] = C64::ONE;
    let i3 = ComplexMatrix::identity(3);

    let levels = tensor_chain(&[&p1, &i2, &ir])
        .scale(c(omega_1, 0.0))
        .add(&tensor_chain(&[&p2, &i2, &ir]).scale(c(omega_2, 0.0)))
        .add(&tensor_chain(&[&i3, &i2, &nr]).scale(c(params.omega_r, 0.0)));
    levels.add(&jc_generator(params, 0.0))
}

/// Rotating-frame generator of the resonant ancilla-resonator swap.
pub fn swap_generator(params: &DeviceParams) -> ComplexMatrix {
    let i3 = ComplexMatrix::identity(3);
    let a = annihilation(params.n_max + 1);
    let mut sm = ComplexMatrix::zeros(2, 2); // |0><1| on the ancilla
    sm[(0, 1)] = C64::ONE;
    let sp = sm.adjoint();
    tensor_chain(&[&i3, &sm, &a.adjoint()])
        .add(&tensor_chain(&[&i3, &sp, &a]))
        .scale(c(params.g2, 0.0))
}

/// Collapse channels with noise enabled: qubit relaxation and dephasing plus
/// resonator photon loss.
pub fn collapse_operators(params: &DeviceParams) -> Vec<crate::lindblad::CollapseOp> {
    use crate::lindblad::CollapseOp;
    let i2 = ComplexMatrix::identity(2);
    let i3 = ComplexMatrix::identity(3);
    let ir = ComplexMatrix::identity(params.n_max + 1);

    // Three-level ladder lowering operator for the interfering qubit.
    let b1 = annihilation(3);
    let n1 = number_operator(3);
    let b2 = annihilation(2);
    let n2 = number_operator(2);
    let a = annihilation(params.n_max + 1);

    vec![
        CollapseOp::new(tensor_chain(&[&b1, &i2, &ir]), 1.0 / params.q1.t1),
        CollapseOp::new(tensor_chain(&[&n1, &i2, &ir]), params.q1.dephasing_rate()),
        CollapseOp::new(tensor_chain(&[&i3, &b2, &ir]), 1.0 / params.q2.t1),
        CollapseOp::new(tensor_chain(&[&i3, &n2, &ir]), params.q2.dephasing_rate()),
        CollapseOp::new(tensor_chain(&[&i3, &i2, &a]), 1.0 / params.t_r),
    ]
}

/// Closed (unitary) evolution rho(t) = e^{-iHt} rho e^{+iHt} via
/// eigendecomposition; exact up to the eigensolver.
pub fn evolve_closed(
    rho: &ramsey_core::DensityOperator,
    h: &ComplexMatrix,
    t: f64,
) -> Result<ramsey_core::DensityOperator> {
    if !t.is_finite() {
        return Err(DeviceError::Config(format!("evolution time {t} is not finite")));
    }
    h.ensure_hermitian(1e-9).map_err(|e| match e {
        CoreError::NotHermitian { .. } => DeviceError::Core(e),
        other => DeviceError::Core(other),
    })?;
    let (vals, vecs) = ramsey_core::hermitian_eigensystem(h)?;
    let n = h.rows();
    // U = V e^{-i Lambda t} V^dagger.
    let phased = ComplexMatrix::from_fn(n, n, |i, j| {
        let phase = -vals[j] * t;
        vecs[(i, j)] * c(phase.cos(), phase.sin())
    });
    let u = phased.matmul(&vecs.adjoint());
    Ok(rho.conjugate_by(&u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ramsey_core::state::{DensityOperator, HilbertLayout, StateVector};
    use ramsey_core::{hermitian_eigensystem, C64};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_rotation_about_x_makes_balanced_superposition() {
        let r = rotation_operator(FRAC_PI_2, 0.0, FRAC_PI_2);
        let zero = StateVector::basis_state(HilbertLayout::flat(2), &[0]).unwrap();
        let out = zero.apply(&r).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(0.0, -s)).norm() < 1e-15);
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let r = rotation_operator(0.7, 1.3, 0.0);
        assert!(r.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn azimuth_sets_the_superposition_phase() {
        for theta in [0.0, 0.4, 2.0, -1.2] {
            let r = rotation_operator(FRAC_PI_2, theta, FRAC_PI_2);
            let zero = StateVector::basis_state(HilbertLayout::flat(2), &[0]).unwrap();
            let out = zero.apply(&r).unwrap();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            // (|0> - i e^{i theta} |1>)/sqrt(2).
            let expect1 = c(0.0, -s) * c(theta.cos(), theta.sin());
            assert!((out.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
            assert!((out.amplitudes()[1] - expect1).norm() < 1e-15);
        }
    }

    #[test]
    fn rotations_are_unitary() {
        for (p, a, g) in [(0.3, 1.0, 2.2), (FRAC_PI_2, -0.5, FRAC_PI_2), (2.8, 3.0, 0.9)] {
            assert!(rotation_operator(p, a, g).unitarity_deviation() < 1e-14);
        }
    }

    #[test]
    fn zero_detuning_gives_pi_phase_and_full_cycle() {
        let p = DeviceParams::table_defaults();
        let cp = conditional_phase(0.0, p.g1).unwrap();
        assert!((cp.beta - PI).abs() < 1e-14);
        assert!((cp.omega - 2.0f64.sqrt() * p.g1).abs() < 1e-3);
        assert!((cp.duration - 18.414e-9).abs() < 5e-12);
    }

    #[test]
    fn large_detuning_suppresses_the_phase() {
        let p = DeviceParams::table_defaults();
        let cp = conditional_phase(100.0 * p.g1, p.g1).unwrap();
        assert!(cp.beta > 0.0 && cp.beta < 0.05);
    }

    #[test]
    fn negative_detuning_is_rejected() {
        let p = DeviceParams::table_defaults();
        assert!(conditional_phase(-1.0, p.g1).is_err());
    }

    #[test]
    fn detuning_for_half_pi_phase() {
        let p = DeviceParams::table_defaults();
        let delta = delta_for_beta(FRAC_PI_2, p.g1).unwrap();
        assert!((delta / p.g1 - 1.632993).abs() < 1e-6);
        let cp = conditional_phase(delta, p.g1).unwrap();
        assert!((cp.beta - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn detuning_for_quarter_pi_phase() {
        let p = DeviceParams::table_defaults();
        let delta = delta_for_beta(PI / 4.0, p.g1).unwrap();
        assert!((delta / p.g1 - 3.2071).abs() < 1e-4);
        let cp = conditional_phase(delta, p.g1).unwrap();
        assert!((cp.beta - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn beta_delta_roundtrip_is_tight() {
        let p = DeviceParams::table_defaults();
        for k in 1..=16 {
            let beta = PI * k as f64 / 16.0;
            let delta = delta_for_beta(beta, p.g1).unwrap();
            let cp = conditional_phase(delta, p.g1).unwrap();
            assert!((cp.beta - beta).abs() < 1e-12);
        }
        assert!((delta_for_beta(PI, p.g1).unwrap()).abs() < 1e-12);
        assert!(delta_for_beta(0.0, p.g1).is_err());
    }

    #[test]
    fn single_excitation_block_spectrum_at_resonance() {
        let p = DeviceParams::table_defaults();
        let h = jc_generator(&p, 0.0);
        let layout = p.layout();
        // |1, 0, 1r> and |2, 0, 0r>.
        let i_a = layout.compose(&[1, 0, 1]);
        let i_b = layout.compose(&[2, 0, 0]);
        let block = ComplexMatrix::from_rows(&[
            vec![h[(i_a, i_a)], h[(i_a, i_b)]],
            vec![h[(i_b, i_a)], h[(i_b, i_b)]],
        ]);
        let (vals, _) = hermitian_eigensystem(&block).unwrap();
        let g = 2.0f64.sqrt() * p.g1;
        assert!((vals[0] - g).abs() < 1e-6 * g);
        assert!((vals[1] + g).abs() < 1e-6 * g);
    }

    #[test]
    fn zero_coupling_generator_is_diagonal() {
        let mut p = DeviceParams::table_defaults();
        p.g1 = f64::MIN_POSITIVE; // validation demands > 0; effectively zero
        let h = jc_generator(&p, 1.0e6);
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if i != j {
                    assert!(h[(i, j)].norm() < 1e-100);
                }
            }
        }
    }

    #[test]
    fn exchange_amplitude_follows_closed_form() {
        // The |1>|1r> amplitude under the conditional coupling must follow
        // e^{-i delta t / 2} [cos(Omega t) + i (delta / 2 Omega) sin(Omega t)].
        let p = DeviceParams::table_defaults();
        for delta_ratio in [0.0, 0.8, 1.632993] {
            let delta = delta_ratio * p.g1;
            let cp = conditional_phase(delta, p.g1).unwrap();
            let h = jc_generator(&p, delta);
            let layout = p.layout();
            let start = StateVector::basis_state(layout.clone(), &[1, 0, 1]).unwrap();
            // Evolve the pure state via the density operator path.
            for frac in [0.25, 0.5, 1.0] {
                let t = frac * cp.duration;
                let rho_t = evolve_closed(&start.to_density(), &h, t).unwrap();
                let idx = layout.compose(&[1, 0, 1]);
                let pop = rho_t.matrix()[(idx, idx)].re;
                let (s, cth) = (cp.omega * t).sin_cos();
                let expect = cth * cth + (delta / (2.0 * cp.omega) * s).powi(2);
                assert!((pop - expect).abs() < 1e-10, "delta={delta_ratio} frac={frac}");
            }
        }
    }

    #[test]
    fn full_cycle_applies_the_conditional_phase() {
        let p = DeviceParams::table_defaults();
        let layout = p.layout();
        for delta_ratio in [0.0f64, 1.632993] {
            let delta = delta_ratio * p.g1;
            let cp = conditional_phase(delta, p.g1).unwrap();
            let h = jc_generator(&p, delta);
            // (|0,0,0> + |1,0,1r>)/sqrt(2); relative phase after a full cycle
            // is the conditional phase.
            let i0 = layout.compose(&[0, 0, 0]);
            let i1 = layout.compose(&[1, 0, 1]);
            let mut amps = vec![C64::ZERO; layout.dim()];
            amps[i0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            amps[i1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let psi = StateVector::new(amps, layout.clone()).unwrap();
            let rho_t = evolve_closed(&psi.to_density(), &h, cp.duration).unwrap();
            let phase = rho_t.matrix()[(i1, i0)].arg();
            let wrapped = (phase - cp.beta + PI).rem_euclid(2.0 * PI) - PI;
            assert!(wrapped.abs() < 1e-9, "delta={delta_ratio}: {phase} vs {}", cp.beta);
        }
    }

    #[test]
    fn closed_evolution_at_zero_time_is_identity() {
        let p = DeviceParams::table_defaults();
        let rho = DensityOperator::maximally_mixed(p.layout());
        let h = jc_generator(&p, 0.3 * p.g1);
        let out = evolve_closed(&rho, &h, 0.0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn closed_evolution_phase_flip() {
        // H = sigma_z / 2 for t = pi flips the sign of the off-diagonal.
        let h = ramsey_core::linalg::pauli_z().scale(c(0.5, 0.0));
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ]);
        let rho = DensityOperator::new(m, HilbertLayout::flat(2)).unwrap();
        let out = evolve_closed(&rho, &h, PI).unwrap();
        assert!((out.matrix()[(0, 1)] + c(0.5, 0.0)).norm() < 1e-12);
        assert!((out.matrix()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_evolution_rejects_non_hermitian_generator() {
        let mut h = ComplexMatrix::identity(2);
        h[(0, 1)] = c(0.5, 0.0);
        let rho = DensityOperator::maximally_mixed(HilbertLayout::flat(2));
        assert!(evolve_closed(&rho, &h, 1.0).is_err());
    }

    #[test]
    fn lab_frame_conditional_phase_is_gauge_invariant() {
        // Evolve (|0,0,0r> + |0,0,1r> + |1,0,0r> + |1,0,1r>)/2 in the lab
        // frame; the combination arg(rho_{11,00}) - arg(rho_{10,00})
        // - arg(rho_{01,00}) equals beta regardless of the frame.
        let p = DeviceParams::table_defaults();
        let layout = p.layout();
        let omega_1 = 2.0 * PI * 5.967e9;
        for delta_ratio in [0.0f64, 1.632993] {
            let delta = delta_ratio * p.g1;
            let cp = conditional_phase(delta, p.g1).unwrap();
            let h = jc_generator_lab(&p, delta, omega_1);
            let idx = [
                layout.compose(&[0, 0, 0]),
                layout.compose(&[0, 0, 1]),
                layout.compose(&[1, 0, 0]),
                layout.compose(&[1, 0, 1]),
            ];
            let mut amps = vec![C64::ZERO; layout.dim()];
            for &i in &idx {
                amps[i] = c(0.5, 0.0);
            }
            let psi = StateVector::new(amps, layout.clone()).unwrap();
            let rho_t = evolve_closed(&psi.to_density(), &h, cp.duration).unwrap();
            let m = rho_t.matrix();
            let gauge_free = m[(idx[3], idx[0])].arg() - m[(idx[2], idx[0])].arg()
                - m[(idx[1], idx[0])].arg();
            let wrapped = (gauge_free - cp.beta + PI).rem_euclid(2.0 * PI) - PI;
            assert!(wrapped.abs() < 1e-6, "delta={delta_ratio}: {gauge_free} vs {}", cp.beta);
        }
    }
}
