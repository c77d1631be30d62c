//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use ramsey_core::interferometer::{
    couple_wpd, phase_detector_unitary, prepare_input, reference_detector_state, run_ideal_sweep,
};
use ramsey_core::measures::{
    concurrence, distinguishability, embed_effective_two_qubit, wpd_orthonormal_complement,
    wpd_overlap,
};
use ramsey_core::state::{DensityOperator, HilbertLayout, StateVector};
use ramsey_core::{c, C64, ComplexMatrix, CoreError};
use ramsey_device::gates::{conditional_phase, evolve_closed, jc_generator};
use ramsey_device::lindblad::{integrate_constant, CollapseOp};
use ramsey_device::tomography::{
    apply_readout_error, basis_pairs, correct_readout, derive_seed, fidelity,
    measure_probabilities, reconstruct_two_qubit, reconstruct_two_qubit_from_probabilities,
    sample_counts, trace_distance, MeasurementRecord, ReadoutMatrix,
};
use ramsey_device::{DeviceParams, ShotMode};
use ramsey_harness::{run_scenario, Scenario, ScenarioKind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n} ({name}): PASS");
}

/// Orthonormal detector partner, tolerating the degenerate overlap at
/// beta = 0 where the moved branch defines none.
fn detector_partner(w0: &StateVector, u: &ComplexMatrix) -> StateVector {
    match wpd_orthonormal_complement(w0, u) {
        Ok(w1) => w1,
        Err(CoreError::DegenerateComplement { .. }) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            StateVector::new(vec![c(s, 0.0), c(s, 0.0)], w0.layout().clone()).unwrap()
        }
        Err(e) => panic!("{e}"),
    }
}

/// Criterion 1: on the ideal-engine grid, the matrix-pipeline concurrence
/// and the fitted visibility satisfy E^2 + V^2 = C0^2 to 1e-9 everywhere.
#[test]
fn criterion_1_equality_reproduction() {
    let started = Instant::now();
    let thetas: Vec<f64> = (0..21).map(|k| 2.0 * PI * k as f64 / 20.0).collect();
    let w0 = reference_detector_state();
    for i in 0..=10 {
        let c0 = i as f64 / 10.0;
        for j in 0..=16 {
            let beta = PI * j as f64 / 16.0;
            let u = phase_detector_unitary(beta, 2);
            let record = run_ideal_sweep(&thetas, c0, FRAC_PI_4, &w0, &u).unwrap();

            let rho_q = prepare_input(c0, 0.0, FRAC_PI_4).unwrap();
            let joint = couple_wpd(&rho_q, &w0, &u).unwrap();
            let w1 = detector_partner(&w0, &u);
            let embedded = embed_effective_two_qubit(&joint, &w0, &w1).unwrap();
            let e = concurrence(&embedded).unwrap();

            let residual = e * e + record.fitted_visibility.powi(2) - c0 * c0;
            assert!(
                residual.abs() <= 1e-9,
                "c0={c0} beta={beta}: |E^2+V^2-C0^2| = {:.3e}",
                residual.abs()
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?} exceeds 5 s");
    pass(1, "equality reproduction on the ideal grid");
}

/// Criterion 2: matrix-route concurrence equals C0 sqrt(1 - V0^2) and
/// distinguishability equals sqrt(1 - V0^2) to 1e-10 across the grid,
/// including unbalanced populations.
#[test]
fn criterion_2_closed_form_oracles() {
    let w0 = reference_detector_state();
    for &alpha in &[FRAC_PI_4, PI / 6.0, PI / 3.0] {
        let c0_max = (2.0 * alpha).sin();
        for i in 0..=10 {
            let c0 = i as f64 / 10.0;
            if c0 > c0_max + 1e-12 {
                continue;
            }
            for j in 0..=16 {
                let beta = PI * j as f64 / 16.0;
                let u = phase_detector_unitary(beta, 2);
                let overlap = wpd_overlap(&w0, &u).unwrap();
                let ortho = (1.0 - overlap.v0 * overlap.v0).max(0.0).sqrt();

                let rho_q = prepare_input(c0, 0.4, alpha).unwrap();
                let joint = couple_wpd(&rho_q, &w0, &u).unwrap();
                let w1 = detector_partner(&w0, &u);
                let embedded = embed_effective_two_qubit(&joint, &w0, &w1).unwrap();
                let e = concurrence(&embedded).unwrap();
                assert!(
                    (e - c0 * ortho).abs() <= 1e-10,
                    "alpha={alpha} c0={c0} beta={beta}: E={e} vs {}",
                    c0 * ortho
                );

                let d = distinguishability(&joint, 0).unwrap();
                assert!(
                    (d - ortho).abs() <= 1e-10,
                    "alpha={alpha} c0={c0} beta={beta}: D={d} vs {ortho}"
                );
            }
        }
    }
    pass(2, "closed-form concurrence and distinguishability oracles");
}

/// Criterion 3: the single-excitation-subspace evolution for tau = pi/Omega
/// realizes beta = pi [1 - delta/(2 Omega)] to 1e-6 rad, and the detector
/// overlap confirms V0 = cos(beta/2) to 1e-9.
#[test]
fn criterion_3_conditional_phase_dynamics() {
    let params = DeviceParams::table_defaults();
    let layout = params.layout();
    for &ratio in &[0.0, 0.5, 1.63299, 3.2071] {
        let delta = ratio * params.g1;
        let cp = conditional_phase(delta, params.g1).unwrap();
        let h = jc_generator(&params, delta);

        let i_ref = layout.compose(&[0, 0, 0]);
        let i_exc = layout.compose(&[1, 0, 1]);
        let mut amps = vec![C64::ZERO; layout.dim()];
        amps[i_ref] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[i_exc] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = StateVector::new(amps, layout.clone()).unwrap();
        let evolved = evolve_closed(&psi.to_density(), &h, cp.duration).unwrap();
        let phase = evolved.matrix()[(i_exc, i_ref)].arg();
        let wrapped = (phase - cp.beta + PI).rem_euclid(2.0 * PI) - PI;
        assert!(
            wrapped.abs() <= 1e-6,
            "delta/g1={ratio}: conditional phase {phase} vs beta {}",
            cp.beta
        );

        let w0 = reference_detector_state();
        let overlap = wpd_overlap(&w0, &phase_detector_unitary(cp.beta, 2)).unwrap();
        assert!(
            (overlap.v0 - (cp.beta / 2.0).cos()).abs() <= 1e-9,
            "delta/g1={ratio}: V0={} vs cos(beta/2)={}",
            overlap.v0,
            (cp.beta / 2.0).cos()
        );
    }
    pass(3, "conditional-phase dynamics and V0 = cos(beta/2)");
}

/// Criterion 4: Lindblad integration with T1 = 17.1 us, T2* = 3.6 us damps
/// the qubit off-diagonal to exp(-t/2T1 - t/T2*) within 1% relative for
/// t in {0.25, 0.5, 1, 2} us at dt = 0.01 ns.
#[test]
fn criterion_4_decoherence_law() {
    let started = Instant::now();
    let t1 = 17.1e-6;
    let t2s = 3.6e-6;
    let dt = 0.01e-9;

    // Superposition on the lowest two levels of the three-level qubit.
    let mut m = ComplexMatrix::zeros(3, 3);
    m[(0, 0)] = c(0.5, 0.0);
    m[(0, 1)] = c(0.5, 0.0);
    m[(1, 0)] = c(0.5, 0.0);
    m[(1, 1)] = c(0.5, 0.0);
    let rho0 = DensityOperator::new(m, HilbertLayout::flat(3)).unwrap();
    let collapse = [
        CollapseOp::new(ramsey_device::gates::annihilation(3), 1.0 / t1),
        CollapseOp::new(ramsey_device::gates::number_operator(3), 2.0 / t2s),
    ];

    for &t_us in &[0.25, 0.5, 1.0, 2.0] {
        let t = t_us * 1e-6;
        let out = integrate_constant(&rho0, None, &collapse, dt, t).unwrap();
        let got = out.matrix()[(0, 1)].norm() / 0.5;
        let expect = (-t / (2.0 * t1) - t / t2s).exp();
        let rel = (got - expect).abs() / expect;
        assert!(rel <= 0.01, "t={t_us} us: decay {got} vs {expect} (rel {rel:.2e})");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?} exceeds 60 s");
    pass(4, "off-diagonal decay law exp(-t/2T1 - t/T2*)");
}

/// Criterion 5: exact-probability reconstruction reaches fidelity
/// 1 - 1e-8 on 100 random states; at 1e5 shots per basis the trace distance
/// stays within 0.02 for at least 95 of 100 seeded trials.
#[test]
fn criterion_5_tomography_fidelity() {
    // Exact-probability reconstructions.
    let mut rng = ChaCha8Rng::seed_from_u64(20260808);
    for trial in 0..100 {
        let g = ComplexMatrix::from_fn(4, 4, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let gram = g.matmul(&g.adjoint());
        let tr = gram.trace().re;
        let rho = DensityOperator::new(
            gram.scale(c(1.0 / tr, 0.0)),
            HilbertLayout::new(vec![2, 2]).unwrap(),
        )
        .unwrap();
        let probs: Vec<Vec<f64>> = basis_pairs()
            .into_iter()
            .map(|basis| measure_probabilities(&rho, basis).unwrap())
            .collect();
        let rebuilt = reconstruct_two_qubit_from_probabilities(&probs).unwrap();
        let f = fidelity(&rho, &rebuilt).unwrap();
        assert!(f >= 1.0 - 1e-8, "trial {trial}: fidelity {f}");
    }

    // Finite-shot trials on a maximally entangled state.
    let layout = HilbertLayout::new(vec![2, 2]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StateVector::new(vec![c(s, 0.0), C64::ZERO, C64::ZERO, c(s, 0.0)], layout)
        .unwrap()
        .to_density();
    let shots = 100_000u64;
    let mut within_budget = 0;
    for seed in 0..100u64 {
        let mut labels = Vec::new();
        let mut counts = Vec::new();
        for (k, basis) in basis_pairs().into_iter().enumerate() {
            let probs = measure_probabilities(&bell, basis).unwrap();
            counts.push(sample_counts(&probs, shots, derive_seed(seed, k as u64)).unwrap());
            labels.push(format!("{}{}", basis.0.label(), basis.1.label()));
        }
        let record = MeasurementRecord { basis_labels: labels, counts, shots, seed };
        let rebuilt = reconstruct_two_qubit(&record, None).unwrap();
        if trace_distance(&bell, &rebuilt).unwrap() <= 0.02 {
            within_budget += 1;
        }
    }
    assert!(within_budget >= 95, "only {within_budget}/100 trials within 0.02");
    pass(5, "tomography fidelity (exact and 1e5-shot trials)");
}

/// Criterion 6: readout apply -> correct is the identity within 1e-12 with
/// the device fidelity figures.
#[test]
fn criterion_6_readout_roundtrip() {
    let q1 = ReadoutMatrix::new(2, vec![0.9930, 1.0 - 0.8917, 1.0 - 0.9930, 0.8917]).unwrap();
    let q2 = ReadoutMatrix::new(2, vec![0.9803, 1.0 - 0.9073, 1.0 - 0.9803, 0.9073]).unwrap();

    let singles = [[1.0, 0.0], [0.0, 1.0], [0.3, 0.7], [0.55, 0.45]];
    for truth in singles {
        let measured = apply_readout_error(&truth, &[&q1]).unwrap();
        let corrected = correct_readout(&measured, &[&q1]).unwrap();
        for (a, b) in corrected.iter().zip(truth) {
            assert!((a - b).abs() <= 1e-12, "{corrected:?} vs {truth:?}");
        }
    }
    let joints = [
        [1.0, 0.0, 0.0, 0.0],
        [0.25, 0.25, 0.25, 0.25],
        [0.4, 0.1, 0.35, 0.15],
        [0.05, 0.45, 0.3, 0.2],
    ];
    for truth in joints {
        let measured = apply_readout_error(&truth, &[&q1, &q2]).unwrap();
        let corrected = correct_readout(&measured, &[&q1, &q2]).unwrap();
        for (a, b) in corrected.iter().zip(truth) {
            assert!((a - b).abs() <= 1e-12, "{corrected:?} vs {truth:?}");
        }
    }
    pass(6, "readout confusion roundtrip at device fidelities");
}

/// Criterion 7: the noise-on pipeline over beta in {pi/4, pi/2, 3pi/4, pi}
/// gives strictly decreasing V, strictly increasing E, D within 0.03 of
/// sin(beta/2), and sqrt(E^2+V^2) within 0.05 of the measured C0.
#[test]
fn criterion_7_conditional_phase_sweep_properties() {
    let started = Instant::now();
    let betas = vec![FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI];
    let scenario = Scenario {
        kind: ScenarioKind::BetaSweep { betas: betas.clone() },
        theta_points: 21,
        noise: true,
        shots: ShotMode::Counts(1_000_000),
        seed: 20260808,
        device: DeviceParams::main_text_coherence(),
    };
    let (rows, _) = run_scenario(&scenario).unwrap();
    assert_eq!(rows.len(), 4);

    for pair in rows.windows(2) {
        assert!(
            pair[1].visibility < pair[0].visibility,
            "visibility not strictly decreasing: {} -> {}",
            pair[0].visibility,
            pair[1].visibility
        );
        assert!(
            pair[1].concurrence > pair[0].concurrence,
            "concurrence not strictly increasing: {} -> {}",
            pair[0].concurrence,
            pair[1].concurrence
        );
    }
    for row in &rows {
        let ideal_d = (row.control / 2.0).sin();
        assert!(
            (row.distinguishability - ideal_d).abs() <= 0.03,
            "beta={}: D={} vs {ideal_d}",
            row.control,
            row.distinguishability
        );
        assert!(
            (row.quadrature_sum - row.c0).abs() <= 0.05,
            "beta={}: quadrature {} vs C0 {}",
            row.control,
            row.quadrature_sum,
            row.c0
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "runtime {elapsed:?} exceeds 10 min");
    pass(7, "conditional-phase sweep properties (noise on)");
}

/// Criterion 8: the delay sweep at beta = pi/2 shows V and E decreasing
/// together (|V - E| <= 0.02) and D constant within 0.02. The excess
/// experimental concurrence decay from thermal excitation is not modeled.
#[test]
fn criterion_8_delay_sweep_properties() {
    let delays: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 2.0].iter().map(|d| d * 1e-6).collect();
    let scenario = Scenario {
        kind: ScenarioKind::DelaySweep { beta: FRAC_PI_2, delays },
        theta_points: 21,
        noise: true,
        shots: ShotMode::Counts(1_000_000),
        seed: 20260809,
        device: DeviceParams::main_text_coherence(),
    };
    let (rows, _) = run_scenario(&scenario).unwrap();
    assert_eq!(rows.len(), 5);

    for pair in rows.windows(2) {
        assert!(
            pair[1].visibility < pair[0].visibility,
            "visibility not decreasing with delay"
        );
        assert!(
            pair[1].concurrence < pair[0].concurrence,
            "concurrence not decreasing with delay"
        );
    }
    for row in &rows {
        assert!(
            (row.visibility - row.concurrence).abs() <= 0.02,
            "t={} us: |V - E| = {}",
            row.control,
            (row.visibility - row.concurrence).abs()
        );
    }
    let d_max = rows.iter().map(|r| r.distinguishability).fold(f64::MIN, f64::max);
    let d_min = rows.iter().map(|r| r.distinguishability).fold(f64::MAX, f64::min);
    assert!(d_max - d_min <= 0.02, "D varies by {} across the sweep", d_max - d_min);
    pass(8, "delay sweep properties (noise on)");
}
