//! Markovian open-system evolution: the master-equation right-hand side
//! d rho/dt = -i[H, rho] + sum_k gamma_k (O_k rho O_k' - {O_k'O_k, rho}/2)
//! and a fixed-step classical fourth-order integrator over piecewise-constant
//! schedules.
//!
//! The integrator folds -iH and the anticommutator into a single one-sided
//! generator A = -iH - (1/2) sum gamma O'O, so one derivative evaluation is
//! A rho + rho A' + sum gamma (O rho) O', applied through sparse operator
//! maps (every physical operator here has a handful of nonzeros).

use ramsey_core::linalg::{c, C64, ComplexMatrix};
use ramsey_core::state::DensityOperator;

use crate::error::{DeviceError, Result};

/// One collapse channel: operator O with rate gamma.
#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

impl CollapseOp {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Self {
        Self { operator, rate }
    }
}

/// Master-equation derivative at `rho`. The output is traceless and
/// Hermitian (up to roundoff) for valid inputs.
pub fn lindblad_rhs(
    rho: &DensityOperator,
    hamiltonian: Option<&ComplexMatrix>,
    collapse: &[CollapseOp],
) -> Result<ComplexMatrix> {
    let kernel = LindbladKernel::new(rho.dim(), hamiltonian, collapse)?;
    let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
    let mut scratch = ComplexMatrix::zeros(rho.dim(), rho.dim());
    kernel.rhs_into(rho.matrix(), &mut scratch, &mut out);
    Ok(out)
}

/// Sparse triplet view of an operator; fast row/column application against
/// dense matrices.
struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if v != C64::ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Self { dim: m.rows(), entries }
    }

    /// out += self * rho (row update).
    fn accumulate_left(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let n = self.dim;
        for &(i, k, v) in &self.entries {
            let src = k * n;
            let dst = i * n;
            let (rho_data, out_data) = (rho.data(), out.data_mut());
            for col in 0..n {
                out_data[dst + col] += v * rho_data[src + col];
            }
        }
    }

    /// out += rho * self^dagger (column update).
    fn accumulate_right_adjoint(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let n = self.dim;
        for &(i, k, v) in &self.entries {
            // A[i][k] = v contributes conj(v) at A^dagger[k][i], so
            // (rho * A^dagger)[., i] += conj(v) * rho[., k].
            let vc = v.conj();
            let (rho_data, out_data) = (rho.data(), out.data_mut());
            for row in 0..n {
                out_data[row * n + i] += vc * rho_data[row * n + k];
            }
        }
    }

    /// out = self * rho (row update into a zeroed buffer).
    fn apply_left_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        out.data_mut().fill(C64::ZERO);
        self.accumulate_left(rho, out);
    }
}

/// Precompiled derivative evaluator for one piecewise-constant segment.
pub(crate) struct LindbladKernel {
    one_sided: SparseOp,
    jumps: Vec<(SparseOp, f64)>,
    dim: usize,
}

impl LindbladKernel {
    pub(crate) fn new(
        dim: usize,
        hamiltonian: Option<&ComplexMatrix>,
        collapse: &[CollapseOp],
    ) -> Result<Self> {
        if let Some(h) = hamiltonian {
            if h.rows() != dim || h.cols() != dim {
                return Err(DeviceError::Config(format!(
                    "hamiltonian is {}x{}, state dimension is {dim}",
                    h.rows(),
                    h.cols()
                )));
            }
            h.ensure_hermitian(1e-9)?;
        }
        let mut a = match hamiltonian {
            Some(h) => h.scale(c(0.0, -1.0)),
            None => ComplexMatrix::zeros(dim, dim),
        };
        let mut jumps = Vec::with_capacity(collapse.len());
        for op in collapse {
            if !op.rate.is_finite() || op.rate < 0.0 {
                return Err(DeviceError::Config(format!(
                    "collapse rate must be nonnegative and finite, got {}",
                    op.rate
                )));
            }
            if op.operator.rows() != dim || op.operator.cols() != dim {
                return Err(DeviceError::Config(format!(
                    "collapse operator is {}x{}, state dimension is {dim}",
                    op.operator.rows(),
                    op.operator.cols()
                )));
            }
            if op.rate == 0.0 {
                continue;
            }
            let gram = op.operator.adjoint().matmul(&op.operator);
            a = a.sub(&gram.scale(c(0.5 * op.rate, 0.0)));
            jumps.push((SparseOp::from_dense(&op.operator), op.rate));
        }
        Ok(Self { one_sided: SparseOp::from_dense(&a), jumps, dim })
    }

    pub(crate) fn rhs_into(
        &self,
        rho: &ComplexMatrix,
        scratch: &mut ComplexMatrix,
        out: &mut ComplexMatrix,
    ) {
        out.data_mut().fill(C64::ZERO);
        self.one_sided.accumulate_left(rho, out);
        self.one_sided.accumulate_right_adjoint(rho, out);
        for (op, rate) in &self.jumps {
            op.apply_left_into(rho, scratch);
            // out += rate * (O rho) O^dagger; the entry O[i][k] = v lands as
            // conj(v) at O^dagger[k][i], updating column i from column k.
            let n = self.dim;
            for &(i, k, v) in &op.entries {
                let f = v.conj() * rate;
                let (s_data, out_data) = (scratch.data(), out.data_mut());
                for row in 0..n {
                    out_data[row * n + i] += f * s_data[row * n + k];
                }
            }
        }
    }
}

/// One piecewise-constant stretch of the evolution schedule.
#[derive(Debug, Clone)]
pub struct EvolutionSegment {
    pub hamiltonian: Option<ComplexMatrix>,
    pub collapse: Vec<CollapseOp>,
    pub duration: f64,
}

/// Step-size guard: dt must stay below this fraction of 1/|H|.
const STABILITY_MARGIN: f64 = 0.05;
/// Allowed trace drift over a whole integration before renormalization.
const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Classical fixed-step RK4 over a piecewise-constant schedule. The final
/// state is re-Hermitized and trace-renormalized, after checking the raw
/// trace drift stayed within `1e-8`.
pub fn integrate_master_equation(
    rho0: &DensityOperator,
    schedule: &[EvolutionSegment],
    dt: f64,
) -> Result<DensityOperator> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(DeviceError::Config(format!("dt must be positive, got {dt}")));
    }
    let n = rho0.dim();
    let mut rho = rho0.matrix().clone();
    let mut k1 = ComplexMatrix::zeros(n, n);
    let mut k2 = ComplexMatrix::zeros(n, n);
    let mut k3 = ComplexMatrix::zeros(n, n);
    let mut k4 = ComplexMatrix::zeros(n, n);
    let mut stage = ComplexMatrix::zeros(n, n);
    let mut scratch = ComplexMatrix::zeros(n, n);

    for segment in schedule {
        if !segment.duration.is_finite() || segment.duration < 0.0 {
            return Err(DeviceError::Config(format!(
                "segment duration must be nonnegative, got {}",
                segment.duration
            )));
        }
        if segment.duration == 0.0 {
            continue;
        }
        let kernel = LindbladKernel::new(n, segment.hamiltonian.as_ref(), &segment.collapse)?;
        if let Some(h) = &segment.hamiltonian {
            let hnorm = infinity_norm(h);
            if hnorm > 0.0 && dt > STABILITY_MARGIN / hnorm {
                return Err(DeviceError::Config(format!(
                    "dt = {dt:.3e} s violates the stability guard {:.3e} s for |H| = {hnorm:.3e}",
                    STABILITY_MARGIN / hnorm
                )));
            }
        }

        let steps = (segment.duration / dt).ceil() as usize;
        let mut remaining = segment.duration;
        for _ in 0..steps {
            let h_step = remaining.min(dt);
            rk4_step(&kernel, &mut rho, h_step, &mut k1, &mut k2, &mut k3, &mut k4, &mut stage, &mut scratch);
            remaining -= h_step;
        }
    }

    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_DRIFT_TOL || tr.im.abs() > TRACE_DRIFT_TOL {
        return Err(DeviceError::NumericalConsistency(format!(
            "trace drifted to {} + {}i during integration",
            tr.re, tr.im
        )));
    }
    let raw = DensityOperator::from_parts_unchecked(rho, rho0.layout().clone());
    Ok(raw.scrubbed())
}

/// Single-segment convenience wrapper.
pub fn integrate_constant(
    rho0: &DensityOperator,
    hamiltonian: Option<&ComplexMatrix>,
    collapse: &[CollapseOp],
    dt: f64,
    t_end: f64,
) -> Result<DensityOperator> {
    integrate_master_equation(
        rho0,
        &[EvolutionSegment {
            hamiltonian: hamiltonian.cloned(),
            collapse: collapse.to_vec(),
            duration: t_end,
        }],
        dt,
    )
}

#[allow(clippy::too_many_arguments)]
fn rk4_step(
    kernel: &LindbladKernel,
    rho: &mut ComplexMatrix,
    h: f64,
    k1: &mut ComplexMatrix,
    k2: &mut ComplexMatrix,
    k3: &mut ComplexMatrix,
    k4: &mut ComplexMatrix,
    stage: &mut ComplexMatrix,
    scratch: &mut ComplexMatrix,
) {
    let half = 0.5 * h;
    kernel.rhs_into(rho, scratch, k1);
    axpy_into(stage, rho, k1, half);
    kernel.rhs_into(stage, scratch, k2);
    axpy_into(stage, rho, k2, half);
    kernel.rhs_into(stage, scratch, k3);
    axpy_into(stage, rho, k3, h);
    kernel.rhs_into(stage, scratch, k4);

    let w = h / 6.0;
    let (r, a, b, cc, d) = (rho.data_mut(), k1.data(), k2.data(), k3.data(), k4.data());
    for i in 0..r.len() {
        r[i] += w * (a[i] + 2.0 * (b[i] + cc[i]) + d[i]);
    }
}

/// stage = base + scale * k.
fn axpy_into(stage: &mut ComplexMatrix, base: &ComplexMatrix, k: &ComplexMatrix, scale: f64) {
    let (s, b, kd) = (stage.data_mut(), base.data(), k.data());
    for i in 0..s.len() {
        s[i] = b[i] + scale * kd[i];
    }
}

fn infinity_norm(m: &ComplexMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{annihilation, number_operator};
    use ramsey_core::linalg::tensor;
    use ramsey_core::state::{HilbertLayout, StateVector};

    fn plus_density() -> DensityOperator {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ]);
        DensityOperator::new(m, HilbertLayout::flat(2)).unwrap()
    }

    #[test]
    fn zero_generator_gives_zero_derivative() {
        let rho = plus_density();
        let rhs = lindblad_rhs(&rho, None, &[]).unwrap();
        assert!(rhs.max_abs() < 1e-15);
    }

    #[test]
    fn pure_dephasing_damps_off_diagonals_at_half_rate() {
        let rho = plus_density();
        let rate = 3.0e5;
        let ops = [CollapseOp::new(number_operator(2), rate)];
        let rhs = lindblad_rhs(&rho, None, &ops).unwrap();
        // d rho01/dt = -(rate/2) rho01; diagonals untouched.
        assert!((rhs[(0, 1)].re + 0.5 * rate * 0.5).abs() < 1e-9);
        assert!(rhs[(0, 0)].norm() < 1e-9);
        assert!(rhs[(1, 1)].norm() < 1e-9);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let layout = HilbertLayout::new(vec![2, 2]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(
            vec![c(s, 0.0), C64::ZERO, C64::ZERO, c(0.0, s)],
            layout,
        )
        .unwrap();
        let rho = psi.to_density();
        let h = tensor(&ramsey_core::linalg::pauli_z(), &ramsey_core::linalg::pauli_x())
            .scale(c(1.7e6, 0.0));
        let ops = [
            CollapseOp::new(tensor(&annihilation(2), &ComplexMatrix::identity(2)), 2.0e4),
            CollapseOp::new(tensor(&number_operator(2), &ComplexMatrix::identity(2)), 5.0e4),
        ];
        let rhs = lindblad_rhs(&rho, Some(&h), &ops).unwrap();
        assert!(rhs.trace().norm() < 1e-6 * rhs.max_abs().max(1.0));
        assert!(rhs.hermiticity_deviation() < 1e-9 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn negative_rate_is_rejected() {
        let rho = plus_density();
        let ops = [CollapseOp::new(number_operator(2), -1.0)];
        assert!(matches!(
            lindblad_rhs(&rho, None, &ops),
            Err(DeviceError::Config(_))
        ));
    }

    #[test]
    fn zero_schedule_returns_input() {
        let rho = plus_density();
        let out = integrate_constant(&rho, None, &[], 1e-11, 5e-9).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-14);
    }

    #[test]
    fn relaxation_reaches_inverse_e_after_t1() {
        let t1 = 0.5e-6;
        let layout = HilbertLayout::flat(2);
        let excited = StateVector::basis_state(layout, &[1]).unwrap().to_density();
        let ops = [CollapseOp::new(annihilation(2), 1.0 / t1)];
        let out = integrate_constant(&excited, None, &ops, 1e-11, t1).unwrap();
        let survived = out.matrix()[(1, 1)].re;
        assert!((survived - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn off_diagonal_decay_follows_combined_law() {
        // Relaxation at 1/T1 plus dephasing at 2/T2* must damp the coherence
        // by exp(-t/2T1 - t/T2*).
        let t1 = 17.1e-6;
        let t2s = 3.6e-6;
        let rho = plus_density();
        let ops = [
            CollapseOp::new(annihilation(2), 1.0 / t1),
            CollapseOp::new(number_operator(2), 2.0 / t2s),
        ];
        let t = 1.0e-6;
        let out = integrate_constant(&rho, None, &ops, 1e-11, t).unwrap();
        let expect = 0.5 * (-t / (2.0 * t1) - t / t2s).exp();
        let got = out.matrix()[(0, 1)].norm();
        assert!((got - expect).abs() / expect < 1e-4, "{got} vs {expect}");
    }

    #[test]
    fn halving_dt_barely_moves_the_answer() {
        let t1 = 2.0e-6;
        let rho = plus_density();
        let h = ramsey_core::linalg::pauli_x().scale(c(1.0e7, 0.0));
        let ops = [CollapseOp::new(annihilation(2), 1.0 / t1)];
        let coarse = integrate_constant(&rho, Some(&h), &ops, 1e-11, 50e-9).unwrap();
        let fine = integrate_constant(&rho, Some(&h), &ops, 5e-12, 50e-9).unwrap();
        let drift = coarse
            .matrix()
            .sub(fine.matrix())
            .frobenius_norm();
        assert!(drift < 1e-8, "dt convergence drift {drift}");
    }

    #[test]
    fn stability_guard_rejects_coarse_steps() {
        let rho = plus_density();
        let h = ramsey_core::linalg::pauli_x().scale(c(1.0e9, 0.0));
        let err = integrate_constant(&rho, Some(&h), &[], 1e-9, 10e-9);
        assert!(matches!(err, Err(DeviceError::Config(_))));
    }

    #[test]
    fn unitary_segment_matches_closed_evolution() {
        let p = crate::params::DeviceParams::table_defaults();
        let h = crate::gates::jc_generator(&p, 0.7 * p.g1);
        let layout = p.layout();
        let psi = StateVector::basis_state(layout.clone(), &[1, 0, 1]).unwrap();
        let rho = psi.to_density();
        let t = 5e-9;
        let integrated = integrate_constant(&rho, Some(&h), &[], 1e-11, t).unwrap();
        let closed = crate::gates::evolve_closed(&rho, &h, t).unwrap();
        assert!(integrated.matrix().max_abs_diff(closed.matrix()) < 1e-9);
    }
}
