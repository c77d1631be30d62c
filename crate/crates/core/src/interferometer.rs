//! The analytic interferometer engine: input-state preparation (pure,
//! partially coherent, unbalanced), conditional detector coupling, recombination,
//! detection probabilities, detector purification, and fringe sweeps.
//!
//! The beam-splitter convention used throughout is the pi/2 x-rotation
//! {|0> -> (|0> - i|1>)/sqrt(2), |1> -> (|1> - i|0>)/sqrt(2)}; the tunable
//! phase theta enters as the preparation-pulse azimuth, which lands the
//! interfering qubit in (|0> - i e^{i theta} |1>)/sqrt(2) for full coherence.

use crate::eigen::hermitian_eigensystem;
use crate::error::{CoreError, Result};
use crate::linalg::{c, C64, ComplexMatrix};
use crate::state::{DensityOperator, HilbertLayout, StateVector};

/// The recombination beam-splitter: (1/sqrt(2)) [[1, -i], [-i, 1]].
pub fn hadamard_gate() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_rows(&[vec![c(s, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(s, 0.0)]])
}

/// The reference which-path detector state (|0> - |1>)/sqrt(2) on a
/// two-dimensional detector.
pub fn reference_detector_state() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![c(s, 0.0), c(-s, 0.0)], HilbertLayout::flat(2)).unwrap()
}

/// Detector unitary e^{i beta |1><1|} (a conditional phase on the one-photon
/// component), on a detector of dimension `dim` >= 2.
pub fn phase_detector_unitary(beta: f64, dim: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(dim);
    u[(1, 1)] = c(beta.cos(), beta.sin());
    u
}

/// Input qubit state with coherence `c0`, phase `theta`, and population
/// angle `alpha` (pi/4 = balanced):
/// diag(cos^2 alpha, sin^2 alpha) + (i/2) C0 (e^{-i theta}|0><1| - h.c.).
pub fn prepare_input(c0: f64, theta: f64, alpha: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0 + 1e-12).contains(&c0) || !c0.is_finite() {
        return Err(CoreError::InvalidArgument(format!("c0 = {c0} outside [0, 1]")));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(CoreError::InvalidArgument(format!(
            "population angle alpha = {alpha} outside [0, pi/2]"
        )));
    }
    // Positivity of the state requires C0 <= sin(2 alpha).
    let sin2a = (2.0 * alpha).sin();
    if c0 > sin2a + 1e-12 {
        return Err(CoreError::InvalidArgument(format!(
            "c0 = {c0} exceeds the physicality bound sin(2 alpha) = {sin2a}"
        )));
    }
    let cos2 = alpha.cos().powi(2);
    let sin2 = alpha.sin().powi(2);
    let off = c(0.0, 0.5 * c0) * c(theta.cos(), -theta.sin()); // (i/2) C0 e^{-i theta}
    let m = ComplexMatrix::from_rows(&[
        vec![c(cos2, 0.0), off],
        vec![off.conj(), c(sin2, 0.0)],
    ]);
    DensityOperator::new(m, HilbertLayout::flat(2))
}

/// Couples the interfering qubit to a pure-state detector: applies the
/// controlled unitary |0><0| x I + |1><1| x U to rho_q x |w0><w0|.
pub fn couple_wpd(
    rho_q: &DensityOperator,
    w0: &StateVector,
    u: &ComplexMatrix,
) -> Result<DensityOperator> {
    if rho_q.dim() != 2 {
        return Err(CoreError::Dimension(format!(
            "interfering system must be a qubit, got dimension {}",
            rho_q.dim()
        )));
    }
    if u.rows() != w0.dim() || u.cols() != w0.dim() {
        return Err(CoreError::Dimension(format!(
            "detector unitary is {}x{}, detector dimension is {}",
            u.rows(),
            u.cols(),
            w0.dim()
        )));
    }
    u.ensure_unitary(1e-10)?;

    let moved = w0.apply(u)?;
    let branches = [w0, &moved];
    let d = w0.dim();
    let mut joint = ComplexMatrix::zeros(2 * d, 2 * d);
    for q in 0..2 {
        for p in 0..2 {
            let weight = rho_q.matrix()[(q, p)];
            if weight == C64::ZERO {
                continue;
            }
            for a in 0..d {
                let left = branches[q].amplitudes()[a];
                if left == C64::ZERO {
                    continue;
                }
                for b in 0..d {
                    joint[(q * d + a, p * d + b)] +=
                        weight * left * branches[p].amplitudes()[b].conj();
                }
            }
        }
    }
    let layout = HilbertLayout::new(vec![2])?.concat(w0.layout());
    DensityOperator::new(joint, layout)
}

/// Probability of detecting the interfering qubit in |1> after the
/// recombination beam-splitter, tracing out every detector factor.
pub fn detection_probability(rho_joint: &DensityOperator) -> Result<f64> {
    let dims = rho_joint.layout().dims();
    if dims.first() != Some(&2) {
        return Err(CoreError::Dimension(
            "joint state must carry the qubit as its first subsystem".into(),
        ));
    }
    let dw: usize = dims[1..].iter().product();
    let h = crate::linalg::tensor(&hadamard_gate(), &ComplexMatrix::identity(dw));
    let recombined = rho_joint.conjugate_by(&h)?;
    let qubit = recombined.partial_trace(&[0])?;
    Ok(qubit.matrix()[(1, 1)].re)
}

/// Probability of detecting the qubit in |0>; the complementary fringe.
pub fn complementary_probability(rho_joint: &DensityOperator) -> Result<f64> {
    Ok(1.0 - detection_probability(rho_joint)?)
}

/// Purifies a mixed detector state by appending an environment of dimension
/// rank(rho): |Psi> = sum_k sqrt(P_k) |phi_k>|e_k>. The returned layout is
/// [detector dims..., rank].
pub fn purify_wpd(rho_w: &DensityOperator) -> Result<StateVector> {
    let (values, vectors) = hermitian_eigensystem(rho_w.matrix())?;
    if let Some(&min) = values.last() {
        if min < -1e-9 {
            return Err(CoreError::NotPositive(min));
        }
    }
    let rank_tol = 1e-12;
    let rank = values.iter().filter(|&&v| v > rank_tol).count().max(1);
    let d = rho_w.dim();
    let mut amps = vec![C64::ZERO; d * rank];
    for k in 0..rank {
        let weight = values[k].max(0.0).sqrt();
        for a in 0..d {
            amps[a * rank + k] = vectors[(a, k)] * weight;
        }
    }
    let layout = rho_w.layout().concat(&HilbertLayout::flat(rank));
    StateVector::normalized(amps, layout)
}

/// One fringe sweep: the sampled phases, both detection probabilities, and
/// the fitted sinusoid parameters.
#[derive(Debug, Clone)]
pub struct FringeRecord {
    pub thetas: Vec<f64>,
    pub p1: Vec<f64>,
    pub fitted_visibility: f64,
    pub fitted_phase: f64,
    pub fitted_offset: f64,
    pub rms_residual: f64,
}

impl FringeRecord {
    pub fn p0(&self) -> Vec<f64> {
        self.p1.iter().map(|p| 1.0 - p).collect()
    }
}

/// Least-squares fit of samples to P(theta) = c + a cos(theta) + b sin(theta),
/// reported as (visibility, phase, offset, rms residual) for the form
/// P = c [1 + V cos(theta + phi)].
pub fn fit_fringe(thetas: &[f64], p1: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if thetas.len() != p1.len() {
        return Err(CoreError::Dimension("theta and sample counts differ".into()));
    }
    let n = thetas.len();
    if n < 5 {
        return Err(CoreError::InvalidArgument(format!(
            "fringe fit needs at least 5 samples, got {n}"
        )));
    }
    // Normal equations for the basis {1, cos, sin}.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (&t, &y) in thetas.iter().zip(p1) {
        let row = [1.0, t.cos(), t.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let coeffs = solve3(ata, atb).ok_or_else(|| {
        CoreError::Fit("rank-deficient design (degenerate theta grid)".into())
    })?;
    let (offset, a, b) = (coeffs[0], coeffs[1], coeffs[2]);
    if offset.abs() < 1e-12 {
        return Err(CoreError::Fit("fitted offset vanishes; visibility undefined".into()));
    }
    let visibility = (a * a + b * b).sqrt() / offset;
    let phase = if (a * a + b * b).sqrt() < 1e-14 { 0.0 } else { (-b).atan2(a) };
    let mut ss = 0.0;
    for (&t, &y) in thetas.iter().zip(p1) {
        let model = offset + a * t.cos() + b * t.sin();
        ss += (y - model) * (y - model);
    }
    Ok((visibility, phase, offset, (ss / n as f64).sqrt()))
}

/// 3x3 linear solve with partial pivoting; None when singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (entry, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Sweeps the interferometer phase over `thetas` with fixed coherence,
/// population angle, and detector transform, and fits the fringe.
pub fn run_ideal_sweep(
    thetas: &[f64],
    c0: f64,
    alpha: f64,
    w0: &StateVector,
    u: &ComplexMatrix,
) -> Result<FringeRecord> {
    if thetas.len() < 5 {
        return Err(CoreError::InvalidArgument(
            "a fitted sweep needs at least 5 distinct phases".into(),
        ));
    }
    let mut p1 = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let rho_q = prepare_input(c0, theta, alpha)?;
        let joint = couple_wpd(&rho_q, w0, u)?;
        p1.push(detection_probability(&joint)?);
    }
    let (fitted_visibility, fitted_phase, fitted_offset, rms_residual) = fit_fringe(thetas, &p1)?;
    Ok(FringeRecord {
        thetas: thetas.to_vec(),
        p1,
        fitted_visibility,
        fitted_phase,
        fitted_offset,
        rms_residual,
    })
}

/// Detector preparation: either a pure vector or a mixed operator that gets
/// purified before coupling.
#[derive(Debug, Clone)]
pub enum WpdPreparation {
    Pure(StateVector),
    Mixed(DensityOperator),
}

/// Full configuration of one analytic interferometer run.
#[derive(Debug, Clone)]
pub struct InterferometerConfig {
    pub theta: f64,
    pub c0: f64,
    pub alpha: f64,
    pub wpd_initial: WpdPreparation,
    pub wpd_unitary: ComplexMatrix,
}

impl InterferometerConfig {
    pub fn balanced(theta: f64, c0: f64, wpd_initial: WpdPreparation, wpd_unitary: ComplexMatrix) -> Self {
        Self { theta, c0, alpha: std::f64::consts::FRAC_PI_4, wpd_initial, wpd_unitary }
    }

    pub fn validate(&self) -> Result<()> {
        prepare_input(self.c0, self.theta, self.alpha).map(|_| ())
    }

    /// The effective pure detector state: the vector itself, or the
    /// purification of a mixed preparation.
    pub fn effective_detector(&self) -> Result<(StateVector, ComplexMatrix)> {
        match &self.wpd_initial {
            WpdPreparation::Pure(w0) => Ok((w0.clone(), self.wpd_unitary.clone())),
            WpdPreparation::Mixed(rho_w) => {
                let purified = purify_wpd(rho_w)?;
                let env_dim = purified.dim() / rho_w.dim();
                let extended = crate::linalg::tensor(
                    &self.wpd_unitary,
                    &ComplexMatrix::identity(env_dim),
                );
                Ok((purified, extended))
            }
        }
    }

    /// Joint qubit (x) detector state after coupling, at this config's theta.
    pub fn joint_state(&self) -> Result<DensityOperator> {
        let (w0, u) = self.effective_detector()?;
        let rho_q = prepare_input(self.c0, self.theta, self.alpha)?;
        couple_wpd(&rho_q, &w0, &u)
    }
}
