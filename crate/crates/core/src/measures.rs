//! Complementarity quantities: l1-coherence, detector overlap, the effective
//! two-qubit embedding, Wootters concurrence, distinguishability, and the
//! closed-form triplet they jointly satisfy.
//!
//! For an input qubit of coherence `C0` coupled to a which-path detector
//! whose branch overlap has modulus `V0`, the fringe visibility is
//! `V = C0*V0`, the qubit-detector concurrence is `E = C0*sqrt(1-V0^2)`,
//! and `E^2 + V^2 = C0^2` holds identically, while the distinguishability
//! `D = sqrt(1-V0^2)` does not depend on `C0`.

use crate::eigen::{general_eigenvalues, trace_norm};
use crate::error::{CoreError, Result};
use crate::linalg::{c, pauli_y, tensor, C64, ComplexMatrix};
use crate::state::{DensityOperator, HilbertLayout, StateVector};

/// Detector overlap amplitude, split into modulus and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpdOverlap {
    /// |<W0|U|W0>|, in [0, 1].
    pub v0: f64,
    /// arg(<W0|U|W0>) in (-pi, pi]; reported as 0 when v0 vanishes.
    pub phi: f64,
}

/// The four complementarity quantities for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityTriplet {
    pub coherence_c0: f64,
    pub visibility_v: f64,
    pub concurrence_e: f64,
    pub distinguishability_d: f64,
}

impl ComplementarityTriplet {
    /// E^2 + V^2 - C0^2; identically zero for ideal-engine products.
    pub fn equality_residual(&self) -> f64 {
        self.concurrence_e * self.concurrence_e + self.visibility_v * self.visibility_v
            - self.coherence_c0 * self.coherence_c0
    }
}

const UNITARY_TOL: f64 = 1e-10;
const COMPLEMENT_SINGULARITY: f64 = 1e-9;
const EMBED_ORTHONORMAL_TOL: f64 = 1e-9;
const EMBED_LEAKAGE_TOL: f64 = 1e-9;
/// Spectrum-noise window for the concurrence construction: eigenvalues of
/// the spin-flipped product with negative part or imaginary part inside this
/// window are clamped; anything larger is a genuine inconsistency.
const SPECTRUM_NOISE_TOL: f64 = 1e-9;
/// Positive eigenvalues below this are roundoff images of exact zeros; they
/// must not reach the square root, which would blow 1e-16 noise up to 1e-8.
const SPECTRUM_ZERO_CLAMP: f64 = 1e-13;

/// Sum of off-diagonal moduli of a single-qubit state.
pub fn l1_coherence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(CoreError::Dimension(format!(
            "l1 coherence is defined here for one qubit, got dimension {}",
            rho.dim()
        )));
    }
    Ok(rho.matrix()[(0, 1)].norm() + rho.matrix()[(1, 0)].norm())
}

/// Modulus and phase of <w0|U|w0>.
pub fn wpd_overlap(w0: &StateVector, u: &ComplexMatrix) -> Result<WpdOverlap> {
    if u.rows() != w0.dim() {
        return Err(CoreError::Dimension(format!(
            "unitary dimension {} does not match detector dimension {}",
            u.rows(),
            w0.dim()
        )));
    }
    u.ensure_unitary(UNITARY_TOL)?;
    let moved = w0.apply(u)?;
    let amp = w0.inner(&moved);
    let v0 = amp.norm();
    let phi = if v0 < 1e-12 { 0.0 } else { amp.arg() };
    Ok(WpdOverlap { v0, phi })
}

/// The unit vector orthogonal to `w0` spanning the moved branch:
/// |W1> = (U|W0> - V0 e^{i phi} |W0>) / sqrt(1 - V0^2).
pub fn wpd_orthonormal_complement(w0: &StateVector, u: &ComplexMatrix) -> Result<StateVector> {
    let overlap = wpd_overlap(w0, u)?;
    if overlap.v0 >= 1.0 - COMPLEMENT_SINGULARITY {
        return Err(CoreError::DegenerateComplement { v0: overlap.v0 });
    }
    let moved = w0.apply(u)?;
    let coeff = c(overlap.v0, 0.0) * c(overlap.phi.cos(), overlap.phi.sin());
    let amps: Vec<C64> = moved
        .amplitudes()
        .iter()
        .zip(w0.amplitudes())
        .map(|(m, w)| m - coeff * w)
        .collect();
    StateVector::normalized(amps, w0.layout().clone())
}

/// Rewrites a qubit (x) detector state on the span {w0, w1} of the detector
/// factor as a 4x4 two-qubit state in the ordered basis
/// {|0>|W0>, |0>|W1>, |1>|W0>, |1>|W1>}.
pub fn embed_effective_two_qubit(
    rho: &DensityOperator,
    w0: &StateVector,
    w1: &StateVector,
) -> Result<DensityOperator> {
    let dims = rho.layout().dims();
    if dims.first() != Some(&2) {
        return Err(CoreError::Dimension(
            "expected a qubit as the first subsystem of the joint state".into(),
        ));
    }
    let dw: usize = dims[1..].iter().product();
    if w0.dim() != dw || w1.dim() != dw {
        return Err(CoreError::Dimension(format!(
            "detector vectors of dimension {}/{} do not match detector factor {}",
            w0.dim(),
            w1.dim(),
            dw
        )));
    }
    let cross = w0.inner(w1).norm();
    if cross > EMBED_ORTHONORMAL_TOL {
        return Err(CoreError::InvalidArgument(format!(
            "detector basis is not orthonormal: |<w0|w1>| = {cross:.3e}"
        )));
    }

    let basis = [w0, w1];
    let mat = ComplexMatrix::from_fn(4, 4, |r, s| {
        let (q, i) = (r / 2, r % 2);
        let (p, j) = (s / 2, s % 2);
        let mut acc = C64::ZERO;
        for a in 0..dw {
            let wa = basis[i].amplitudes()[a].conj();
            if wa == C64::ZERO {
                continue;
            }
            for b in 0..dw {
                acc += wa * rho.matrix()[(q * dw + a, p * dw + b)] * basis[j].amplitudes()[b];
            }
        }
        acc
    });

    let captured = mat.trace().re;
    let leakage = 1.0 - captured;
    if leakage > EMBED_LEAKAGE_TOL {
        return Err(CoreError::EmbeddingLeakage(leakage));
    }
    // Rescale away the sub-tolerance leakage so the result is a unit-trace
    // state.
    let mat = mat.scale(c(1.0 / captured, 0.0));
    DensityOperator::new(mat, HilbertLayout::new(vec![2, 2])?)
}

/// Wootters concurrence of a two-qubit state, via the spectrum of
/// rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y).
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(CoreError::Dimension(format!(
            "concurrence is defined for two qubits, got dimension {}",
            rho.dim()
        )));
    }
    let flip = tensor(&pauli_y(), &pauli_y());
    let spun = rho
        .matrix()
        .matmul(&flip)
        .matmul(&rho.matrix().conjugate())
        .matmul(&flip);
    let eigs = general_eigenvalues(&spun)?;

    let mut lambdas = Vec::with_capacity(4);
    for z in eigs {
        if z.im.abs() > SPECTRUM_NOISE_TOL {
            return Err(CoreError::NumericalConsistency(format!(
                "spin-flipped spectrum has imaginary part {:.3e}",
                z.im
            )));
        }
        if z.re < -SPECTRUM_NOISE_TOL {
            return Err(CoreError::NumericalConsistency(format!(
                "spin-flipped spectrum has negative eigenvalue {:.3e}",
                z.re
            )));
        }
        let lam = z.re.max(0.0);
        lambdas.push(if lam < SPECTRUM_ZERO_CLAMP { 0.0 } else { lam });
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let e = lambdas[0].sqrt() - lambdas[1].sqrt() - lambdas[2].sqrt() - lambdas[3].sqrt();
    Ok(e.max(0.0))
}

/// Path information stored in the detector:
/// D = (1/2) Tr |rho_{w,0} - rho_{w,1}| with the conditional states obtained
/// by projecting the interfering qubit.
pub fn distinguishability(rho_joint: &DensityOperator, qubit_subsystem: usize) -> Result<f64> {
    let (cond0, p0) = rho_joint
        .project_subsystem(qubit_subsystem, 0)
        .map_err(remap_degenerate)?;
    let (cond1, p1) = rho_joint
        .project_subsystem(qubit_subsystem, 1)
        .map_err(remap_degenerate)?;
    debug_assert!(p0 > 0.0 && p1 > 0.0);
    let diff = cond0.matrix().sub(cond1.matrix());
    Ok(0.5 * trace_norm(&diff)?)
}

fn remap_degenerate(err: CoreError) -> CoreError {
    match err {
        CoreError::DegenerateProjection(p) => CoreError::DegeneratePath(p),
        other => other,
    }
}

/// Closed-form triplet for coherence `c0` and detector overlap `v0`:
/// (C0, C0*V0, C0*sqrt(1-V0^2), sqrt(1-V0^2)).
pub fn predict_triplet(c0: f64, v0: f64) -> Result<ComplementarityTriplet> {
    for (name, value) in [("c0", c0), ("v0", v0)] {
        if !(0.0..=1.0 + 1e-12).contains(&value) || !value.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "{name} = {value} is outside [0, 1]"
            )));
        }
    }
    let v0 = v0.min(1.0);
    let c0 = c0.min(1.0);
    let ortho = (1.0 - v0 * v0).max(0.0).sqrt();
    Ok(ComplementarityTriplet {
        coherence_c0: c0,
        visibility_v: c0 * v0,
        concurrence_e: c0 * ortho,
        distinguishability_d: ortho,
    })
}
