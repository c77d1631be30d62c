//! Multi-subsystem state carriers: subsystem layouts, pure state vectors,
//! and density operators with partial trace and conditional projection.
//!
//! Subsystem ordering convention, used everywhere in this workspace: the
//! first layout entry is the outermost tensor factor. A basis index `i`
//! decomposes big-endian into per-subsystem digits, e.g. for dims `[3, 2, 3]`
//! the index is `i = d0*(2*3) + d1*3 + d2`.

use crate::eigen::hermitian_eigensystem;
use crate::error::{CoreError, Result};
use crate::linalg::{c, tensor, C64, ComplexMatrix};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-10;
/// Projection probabilities below this leave the conditional state undefined.
pub const PROJECTION_FLOOR: f64 = 1e-14;

/// Ordered subsystem dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    dims: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(CoreError::InvalidArgument(
                "layout requires at least one subsystem of nonzero dimension".into(),
            ));
        }
        Ok(Self { dims })
    }

    /// Single-factor layout.
    pub fn flat(dim: usize) -> Self {
        Self { dims: vec![dim] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Total Hilbert dimension (product of subsystem dimensions).
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &HilbertLayout) -> HilbertLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HilbertLayout { dims }
    }

    /// Big-endian strides: index = sum(digit_k * stride_k).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        self.strides().iter().zip(digits).map(|(s, d)| s * d).sum()
    }

    pub fn decompose(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut digits = vec![0; self.dims.len()];
        for (k, s) in strides.iter().enumerate() {
            digits[k] = index / s;
            index %= s;
        }
        digits
    }

    fn check_subsystem(&self, s: usize) -> Result<()> {
        if s >= self.dims.len() {
            return Err(CoreError::InvalidArgument(format!(
                "subsystem index {s} out of range for {} subsystems",
                self.dims.len()
            )));
        }
        Ok(())
    }
}

/// Normalized pure state over a declared layout.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    layout: HilbertLayout,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within `NORM_TOL`).
    pub fn new(amplitudes: Vec<C64>, layout: HilbertLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(CoreError::Dimension(format!(
                "{} amplitudes do not fill a dimension-{} layout",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(CoreError::InvalidArgument(format!(
                "state vector norm^2 = {norm_sq}, expected 1"
            )));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalizes and wraps; errors on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>, layout: HilbertLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(CoreError::Dimension(format!(
                "{} amplitudes do not fill a dimension-{} layout",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-150 {
            return Err(CoreError::InvalidArgument("cannot normalize the zero vector".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { amplitudes, layout })
    }

    /// Computational basis state |digits...>.
    pub fn basis_state(layout: HilbertLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.subsystems() {
            return Err(CoreError::Dimension("one digit per subsystem required".into()));
        }
        for (d, &dim) in digits.iter().zip(layout.dims()) {
            if *d >= dim {
                return Err(CoreError::InvalidArgument(format!(
                    "basis digit {d} exceeds subsystem dimension {dim}"
                )));
            }
        }
        let mut amplitudes = vec![C64::ZERO; layout.dim()];
        amplitudes[layout.compose(digits)] = C64::ONE;
        Ok(Self { amplitudes, layout })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// <self|other>.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector { amplitudes, layout: self.layout.concat(&other.layout) }
    }

    /// Applies a unitary (or any matrix) to the full vector.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<StateVector> {
        if u.cols() != self.dim() {
            return Err(CoreError::Dimension(format!(
                "operator acts on dimension {}, state has {}",
                u.cols(),
                self.dim()
            )));
        }
        let mut amplitudes = vec![C64::ZERO; u.rows()];
        for (i, out) in amplitudes.iter_mut().enumerate() {
            for j in 0..u.cols() {
                *out += u[(i, j)] * self.amplitudes[j];
            }
        }
        Ok(StateVector { amplitudes, layout: self.layout.clone() })
    }

    /// |self><self| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        let n = self.dim();
        let mat = ComplexMatrix::from_fn(n, n, |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        DensityOperator { matrix: mat, layout: self.layout.clone() }
    }
}

/// Hermitian, unit-trace, PSD matrix over a declared layout; the universal
/// state carrier.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    layout: HilbertLayout,
}

impl DensityOperator {
    /// Validating constructor: Hermitian within `HERMITIAN_TOL`, unit trace
    /// within `TRACE_TOL`, smallest eigenvalue above `-PSD_TOL`.
    pub fn new(matrix: ComplexMatrix, layout: HilbertLayout) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.dim() {
            return Err(CoreError::Dimension(format!(
                "{}x{} matrix does not match layout dimension {}",
                matrix.rows(),
                matrix.cols(),
                layout.dim()
            )));
        }
        matrix.ensure_hermitian(HERMITIAN_TOL)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(CoreError::BadTrace(tr.re));
        }
        let (values, _) = hermitian_eigensystem(&matrix)?;
        if let Some(&min) = values.last() {
            if min < -PSD_TOL {
                return Err(CoreError::NotPositive(min));
            }
        }
        Ok(Self { matrix, layout })
    }

    /// Wraps without validating. The caller guarantees the invariants hold;
    /// used on internal paths where they do by construction.
    pub fn from_parts_unchecked(matrix: ComplexMatrix, layout: HilbertLayout) -> Self {
        debug_assert_eq!(matrix.rows(), layout.dim());
        Self { matrix, layout }
    }

    /// Maximally mixed state I/d over a layout.
    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        let mat = ComplexMatrix::identity(d).scale(c(1.0 / d as f64, 0.0));
        Self { matrix: mat, layout }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: tensor(&self.matrix, &other.matrix),
            layout: self.layout.concat(&other.layout),
        }
    }

    /// Conjugates by a unitary: U rho U^dagger.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityOperator> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(CoreError::Dimension(format!(
                "operator is {}x{}, state dimension is {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let mat = u.matmul(&self.matrix).matmul(&u.adjoint());
        Ok(DensityOperator { matrix: mat, layout: self.layout.clone() })
    }

    /// Reduced state over `keep` (strictly increasing subsystem indices),
    /// tracing out everything else.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        for &s in keep {
            self.layout.check_subsystem(s)?;
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidArgument(
                "keep indices must be strictly increasing".into(),
            ));
        }
        if keep.is_empty() {
            return Err(CoreError::InvalidArgument("must keep at least one subsystem".into()));
        }
        let dims = self.layout.dims();
        let traced: Vec<usize> =
            (0..dims.len()).filter(|s| !keep.contains(s)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
        let dk: usize = kept_dims.iter().product();
        let strides = self.layout.strides();

        // Precompute the full-space offset of every kept and traced
        // multi-index.
        let kept_offsets = mixed_radix_offsets(&kept_dims, &keep.iter().map(|&s| strides[s]).collect::<Vec<_>>());
        let traced_offsets =
            mixed_radix_offsets(&traced_dims, &traced.iter().map(|&s| strides[s]).collect::<Vec<_>>());

        let mut out = ComplexMatrix::zeros(dk, dk);
        for (ka, &offa) in kept_offsets.iter().enumerate() {
            for (kb, &offb) in kept_offsets.iter().enumerate() {
                let mut acc = C64::ZERO;
                for &offt in &traced_offsets {
                    acc += self.matrix[(offa + offt, offb + offt)];
                }
                out[(ka, kb)] = acc;
            }
        }
        let layout = HilbertLayout::new(kept_dims)?;
        Ok(DensityOperator { matrix: out, layout })
    }

    /// Projects one subsystem onto a basis state. Returns the normalized
    /// conditional state of the remaining subsystems and the projection
    /// probability.
    pub fn project_subsystem(
        &self,
        subsystem: usize,
        basis_state: usize,
    ) -> Result<(DensityOperator, f64)> {
        self.layout.check_subsystem(subsystem)?;
        let dims = self.layout.dims();
        if basis_state >= dims[subsystem] {
            return Err(CoreError::InvalidArgument(format!(
                "basis state {basis_state} exceeds subsystem dimension {}",
                dims[subsystem]
            )));
        }
        if dims.len() == 1 {
            return Err(CoreError::InvalidArgument(
                "projection needs at least one remaining subsystem".into(),
            ));
        }
        let strides = self.layout.strides();
        let rest: Vec<usize> = (0..dims.len()).filter(|&s| s != subsystem).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&s| dims[s]).collect();
        let rest_offsets =
            mixed_radix_offsets(&rest_dims, &rest.iter().map(|&s| strides[s]).collect::<Vec<_>>());
        let base = basis_state * strides[subsystem];

        let dr: usize = rest_dims.iter().product();
        let mut block = ComplexMatrix::zeros(dr, dr);
        let mut prob = 0.0;
        for (a, &offa) in rest_offsets.iter().enumerate() {
            for (b, &offb) in rest_offsets.iter().enumerate() {
                block[(a, b)] = self.matrix[(base + offa, base + offb)];
            }
            prob += block[(a, a)].re;
        }
        if prob < PROJECTION_FLOOR {
            return Err(CoreError::DegenerateProjection(prob));
        }
        let cond = block.scale(c(1.0 / prob, 0.0));
        let layout = HilbertLayout::new(rest_dims)?;
        Ok((DensityOperator { matrix: cond, layout }, prob))
    }

    /// Population of one basis state of one subsystem.
    pub fn subsystem_population(&self, subsystem: usize, basis_state: usize) -> Result<f64> {
        self.layout.check_subsystem(subsystem)?;
        let dims = self.layout.dims();
        if basis_state >= dims[subsystem] {
            return Err(CoreError::InvalidArgument(format!(
                "basis state {basis_state} exceeds subsystem dimension {}",
                dims[subsystem]
            )));
        }
        let mut pop = 0.0;
        for i in 0..self.dim() {
            if self.layout.decompose(i)[subsystem] == basis_state {
                pop += self.matrix[(i, i)].re;
            }
        }
        Ok(pop)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Re-Hermitizes and renormalizes the trace; scrubs integrator roundoff.
    pub fn scrubbed(&self) -> DensityOperator {
        let herm = self.matrix.hermitian_part();
        let tr = herm.trace().re;
        DensityOperator {
            matrix: herm.scale(c(1.0 / tr, 0.0)),
            layout: self.layout.clone(),
        }
    }
}

/// Full-space offsets of every multi-index over `dims` placed at `strides`.
fn mixed_radix_offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut offsets = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        offsets.push(digits.iter().zip(strides).map(|(d, s)| d * s).sum());
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    offsets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_x;

    fn bell_state() -> StateVector {
        let layout = HilbertLayout::new(vec![2, 2]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(s, 0.0), C64::ZERO, C64::ZERO, c(s, 0.0)], layout).unwrap()
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let rho = bell_state().to_density();
        let reduced = rho.partial_trace(&[0]).unwrap();
        let expect = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(reduced.matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn product_state_factorizes_under_partial_trace() {
        let la = HilbertLayout::flat(2);
        let lb = HilbertLayout::flat(3);
        let a = DensityOperator::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.7, 0.0), c(0.1, 0.2)],
                vec![c(0.1, -0.2), c(0.3, 0.0)],
            ]),
            la,
        )
        .unwrap();
        let b = DensityOperator::maximally_mixed(lb);
        let joint = a.tensor(&b);
        let back = joint.partial_trace(&[0]).unwrap();
        assert!(back.matrix().max_abs_diff(a.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = bell_state().to_density();
        let t = rho.partial_trace(&[1]).unwrap().trace();
        assert!((t.re - 1.0).abs() < 1e-12 && t.im.abs() < 1e-12);
    }

    #[test]
    fn invalid_subsystem_index_is_rejected() {
        let rho = bell_state().to_density();
        assert!(rho.partial_trace(&[2]).is_err());
    }

    #[test]
    fn projection_probabilities_sum_to_one() {
        let rho = bell_state().to_density();
        let mut total = 0.0;
        for k in 0..2 {
            let (_, p) = rho.project_subsystem(0, k).unwrap();
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_probability_projection_is_degenerate() {
        let layout = HilbertLayout::new(vec![2, 2]).unwrap();
        let ket = StateVector::basis_state(layout, &[0, 0]).unwrap();
        let rho = ket.to_density();
        assert!(matches!(
            rho.project_subsystem(0, 1),
            Err(CoreError::DegenerateProjection(_))
        ));
    }

    #[test]
    fn projection_returns_conditional_state() {
        // |psi> = (|0>|+> + |1>|0>)/norm; projecting the first qubit onto |0>
        // must give |+><+|.
        let layout = HilbertLayout::new(vec![2, 2]).unwrap();
        let s = 0.5f64.sqrt();
        let amps = vec![c(s * s, 0.0), c(s * s, 0.0), c(s, 0.0), C64::ZERO];
        let psi = StateVector::normalized(amps, layout).unwrap();
        let (cond, p) = psi.to_density().project_subsystem(0, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let plus = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ]);
        assert!(cond.matrix().max_abs_diff(&plus) < 1e-12);
    }

    #[test]
    fn layout_compose_decompose_roundtrip() {
        let layout = HilbertLayout::new(vec![3, 2, 3]).unwrap();
        for i in 0..layout.dim() {
            assert_eq!(layout.compose(&layout.decompose(i)), i);
        }
    }

    #[test]
    fn apply_pauli_x_flips_basis_state() {
        let layout = HilbertLayout::flat(2);
        let zero = StateVector::basis_state(layout, &[0]).unwrap();
        let one = zero.apply(&pauli_x()).unwrap();
        assert!((one.amplitudes()[1] - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let layout = HilbertLayout::flat(2);
        let m = ComplexMatrix::identity(2);
        assert!(matches!(DensityOperator::new(m, layout), Err(CoreError::BadTrace(_))));
    }

    #[test]
    fn density_validation_rejects_negative_operator() {
        let layout = HilbertLayout::flat(2);
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.5, 0.0), C64::ZERO],
            vec![C64::ZERO, c(-0.5, 0.0)],
        ]);
        assert!(matches!(DensityOperator::new(m, layout), Err(CoreError::NotPositive(_))));
    }
}
