//! Simulated measurement chain: tomography basis rotations, finite-shot
//! multinomial sampling, the readout confusion-matrix forward model and its
//! inversion, and density-matrix reconstruction by linear inversion with a
//! PSD projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramsey_core::linalg::{c, ComplexMatrix};
use ramsey_core::state::{DensityOperator, HilbertLayout};
use ramsey_core::{hermitian_eigensystem, hermitian_sqrt, trace_norm};

use crate::error::{DeviceError, Result};
use crate::gates::rotation_operator;

/// Measurement axis for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn label(&self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_label(ch: char) -> Result<Self> {
        match ch {
            'X' => Ok(PauliAxis::X),
            'Y' => Ok(PauliAxis::Y),
            'Z' => Ok(PauliAxis::Z),
            other => Err(DeviceError::Config(format!("unknown axis label `{other}`"))),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            PauliAxis::X => ramsey_core::linalg::pauli_x(),
            PauliAxis::Y => ramsey_core::linalg::pauli_y(),
            PauliAxis::Z => ramsey_core::linalg::pauli_z(),
        }
    }
}

/// All nine two-qubit basis pairs in fixed (row-major) order XX..ZZ.
pub fn basis_pairs() -> Vec<(PauliAxis, PauliAxis)> {
    let mut out = Vec::with_capacity(9);
    for a in PauliAxis::ALL {
        for b in PauliAxis::ALL {
            out.push((a, b));
        }
    }
    out
}

/// The pi/2 pulse rotating the chosen measurement axis onto z, pinned so
/// that z-basis populations after the rotation reproduce <sigma_axis>:
/// V^dagger sigma_z V = sigma_axis.
pub fn tomography_rotation(axis: PauliAxis) -> ComplexMatrix {
    use std::f64::consts::FRAC_PI_2;
    match axis {
        PauliAxis::X => rotation_operator(FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2),
        PauliAxis::Y => rotation_operator(FRAC_PI_2, 0.0, FRAC_PI_2),
        PauliAxis::Z => ComplexMatrix::identity(2),
    }
}

/// Ideal two-qubit measurement distribution in a given basis pair: rotate
/// each qubit's axis onto z and read the computational-basis diagonal.
pub fn measure_probabilities(
    rho: &DensityOperator,
    basis: (PauliAxis, PauliAxis),
) -> Result<Vec<f64>> {
    if rho.dim() != 4 {
        return Err(DeviceError::Config(format!(
            "two-qubit tomography needs a 4x4 state, got {}",
            rho.dim()
        )));
    }
    let u = ramsey_core::tensor(&tomography_rotation(basis.0), &tomography_rotation(basis.1));
    let rotated = rho.conjugate_by(&u)?;
    let mut probs: Vec<f64> = (0..4).map(|i| rotated.matrix()[(i, i)].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Single-qubit analogue of `measure_probabilities`.
pub fn measure_single_qubit_probabilities(
    rho: &DensityOperator,
    axis: PauliAxis,
) -> Result<Vec<f64>> {
    if rho.dim() != 2 {
        return Err(DeviceError::Config(format!(
            "single-qubit tomography needs a 2x2 state, got {}",
            rho.dim()
        )));
    }
    let rotated = rho.conjugate_by(&tomography_rotation(axis))?;
    let mut probs: Vec<f64> = (0..2).map(|i| rotated.matrix()[(i, i)].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Splits one seed into independent per-stream seeds (splitmix64 mixing).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multinomial draw of `shots` outcomes; reproducible for a fixed seed.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    if probs.is_empty() {
        return Err(DeviceError::InvalidProbabilities("empty distribution".into()));
    }
    if shots == 0 {
        return Err(DeviceError::InvalidProbabilities("shots must be >= 1".into()));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < -1e-12 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(DeviceError::InvalidProbabilities(format!(
            "distribution sums to {total} or has negative entries"
        )));
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0) / total;
        cumulative.push(acc);
    }
    *cumulative.last_mut().unwrap() = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let idx = cumulative.partition_point(|&edge| edge <= u);
        counts[idx.min(probs.len() - 1)] += 1;
    }
    Ok(counts)
}

/// Per-qubit readout confusion matrix: entry (j, k) = P(read j | prepared k).
/// Columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrix {
    dim: usize,
    /// Row-major P(read row | prepared col).
    entries: Vec<f64>,
}

/// Determinant floor below which correction is refused.
const READOUT_DET_FLOOR: f64 = 1e-6;

impl ReadoutMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(DeviceError::Config("readout matrix shape mismatch".into()));
        }
        for &e in &entries {
            if !(0.0..=1.0).contains(&e) {
                return Err(DeviceError::Config(format!(
                    "readout entry {e} is not a probability"
                )));
            }
        }
        for col in 0..dim {
            let sum: f64 = (0..dim).map(|row| entries[row * dim + col]).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(DeviceError::Config(format!(
                    "readout column {col} sums to {sum}, expected 1"
                )));
            }
        }
        let m = Self { dim, entries };
        let det = m.determinant();
        if det.abs() <= READOUT_DET_FLOOR {
            return Err(DeviceError::SingularReadout(det.abs()));
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, read: usize, prepared: usize) -> f64 {
        self.entries[read * self.dim + prepared]
    }

    fn determinant(&self) -> f64 {
        let mut m = self.entries.clone();
        let n = self.dim;
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).unwrap())
                .unwrap();
            if m[pivot * n + col].abs() < 1e-300 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    m.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            det *= m[col * n + col];
            for row in (col + 1)..n {
                let f = m[row * n + col] / m[col * n + col];
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
            }
        }
        det
    }

    /// Inverse as a dense row-major matrix (Gauss-Jordan).
    fn inverse(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut inv = ReadoutMatrix::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap())
                .unwrap();
            if a[pivot * n + col].abs() <= READOUT_DET_FLOOR {
                return Err(DeviceError::SingularReadout(a[pivot * n + col].abs()));
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                    inv.swap(col * n + k, pivot * n + k);
                }
            }
            let d = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= d;
                inv[col * n + k] /= d;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[row * n + col];
                if f != 0.0 {
                    for k in 0..n {
                        a[row * n + k] -= f * a[col * n + k];
                        inv[row * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
        Ok(inv)
    }
}

fn kron_apply(fs: &[&ReadoutMatrix], probs: &[f64], invert: bool) -> Result<Vec<f64>> {
    let total_dim: usize = fs.iter().map(|f| f.dim()).product();
    if probs.len() != total_dim {
        return Err(DeviceError::Config(format!(
            "probability vector has {} entries, readout chain expects {total_dim}",
            probs.len()
        )));
    }
    let mats: Vec<Vec<f64>> = if invert {
        fs.iter().map(|f| f.inverse()).collect::<Result<_>>()?
    } else {
        fs.iter().map(|f| f.entries.clone()).collect()
    };
    // Build the joint matrix by Kronecker product and apply it.
    let mut joint = vec![1.0f64];
    let mut joint_dim = 1usize;
    for (f, mat) in fs.iter().zip(&mats) {
        let d = f.dim();
        let mut next = vec![0.0; (joint_dim * d) * (joint_dim * d)];
        for i in 0..joint_dim {
            for j in 0..joint_dim {
                let v = joint[i * joint_dim + j];
                if v == 0.0 {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        next[(i * d + a) * (joint_dim * d) + (j * d + b)] = v * mat[a * d + b];
                    }
                }
            }
        }
        joint = next;
        joint_dim *= d;
    }
    let mut out = vec![0.0; total_dim];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, &p) in probs.iter().enumerate() {
            *o += joint[i * total_dim + j] * p;
        }
    }
    Ok(out)
}

/// Forward readout model: measured = (F_1 (x) F_2 (x) ...) . true.
pub fn apply_readout_error(true_probs: &[f64], fs: &[&ReadoutMatrix]) -> Result<Vec<f64>> {
    kron_apply(fs, true_probs, false)
}

/// Inverts the readout model, then clamps negative entries to zero and
/// renormalizes. The apply -> correct roundtrip is the identity on exact
/// inputs.
pub fn correct_readout(measured: &[f64], fs: &[&ReadoutMatrix]) -> Result<Vec<f64>> {
    let mut corrected = kron_apply(fs, measured, true)?;
    let mut clipped = 0.0;
    for p in &mut corrected {
        if *p < 0.0 {
            clipped -= *p;
            *p = 0.0;
        }
    }
    let total: f64 = corrected.iter().sum();
    if total <= 0.0 {
        return Err(DeviceError::InvalidProbabilities(
            "readout correction produced an empty distribution".into(),
        ));
    }
    let _ = clipped; // deviation available to callers via renormalization gap
    for p in &mut corrected {
        *p /= total;
    }
    Ok(corrected)
}

/// Raw tomography data: one outcome histogram per measured basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub basis_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub shots: u64,
    pub seed: u64,
}

impl MeasurementRecord {
    pub fn validate(&self) -> Result<()> {
        if self.basis_labels.len() != self.counts.len() {
            return Err(DeviceError::Config("label/count length mismatch".into()));
        }
        for (label, counts) in self.basis_labels.iter().zip(&self.counts) {
            let sum: u64 = counts.iter().sum();
            if sum != self.shots {
                return Err(DeviceError::Config(format!(
                    "basis {label}: counts sum to {sum}, expected {}",
                    self.shots
                )));
            }
        }
        Ok(())
    }

    /// Line-oriented text form: a seed/shots header, a column-order comment,
    /// then one `basis outcome count` line per histogram bin.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# seed: {}\n", self.seed));
        s.push_str(&format!("# shots: {}\n", self.shots));
        s.push_str("# columns: basis outcome count\n");
        for (label, counts) in self.basis_labels.iter().zip(&self.counts) {
            let width = (counts.len() as f64).log2().round() as usize;
            for (outcome, &count) in counts.iter().enumerate() {
                s.push_str(&format!("{label} {outcome:0width$b} {count}\n"));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut shots = None;
        let mut labels: Vec<String> = Vec::new();
        let mut counts: Vec<Vec<u64>> = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("seed:") {
                    seed = Some(v.trim().parse::<u64>().map_err(|_| {
                        DeviceError::Config(format!("bad seed line `{line}`"))
                    })?);
                } else if let Some(v) = rest.strip_prefix("shots:") {
                    shots = Some(v.trim().parse::<u64>().map_err(|_| {
                        DeviceError::Config(format!("bad shots line `{line}`"))
                    })?);
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (label, outcome, count) = match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(o), Some(c)) => (l, o, c),
                _ => {
                    return Err(DeviceError::Config(format!(
                        "expected `basis outcome count`, got `{line}`"
                    )))
                }
            };
            let outcome = usize::from_str_radix(outcome, 2)
                .map_err(|_| DeviceError::Config(format!("bad outcome `{outcome}`")))?;
            let count: u64 = count
                .parse()
                .map_err(|_| DeviceError::Config(format!("bad count `{count}`")))?;
            if labels.last().map(String::as_str) != Some(label) {
                labels.push(label.to_string());
                counts.push(Vec::new());
            }
            let hist = counts.last_mut().unwrap();
            if hist.len() != outcome {
                return Err(DeviceError::Config(format!(
                    "outcomes for basis {label} are out of order"
                )));
            }
            hist.push(count);
        }
        let record = MeasurementRecord {
            basis_labels: labels,
            counts,
            shots: shots.ok_or_else(|| DeviceError::Config("missing shots header".into()))?,
            seed: seed.ok_or_else(|| DeviceError::Config("missing seed header".into()))?,
        };
        record.validate()?;
        Ok(record)
    }
}

fn pauli_expectations_from_probs(probs: &[f64]) -> (f64, f64, f64) {
    // Two-qubit outcome order 00, 01, 10, 11 (first qubit outermost).
    let joint = probs[0] - probs[1] - probs[2] + probs[3];
    let first = probs[0] + probs[1] - probs[2] - probs[3];
    let second = probs[0] - probs[1] + probs[2] - probs[3];
    (joint, first, second)
}

/// Linear inversion from per-basis corrected probability vectors (fixed
/// XX..ZZ order), then projection to the nearest PSD unit-trace operator.
pub fn reconstruct_two_qubit_from_probabilities(
    probs_per_basis: &[Vec<f64>],
) -> Result<DensityOperator> {
    if probs_per_basis.len() != 9 {
        return Err(DeviceError::MissingBasis(format!(
            "expected 9 basis distributions, got {}",
            probs_per_basis.len()
        )));
    }
    let mut joint = [[0.0f64; 3]; 3];
    let mut single_a = [0.0f64; 3];
    let mut single_b = [0.0f64; 3];
    for (k, probs) in probs_per_basis.iter().enumerate() {
        if probs.len() != 4 {
            return Err(DeviceError::InvalidProbabilities(
                "each basis needs 4 outcome probabilities".into(),
            ));
        }
        let (jj, fa, sb) = pauli_expectations_from_probs(probs);
        let (ai, bi) = (k / 3, k % 3);
        joint[ai][bi] = jj;
        // Single-qubit expectations: average the marginals over the three
        // partner bases.
        single_a[ai] += fa / 3.0;
        single_b[bi] += sb / 3.0;
    }

    let paulis = [PauliAxis::X.matrix(), PauliAxis::Y.matrix(), PauliAxis::Z.matrix()];
    let id = ComplexMatrix::identity(2);
    let mut m = ramsey_core::tensor(&id, &id).scale(c(0.25, 0.0));
    for i in 0..3 {
        m = m.add(&ramsey_core::tensor(&paulis[i], &id).scale(c(0.25 * single_a[i], 0.0)));
        m = m.add(&ramsey_core::tensor(&id, &paulis[i]).scale(c(0.25 * single_b[i], 0.0)));
        for j in 0..3 {
            m = m.add(&ramsey_core::tensor(&paulis[i], &paulis[j]).scale(c(0.25 * joint[i][j], 0.0)));
        }
    }
    project_to_density(m, HilbertLayout::new(vec![2, 2])?)
}

/// Single-qubit linear inversion from per-axis corrected probabilities
/// (X, Y, Z order).
pub fn reconstruct_single_qubit_from_probabilities(
    probs_per_axis: &[Vec<f64>],
) -> Result<DensityOperator> {
    if probs_per_axis.len() != 3 {
        return Err(DeviceError::MissingBasis(format!(
            "expected 3 axis distributions, got {}",
            probs_per_axis.len()
        )));
    }
    let mut m = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
    for (axis, probs) in PauliAxis::ALL.iter().zip(probs_per_axis) {
        if probs.len() != 2 {
            return Err(DeviceError::InvalidProbabilities(
                "each axis needs 2 outcome probabilities".into(),
            ));
        }
        let expectation = probs[0] - probs[1];
        m = m.add(&axis.matrix().scale(c(0.5 * expectation, 0.0)));
    }
    project_to_density(m, HilbertLayout::flat(2))
}

/// Reconstructs a two-qubit state from counts, optionally undoing readout
/// confusion first. Bases must cover all nine axis pairs, labelled "XX".."ZZ".
pub fn reconstruct_two_qubit(
    record: &MeasurementRecord,
    readout: Option<(&ReadoutMatrix, &ReadoutMatrix)>,
) -> Result<DensityOperator> {
    record.validate()?;
    let mut by_label: std::collections::HashMap<&str, &Vec<u64>> = std::collections::HashMap::new();
    for (label, counts) in record.basis_labels.iter().zip(&record.counts) {
        by_label.insert(label.as_str(), counts);
    }
    let mut probs_per_basis = Vec::with_capacity(9);
    for (a, b) in basis_pairs() {
        let label = format!("{}{}", a.label(), b.label());
        let counts = by_label
            .get(label.as_str())
            .ok_or_else(|| DeviceError::MissingBasis(label.clone()))?;
        let freqs: Vec<f64> =
            counts.iter().map(|&n| n as f64 / record.shots as f64).collect();
        let corrected = match readout {
            Some((f1, f2)) => correct_readout(&freqs, &[f1, f2])?,
            None => freqs,
        };
        probs_per_basis.push(corrected);
    }
    reconstruct_two_qubit_from_probabilities(&probs_per_basis)
}

/// Eigenvalue clipping to the PSD cone plus trace renormalization.
fn project_to_density(m: ComplexMatrix, layout: HilbertLayout) -> Result<DensityOperator> {
    let herm = m.hermitian_part();
    let (vals, vecs) = hermitian_eigensystem(&herm)?;
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(DeviceError::NumericalConsistency(
            "reconstruction collapsed to the zero operator".into(),
        ));
    }
    let n = herm.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * (clipped[j] / total));
    let rebuilt = scaled.matmul(&vecs.adjoint());
    Ok(DensityOperator::new(rebuilt, layout)?)
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let root = hermitian_sqrt(rho.matrix(), 1e-9)?;
    let inner = root.matmul(sigma.matrix()).matmul(&root);
    let inner_root = hermitian_sqrt(&inner.hermitian_part(), 1e-9)?;
    let f = inner_root.trace().re;
    Ok((f * f).clamp(0.0, 1.0 + 1e-9))
}

/// Trace distance (1/2) tr |rho - sigma|.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(0.5 * trace_norm(&rho.matrix().sub(sigma.matrix()))?)
}
