//! Eigenvalue machinery: a cyclic Jacobi solver for Hermitian matrices and a
//! Hessenberg + shifted-QR iteration for general complex spectra.
//!
//! Both are written for the small dense matrices this crate works with
//! (dimension \u{2264} a few dozen). Jacobi delivers near machine-precision
//! eigenpairs and orthonormal eigenvectors; the QR path only returns
//! eigenvalues, which is all the concurrence construction needs.

use crate::error::{CoreError, Result};
use crate::linalg::{c, C64, ComplexMatrix};

const HERMITIAN_INPUT_TOL: f64 = 1e-9;

/// Eigenvalues (descending) and matching orthonormal eigenvector columns of a
/// Hermitian matrix.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.ensure_hermitian(HERMITIAN_INPUT_TOL)?;
    let n = m.rows();
    if n == 0 {
        return Err(CoreError::Dimension("empty matrix".into()));
    }
    // Scrub the tolerated asymmetry so the rotations see an exactly Hermitian
    // input.
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm().max(1.0);
    let target = 1e-15 * scale;
    let max_sweeps = 100;

    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, pairs[j].1)]);
    Ok((values, vectors))
}

/// One two-sided Jacobi rotation annihilating the (p, q) entry.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let gn = g.norm();
    if gn < 1e-300 {
        return;
    }
    let phase = g / gn;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * gn);
    // Smaller-magnitude root of t^2 - 2 tau t - 1 = 0.
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cth = 1.0 / (1.0 + t * t).sqrt();
    let sth = t * cth;
    // Column rotation J: J[p][p] = c, J[p][q] = -s e^{i phi},
    //                    J[q][p] = s e^{-i phi}, J[q][q] = c.
    let se_pos = phase * sth; // s e^{i phi}
    let se_neg = phase.conj() * sth; // s e^{-i phi}
    let n = a.rows();

    // A <- J^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * cth + aqk * se_pos;
        a[(q, k)] = -(apk * se_neg) + aqk * cth;
    }
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * cth + akq * se_neg;
        a[(k, q)] = -(akp * se_pos) + akq * cth;
    }
    // V <- V J (columns accumulate eigenvectors)
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cth + vkq * se_neg;
        v[(k, q)] = -(vkp * se_pos) + vkq * cth;
    }
    // Keep the matrix exactly Hermitian against roundoff drift.
    a[(p, q)] = C64::ZERO;
    a[(q, p)] = C64::ZERO;
    let app_new = a[(p, p)].re;
    let aqq_new = a[(q, q)].re;
    a[(p, p)] = c(app_new, 0.0);
    a[(q, q)] = c(aqq_new, 0.0);
}

/// Sum of absolute eigenvalues of a Hermitian matrix (Schatten-1 norm).
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = hermitian_eigensystem(m)?;
    Ok(values.iter().map(|v| v.abs()).sum())
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative is rejected.
pub fn hermitian_sqrt(m: &ComplexMatrix, psd_tol: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigensystem(m)?;
    let mut clamped = Vec::with_capacity(values.len());
    for &v in &values {
        if v < -psd_tol {
            return Err(CoreError::NotPositive(v));
        }
        clamped.push(v.max(0.0).sqrt());
    }
    let n = m.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, j)] * clamped[j]);
    Ok(scaled.matmul(&vectors.adjoint()))
}

/// All eigenvalues of a general complex square matrix, in no particular
/// order.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(CoreError::Dimension(format!(
            "expected square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Err(CoreError::Dimension("empty matrix".into()));
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = m.clone();
    reduce_to_hessenberg(&mut h);
    qr_eigenvalues(&mut h)
}

/// In-place Householder reduction to upper Hessenberg form.
fn reduce_to_hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for the column below the subdiagonal.
        let mut xnorm_sq = 0.0;
        for i in (k + 1)..n {
            xnorm_sq += a[(i, k)].norm_sqr();
        }
        let xnorm = xnorm_sq.sqrt();
        if xnorm < 1e-300 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0.norm() > 0.0 { -(x0 / x0.norm()) * xnorm } else { c(-xnorm, 0.0) };
        let mut v = vec![C64::ZERO; n - k - 1];
        v[0] = x0 - alpha;
        for i in (k + 2)..n {
            v[i - k - 1] = a[(i, k)];
        }
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // A <- P A with P = I - beta v v^dagger acting on rows k+1..n.
        for col in 0..n {
            let mut dot = C64::ZERO;
            for i in (k + 1)..n {
                dot += v[i - k - 1].conj() * a[(i, col)];
            }
            let f = dot * beta;
            for i in (k + 1)..n {
                let delta = v[i - k - 1] * f;
                a[(i, col)] -= delta;
            }
        }
        // A <- A P acting on columns k+1..n.
        for row in 0..n {
            let mut dot = C64::ZERO;
            for j in (k + 1)..n {
                dot += a[(row, j)] * v[j - k - 1];
            }
            let f = dot * beta;
            for j in (k + 1)..n {
                let delta = f * v[j - k - 1].conj();
                a[(row, j)] -= delta;
            }
        }
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            a[(i, k)] = C64::ZERO;
        }
    }
}

/// Shifted explicit-QR iteration on an upper Hessenberg matrix.
fn qr_eigenvalues(h: &mut ComplexMatrix) -> Result<Vec<C64>> {
    let n = h.rows();
    let mut eigs = vec![C64::ZERO; n];
    let mut hi = n - 1;
    let mut iters_on_block = 0usize;
    let max_iters_per_eig = 60;
    // Absolute deflation floor: subdiagonals at roundoff scale relative to
    // the whole matrix cannot converge further (noise clusters of equal
    // magnitude stall the shift strategy) and are safe to cut.
    let norm_floor = h.frobenius_norm().max(1e-300);

    loop {
        // Deflate negligible subdiagonals.
        for i in 0..hi {
            let s = h[(i, i)].norm() + h[(i + 1, i + 1)].norm();
            let thr = f64::EPSILON * (s + norm_floor);
            if h[(i + 1, i)].norm() <= thr {
                h[(i + 1, i)] = C64::ZERO;
            }
        }
        // Find the active block [lo, hi].
        if hi == 0 || h[(hi, hi - 1)] == C64::ZERO {
            eigs[hi] = h[(hi, hi)];
            if hi == 0 {
                return Ok(eigs);
            }
            hi -= 1;
            iters_on_block = 0;
            continue;
        }
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)] != C64::ZERO {
            lo -= 1;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs[lo] = l1;
            eigs[hi] = l2;
            if lo == 0 {
                return Ok(eigs);
            }
            hi = lo - 1;
            iters_on_block = 0;
            continue;
        }

        iters_on_block += 1;
        if iters_on_block > max_iters_per_eig {
            return Err(CoreError::EigenNonConvergence);
        }
        // Wilkinson shift from the trailing 2x2, with an occasional
        // exceptional shift to break symmetric stalls.
        let sigma = if iters_on_block.is_multiple_of(12) {
            h[(hi, hi)] + c(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            let (l1, l2) = eig2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let d = h[(hi, hi)];
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        for i in lo..=hi {
            let d = h[(i, i)] - sigma;
            h[(i, i)] = d;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let g = Givens::zeroing(h[(i, i)], h[(i + 1, i)]);
            g.apply_rows(h, i, lo, hi);
            rotations.push(g);
        }
        for (offset, g) in rotations.iter().enumerate() {
            g.apply_cols_adjoint(h, lo + offset, lo, hi);
        }
        for i in lo..=hi {
            let d = h[(i, i)] + sigma;
            h[(i, i)] = d;
        }
    }
}

/// Eigenvalues of a complex 2x2 via the quadratic formula.
fn eig2(a: C64, b: C64, cc: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let half = tr * 0.5;
    let disc = ((a - d) * (a - d) * 0.25 + b * cc).sqrt();
    (half + disc, half - disc)
}

/// Complex Givens rotation G = (1/r) [[conj(a), conj(b)], [-b, a]] sending
/// (a, b) to (r, 0).
struct Givens {
    g00: C64,
    g01: C64,
    g10: C64,
    g11: C64,
}

impl Givens {
    fn zeroing(a: C64, b: C64) -> Self {
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r < 1e-300 {
            return Self { g00: C64::ONE, g01: C64::ZERO, g10: C64::ZERO, g11: C64::ONE };
        }
        Self { g00: a.conj() / r, g01: b.conj() / r, g10: -b / r, g11: a / r }
    }

    /// Rows i, i+1 <- G * rows, over columns lo..=hi.
    fn apply_rows(&self, h: &mut ComplexMatrix, i: usize, lo: usize, hi: usize) {
        for j in lo..=hi {
            let top = h[(i, j)];
            let bot = h[(i + 1, j)];
            h[(i, j)] = self.g00 * top + self.g01 * bot;
            h[(i + 1, j)] = self.g10 * top + self.g11 * bot;
        }
    }

    /// Columns i, i+1 <- columns * G^dagger, over rows lo..=hi.
    fn apply_cols_adjoint(&self, h: &mut ComplexMatrix, i: usize, lo: usize, hi: usize) {
        // G^dagger = [[conj(g00), conj(g10)], [conj(g01), conj(g11)]]
        for r in lo..=hi {
            let left = h[(r, i)];
            let right = h[(r, i + 1)];
            h[(r, i)] = left * self.g00.conj() + right * self.g01.conj();
            h[(r, i + 1)] = left * self.g10.conj() + right * self.g11.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_z, tensor};

    fn sort_by_re_im(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn pauli_z_eigenvalues() {
        let (vals, _) = hermitian_eigensystem(&pauli_z()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_four_eigenvalues() {
        let (vals, _) = hermitian_eigensystem(&ComplexMatrix::identity(4)).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigensystem_reconstructs_input() {
        // Deterministic dense Hermitian matrix.
        let n = 7;
        let mut m = ComplexMatrix::zeros(n, n);
        let mut s = 0.37f64;
        for i in 0..n {
            for j in i..n {
                s = (s * 997.0 + 0.123).fract();
                let re = s - 0.5;
                s = (s * 997.0 + 0.123).fract();
                let im = if i == j { 0.0 } else { s - 0.5 };
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
        let (vals, vecs) = hermitian_eigensystem(&m).unwrap();
        // Orthonormality.
        assert!(vecs.unitarity_deviation() < 1e-10);
        // V Lambda V^dagger = M.
        let lambda = ComplexMatrix::diag(&vals);
        let rebuilt = vecs.matmul(&lambda).matmul(&vecs.adjoint());
        assert!(rebuilt.max_abs_diff(&m) < 1e-9 * m.frobenius_norm().max(1.0));
        // Sorted descending.
        for w in vals.windows(2) {
            assert!(w[0] >= w[1] - 1e-14);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = pauli_z();
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(hermitian_eigensystem(&m), Err(CoreError::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_of_pauli_z_is_two() {
        assert!((trace_norm(&pauli_z()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_of_zero_matrix_is_zero() {
        assert!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap() < 1e-15);
    }

    #[test]
    fn trace_norm_bounds_trace() {
        let m = pauli_z();
        let zz = tensor(&m, &m);
        assert!(trace_norm(&zz).unwrap() >= zz.trace().norm() - 1e-12);
    }

    #[test]
    fn general_eigenvalues_of_diagonal() {
        let m = ComplexMatrix::diag(&[1.0, 2.0, 3.0]);
        let vals = sort_by_re_im(general_eigenvalues(&m).unwrap());
        for (v, expect) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - c(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn general_eigenvalues_of_nilpotent() {
        let m = ComplexMatrix::from_rows(&[vec![C64::ZERO, C64::ONE], vec![C64::ZERO, C64::ZERO]]);
        let vals = general_eigenvalues(&m).unwrap();
        for v in vals {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn general_eigenvalues_match_similarity_transformed_spectrum() {
        // Conjugate a known diagonal by a (non-unitary) invertible matrix;
        // the spectrum must be preserved.
        let d = ComplexMatrix::from_rows(&[
            vec![c(2.0, 1.0), C64::ZERO, C64::ZERO],
            vec![C64::ZERO, c(-0.5, 0.25), C64::ZERO],
            vec![C64::ZERO, C64::ZERO, c(0.0, -1.5)],
        ]);
        let p = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.4, -0.2), c(0.0, 0.3)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(-0.7, 0.1)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        // Inverse of a unit upper-triangular matrix.
        let mut pinv = ComplexMatrix::identity(3);
        pinv[(0, 1)] = -p[(0, 1)];
        pinv[(1, 2)] = -p[(1, 2)];
        pinv[(0, 2)] = p[(0, 1)] * p[(1, 2)] - p[(0, 2)];
        assert!(p.matmul(&pinv).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);

        let m = p.matmul(&d).matmul(&pinv);
        let vals = sort_by_re_im(general_eigenvalues(&m).unwrap());
        let expect = sort_by_re_im(vec![c(2.0, 1.0), c(-0.5, 0.25), c(0.0, -1.5)]);
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).norm() < 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn general_path_agrees_with_hermitian_path() {
        let n = 6;
        let mut m = ComplexMatrix::zeros(n, n);
        let mut s = 0.11f64;
        for i in 0..n {
            for j in i..n {
                s = (s * 877.0 + 0.321).fract();
                let re = s - 0.5;
                s = (s * 877.0 + 0.321).fract();
                let im = if i == j { 0.0 } else { s - 0.5 };
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
        let (herm_vals, _) = hermitian_eigensystem(&m).unwrap();
        let mut gen_vals: Vec<f64> = general_eigenvalues(&m)
            .unwrap()
            .into_iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-10);
                z.re
            })
            .collect();
        gen_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in herm_vals.iter().zip(gen_vals) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ]);
        // Make it PSD by squaring.
        let psd = m.matmul(&m.adjoint());
        let root = hermitian_sqrt(&psd, 1e-9).unwrap();
        assert!(root.matmul(&root).max_abs_diff(&psd) < 1e-12);
    }
}
