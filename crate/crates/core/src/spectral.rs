//! Symmetric eigendecomposition and the two positivity tests for kernels:
//! positive definiteness on all coefficient vectors, and balanced positive
//! definiteness on coefficient vectors that sum to zero.

use serde::Serialize;
use thiserror::Error;

use crate::kernel::KernelMatrix;

/// Relative tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_RTOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix has an infinite or NaN entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("empty matrix")]
    Empty,
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
}

/// Read access to a square matrix that is expected to be symmetric.
pub trait SymmetricForm {
    fn size(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> f64;

    /// `aᵀ M a`, plain summation. Entries must be finite.
    fn quadratic(&self, a: &[f64]) -> f64 {
        let n = self.size();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * a[j] * self.entry(i, j);
            }
        }
        s
    }
}

impl SymmetricForm for KernelMatrix {
    fn size(&self) -> usize {
        KernelMatrix::size(self)
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Dense real square matrix, row-major. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square");
        Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl SymmetricForm for SquareMatrix {
    fn size(&self) -> usize {
        self.n
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

fn dense_checked<M: SymmetricForm + ?Sized>(m: &M) -> Result<(usize, Vec<f64>), SpectralError> {
    let n = m.size();
    let mut a = vec![0.0; n * n];
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = m.entry(i, j);
            if !v.is_finite() {
                return Err(SpectralError::NonFinite(i, j));
            }
            scale = scale.max(v.abs());
            a[i * n + j] = v;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[i * n + j] - a[j * n + i]).abs() > SYMMETRY_TOL * (1.0 + scale) {
                return Err(SpectralError::NotSymmetric(i, j));
            }
        }
    }
    Ok((n, a))
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖M‖_F`. Each eigenvector is signed so that its first entry of
/// magnitude above `1e-12` is positive, which makes results reproducible.
pub fn symmetric_eigen<M: SymmetricForm + ?Sized>(m: &M) -> Result<EigenResult, SpectralError> {
    let (n, mut a) = dense_checked(m)?;
    // work on the exactly symmetrized copy
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= OFF_DIAGONAL_RTOL * fro {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > OFF_DIAGONAL_RTOL * fro {
        return Err(SpectralError::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    for k in 0..n {
        let (akp, akq) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

fn fix_sign(x: &mut [f64]) {
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PdMode {
    Full,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PdVerdict {
    PositiveDefinite,
    PositiveSemidefinite,
    NotPositive,
}

impl PdVerdict {
    pub fn is_nonnegative(self) -> bool {
        self != PdVerdict::NotPositive
    }
}

/// Outcome of [`pd_test`] or [`balanced_pd_test`].
///
/// When the verdict is `not_positive`, `witness` holds a unit vector `a`
/// with `aᵀCa` equal to `min_eigenvalue`; in balanced mode it also sums to
/// zero. `min_eigenvalue` is `+∞` (serialized as `null`) for the empty
/// balanced subspace of a one-point kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdReport {
    pub mode: PdMode,
    pub min_eigenvalue: f64,
    pub verdict: PdVerdict,
    pub witness: Option<Vec<f64>>,
    pub tol: f64,
}

/// Absolute threshold for eigenvalue classification: `tol · max(1, ‖C‖_max)`.
pub fn effective_tol<M: SymmetricForm + ?Sized>(c: &M, tol: f64) -> f64 {
    let n = c.size();
    let mut scale: f64 = 1.0;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(c.entry(i, j).abs());
        }
    }
    tol * scale
}

fn check_tol(tol: f64) -> Result<(), SpectralError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(SpectralError::BadTolerance(tol))
    }
}

fn classify(min: f64, threshold: f64) -> PdVerdict {
    if min > threshold {
        PdVerdict::PositiveDefinite
    } else if min >= -threshold {
        PdVerdict::PositiveSemidefinite
    } else {
        PdVerdict::NotPositive
    }
}

/// Positive definiteness of `C` on all of `ℝ^m`.
pub fn pd_test<M: SymmetricForm + ?Sized>(c: &M, tol: f64) -> Result<PdReport, SpectralError> {
    check_tol(tol)?;
    if c.size() == 0 {
        return Err(SpectralError::Empty);
    }
    let eig = symmetric_eigen(c)?;
    let threshold = effective_tol(c, tol);
    let min = eig.eigenvalues[0];
    let verdict = classify(min, threshold);
    let witness = (verdict == PdVerdict::NotPositive).then(|| eig.eigenvectors[0].clone());
    Ok(PdReport {
        mode: PdMode::Full,
        min_eigenvalue: min,
        verdict,
        witness,
        tol,
    })
}

/// Orthonormal basis of the zero-sum hyperplane in `ℝ^m`, returned as
/// `m − 1` vectors. Vector `k` (1-based) has `k` entries `1/√(k(k+1))`,
/// then `−k/√(k(k+1))`, then zeros.
pub fn helmert_basis(m: usize) -> Vec<Vec<f64>> {
    (1..m)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut h = vec![0.0; m];
            h[..k].iter_mut().for_each(|x| *x = 1.0 / norm);
            h[k] = -(k as f64) / norm;
            h
        })
        .collect()
}

/// `BᵀCB` for the Helmert basis `B`: the kernel's quadratic form restricted
/// to zero-sum vectors, in `m − 1` coordinates.
pub fn reduced_form<M: SymmetricForm + ?Sized>(c: &M) -> Result<SquareMatrix, SpectralError> {
    let (m, a) = dense_checked(c)?;
    let basis = helmert_basis(m);
    let k = basis.len();
    // cb[i][l] = (C b_l)_i
    let mut cb = vec![0.0; m * k];
    for (l, b) in basis.iter().enumerate() {
        for i in 0..m {
            cb[i * k + l] = (0..m).map(|j| a[i * m + j] * b[j]).sum();
        }
    }
    let mut r = SquareMatrix::zeros(k);
    for p in 0..k {
        for q in p..k {
            let v: f64 = (0..m).map(|i| basis[p][i] * cb[i * k + q]).sum();
            r.set(p, q, v);
            r.set(q, p, v);
        }
    }
    Ok(r)
}

/// Maps coordinates in the Helmert basis back to a zero-sum vector in `ℝ^m`.
pub fn lift_balanced(coords: &[f64], m: usize) -> Vec<f64> {
    let basis = helmert_basis(m);
    let mut out = vec![0.0; m];
    for (b, &w) in basis.iter().zip(coords) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += w * x;
        }
    }
    // remove rounding drift off the hyperplane, then renormalize
    let mean = out.iter().sum::<f64>() / m as f64;
    out.iter_mut().for_each(|x| *x -= mean);
    let target = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x *= target / norm);
    }
    out
}

/// Spectrum of the kernel on the zero-sum hyperplane, with eigenvectors
/// lifted back to `ℝ^m` (each of unit norm and zero sum).
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedSpectrum {
    pub eigenvalues: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

pub fn balanced_spectrum<M: SymmetricForm + ?Sized>(c: &M) -> Result<BalancedSpectrum, SpectralError> {
    let m = c.size();
    let reduced = reduced_form(c)?;
    if m <= 1 {
        return Ok(BalancedSpectrum {
            eigenvalues: Vec::new(),
            directions: Vec::new(),
        });
    }
    let eig = symmetric_eigen(&reduced)?;
    let directions = eig
        .eigenvectors
        .iter()
        .map(|v| {
            let mut d = lift_balanced(v, m);
            fix_sign(&mut d);
            d
        })
        .collect();
    Ok(BalancedSpectrum {
        eigenvalues: eig.eigenvalues,
        directions,
    })
}

/// Balanced positive definiteness: positivity of `aᵀCa` over `∑aᵢ = 0`.
pub fn balanced_pd_test<M: SymmetricForm + ?Sized>(c: &M, tol: f64) -> Result<PdReport, SpectralError> {
    check_tol(tol)?;
    if c.size() == 0 {
        return Err(SpectralError::Empty);
    }
    let spec = balanced_spectrum(c)?;
    if spec.eigenvalues.is_empty() {
        return Ok(PdReport {
            mode: PdMode::Balanced,
            min_eigenvalue: f64::INFINITY,
            verdict: PdVerdict::PositiveDefinite,
            witness: None,
            tol,
        });
    }
    let threshold = effective_tol(c, tol);
    let min = spec.eigenvalues[0];
    let verdict = classify(min, threshold);
    let witness = (verdict == PdVerdict::NotPositive).then(|| spec.directions[0].clone());
    Ok(PdReport {
        mode: PdMode::Balanced,
        min_eigenvalue: min,
        verdict,
        witness,
        tol,
    })
}

/// Unit zero-sum direction of most negative curvature, if the kernel fails
/// the balanced test at [`DEFAULT_TOL`].
pub fn witness_direction<M: SymmetricForm + ?Sized>(c: &M) -> Result<Option<Vec<f64>>, SpectralError> {
    Ok(balanced_pd_test(c, DEFAULT_TOL)?.witness)
}
