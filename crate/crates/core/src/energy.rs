//! The quadratic energy `K(Q) = ∑ Qᵢ Qⱼ Cᵢⱼ`, its bilinear form, and the
//! mixture quantities that the reduced infinite-body problem is built from.
//!
//! Sums run over the upper triangle with off-diagonal terms doubled and use
//! compensated (Neumaier) accumulation. Terms with zero weight are skipped
//! before touching the kernel entry, which implements `∞ · 0 = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelMatrix;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("size mismatch: kernel is {kernel}×{kernel}, vector has length {vector}")]
    SizeMismatch { kernel: usize, vector: usize },
    #[error("probability weights must be finite and nonnegative (index {0})")]
    NegativeWeight(usize),
    #[error("probability weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("empty probability vector")]
    Empty,
    #[error("mixture has no atoms")]
    EmptyMixture,
    #[error("mixture weight {0} must be positive and finite")]
    BadMixtureWeight(f64),
    #[error("mixture weights sum to {0}, not 1")]
    MixtureNotNormalized(f64),
    #[error("mixture atoms have different sizes ({0} vs {1})")]
    AtomSizeMismatch(usize, usize),
    #[error("mixture energy is infinite")]
    InfiniteMixtureEnergy,
    #[error("quadratic form mixes +∞ and −∞ contributions")]
    Indeterminate,
}

/// Running sum with Neumaier compensation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// A probability vector on `m` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProbVector")]
pub struct ProbVector {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProbVector {
    weights: Vec<f64>,
}

impl TryFrom<RawProbVector> for ProbVector {
    type Error = EnergyError;
    fn try_from(raw: RawProbVector) -> Result<Self, Self::Error> {
        ProbVector::new(raw.weights)
    }
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, EnergyError> {
        if weights.is_empty() {
            return Err(EnergyError::Empty);
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(EnergyError::NegativeWeight(i));
        }
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(EnergyError::NotNormalized(total));
        }
        Ok(Self { weights })
    }

    pub fn dirac(m: usize, i: usize) -> Self {
        let mut w = vec![0.0; m];
        w[i] = 1.0;
        Self { weights: w }
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices carrying positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

/// A finitely supported probability measure over probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawMixture", try_from = "RawMixture")]
pub struct Mixture {
    atoms: Vec<(f64, ProbVector)>,
}

#[derive(Serialize, Deserialize)]
struct RawAtom {
    w: f64,
    q: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    atoms: Vec<RawAtom>,
}

impl From<Mixture> for RawMixture {
    fn from(m: Mixture) -> Self {
        RawMixture {
            atoms: m
                .atoms
                .into_iter()
                .map(|(w, q)| RawAtom { w, q: q.weights })
                .collect(),
        }
    }
}

impl TryFrom<RawMixture> for Mixture {
    type Error = EnergyError;
    fn try_from(raw: RawMixture) -> Result<Self, Self::Error> {
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| Ok((a.w, ProbVector::new(a.q)?)))
            .collect::<Result<Vec<_>, EnergyError>>()?;
        Mixture::new(atoms)
    }
}

impl Mixture {
    pub fn new(atoms: Vec<(f64, ProbVector)>) -> Result<Self, EnergyError> {
        let (_, first) = atoms.first().ok_or(EnergyError::EmptyMixture)?;
        let m = first.len();
        for (w, q) in &atoms {
            if !(w.is_finite() && *w > 0.0) {
                return Err(EnergyError::BadMixtureWeight(*w));
            }
            if q.len() != m {
                return Err(EnergyError::AtomSizeMismatch(m, q.len()));
            }
        }
        let total = atoms.iter().map(|(w, _)| *w).collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(EnergyError::MixtureNotNormalized(total));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(q: ProbVector) -> Self {
        Self {
            atoms: vec![(1.0, q)],
        }
    }

    pub fn atoms(&self) -> &[(f64, ProbVector)] {
        &self.atoms
    }

    /// Number of points each atom lives on.
    pub fn dim(&self) -> usize {
        self.atoms[0].1.len()
    }
}

fn check_len(c: &KernelMatrix, len: usize) -> Result<(), EnergyError> {
    if c.size() != len {
        Err(EnergyError::SizeMismatch {
            kernel: c.size(),
            vector: len,
        })
    } else {
        Ok(())
    }
}

/// `∑ᵢⱼ aᵢ bⱼ Cᵢⱼ` for arbitrary real vectors, with `∞ · 0 = 0`.
///
/// An infinite entry met by a positive (negative) weight yields `+∞` (`−∞`);
/// meeting both is an error.
pub fn bilinear_form(c: &KernelMatrix, a: &[f64], b: &[f64]) -> Result<f64, EnergyError> {
    check_len(c, a.len())?;
    check_len(c, b.len())?;
    let m = c.size();
    let mut acc = CompensatedSum::default();
    let (mut pos_inf, mut neg_inf) = (false, false);
    for i in 0..m {
        for j in i..m {
            let w = if i == j {
                a[i] * b[i]
            } else {
                a[i] * b[j] + a[j] * b[i]
            };
            if w == 0.0 {
                continue;
            }
            let v = c.get(i, j);
            if v.is_infinite() {
                if w > 0.0 {
                    pos_inf = true;
                } else {
                    neg_inf = true;
                }
            } else {
                acc.add(w * v);
            }
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(EnergyError::Indeterminate),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(acc.value()),
    }
}

/// `aᵀCa` for an arbitrary real vector.
pub fn quadratic_form(c: &KernelMatrix, a: &[f64]) -> Result<f64, EnergyError> {
    bilinear_form(c, a, a)
}

/// `K(Q) = ∑ᵢⱼ Qᵢ Qⱼ Cᵢⱼ ∈ [0, +∞]`.
pub fn energy(c: &KernelMatrix, q: &ProbVector) -> Result<f64, EnergyError> {
    quadratic_form(c, q.weights())
}

/// `E(Q, R) = ∑ᵢⱼ Qᵢ Rⱼ Cᵢⱼ`.
pub fn bilinear(c: &KernelMatrix, q: &ProbVector, r: &ProbVector) -> Result<f64, EnergyError> {
    bilinear_form(c, q.weights(), r.weights())
}

/// `∑ₖ νₖ K(Qₖ)`: the pair energy of the exchangeable state `∑ₖ νₖ Qₖ^⊗∞`.
pub fn mixture_energy(c: &KernelMatrix, nu: &Mixture) -> Result<f64, EnergyError> {
    let mut acc = CompensatedSum::default();
    for (w, q) in nu.atoms() {
        let k = energy(c, q)?;
        if k.is_infinite() {
            return Ok(f64::INFINITY);
        }
        acc.add(w * k);
    }
    Ok(acc.value())
}

/// `∑ₖ νₖ Qₖ`.
pub fn barycenter(nu: &Mixture) -> ProbVector {
    let m = nu.dim();
    let weights = (0..m)
        .map(|i| {
            nu.atoms()
                .iter()
                .map(|(w, q)| w * q.weights()[i])
                .collect::<CompensatedSum>()
                .value()
                .max(0.0)
        })
        .collect();
    ProbVector { weights }
}

/// Jensen gap `∑ₖ νₖ K(Qₖ) − K(∑ₖ νₖ Qₖ)`. Negative values certify that the
/// mixture beats the product state with the same one-point marginal.
pub fn convexity_gap(c: &KernelMatrix, nu: &Mixture) -> Result<f64, EnergyError> {
    let mix = mixture_energy(c, nu)?;
    if mix.is_infinite() {
        return Err(EnergyError::InfiniteMixtureEnergy);
    }
    let prod = energy(c, &barycenter(nu))?;
    Ok(mix - prod)
}
