//! Finite-`N` exchangeable couplings stored by orbit: one weight per
//! multiset of `N` points, i.e. per count vector `k` with `∑ kₐ = N`.

use serde::Serialize;
use thiserror::Error;

use crate::combin::{binomial, composition_count, compositions, CountError};
use crate::energy::{CompensatedSum, EnergyError, Mixture, ProbVector};
use crate::kernel::KernelMatrix;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus};

pub const DEFAULT_BODIES: usize = 4;
pub const MAX_BODIES: usize = 12;
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NbodyError {
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("pair energy needs at least two bodies, got {0}")]
    TooFewBodies(usize),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("coupling has {found} weights, expected {expected}")]
    WeightCount { expected: usize, found: usize },
    #[error("coupling weights must be finite, nonnegative and sum to 1")]
    BadWeights,
    #[error("kernel has an infinite entry at ({0}, {1})")]
    InfiniteKernel(usize, usize),
    #[error("linear program ended with status {0:?}")]
    Solver(LpStatus),
}

/// All count vectors of `n` bodies over `m` points, lexicographically
/// descending.
pub fn multiset_states(m: usize, n: usize) -> Result<Vec<Vec<u32>>, NbodyError> {
    Ok(compositions(m, n, DEFAULT_STATE_CAP)?)
}

/// An exchangeable `N`-body state on `m` points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricCoupling {
    #[serde(rename = "N")]
    n_bodies: usize,
    m: usize,
    states: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

impl SymmetricCoupling {
    /// Weights are given in the order of [`multiset_states`].
    pub fn new(m: usize, n_bodies: usize, weights: Vec<f64>) -> Result<Self, NbodyError> {
        let states = multiset_states(m, n_bodies)?;
        if weights.len() != states.len() {
            return Err(NbodyError::WeightCount {
                expected: states.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(NbodyError::BadWeights);
        }
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > 1e-12 {
            return Err(NbodyError::BadWeights);
        }
        Ok(Self {
            n_bodies,
            m,
            states,
            weights,
        })
    }

    /// All mass on the multiset with counts `k`.
    pub fn concentrated(k: &[u32]) -> Result<Self, NbodyError> {
        let n: u32 = k.iter().sum();
        let states = multiset_states(k.len(), n as usize)?;
        let weights = states.iter().map(|s| if s == k { 1.0 } else { 0.0 }).collect();
        Self::new(k.len(), n as usize, weights)
    }

    pub fn n_bodies(&self) -> usize {
        self.n_bodies
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of the multiset with counts `k`, zero if absent.
    pub fn weight_of(&self, k: &[u32]) -> f64 {
        self.states
            .iter()
            .position(|s| s == k)
            .map_or(0.0, |i| self.weights[i])
    }
}

/// `N! / ∏ kₐ!` as a float.
fn multinomial(k: &[u32]) -> f64 {
    let mut remaining: u64 = k.iter().map(|&v| v as u64).sum();
    let mut acc = 1.0;
    for &v in k {
        acc *= binomial(remaining, v as u64) as f64;
        remaining -= v as u64;
    }
    acc
}

/// The `N`-body truncation of `Q^⊗∞`: weight `multinomial(N; k) ∏ Qₐ^{kₐ}`.
pub fn product_coupling(q: &ProbVector, n: usize) -> Result<SymmetricCoupling, NbodyError> {
    let states = multiset_states(q.len(), n)?;
    let weights: Vec<f64> = states
        .iter()
        .map(|k| {
            multinomial(k)
                * k.iter()
                    .zip(q.weights())
                    .map(|(&e, &p)| p.powi(e as i32))
                    .product::<f64>()
        })
        .collect();
    Ok(SymmetricCoupling {
        n_bodies: n,
        m: q.len(),
        states,
        weights,
    })
}

/// `∑ₖ νₖ · product_coupling(Qₖ, N)`: the `N`-body marginal of the
/// exchangeable state with de Finetti measure `ν`.
pub fn mixture_coupling(nu: &Mixture, n: usize) -> Result<SymmetricCoupling, NbodyError> {
    let m = nu.dim();
    let count = composition_count(m, n) as usize;
    let mut acc = vec![CompensatedSum::default(); count];
    for (w, q) in nu.atoms() {
        let p = product_coupling(q, n)?;
        for (a, pw) in acc.iter_mut().zip(&p.weights) {
            a.add(w * pw);
        }
    }
    Ok(SymmetricCoupling {
        n_bodies: n,
        m,
        states: multiset_states(m, n)?,
        weights: acc.iter().map(CompensatedSum::value).collect(),
    })
}

/// One-point marginal `μₐ = ∑ₖ γ(k) kₐ / N`.
pub fn marginal(gamma: &SymmetricCoupling) -> ProbVector {
    let n = gamma.n_bodies as f64;
    let weights = (0..gamma.m)
        .map(|a| {
            gamma
                .states
                .iter()
                .zip(&gamma.weights)
                .map(|(k, w)| w * k[a] as f64 / n)
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();
    ProbVector::new(weights).expect("marginal of a coupling is a probability vector")
}

/// Average of `c(xᵢ, xⱼ)` over the `N(N−1)` ordered pairs of distinct
/// positions when the multiset of positions is `k`. Repeated points
/// contribute `kₐ(kₐ−1) Cₐₐ`.
pub fn state_energy(c: &KernelMatrix, k: &[u32]) -> f64 {
    let m = c.size();
    let n: u64 = k.iter().map(|&v| v as u64).sum();
    let mut acc = CompensatedSum::default();
    let mut infinite = false;
    for a in 0..m {
        for b in a..m {
            let (ka, kb) = (k[a] as f64, k[b] as f64);
            let w = if a == b { ka * (ka - 1.0) } else { 2.0 * ka * kb };
            if w == 0.0 {
                continue;
            }
            let v = c.get(a, b);
            if v.is_infinite() {
                infinite = true;
            } else {
                acc.add(w * v);
            }
        }
    }
    if infinite {
        f64::INFINITY
    } else {
        acc.value() / (n * (n - 1)) as f64
    }
}

/// The finite-`N` pair energy `2/(N(N−1)) ∑_{i<j} E_γ[c(xᵢ, xⱼ)]`.
pub fn pair_energy(c: &KernelMatrix, gamma: &SymmetricCoupling) -> Result<f64, NbodyError> {
    if gamma.n_bodies < 2 {
        return Err(NbodyError::TooFewBodies(gamma.n_bodies));
    }
    if c.size() != gamma.m {
        return Err(NbodyError::SizeMismatch(c.size(), gamma.m));
    }
    let mut acc = CompensatedSum::default();
    for (k, &w) in gamma.states.iter().zip(&gamma.weights) {
        if w == 0.0 {
            continue;
        }
        let e = state_energy(c, k);
        if e.is_infinite() {
            return Ok(f64::INFINITY);
        }
        acc.add(w * e);
    }
    Ok(acc.value())
}

/// Minimal `N`-body pair energy over exchangeable couplings with
/// one-point marginal `μ`.
pub fn solve_nbody_lp(
    c: &KernelMatrix,
    mu: &ProbVector,
    n: usize,
) -> Result<(SymmetricCoupling, f64), NbodyError> {
    if n < 2 {
        return Err(NbodyError::TooFewBodies(n));
    }
    if c.size() != mu.len() {
        return Err(NbodyError::SizeMismatch(c.size(), mu.len()));
    }
    if let Some((i, j)) = c.first_infinite() {
        return Err(NbodyError::InfiniteKernel(i, j));
    }
    let m = c.size();
    let states = multiset_states(m, n)?;
    // States occupying a point outside supp μ must carry zero weight, and
    // the marginal rows on supp μ already force total mass 1.
    let support = mu.support();
    let columns: Vec<usize> = (0..states.len())
        .filter(|&s| states[s].iter().zip(mu.weights()).all(|(&k, &w)| k == 0 || w > 0.0))
        .collect();
    let costs: Vec<f64> = columns.iter().map(|&s| state_energy(c, &states[s])).collect();
    let rows: Vec<Vec<f64>> = support
        .iter()
        .map(|&a| columns.iter().map(|&s| states[s][a] as f64 / n as f64).collect())
        .collect();
    let rhs = support.iter().map(|&a| mu.weights()[a]).collect();
    let lp = LinearProgram::new(costs, rows, rhs)?;
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(NbodyError::Solver(sol.status));
    }
    let total: f64 = sol.x.iter().sum();
    let mut weights = vec![0.0; states.len()];
    for (&s, &w) in columns.iter().zip(&sol.x) {
        weights[s] = w / total;
    }
    let gamma = SymmetricCoupling::new(m, n, weights)?;
    let value = pair_energy(c, &gamma)?;
    Ok((gamma, value))
}
