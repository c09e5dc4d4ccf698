//! The reduced infinite-body problem.
//!
//! By the de Finetti–Hewitt–Savage representation, an exchangeable state
//! with one-point marginal `μ` is a mixture `ν` of i.i.d. states, and its pair
//! energy is `∑ₖ νₖ K(Qₖ)` subject to `∑ₖ νₖ Qₖ = μ`. This module minimizes
//! that objective over mixtures supported on a simplex grid, compares the
//! optimum with the product value `K(μ)`, and builds explicit two-atom
//! mixtures that beat the product state when `K` fails to be convex.

use serde::Serialize;
use thiserror::Error;

use crate::combin::{compositions, CountError};
use crate::energy::{self, energy, EnergyError, Mixture, ProbVector};
use crate::kernel::{KernelError, KernelMatrix};
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus};
use crate::spectral::{
    balanced_pd_test, balanced_spectrum, effective_tol, symmetric_eigen, SpectralError, SquareMatrix,
};

pub const DEFAULT_RESOLUTION: usize = 8;
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

const ON_GRID_TOL: f64 = 1e-9;
const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixtureError {
    #[error(transparent)]
    Grid(#[from] CountError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("marginal entry {index} = {value} is not a multiple of 1/{resolution}")]
    OffGrid {
        index: usize,
        value: f64,
        resolution: usize,
    },
    #[error("kernel is {kernel}×{kernel} but the marginal has {marginal} entries")]
    SizeMismatch { kernel: usize, marginal: usize },
    #[error("product energy K(μ) is infinite")]
    InfiniteProductEnergy,
    #[error("kernel has an infinite entry at ({0}, {1})")]
    InfiniteKernel(usize, usize),
    #[error("direction does not sum to zero (sum = {0})")]
    NotZeroSum(f64),
    #[error("direction is zero")]
    ZeroDirection,
    #[error("no positive step keeps μ ± εd nonnegative")]
    NoFeasibleStep,
    #[error("step {requested} exceeds the largest feasible step {max}")]
    StepTooLarge { requested: f64, max: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("linear program ended with status {0:?}")]
    Solver(LpStatus),
}

/// All probability vectors on `m` points with entries in `{0, 1/r, …, 1}`,
/// in lexicographically descending order.
pub fn simplex_grid(m: usize, r: usize) -> Result<Vec<ProbVector>, MixtureError> {
    simplex_grid_capped(m, r, DEFAULT_GRID_CAP)
}

pub fn simplex_grid_capped(m: usize, r: usize, cap: usize) -> Result<Vec<ProbVector>, MixtureError> {
    let counts = compositions(m, r, cap)?;
    Ok(counts
        .into_iter()
        .map(|k| grid_point(&k, r))
        .collect())
}

fn grid_point(k: &[u32], r: usize) -> ProbVector {
    let w = k.iter().map(|&v| v as f64 / r as f64).collect();
    ProbVector::new(w).expect("grid points are probability vectors")
}

fn check_on_grid(mu: &ProbVector, r: usize) -> Result<(), MixtureError> {
    for (i, &v) in mu.weights().iter().enumerate() {
        let scaled = v * r as f64;
        if (scaled - scaled.round()).abs() > ON_GRID_TOL {
            return Err(MixtureError::OffGrid {
                index: i,
                value: v,
                resolution: r,
            });
        }
    }
    Ok(())
}

/// Optimal grid mixture and its value `∑ₖ νₖ K(Qₖ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSolution {
    pub mixture: Mixture,
    pub value: f64,
}

/// Minimizes `∑ₖ νₖ K(Qₖ)` over mixtures of grid atoms at resolution `r`
/// with barycenter `μ`. `μ` must lie on the grid so that the product state
/// `δ_μ` is feasible.
///
/// Only atoms supported in `supp μ` can carry mass, and atoms with
/// `K(Q) = +∞` cannot carry mass in a finite-energy mixture; the program
/// is posed over the remaining atoms with one barycenter row per point of
/// `supp μ`. Those rows already force `∑ₖ νₖ = 1`.
pub fn solve_mixture_lp(c: &KernelMatrix, mu: &ProbVector, r: usize) -> Result<MixtureSolution, MixtureError> {
    solve_mixture_lp_capped(c, mu, r, DEFAULT_GRID_CAP)
}

pub fn solve_mixture_lp_capped(
    c: &KernelMatrix,
    mu: &ProbVector,
    r: usize,
    cap: usize,
) -> Result<MixtureSolution, MixtureError> {
    let m = c.size();
    if mu.len() != m {
        return Err(MixtureError::SizeMismatch {
            kernel: m,
            marginal: mu.len(),
        });
    }
    check_on_grid(mu, r)?;
    if energy(c, mu)?.is_infinite() {
        return Err(MixtureError::InfiniteProductEnergy);
    }
    let grid = simplex_grid_capped(m, r, cap)?;
    let support = mu.support();
    let mut atoms = Vec::with_capacity(grid.len());
    let mut costs = Vec::with_capacity(grid.len());
    for q in grid {
        if q.weights().iter().zip(mu.weights()).any(|(&qi, &mi)| qi > 0.0 && mi == 0.0) {
            continue;
        }
        let k = energy(c, &q)?;
        if k.is_finite() {
            costs.push(k);
            atoms.push(q);
        }
    }
    let rows: Vec<Vec<f64>> = support
        .iter()
        .map(|&i| atoms.iter().map(|q| q.weights()[i]).collect())
        .collect();
    let rhs = support.iter().map(|&i| mu.weights()[i]).collect();
    let lp = LinearProgram::new(costs, rows, rhs)?;
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(MixtureError::Solver(sol.status));
    }
    let total: f64 = sol.x.iter().filter(|&&w| w > 0.0).sum();
    let support: Vec<(f64, ProbVector)> = sol
        .x
        .iter()
        .zip(atoms)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, q)| (w / total, q))
        .collect();
    let mixture = Mixture::new(support)?;
    let value = energy::mixture_energy(c, &mixture)?;
    Ok(MixtureSolution { mixture, value })
}

/// How far to step along the witness direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Use exactly this step; fail if it leaves the simplex.
    Exact(f64),
    /// Use this step, shrunk to the largest feasible one if needed.
    AtMost(f64),
    /// Use the largest feasible step.
    Max,
}

/// Largest `ε` with `μ ± εd ≥ 0`.
pub fn max_feasible_step(mu: &ProbVector, d: &[f64]) -> f64 {
    mu.weights()
        .iter()
        .zip(d)
        .filter(|(_, &di)| di != 0.0)
        .map(|(&m, &di)| m / di.abs())
        .fold(f64::INFINITY, f64::min)
}

/// The mixture `½δ_{μ+εd} + ½δ_{μ−εd}` for a zero-sum direction `d`.
///
/// Its barycenter is `μ` and its convexity gap is `ε² dᵀCd`.
pub fn two_point_witness(mu: &ProbVector, d: &[f64], step: Step) -> Result<Mixture, MixtureError> {
    if d.len() != mu.len() {
        return Err(MixtureError::SizeMismatch {
            kernel: d.len(),
            marginal: mu.len(),
        });
    }
    let l1: f64 = d.iter().map(|x| x.abs()).sum();
    if l1 == 0.0 {
        return Err(MixtureError::ZeroDirection);
    }
    let sum: f64 = d.iter().sum();
    if sum.abs() > 1e-12 * l1.max(1.0) {
        return Err(MixtureError::NotZeroSum(sum));
    }
    let max = max_feasible_step(mu, d);
    if max.is_nan() || max <= 0.0 {
        return Err(MixtureError::NoFeasibleStep);
    }
    let eps = match step {
        Step::Max => max,
        Step::AtMost(e) => e.min(max),
        Step::Exact(e) if e <= max * (1.0 + 1e-12) => e.min(max),
        Step::Exact(e) => return Err(MixtureError::StepTooLarge { requested: e, max }),
    };
    if eps.is_nan() || eps <= 0.0 {
        return Err(MixtureError::NoFeasibleStep);
    }
    let shifted = |sign: f64| -> Result<ProbVector, MixtureError> {
        let w = mu
            .weights()
            .iter()
            .zip(d)
            .map(|(&m, &di)| {
                let v = m + sign * eps * di;
                if v < 0.0 && v > -CLAMP_TOL {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok(ProbVector::new(w)?)
    };
    Ok(Mixture::new(vec![(0.5, shifted(1.0)?), (0.5, shifted(-1.0)?)])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UniqueFlag {
    Unique,
    NonUnique,
    Undetermined,
}

/// Whether the product state `μ^⊗∞` minimizes the pair energy at `μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub decorrelated: bool,
    pub optimal_value: f64,
    pub product_value: f64,
    pub gap: f64,
    pub unique_flag: UniqueFlag,
    pub witness: Option<Mixture>,
    pub resolution: usize,
    pub tol: f64,
    /// Optimal mixture found by the grid program.
    #[serde(skip)]
    pub lp_mixture: Mixture,
}

/// Negative balanced direction of `C` restricted to `supp μ`, padded with
/// zeros to length `m`; `None` when the restricted form is nonnegative.
pub fn support_direction(c: &KernelMatrix, mu: &ProbVector, tol: f64) -> Result<Option<Vec<f64>>, MixtureError> {
    if c.size() != mu.len() {
        return Err(MixtureError::SizeMismatch {
            kernel: c.size(),
            marginal: mu.len(),
        });
    }
    let support = mu.support();
    if support.len() < 2 {
        return Ok(None);
    }
    let sub = c.restrict(&support)?;
    Ok(balanced_pd_test(&sub, tol)?.witness.map(|ds| {
        let mut d = vec![0.0; c.size()];
        for (&i, v) in support.iter().zip(ds) {
            d[i] = v;
        }
        d
    }))
}

/// Decides decorrelation at `μ`.
///
/// The grid program supplies the optimal value. Negativity is certified
/// exactly by the balanced test of the kernel restricted to `supp μ`: every
/// competing mixture lives on that support, and a negative direction there
/// yields a feasible two-point witness. Either source of negativity makes
/// the verdict "not decorrelated".
pub fn decorrelation_verdict(
    c: &KernelMatrix,
    mu: &ProbVector,
    r: usize,
    tol: f64,
) -> Result<Verdict, MixtureError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(MixtureError::BadTolerance(tol));
    }
    if let Some((i, j)) = c.first_infinite() {
        return Err(MixtureError::InfiniteKernel(i, j));
    }
    let lp = solve_mixture_lp(c, mu, r)?;
    let product_value = energy(c, mu)?;
    let gap = lp.value - product_value;
    let threshold = effective_tol(c, tol);

    let support = mu.support();
    let spectral_witness = match support_direction(c, mu, tol)? {
        Some(d) => Some(two_point_witness(mu, &d, Step::Max)?),
        None => None,
    };

    let lp_ok = lp.value >= product_value - threshold;
    let decorrelated = lp_ok && spectral_witness.is_none();
    let witness = if decorrelated {
        None
    } else {
        spectral_witness.or_else(|| Some(lp.mixture.clone()))
    };
    let unique_flag = uniqueness(c, &support, threshold)?;

    Ok(Verdict {
        decorrelated,
        optimal_value: lp.value,
        product_value,
        gap,
        unique_flag,
        witness,
        resolution: r,
        tol,
        lp_mixture: lp.mixture,
    })
}

/// `unique` when the balanced form is strictly positive; `non_unique` when a
/// null direction of the balanced form is supported inside `supp μ`, so that
/// `μ ± εd` stays feasible; `undetermined` otherwise.
fn uniqueness(c: &KernelMatrix, support: &[usize], threshold: f64) -> Result<UniqueFlag, MixtureError> {
    let m = c.size();
    let spec = balanced_spectrum(c)?;
    if spec.eigenvalues.first().is_none_or(|&l| l > threshold) {
        return Ok(UniqueFlag::Unique);
    }
    let null: Vec<&Vec<f64>> = spec
        .eigenvalues
        .iter()
        .zip(&spec.directions)
        .filter(|(l, _)| l.abs() <= threshold)
        .map(|(_, d)| d)
        .collect();
    if null.is_empty() {
        return Ok(UniqueFlag::Undetermined);
    }
    let outside: Vec<usize> = (0..m).filter(|i| !support.contains(i)).collect();
    if outside.is_empty() {
        return Ok(UniqueFlag::NonUnique);
    }
    // a combination Zw of null directions vanishing off the support exists
    // iff the Gram matrix of Z restricted to the outside rows is singular
    let k = null.len();
    let gram = SquareMatrix::from_fn(k, |a, b| outside.iter().map(|&i| null[a][i] * null[b][i]).sum());
    let eig = symmetric_eigen(&gram)?;
    if eig.eigenvalues[0] <= 1e-12 {
        Ok(UniqueFlag::NonUnique)
    } else {
        Ok(UniqueFlag::Undetermined)
    }
}
