//! Ultraspherical expansions for zonal kernels on spheres and the DFT
//! criterion for translation-invariant kernels on a cyclic grid.
//!
//! A kernel `c(x, y) = ℓ(⟨x, y⟩)` on `S^d` is positive definite iff
//! `ℓ = ∑ aₙ Cₙ^λ` with `λ = (d − 1)/2` and every `aₙ ≥ 0`. The polynomials
//! are used in the standard Gegenbauer normalization; any other
//! normalization differs by positive factors and leaves the signs alone.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::kernel::{check_circulant_profile, data_lines, split_fields, KernelError};
use crate::spectral::{pd_test, SpectralError, SquareMatrix};

pub const DEFAULT_QUADRATURE_ORDER: usize = 128;
pub const DEFAULT_N_MAX: usize = 16;

const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("λ must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("t = {0} lies outside [−1, 1]")]
    OutOfDomain(f64),
    #[error("profile cannot be evaluated at t = {0}")]
    NotEvaluable(f64),
    #[error("quadrature order {order} is too low for degree {n_max} (reconstruction error {error:e})")]
    QuadratureTooLow { order: usize, n_max: usize, error: f64 },
    #[error("profile table needs at least two distinct nodes")]
    ShortTable,
    #[error(transparent)]
    Circulant(#[from] KernelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("malformed profile at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sphere dimension must be at least 1")]
    BadDimension,
}

/// `Cₙ^λ(t)` by the three-term recurrence.
pub fn gegenbauer_eval(lambda: f64, n: usize, t: f64) -> Result<f64, BasisError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(BasisError::BadLambda(lambda));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(BasisError::OutOfDomain(t));
    }
    Ok(*gegenbauer_upto(lambda, n, t).last().unwrap())
}

/// `[C₀^λ(t), …, C_n^λ(t)]`.
fn gegenbauer_upto(lambda: f64, n: usize, t: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(n + 1);
    c.push(1.0);
    if n >= 1 {
        c.push(2.0 * lambda * t);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * t * c[k - 1] - (kf + 2.0 * lambda - 2.0) * c[k - 2]) / kf;
        c.push(next);
    }
    c
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature for `∫₋₁¹ f(t) (1 − t²)^{λ−½} dt`.
///
/// The substitution `t = cos θ` turns the integral into
/// `∫₀^π f(cos θ) sin^{2λ} θ dθ`, to which Gauss–Legendre nodes are applied
/// with the weight folded into the quadrature weights. For the sphere
/// values of `λ` the integrand is smooth in `θ`.
#[derive(Debug, Clone)]
pub struct WeightedQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedQuadrature {
    pub fn new(lambda: f64, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (xi, wi) in x.into_iter().zip(w) {
            let theta = 0.5 * PI * (xi + 1.0);
            nodes.push(theta.cos());
            weights.push(0.5 * PI * wi * theta.sin().powf(2.0 * lambda));
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// A function `ℓ` on `[−1, 1]`.
#[derive(Clone)]
pub enum Profile {
    /// Monomial coefficients `c₀ + c₁t + c₂t² + …`.
    Polynomial(Vec<f64>),
    /// `(node, value)` pairs, linearly interpolated; must cover every point
    /// where the profile is evaluated.
    Table(Vec<(f64, f64)>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Profile::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Profile::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Profile {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Function(Arc::new(f))
    }

    /// Sorts and validates a table.
    pub fn table(mut entries: Vec<(f64, f64)>) -> Result<Self, BasisError> {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        if entries.len() < 2 {
            return Err(BasisError::ShortTable);
        }
        if let Some(&(t, _)) = entries.iter().find(|(t, v)| !(-1.0..=1.0).contains(t) || !v.is_finite()) {
            return Err(BasisError::OutOfDomain(t));
        }
        Ok(Profile::Table(entries))
    }

    pub fn eval(&self, t: f64) -> Result<f64, BasisError> {
        match self {
            Profile::Polynomial(c) => Ok(c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)),
            Profile::Table(rows) => {
                let (lo, hi) = (rows[0].0, rows[rows.len() - 1].0);
                if t < lo || t > hi {
                    return Err(BasisError::NotEvaluable(t));
                }
                let i = rows.partition_point(|&(x, _)| x <= t).clamp(1, rows.len() - 1);
                let (x0, y0) = rows[i - 1];
                let (x1, y1) = rows[i];
                Ok(y0 + (y1 - y0) * (t - x0) / (x1 - x0))
            }
            Profile::Function(f) => {
                let v = f(t);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(BasisError::NotEvaluable(t))
                }
            }
        }
    }

    fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Profile::Polynomial(c) => Some(c.iter().rposition(|&x| x != 0.0).unwrap_or(0)),
            _ => None,
        }
    }

    /// Parses either `node,value` lines or a single `poly,c0,c1,…` line.
    pub fn from_csv(text: &str) -> Result<Self, BasisError> {
        let lines: Vec<(usize, &str)> = data_lines(text).collect();
        let parse = |f: &str, line: usize| -> Result<f64, BasisError> {
            f.parse::<f64>().map_err(|_| BasisError::Parse {
                line,
                msg: format!("cannot parse `{f}`"),
            })
        };
        if let Some(&(line, first)) = lines.first() {
            let fields = split_fields(first);
            if fields[0] == "poly" {
                if lines.len() > 1 {
                    return Err(BasisError::Parse {
                        line: lines[1].0,
                        msg: "a `poly` profile is a single line".into(),
                    });
                }
                let coeffs = fields[1..]
                    .iter()
                    .map(|f| parse(f, line))
                    .collect::<Result<Vec<_>, _>>()?;
                if coeffs.is_empty() {
                    return Err(BasisError::Parse {
                        line,
                        msg: "no coefficients".into(),
                    });
                }
                return Ok(Profile::Polynomial(coeffs));
            }
        }
        let mut rows = Vec::with_capacity(lines.len());
        for (line, l) in lines {
            let fields = split_fields(l);
            if fields.len() != 2 {
                return Err(BasisError::Parse {
                    line,
                    msg: "expected `node,value`".into(),
                });
            }
            rows.push((parse(fields[0], line)?, parse(fields[1], line)?));
        }
        Profile::table(rows)
    }
}

/// Zonal profile `ℓ` on a sphere with Gegenbauer index `λ`.
#[derive(Debug, Clone)]
pub struct SphericalProfile {
    pub lambda: f64,
    pub profile: Profile,
}

impl SphericalProfile {
    pub fn new(lambda: f64, profile: Profile) -> Result<Self, BasisError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(BasisError::BadLambda(lambda));
        }
        Ok(Self { lambda, profile })
    }

    /// Profile on `S^d`, where `λ = (d − 1)/2`. Requires `d ≥ 2`.
    pub fn on_sphere(d: usize, profile: Profile) -> Result<Self, BasisError> {
        Self::new((d as f64 - 1.0) / 2.0, profile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansionClass {
    #[serde(rename = "PD_up_to_truncation")]
    PdUpToTruncation,
    #[serde(rename = "strictly_PD_up_to_truncation")]
    StrictlyPdUpToTruncation,
    #[serde(rename = "not_PD")]
    NotPd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub coefficients: Vec<f64>,
    pub n_max: usize,
    pub classification: ExpansionClass,
    pub first_negative: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    pub n_max: usize,
    pub quadrature_order: usize,
    pub tol: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            tol: crate::spectral::DEFAULT_TOL,
        }
    }
}

/// Gegenbauer coefficients `a₀ … a_{n_max}` of the profile.
///
/// Both `∫ℓ Cₙ w` and the norms `∫Cₙ² w` come from the same quadrature.
/// For polynomial profiles of degree at most `n_max`, the expansion is
/// re-evaluated at the nodes and a mismatch above `1e-6` is reported as
/// an insufficient quadrature order.
pub fn expand_profile(profile: &SphericalProfile, opts: ExpansionOptions) -> Result<ExpansionReport, BasisError> {
    let lambda = profile.lambda;
    let quad = WeightedQuadrature::new(lambda, opts.quadrature_order);
    let values = quad
        .nodes
        .iter()
        .map(|&t| profile.profile.eval(t))
        .collect::<Result<Vec<_>, _>>()?;
    let polys: Vec<Vec<f64>> = quad
        .nodes
        .iter()
        .map(|&t| gegenbauer_upto(lambda, opts.n_max, t))
        .collect();
    let mut coefficients = Vec::with_capacity(opts.n_max + 1);
    for n in 0..=opts.n_max {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((w, v), c) in quad.weights.iter().zip(&values).zip(&polys) {
            num += w * v * c[n];
            den += w * c[n] * c[n];
        }
        if !(den.is_finite() && den > 0.0) {
            return Err(BasisError::QuadratureTooLow {
                order: opts.quadrature_order,
                n_max: opts.n_max,
                error: f64::INFINITY,
            });
        }
        coefficients.push(num / den);
    }

    if profile.profile.polynomial_degree().is_some_and(|d| d <= opts.n_max) {
        let error = values
            .iter()
            .zip(&polys)
            .map(|(v, c)| {
                let approx: f64 = coefficients.iter().zip(c).map(|(a, p)| a * p).sum();
                (approx - v).abs()
            })
            .fold(0.0, f64::max);
        if error > RECONSTRUCTION_TOL {
            return Err(BasisError::QuadratureTooLow {
                order: opts.quadrature_order,
                n_max: opts.n_max,
                error,
            });
        }
    }

    let first_negative = coefficients.iter().position(|&a| a < -opts.tol);
    let classification = if first_negative.is_some() {
        ExpansionClass::NotPd
    } else if coefficients.iter().all(|&a| a > opts.tol) {
        ExpansionClass::StrictlyPdUpToTruncation
    } else {
        ExpansionClass::PdUpToTruncation
    };
    Ok(ExpansionReport {
        coefficients,
        n_max: opts.n_max,
        classification,
        first_negative,
    })
}

/// `ℓ̂ₖ = ∑ⱼ ℓⱼ cos(2πjk/n)`: the eigenvalues of the circulant kernel with
/// first row `ℓ`, indexed by frequency.
pub fn circulant_spectrum(profile: &[f64]) -> Result<Vec<f64>, BasisError> {
    check_circulant_profile(profile)?;
    let n = profile.len();
    Ok((0..n)
        .map(|k| {
            profile
                .iter()
                .enumerate()
                .map(|(j, &l)| l * (2.0 * PI * ((j * k) % n) as f64 / n as f64).cos())
                .sum()
        })
        .collect())
}

/// Uniform points on the unit sphere `S^d ⊂ ℝ^{d+1}`.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// `ℓ(⟨xᵢ, xⱼ⟩)` for unit vectors, inner products clamped to `[−1, 1]`.
pub fn gram_matrix(profile: &Profile, points: &[Vec<f64>]) -> Result<SquareMatrix, BasisError> {
    let n = points.len();
    let mut g = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            let v = profile.eval(dot.clamp(-1.0, 1.0))?;
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    Ok(g)
}

/// Result of testing Gram matrices of random point sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereCheck {
    pub dimension: usize,
    pub points: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub min_eigenvalue: f64,
    pub failures: usize,
}

/// Draws `samples` independent sets of `points` unit vectors in `ℝ^{d+1}`
/// and runs [`pd_test`] on each Gram matrix.
pub fn sphere_gram_check(
    profile: &Profile,
    d: usize,
    points: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SphereCheck, BasisError> {
    if d == 0 {
        return Err(BasisError::BadDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_eigenvalue = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..samples {
        let pts = sample_sphere(&mut rng, d, points);
        let g = gram_matrix(profile, &pts)?;
        let report = pd_test(&g, tol)?;
        min_eigenvalue = min_eigenvalue.min(report.min_eigenvalue);
        if !report.verdict.is_nonnegative() {
            failures += 1;
        }
    }
    Ok(SphereCheck {
        dimension: d,
        points,
        samples,
        seed,
        tol,
        min_eigenvalue,
        failures,
    })
}
