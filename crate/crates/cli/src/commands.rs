use std::fmt::Write as _;
use std::path::Path;

use decorr_core::basis::{
    circulant_spectrum, expand_profile, sphere_gram_check, BasisError, ExpansionOptions, ExpansionReport, Profile,
    SphereCheck, SphericalProfile,
};
use decorr_core::energy::{convexity_gap, mixture_energy, quadratic_form};
use decorr_core::kernel::{build_kernel, DiscreteSpace, KernelMatrix, KernelSpec};
use decorr_core::mixture::{
    decorrelation_verdict, max_feasible_step, support_direction, two_point_witness, MixtureError, Step,
};
use decorr_core::nbody::{solve_nbody_lp, NbodyError};
use decorr_core::spectral::{balanced_pd_test, balanced_spectrum, pd_test, symmetric_eigen, PdReport};
use decorr_core::{energy, Mixture, ProbVector};
use serde::Serialize;

use crate::report::{emit, read_input, render, Config, Failure, Input};
use crate::Command;

pub fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Analyze { common, kernel } => {
            let config = Config::defaults("analyze", common.tol);
            let (input, c) = load_kernel(&kernel)?;
            let result = analyze(&c, common.tol).map_err(|e| Failure::at(&kernel, e))?;
            emit(common.out.as_deref(), &render(&config, &[&input], &result))?;
            Ok(0)
        }
        Command::Verdict {
            common,
            kernel,
            marginal,
            grid,
        } => {
            let mut config = Config::defaults("verdict", common.tol);
            config.resolution = grid;
            let (kin, c) = load_kernel(&kernel)?;
            let (min, mu) = load_marginal(&marginal)?;
            let v = decorrelation_verdict(&c, &mu, grid, common.tol)
                .map_err(|e| blame_mixture(e, &kernel, &marginal))?;
            emit(common.out.as_deref(), &render(&config, &[&kin, &min], &v))?;
            Ok(if v.decorrelated { 0 } else { 1 })
        }
        Command::Nbody {
            common,
            kernel,
            marginal,
            bodies,
        } => {
            let mut config = Config::defaults("nbody", common.tol);
            config.bodies = [*bodies.0.start(), *bodies.0.end()];
            let (kin, c) = load_kernel(&kernel)?;
            let (min, mu) = load_marginal(&marginal)?;
            let result = nbody(&c, &mu, bodies.0).map_err(|e| match e {
                NbodyError::SizeMismatch(..) => Failure::at(&marginal, e),
                NbodyError::Count(_) => Failure::new("-N", e),
                _ => Failure::at(&kernel, e),
            })?;
            if let Some(out) = &common.out {
                emit(Some(out), &nbody_csv(&result))?;
            }
            emit(None, &render(&config, &[&kin, &min], &result))?;
            Ok(0)
        }
        Command::Expand {
            common,
            profile,
            dim,
            lambda,
            n_max,
            quadrature,
            samples,
            points,
            seed,
        } => {
            let lambda = match (dim, lambda) {
                (Some(d), _) => (d as f64 - 1.0) / 2.0,
                (None, Some(l)) => l,
                (None, None) => unreachable!("clap requires one of --dim and --lambda"),
            };
            let mut config = Config::defaults("expand", common.tol);
            config.lambda = Some(lambda);
            config.n_max = n_max;
            config.quadrature_order = quadrature;
            config.samples = samples;
            config.points = points;
            config.seed = seed;
            let input = read_input("profile", &profile)?;
            let ell = Profile::from_csv(&input.text).map_err(|e| Failure::at(&profile, e))?;
            let sp = SphericalProfile::new(lambda, ell).map_err(|e| Failure::new("--dim/--lambda", e))?;
            let opts = ExpansionOptions {
                n_max,
                quadrature_order: quadrature,
                tol: common.tol,
            };
            let result = expand(&sp, opts, samples, points, seed).map_err(|e| Failure::at(&profile, e))?;
            emit(common.out.as_deref(), &render(&config, &[&input], &result))?;
            Ok(0)
        }
        Command::Spectrum {
            common,
            circulant,
            kernel,
        } => {
            let config = Config::defaults("spectrum", common.tol);
            let (input, result) = match (circulant, kernel) {
                (Some(path), _) => {
                    let input = read_input("circulant", &path)?;
                    let result = circulant_report(&input.text, common.tol).map_err(|e| Failure::at(&path, e))?;
                    (input, result)
                }
                (None, Some(path)) => {
                    let (input, c) = load_kernel(&path)?;
                    let result = kernel_spectrum(&c, common.tol).map_err(|e| Failure::at(&path, e))?;
                    (input, result)
                }
                (None, None) => unreachable!("clap requires one of --circulant and --kernel"),
            };
            emit(common.out.as_deref(), &render(&config, &[&input], &result))?;
            Ok(0)
        }
        Command::Witness {
            common,
            kernel,
            marginal,
            eps,
        } => {
            let mut config = Config::defaults("witness", common.tol);
            config.eps = eps;
            let (kin, c) = load_kernel(&kernel)?;
            let (min, mu) = load_marginal(&marginal)?;
            let result = witness(&c, &mu, eps, common.tol).map_err(|e| match e {
                MixtureError::StepTooLarge { .. } | MixtureError::NoFeasibleStep => Failure::new("--eps", e),
                e => blame_mixture(e, &kernel, &marginal),
            })?;
            emit(common.out.as_deref(), &render(&config, &[&kin, &min], &result))?;
            Ok(0)
        }
    }
}

fn load_kernel(path: &Path) -> Result<(Input, KernelMatrix), Failure> {
    let input = read_input("kernel", path)?;
    let c = KernelMatrix::from_csv(&input.text).map_err(|e| Failure::at(path, e))?;
    Ok((input, c))
}

fn load_marginal(path: &Path) -> Result<(Input, ProbVector), Failure> {
    let input = read_input("marginal", path)?;
    let mu = serde_json::from_str(&input.text).map_err(|e| Failure::at(path, e))?;
    Ok((input, mu))
}

fn blame_mixture(e: MixtureError, kernel: &Path, marginal: &Path) -> Failure {
    match e {
        MixtureError::SizeMismatch { .. } | MixtureError::OffGrid { .. } | MixtureError::InfiniteProductEnergy => {
            Failure::at(marginal, e)
        }
        MixtureError::Grid(_) => Failure::new("--grid", e),
        e => Failure::at(kernel, e),
    }
}

#[derive(Serialize)]
struct Analysis {
    m: usize,
    full: PdReport,
    balanced: PdReport,
}

fn analyze(c: &KernelMatrix, tol: f64) -> Result<Analysis, decorr_core::spectral::SpectralError> {
    Ok(Analysis {
        m: c.size(),
        full: pd_test(c, tol)?,
        balanced: balanced_pd_test(c, tol)?,
    })
}

#[derive(Serialize)]
struct NbodyRow {
    #[serde(rename = "N")]
    n: usize,
    value: f64,
    gap: f64,
    /// Occupied states of the optimal coupling.
    support: Vec<StateWeight>,
}

#[derive(Serialize)]
struct StateWeight {
    k: Vec<u32>,
    w: f64,
}

#[derive(Serialize)]
struct NbodyTable {
    product_value: f64,
    rows: Vec<NbodyRow>,
}

fn nbody(
    c: &KernelMatrix,
    mu: &ProbVector,
    bodies: std::ops::RangeInclusive<usize>,
) -> Result<NbodyTable, NbodyError> {
    let product_value = energy(c, mu)?;
    let mut rows = Vec::new();
    for n in bodies {
        let (gamma, value) = solve_nbody_lp(c, mu, n)?;
        let support = gamma
            .states()
            .iter()
            .zip(gamma.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| StateWeight { k: k.clone(), w })
            .collect();
        rows.push(NbodyRow {
            n,
            value,
            gap: value - product_value,
            support,
        });
    }
    Ok(NbodyTable { product_value, rows })
}

fn nbody_csv(table: &NbodyTable) -> String {
    let mut s = String::from("N,value,gap\r\n");
    for r in &table.rows {
        let _ = write!(s, "{},{},{}\r\n", r.n, r.value, r.gap);
    }
    s
}

#[derive(Serialize)]
struct Expansion {
    lambda: f64,
    #[serde(flatten)]
    report: ExpansionReport,
    /// Present when `2λ + 1` is an integer sphere dimension and sampling is on.
    sphere_check: Option<SphereCheck>,
}

fn expand(
    sp: &SphericalProfile,
    opts: ExpansionOptions,
    samples: usize,
    points: usize,
    seed: u64,
) -> Result<Expansion, BasisError> {
    let report = expand_profile(sp, opts)?;
    let d = 2.0 * sp.lambda + 1.0;
    let sphere_check = if samples > 0 && points > 0 && d.fract() == 0.0 {
        Some(sphere_gram_check(&sp.profile, d as usize, points, samples, seed, 1e-7)?)
    } else {
        None
    };
    Ok(Expansion {
        lambda: sp.lambda,
        report,
        sphere_check,
    })
}

#[derive(Serialize)]
struct Spectrum {
    n: usize,
    /// Circulant spectrum indexed by frequency, or ascending eigenvalues.
    eigenvalues: Vec<f64>,
    balanced_eigenvalues: Vec<f64>,
    full: PdReport,
    balanced: PdReport,
}

#[derive(Debug)]
enum SpectrumError {
    Parse(String),
    Basis(BasisError),
    Kernel(decorr_core::kernel::KernelError),
    Spectral(decorr_core::spectral::SpectralError),
}

impl std::fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectrumError::Parse(s) => write!(f, "cannot parse `{s}` as a number"),
            SpectrumError::Basis(e) => e.fmt(f),
            SpectrumError::Kernel(e) => e.fmt(f),
            SpectrumError::Spectral(e) => e.fmt(f),
        }
    }
}

fn circulant_report(text: &str, tol: f64) -> Result<Spectrum, SpectrumError> {
    let profile = text
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| SpectrumError::Parse(t.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let eigenvalues = circulant_spectrum(&profile).map_err(SpectrumError::Basis)?;
    let n = profile.len();
    let space = DiscreteSpace::cyclic(n).map_err(SpectrumError::Kernel)?;
    let c = build_kernel(&space, &KernelSpec::Circulant { profile }).map_err(SpectrumError::Kernel)?;
    let mut balanced_eigenvalues = eigenvalues[1..].to_vec();
    balanced_eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum {
        n,
        eigenvalues,
        balanced_eigenvalues,
        full: pd_test(&c, tol).map_err(SpectrumError::Spectral)?,
        balanced: balanced_pd_test(&c, tol).map_err(SpectrumError::Spectral)?,
    })
}

fn kernel_spectrum(c: &KernelMatrix, tol: f64) -> Result<Spectrum, decorr_core::spectral::SpectralError> {
    Ok(Spectrum {
        n: c.size(),
        eigenvalues: symmetric_eigen(c)?.eigenvalues,
        balanced_eigenvalues: balanced_spectrum(c)?.eigenvalues,
        full: pd_test(c, tol)?,
        balanced: balanced_pd_test(c, tol)?,
    })
}

#[derive(Serialize)]
struct Witness {
    product_value: f64,
    /// Zero-sum direction supported in `supp μ`, if the form is negative there.
    direction: Option<Vec<f64>>,
    eps: Option<f64>,
    quadratic_form: Option<f64>,
    predicted_gap: Option<f64>,
    gap: Option<f64>,
    mixture_energy: Option<f64>,
    mixture: Option<Mixture>,
}

fn witness(c: &KernelMatrix, mu: &ProbVector, eps: Option<f64>, tol: f64) -> Result<Witness, MixtureError> {
    if let Some((i, j)) = c.first_infinite() {
        return Err(MixtureError::InfiniteKernel(i, j));
    }
    let product_value = energy(c, mu)?;
    let Some(d) = support_direction(c, mu, tol)? else {
        return Ok(Witness {
            product_value,
            direction: None,
            eps: None,
            quadratic_form: None,
            predicted_gap: None,
            gap: None,
            mixture_energy: None,
            mixture: None,
        });
    };
    let step = eps.map_or(Step::Max, Step::Exact);
    let nu = two_point_witness(mu, &d, step)?;
    let eps = eps.unwrap_or_else(|| max_feasible_step(mu, &d));
    let q = quadratic_form(c, &d)?;
    Ok(Witness {
        product_value,
        eps: Some(eps),
        quadratic_form: Some(q),
        predicted_gap: Some(eps * eps * q),
        gap: Some(convexity_gap(c, &nu)?),
        mixture_energy: Some(mixture_energy(c, &nu)?),
        direction: Some(d),
        mixture: Some(nu),
    })
}
