//! Decorrelation analysis for interaction kernels on finite metric spaces.
//!
//! Given a symmetric kernel `C` on `m` points and a marginal `μ`, the
//! central question is whether the product coupling `μ^{⊗N}` minimizes the
//! pair energy among exchangeable couplings with marginal `μ`. In the
//! infinite-`N` limit this reduces to a linear program over mixtures of
//! probability vectors, and it holds for every `μ` exactly when `C` is
//! positive semidefinite on zero-sum vectors.
//!
//! * [`kernel`]: spaces, kernel families and the kernel matrix type.
//! * [`spectral`]: symmetric eigensolver, PD and balanced-PD tests.
//! * [`energy`]: quadratic energies of probability vectors and mixtures.
//! * [`lp`]: dense two-phase simplex.
//! * [`mixture`]: the mixture LP, two-point witnesses and verdicts.
//! * [`nbody`]: exact finite-`N` symmetric couplings.
//! * [`basis`]: Gegenbauer expansions and circulant spectra.

pub mod basis;
pub mod combin;
pub mod energy;
pub mod kernel;
pub mod lp;
pub mod mixture;
pub mod nbody;
pub mod spectral;

pub use energy::{energy, Mixture, ProbVector};
pub use kernel::{build_kernel, DiscreteSpace, KernelMatrix, KernelSpec};
pub use mixture::{decorrelation_verdict, solve_mixture_lp, Verdict};
pub use spectral::{balanced_pd_test, pd_test, PdReport, PdVerdict, DEFAULT_TOL};
