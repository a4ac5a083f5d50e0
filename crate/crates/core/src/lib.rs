//! Exponentials of small hermitian matrices as averages over rank-one
//! projections.
//!
//! For traceless hermitian `A` of size 2, 3 or 4,
//!
//! ```text
//! e^A = ∫ dΩ e^{Tr(AW)} P_d(A, W)
//! ```
//!
//! where `W = v v†` ranges over rank-one projections with `v` distributed by
//! the unitary-invariant measure on the unit sphere of `C^d`, and `P_d` is a
//! fixed low-degree matrix polynomial ([`integrand`]). A general hermitian
//! matrix is handled through `e^A = e^{Tr(A)/d} e^{A0}`. Replacing `A` by
//! `iA` gives `e^{iA}` by the same route.
//!
//! Modules:
//!
//! - [`matcore`]: matrices, hermitian validation, the spectral oracle.
//! - [`sphere`]: sampling `dΩ`, reproducible RNG streams.
//! - [`integrand`]: the bracket polynomials.
//! - [`estimator`]: sharded Monte Carlo with per-entry standard errors.
//! - [`moments`]: exact and sampled angular averages `Av((Tr AW)^k W)`.
//! - [`asymptotics`]: the large-`s` Laplace behaviour in three dimensions.

pub mod asymptotics;
pub mod error;
pub mod estimator;
pub mod integrand;
pub mod matcore;
pub mod moments;
pub mod sphere;

pub use error::{Error, Result};
pub use estimator::{estimate_expm, estimate_expm_fourier, EstimatorConfig, McEstimate};
pub use matcore::{expm_reference, CMatrix, ExpMode, HermitianMatrix, MatrixJson, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
