//! Moduli densities, λ-windows and f_λ-statistical convergence of real
//! sequences, evaluated on finite prefixes.
//!
//! The crate is organised bottom-up:
//!
//! - [`modulus`]: modulus functions and sampled axiom checks,
//! - [`lambda`]: Λ-class sequences and the windows `I_n`,
//! - [`density`]: f-density and f_λ-density profiles with tail verdicts,
//! - [`convergence`]: classifiers for statistical convergence, strong
//!   summability and the statistical Cauchy property,
//! - [`decompose`]: the decomposition `x = y + z` and exceptional-set
//!   constructions together with their verifiers,
//! - [`lab`]: implication checks for the inclusion theorems over corpora,
//! - [`io`]: generators, file ingestion, run configuration and reports.
//!
//! Limits are never computed exactly. Every verdict is read off the tail of
//! a finite ratio curve under a declared [`density::TailRule`].

pub mod convergence;
pub mod decompose;
pub mod density;
pub mod error;
pub mod exec;
pub mod io;
pub mod lab;
pub mod lambda;
pub mod modulus;

pub use convergence::{ConvergenceReport, ConvergenceVerdict, SequencePrefix};
pub use density::{DensityProfile, DensityVerdict, IndexSet, TailRule};
pub use error::{Error, Result};
pub use exec::Exec;
pub use lambda::{LambdaSeq, Window};
pub use modulus::Modulus;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
