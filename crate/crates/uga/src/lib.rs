//! Spectral sparsification by universal greedy selection.
//!
//! Two greedy drivers form the core: nonnegative subset selection over
//! isotropic vector sets ([`subset`]) and linear-time graph sparsification
//! ([`sparsify`]). Around them sit dense verification kernels ([`linalg`]),
//! eigenvalue certification ([`certify`]), seeded instance generators
//! ([`generators`]), least-squares sketching ([`sketch`]), and spectral
//! clustering evaluation ([`cluster`]).

pub mod certify;
pub mod cluster;
pub mod error;
pub mod generators;
pub mod graph;
mod heap;
pub mod io;
pub mod linalg;
pub mod report;
pub mod sketch;
pub mod sparsify;
pub mod subset;

pub use error::{Result, UgaError};

/// Default cap for dense-verification paths (materializing Laplacians,
/// certification eigensolves). Override per call or, in the CLI, through
/// the `UGA_DENSE_CAP` environment variable.
pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Number of greedy iterations for a dimension-n target at accuracy eps:
/// ceil(n / eps^2).
pub fn iteration_budget(n: usize, eps: f64) -> usize {
    (n as f64 / (eps * eps)).ceil() as usize
}
