//! # rqcm
//!
//! Random quantum covariance matrices (RQCM): a GOE draw `G` shifted by
//! `λ_max(iJ − G)·I` so that the Heisenberg relation `S ⪰ iJ` is saturated.
//!
//! The crate covers the whole pipeline:
//!
//! - [`linalg`]: dense Hermitian/symmetric eigensolvers and the matrix
//!   functions built on them (square roots, pseudo-inverses, log-determinants).
//! - [`ensemble`]: seeded GOE and RQCM sampling, the symplectic form, marginals
//!   and block views of bipartite covariance matrices.
//! - [`spectra`]: ordinary and symplectic spectra, purity, PPT and QCM defects.
//! - [`freeprob`]: large-mode limit laws (shifted semicircles, Bernoulli ⊞
//!   semicircle, Bernoulli ⊠ semicircle) and their support edges.
//! - [`extend`]: separability and k-extendability decided through sandwich
//!   linear matrix inequalities `L ⪯ X ⪯ U` over real symmetric `X`.
//! - [`stats`]: histograms, L1 distances and reproducible Monte Carlo sweeps.
//!
//! Conventions: the symplectic form is `J = [[0, 1], [−1, 0]]^{⊕n}` and a
//! quantum covariance matrix satisfies `S − iJ ⪰ 0`.

#![forbid(unsafe_code)]

pub mod ensemble;
pub mod error;
pub mod extend;
pub mod freeprob;
pub mod io;
pub mod linalg;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

/// Feasibility, QCM and PPT tolerance used throughout (absolute).
pub const DEFAULT_TOL: f64 = 1e-8;
