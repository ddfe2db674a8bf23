//! K-frame analysis and erasure recovery for finite-dimensional real spaces.
//!
//! A K-frame is a family `{f_i}` (the columns of an n×m synthesis matrix F)
//! whose span contains the range of an operator K; a K-dual `{g_i}` satisfies
//! `F·Gᵀ = K`, so `Kf = Σ ⟨f, g_i⟩ f_i`. The crate covers:
//!
//! - [`linalg`]: tolerance-aware SVD, ranks, pseudo-inverses and subspaces;
//! - [`frame`]: verification, bounds, Gramian, classification, K-dual checks;
//! - [`canonical`]: the canonical (minimal analysis norm) K-dual;
//! - [`redundancy`]: spark, minimal redundancy, uniform excess, robustness;
//! - [`recovery`]: recovering erased K-dual coefficients;
//! - [`simulate`]: seeded Monte-Carlo erasure experiments.

pub mod canonical;
pub mod erasure;
pub mod error;
pub mod fixtures;
pub mod frame;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod recovery;
pub mod redundancy;
pub mod rng;
pub mod simulate;
pub mod subsets;

pub use canonical::{canonical_kdual, canonical_via_restricted, gamma_operator, is_canonical, CanonicalDualResult};
pub use erasure::ErasureSet;
pub use error::{Error, Result};
pub use frame::{verify_kframe, Classification, DualSystem, FrameBounds, KFrameSystem, OperatorK};
pub use linalg::{DenseMatrix, SubspaceBasis, TolerancePolicy};
