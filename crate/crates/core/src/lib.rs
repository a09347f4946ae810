//! Exact simulation of spin squeezing in the spin-1/2 transverse-field XY
//! chain after a sudden quench of the field.
//!
//! Pipeline for one time point:
//! [`quench::QuenchSpec::kernel_at`] (fermion contractions) →
//! [`correlators::correlators_at`] (Pfaffians) →
//! [`observables::xi_squared`], [`observables::variance_jz`],
//! [`observables::magnetization`].
//!
//! [`oracle`] is a brute-force Fock-space implementation of the same chain,
//! used to validate every stage for `N ≤ 10`.

pub mod correlators;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod pfaffian;
pub mod quench;

pub use correlators::{correlators_at, CorrelatorKind, CorrelatorSet};
pub use error::{Error, Result};
pub use model::{ModelParams, MomentumGrid};
pub use observables::{evolve, AverageCurve, AveragingWindow, RevivalFit, Trajectory};
pub use quench::{make_quench, ContractionKernel, QuenchSpec};
