//! Cooperative Parrondo games on a ring of `n` players.
//!
//! The `2^n`-state chain of win/loss configurations is lumped by rotation
//! (and, when `p1 = p2`, reflection) symmetry. Stationary distributions and
//! mean profit rates are computed exactly over rationals or in floating point,
//! and the Parrondo region of the `(p0, p1, p3)` cube is mapped from those.

pub mod chain;
pub mod error;
pub mod format;
mod linalg;
pub mod means;
mod modular;
pub mod region;
pub mod scalar;
pub mod simulate;
pub mod state_space;
pub mod stationary;

pub use chain::{BoundaryCase, CoefEntry, CoefMatrix, ParamVector, ReducedChain, SparseMatrix};
pub use error::{Error, Result};
pub use means::{build_augmented, history_equivalence_check, markov_mean_variance, mu_n3_closed, AugmentedChain, MeanReport};
pub use region::{Classification, CubePoint, ParrondoInterval, RegionEstimate, RegionScanner, TablePreset};
pub use scalar::{parse_rational, rat, Scalar};
pub use state_space::{canonical_form, count_classes, enumerate_classes, EquivClass, RingState, Symmetry};
pub use simulate::{absorption_analysis, coupled_simulate, reducible_mu, simulate, GameSpec, ProfitTrace};
pub use stationary::Distribution;

pub use num_rational::BigRational;
