//! Orlicz-norm functionals, equal-budget cube coverings, finite-rank
//! approximation, lattice discretisations of `(1 - Δ)^{-d/4} M_f (1 - Δ)^{-d/4}`,
//! and inversion in the unit sphere.

// NaN must fail these guards, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod check;
pub mod covering;
pub mod cube;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod inversion;
pub mod io;
pub mod orlicz;
pub mod profiles;
pub mod spectral;
pub mod step;

pub use approx::{FiniteRankOperator, SeminormEstimate};
pub use check::Check;
pub use covering::{Covering, CoveringEntry, CoveringReport};
pub use cube::{Region, TorusCube};
pub use error::{Error, Result};
pub use grid::{Domain, Measure, SampledFunction};
pub use inversion::{GrowthRecord, InversionChecks, SmallBallReport};
pub use io::{Encoding, GridHeader};
pub use orlicz::{GaugeKind, OrliczGauge};
pub use profiles::Profile;
pub use spectral::{CwikelMatrix, FourierLattice, SingularSpectrum};
pub use step::StepFunction;
