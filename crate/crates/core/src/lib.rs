//! Bilateral birth-death processes on the integers and the similarity
//! transformations between them.
//!
//! * [`model`]: rate specifications and state windows.
//! * [`transform`]: nu sequences, transformed processes and the
//!   product-form predictions they imply.
//! * [`analytic`]: closed forms for constant rates, built on a modified
//!   Bessel series.
//! * [`solver`]: truncated forward equations and first-passage densities.
//! * [`simulate`]: exact path simulation and Monte Carlo estimators.

pub mod analytic;
mod dd;
pub mod error;
pub mod model;
pub mod ode;
pub mod simulate;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use model::{validate_spec, ProcessSpec, RateKind, StateWindow};
pub use simulate::{CrossingEstimate, EmpiricalDistribution, FptHistogram, McOptions, Trajectory};
pub use solver::{FptDensity, Generator, TransitionSlice};
pub use transform::{Direction, NuOrigin, NuSequence, TransformedProcess};
