//! Non-uniform stability of damped second-order systems, computed on modal
//! truncations: resolvent growth, decay of the damped semigroup, the rate
//! calculus linking the two, and Diophantine damping positions.

pub mod assembly;
pub mod conditions;
pub mod diophantine;
pub mod error;
pub mod fit;
pub mod float_serde;
pub mod linalg;
pub mod modal;
pub mod rate;
pub mod resolvent;
pub mod sampling;
pub mod semigroup;

pub use faer::c64;

pub use assembly::{assemble_damped, assemble_damping, assemble_generator, assemble_system, DampedGenerator, DampingMatrix, TruncatedGenerator};
pub use conditions::{HautusReport, ObservabilityReport, WavepacketParams};
pub use diophantine::{ApproxStats, ContinuedFraction, Xi0};
pub use error::{Error, Result};
pub use fit::{fit_loglog, SlopeFit};
pub use modal::{build_modal_system, DampingKind, DampingSpec, ModalSystem, Mode, SystemKind, SystemSpec, WeakProfile};
pub use rate::{Interpolation, PositiveIncreaseCert, PseudoinverseSeries, RateFunction};
pub use resolvent::{Method, PeakSeries, ResolventScan};
pub use sampling::SampleRng;
pub use semigroup::{DecayTrace, SpectralFactorization};
