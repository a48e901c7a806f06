//! Exact dynamics of the disordered spin star: one central spin-1/2 coupled
//! by XX exchange to `N` mutually non-interacting bath spins-1/2.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`.

pub mod closed_form;
pub mod entanglement;
pub mod error;
pub mod estimation;
pub mod measurement;
pub mod model;
pub mod scalar;
pub mod sector;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpinStarParams = model::SpinStarParams<f64>;
pub type SectorState = sector::SectorState<f64>;
pub type SectorHamiltonian = sector::SectorHamiltonian<f64>;
pub type SectorPropagator = sector::SectorPropagator<f64>;
pub type FullState = sector::full::FullState<f64>;
pub type ClosedFormAmplitudes = closed_form::ClosedFormAmplitudes<f64>;
pub type LadderStep = closed_form::LadderStep<f64>;
pub type WLikeState = closed_form::WLikeState<f64>;
pub type BathState = measurement::BathState<f64>;
pub type MeasurementOutcome = measurement::MeasurementOutcome<f64>;
pub type TrajectoryRecord = measurement::TrajectoryRecord<f64>;
pub type PairDensityMatrix = entanglement::PairDensityMatrix<f64>;
