//! Agent-based model of commuters choosing between cycling and driving.
//!
//! Agents sit in two networks at once: a physical layer joining everyone within
//! an influence radius, and a Barabási–Albert social layer. Each epoch they
//! play distance-attenuated stag-hunt games with their physical neighbours and
//! then revise their probability of cycling, either conforming to the mean of
//! all their neighbours or imitating the best-performing physical neighbour.
//!
//! On top of the dynamics the crate measures energy (total dissonance),
//! stability, impact and resilience, applies targeted attacks and random
//! perturbations, and compares a plain connect-people intervention with one
//! that only adds ties which lower the endpoints' dissonance.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod interventions;
pub mod metrics;
pub mod population;
pub mod rng;
pub mod scalar;
pub mod shocks;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParams = dynamics::ModelParams<f64>;
pub type Population = population::Population<f64>;
pub type PopulationParams = population::PopulationParams<f64>;
pub type SimulationState = dynamics::SimulationState<f64>;
pub type SimulationTrace = dynamics::SimulationTrace<f64>;
pub type StateSnapshot = metrics::StateSnapshot<f64>;
pub type FitResult = metrics::FitResult<f64>;
pub type ShockSpec = shocks::ShockSpec<f64>;
pub type InterventionSpec = interventions::InterventionSpec<f64>;
pub type InterventionReport = interventions::InterventionReport<f64>;
pub type ExperimentConfig = experiments::ExperimentConfig<f64>;

pub type ModelParams32 = dynamics::ModelParams<f32>;
pub type Population32 = population::Population<f32>;
pub type SimulationState32 = dynamics::SimulationState<f32>;
