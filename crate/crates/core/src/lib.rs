//! Transient stability analysis of multi-machine power systems with
//! individual and equivalent machines.
//!
//! The pipeline is [`sim::simulate`] → [`frames`] → [`indmach`] and
//! [`eqmach`], with [`innergroup`] flagging when an equivalent machine stops
//! representing its members. Everything is generic over the scalar type; the
//! `f64` aliases below cover the common case.

pub mod eqmach;
pub mod error;
pub mod frames;
pub mod indmach;
pub mod innergroup;
pub mod model;
pub mod netsolve;
mod quad;
pub mod scalar;
pub mod sim;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Real;

pub type Scenario = model::Scenario<f64>;
pub type Trajectory = model::Trajectory<f64>;
pub type ReducedNetwork = model::ReducedNetwork<f64>;
pub type MachineParams = model::MachineParams<f64>;
pub type FrameSeries = frames::FrameSeries<f64>;
pub type Track = frames::Track<f64>;
pub type MarginReport = indmach::MarginReport<f64>;
pub type SwingEvent = indmach::SwingEvent<f64>;
pub type EquivalentSeries = eqmach::EquivalentSeries<f64>;
pub type EnergySeries = eqmach::EnergySeries<f64>;
pub type PatternResult = eqmach::PatternResult<f64>;
pub type CctReport = eqmach::CctReport<f64>;
pub type InnerMotionSeries = innergroup::InnerMotionSeries<f64>;

pub type Scenario32 = model::Scenario<f32>;
pub type Trajectory32 = model::Trajectory<f32>;
