//! Population-driven base-station synthesis and latency-constrained MEC PoP placement.
//!
//! Base stations are drawn per grid cell from an inhomogeneous Poisson process
//! whose intensity follows a synthetic population surface, then thinned with a
//! Matérn I or II hard-core rule. PoPs are placed greedily over a candidate
//! grid so that every station reaches its PoP within an RTT budget.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, with `*F32` variants for single precision.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod intensity;
pub mod placement;
pub mod process;
pub mod rng;
pub mod scalar;
pub mod validation;

pub use error::{Error, Result};
pub use process::{BorderMode, ProcessKind, RadiusFormula, ScaleMode};
pub use scalar::Scalar;

pub type Point = geometry::Point2D<f64>;
pub type Rect = geometry::Rect<f64>;
pub type Region = geometry::Region<f64>;
pub type Cell = geometry::Cell<f64>;
pub type IntensityField = intensity::IntensityField<f64>;
pub type PopulationCircle = intensity::PopulationCircle<f64>;
pub type RevolutionFunction = intensity::RevolutionFunction<f64>;
pub type Lobe = intensity::Lobe<f64>;
pub type BaseStation = process::BaseStation<f64>;
pub type PointSample = process::PointSample<f64>;
pub type GenerationOptions = process::GenerationOptions<f64>;
pub type NetworkRing = placement::NetworkRing<f64>;
pub type RingHierarchy = placement::RingHierarchy<f64>;
pub type DelayModel = placement::DelayModel<f64>;
pub type LatencyBudget = placement::LatencyBudget<f64>;
pub type CandidateLayout = placement::CandidateLayout<f64>;
pub type PlacementResult = placement::PlacementResult<f64>;

pub type PointF32 = geometry::Point2D<f32>;
pub type RegionF32 = geometry::Region<f32>;
pub type IntensityFieldF32 = intensity::IntensityField<f32>;
pub type BaseStationF32 = process::BaseStation<f32>;
pub type PlacementResultF32 = placement::PlacementResult<f32>;
