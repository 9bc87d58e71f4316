//! Desk-scale simulator and optimizer for dynamic low-layer functional split
//! selection in a disaggregated RAN site.
//!
//! The crate models per-split computational cost (GOPS) and fronthaul
//! bandwidth for a multi-sector site, minimizes the weighted energy cost
//! under per-direction fronthaul capacity constraints, and replays daily
//! traffic scenarios to quantify adaptive-versus-fixed-split gains.
//!
//! The numeric core is generic over the scalar type (f32 or f64) via
//! [`scalar::Scalar`]; the type aliases at the crate root fix f64, which is
//! what the scenario runner, control loop and CLI use.

// Validation uses `!(x >= bound)` so that NaN inputs fail the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod control;
pub mod error;
pub mod fronthaul;
pub mod model;
pub mod optimizer;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{
    fh_boundary, placement_of, BbFunction, BoundaryKind, Direction, Placement, Side, Split,
};
pub use scenario::{ExportFormat, Method};

/// f64 instantiations of the generic core.
pub type CellConfig = model::CellConfig<f64>;
pub type LdpcParams = model::LdpcParams<f64>;
pub type LoadPoint = complexity::LoadPoint<f64>;
pub type CostBreakdown = complexity::CostBreakdown<f64>;
pub type FhDemand = fronthaul::FhDemand<f64>;
pub type FhLink = fronthaul::FhLink<f64>;
pub type Objective = optimizer::Objective<f64>;
pub type Site = optimizer::Site<f64>;
pub type Solution = optimizer::Solution<f64>;
