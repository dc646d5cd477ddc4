//! Pointwise geometry of parametric hypersurfaces in flat pseudo-Euclidean
//! space, with certification of the conformal-soliton structure induced by
//! the position vector field and a classifier for the resulting families
//! (hyperplane, cone with vertex at the origin, pseudo-sphere,
//! pseudo-hyperbolic space).
//!
//! The computation pipeline is: expression parsing ([`expr`]) -> exact
//! third-order jets ([`jet`]) -> per-point frames with fundamental forms and
//! shape operator ([`frame`]) -> soliton residuals and identity oracles
//! ([`soliton`]) -> family classification ([`classify`]).

pub mod chart;
pub mod classify;
pub mod config;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod frame;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod soliton;
pub mod spectral;
pub mod tolerances;
pub mod verify;

pub use chart::ImmersionChart;
pub use error::{GeomError, Result};
pub use linalg::AmbientMetric;
