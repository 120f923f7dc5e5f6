//! Forward synthesis and multi-frequency subspace imaging of thin penetrable
//! inclusions buried in the lower of two half-spaces.
//!
//! The crate covers the full chain: curves ([`geometry`]), two-layer media
//! and plane-wave transmission ([`media`]), multi-static response matrices
//! ([`forward`]), seeded noise ([`noise`]), the imaging functional
//! ([`imaging`]), scenario files and presets ([`scenario`]), and the
//! drivers and exporters used by the command-line tool.

pub mod dataset;
pub mod error;
pub mod export;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod linalg;
pub mod media;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod scenario;
pub mod special;

pub use dataset::MsrDataset;
pub use error::{Error, Result};
pub use forward::{CMatrix, CVector, DirectionSet, ForwardModel, Inclusion};
pub use geometry::{ParametricCurve, Vec2};
pub use imaging::{ImageMap, Rect, SearchGrid, SteeringConfig};
pub use media::{FrequencyContext, HalfSpaceMedium, InclusionMaterial};
pub use metrics::PeakMetrics;
pub use scenario::Scenario;
