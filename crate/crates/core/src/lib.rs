//! Angle-based localization of planar sensor networks.
//!
//! The crate covers angle rigidity analysis of frameworks, centralized
//! localization through semidefinite relaxations (exact, chordally decomposed,
//! maximum-likelihood with rank minimization, and interval-disturbed), and a
//! deterministic simulator of the distributed bilateration localization protocol.

pub mod blp;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod graph;
pub mod graphkit;
pub mod network;
pub mod rigidity;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use geometry::{angle_cosine, bearing, Frame, Point2};
pub use graph::{angle_index_set, grounded_graph, Framework, Graph, Triple};
pub use network::{synthesize_measurements, AngleData, Regime, SensorNetwork};
pub use scalar::Scalar;

/// Single-precision point.
pub type Point2f = geometry::Point2<f32>;
/// Double-precision point (the default everywhere else in the crate).
pub type Point2d = geometry::Point2<f64>;
/// Single-precision frame.
pub type Framef = geometry::Frame<f32>;
