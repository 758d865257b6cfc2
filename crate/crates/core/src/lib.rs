//! Arranging three polygonal unknots into the Borromean rings, and checking
//! the result with link invariants.
//!
//! Everything geometric is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below fix `f64`.

// `!(x < y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arranger;
pub mod diagram;
pub mod fixtures;
pub mod geom;
pub mod invariants;
pub mod io;
pub mod knot;
pub mod scalar;

pub type Vec3d = geom::Vec3<f64>;
pub type Mat3d = geom::Mat3<f64>;
pub type Similarity = geom::SimilarityTransform<f64>;
pub type Knot = knot::PolygonalKnot<f64>;
pub type Marked = knot::MarkedKnot<f64>;
pub type Diagram = diagram::LinkDiagram<f64>;
pub type Arrangement = arranger::Arrangement<f64>;

pub use arranger::{arrange, arrange_with, ArrangeError, ArrangeOptions, Mode};
pub use invariants::{certify_borromean, BorromeanCertificate, Verdict};
