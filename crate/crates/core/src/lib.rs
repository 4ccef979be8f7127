//! Differential-geometry audits for Kähler and weakly symmetric structures
//! on four-dimensional pseudo-Riemannian metrics.

pub mod catalog;
pub mod conformal;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod kahler;
pub mod relativity;
pub mod tensor;
pub mod weak_symmetry;

pub use catalog::{builtin, load_metric_file, parse_metric_json, CatalogEntry, ExpectedProperties};
pub use error::{Error, Result};
pub use expr::{parse_expr, ScalarExpr};
pub use geometry::{CurvatureBundle, MetricStructure};
pub use jet::{eval_jet3, Jet3, Point};
pub use kahler::{kahler_audit, ComplexStructure, KahlerReport};
pub use relativity::{fluid_audit, FluidReport, FluidState};
pub use tensor::{MetricAtPoint, Tensor4, Variance};
