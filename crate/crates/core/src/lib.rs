//! Kantorovich-type integral operators on concrete groups.
//!
//! The crate covers discrete sampling, two convolution forms, the Mellin
//! setting on `(ℝ⁺, ·, dt/t)` and multidimensional sampling, together with
//! kernel-condition audits, an Orlicz-space toolkit (modulars, Luxemburg
//! norms, Δ₂ checks) and a config-driven experiment runner.
//!
//! ```
//! use kantorovich::funcdsl::presets;
//! use kantorovich::operators::{apply, OperatorSpec, Variant};
//!
//! let spec = OperatorSpec::standard(Variant::ConvKantorovichScaled).with_w(10.0).unwrap();
//! let y = apply(&spec, &presets::f1(), 0.5).unwrap();
//! assert!((y - 2.0).abs() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiments;
pub mod funcdsl;
pub mod group_model;
pub mod kernels;
pub mod operators;
pub mod orlicz;
pub mod quadrature;
pub mod signal;

pub use error::{Error, Result};
pub use funcdsl::{parse_expression, parse_piecewise, Domain, Expression, PieceSpec, PiecewiseFunction};
pub use group_model::{Anchor, Cell, CellFamily, CompactSet, GroupSpace, SampleSequence};
pub use kernels::{ConditionReport, Kernel, KernelFamily, Scaling};
pub use operators::{apply, apply_grid, EvaluationResult, OperatorSpec, Variant};
pub use orlicz::{LuxemburgConvention, PhiFunction};
pub use quadrature::{IntegrationRequest, Measure};
pub use signal::{Signal, SignalNd};
