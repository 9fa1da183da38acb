//! Lower-bound laboratory for first-order optimization on quadratics.
//!
//! The crate is organised bottom-up: exact [`polynomials`], closed-form
//! approximation [`approx_bounds`] with brute-force checks in
//! [`approx_oracle`], parametrised quadratic [`instances`] answered by
//! [`oracles`], oblivious [`optimizers`] that can be run numerically or
//! traced symbolically by [`symbolic_trace`], and an experiment
//! [`harness`] tying everything to CSV/SVG output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense matrix loops read better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod approx_bounds;
pub mod approx_oracle;
pub mod harness;
pub mod instances;
mod linalg;
pub mod optimizers;
pub mod oracles;
pub mod polynomials;
pub mod symbolic_trace;

pub use harness::{CommandReport, ExperimentConfig, HarnessError, Status};
pub use instances::{
    Family, Instance, InstanceDescription, QuadraticInstance, QuadraticModel, RlmInstance,
};
pub use optimizers::{make_optimizer, run, Metric, OptParams, Optimizer, RunRecord, Sampling};
pub use oracles::{CallLog, OracleQuery};
pub use polynomials::{MultiPoly, UniPoly};
