//! Expensive-to-evaluate objective functions over design points.
//!
//! An [`Evaluator`] reports objectives in natural units and senses; the
//! optimization loop internalizes them (see [`crate::objective`]). Each
//! evaluator counts its successful queries, which is the budget currency
//! every optimizer in this crate is compared on.

pub mod cim;
pub mod sweep;
pub mod synthetic;

use crate::error::Result;
use crate::objective::{ObjectiveVector, Sense};
use crate::space::DesignPoint;

pub trait Evaluator: Sync {
    /// Stable objective names, used for artifact headers.
    fn objective_names(&self) -> &[String];

    /// Optimization sense per objective, aligned with `objective_names`.
    fn senses(&self) -> &[Sense];

    /// Evaluates one design. Successful calls increment the query counter.
    fn evaluate(&self, point: &DesignPoint) -> Result<ObjectiveVector>;

    /// Number of successful evaluations so far.
    fn query_count(&self) -> u64;
}
