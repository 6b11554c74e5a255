//! Lower-confidence-bound acquisition over a bank of per-objective models.
//!
//! Under the minimization convention, `mean - beta * std_dev` is optimistic:
//! smaller scores mark candidates that are predicted to be good or are still
//! uncertain. Scores are produced in the models' standardized target units;
//! callers that need internal cost units map them back through
//! [`crate::gp::GpModel::destandardize`], which preserves the ranking
//! because standardization is affine with positive scale.

use crate::gp::GpModel;
use crate::par;

/// Lower confidence bound of a single prediction.
pub fn lcb(mean: f64, std_dev: f64, beta: f64) -> f64 {
    mean - beta * std_dev
}

/// LCB score of one point under every model, in standardized units.
pub fn score_point(models: &[GpModel], x: &[f64], beta: f64) -> Vec<f64> {
    models
        .iter()
        .map(|m| {
            let (mean, var) = m.predict(x);
            lcb(mean, var.sqrt(), beta)
        })
        .collect()
}

/// Scores a batch of encoded candidates; one vector of per-objective LCB
/// values per candidate, in candidate order.
pub fn score_batch(models: &[GpModel], candidates: &[Vec<f64>], beta: f64) -> Vec<Vec<f64>> {
    par::map_collect(candidates, |x| score_point(models, x, beta))
}
