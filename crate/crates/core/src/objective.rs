//! Objective vectors and optimization senses.
//!
//! Evaluators report objectives in their natural units and senses (accuracy
//! is maximized, area is minimized, and so on). Everything downstream of an
//! evaluator works in a single internal convention: all objectives
//! minimized, with maximized objectives negated exactly once at the
//! evaluator boundary. [`internalize`] and [`externalize`] are that
//! boundary, and they are exact inverses bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Objective values exactly as an evaluator reported them.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveVector {
    values: Vec<f64>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("objective values must be finite"));
        }
        Ok(ObjectiveVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Converts reported objectives to the internal all-minimization convention.
pub fn internalize(raw: &ObjectiveVector, senses: &[Sense]) -> Result<Vec<f64>> {
    if raw.len() != senses.len() {
        return Err(Error::validation(format!(
            "objective vector has {} values but {} senses are declared",
            raw.len(),
            senses.len()
        )));
    }
    Ok(raw
        .values
        .iter()
        .zip(senses)
        .map(|(&v, s)| match s {
            Sense::Minimize => v,
            Sense::Maximize => -v,
        })
        .collect())
}

/// Converts internal minimization values back to reported units.
pub fn externalize(costs: &[f64], senses: &[Sense]) -> Result<ObjectiveVector> {
    if costs.len() != senses.len() {
        return Err(Error::validation(format!(
            "cost vector has {} values but {} senses are declared",
            costs.len(),
            senses.len()
        )));
    }
    ObjectiveVector::new(
        costs
            .iter()
            .zip(senses)
            .map(|(&v, s)| match s {
                Sense::Minimize => v,
                Sense::Maximize => -v,
            })
            .collect(),
    )
}
