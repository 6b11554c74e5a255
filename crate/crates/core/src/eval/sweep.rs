//! Uniform single-parameter sweeps: the hand-tuning workflow the optimizer
//! is judged against. A sweep evaluates one uniform baseline design (every
//! parameter at one level across all layers) and then re-evaluates it with
//! one parameter moved at a time.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::eval::Evaluator;
use crate::objective::ObjectiveVector;
use crate::space::{DesignPoint, DesignSpace};

/// One evaluated sweep design.
#[derive(Clone, Debug)]
pub struct SweepRow {
    /// `baseline`, or `<param>=<level>` for a single-parameter override.
    pub label: String,
    pub point: DesignPoint,
    pub objectives: ObjectiveVector,
}

/// Evaluates the baseline assignment and each `(parameter, level)` override
/// in the order given. Unknown parameters or levels fail before anything is
/// evaluated.
pub fn sweep_uniform(
    space: &DesignSpace,
    evaluator: &dyn Evaluator,
    baseline: &BTreeMap<String, i64>,
    overrides: &[(String, i64)],
) -> Result<Vec<SweepRow>> {
    let mut designs = Vec::with_capacity(overrides.len() + 1);
    designs.push(("baseline".to_string(), space.uniform_point(baseline)?));
    for (param, level) in overrides {
        let mut assignment = baseline.clone();
        assignment.insert(param.clone(), *level);
        designs.push((
            format!("{param}={level}"),
            space.uniform_point(&assignment)?,
        ));
    }

    let mut rows = Vec::with_capacity(designs.len());
    for (label, point) in designs {
        let objectives = evaluator.evaluate(&point)?;
        rows.push(SweepRow {
            label,
            point,
            objectives,
        });
    }
    Ok(rows)
}

/// Every non-baseline `(parameter, level)` pair of the space, in parameter
/// and level order: the standard one-factor-at-a-time sweep grid.
pub fn all_single_overrides(
    space: &DesignSpace,
    baseline: &BTreeMap<String, i64>,
) -> Vec<(String, i64)> {
    let mut overrides = Vec::new();
    for param in space.params() {
        for &level in &param.levels {
            if baseline.get(&param.name) != Some(&level) {
                overrides.push((param.name.clone(), level));
            }
        }
    }
    overrides
}
