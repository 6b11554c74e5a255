//! Pareto dominance and the bounded archive of evaluated designs.
//!
//! Everything here uses the internal minimization convention; see
//! [`crate::objective`] for the boundary where maximized objectives get
//! negated.

use crate::error::{Error, Result};
use crate::hypervolume;
use crate::space::DesignPoint;

/// Strict Pareto dominance: `a` is no worse than `b` everywhere and strictly
/// better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "cannot compare vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Picks a reference point from a batch of cost vectors: the componentwise
/// worst value pushed out by `margin` times the observed range. Afterwards
/// the reference stays frozen so hypervolumes remain comparable across a
/// run.
pub fn reference_from_costs(costs: &[Vec<f64>], margin: f64) -> Result<Vec<f64>> {
    if costs.is_empty() {
        return Err(Error::validation(
            "need at least one cost vector to place a reference point",
        ));
    }
    if !margin.is_finite() || margin < 0.0 {
        return Err(Error::validation(
            "reference margin must be finite and >= 0",
        ));
    }
    let m = costs[0].len();
    let mut worst = vec![f64::NEG_INFINITY; m];
    let mut best = vec![f64::INFINITY; m];
    for c in costs {
        if c.len() != m {
            return Err(Error::validation("cost vectors must share one length"));
        }
        for d in 0..m {
            if !c[d].is_finite() {
                return Err(Error::validation("cost vectors must be finite"));
            }
            worst[d] = worst[d].max(c[d]);
            best[d] = best[d].min(c[d]);
        }
    }
    Ok((0..m)
        .map(|d| worst[d] + margin * (worst[d] - best[d]))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    pub point: DesignPoint,
    pub costs: Vec<f64>,
}

/// Result of offering a design to the archive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InsertOutcome {
    /// The design joined the front; hypervolume grew by `hv_gain` (possibly
    /// zero when it only ties the dominated-region boundary).
    Inserted { hv_gain: f64 },
    /// The design is dominated by, or duplicates, an existing entry.
    Dominated,
}

/// Archive of mutually non-dominated designs with a frozen reference point
/// and an incrementally maintained hypervolume. Entries keep their raw cost
/// vectors; clipping to the reference box happens only inside hypervolume
/// computations.
#[derive(Clone, Debug)]
pub struct ParetoArchive {
    reference: Vec<f64>,
    entries: Vec<ArchiveEntry>,
    hv: f64,
}

impl ParetoArchive {
    pub fn new(reference: Vec<f64>) -> Result<Self> {
        if reference.is_empty() || reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(
                "archive reference point must be non-empty and finite",
            ));
        }
        Ok(ParetoArchive {
            reference,
            entries: Vec::new(),
            hv: 0.0,
        })
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Running hypervolume, accumulated from insertion gains.
    pub fn hypervolume(&self) -> f64 {
        self.hv
    }

    fn front_costs(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.costs.clone()).collect()
    }

    /// Hypervolume improvement a candidate cost vector would contribute.
    pub fn hvi(&self, candidate: &[f64]) -> Result<f64> {
        hypervolume::hvi(&self.front_costs(), &self.reference, candidate)
    }

    /// Offers a design to the archive. Dominated or duplicate cost vectors
    /// leave the archive (and its hypervolume) untouched; otherwise entries
    /// dominated by the newcomer are dropped and the hypervolume grows by
    /// the newcomer's exclusive contribution.
    pub fn insert(&mut self, point: DesignPoint, costs: Vec<f64>) -> Result<InsertOutcome> {
        if costs.len() != self.reference.len() {
            return Err(Error::validation(format!(
                "cost vector has {} objectives but the archive tracks {}",
                costs.len(),
                self.reference.len()
            )));
        }
        if costs.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("cost vector must be finite"));
        }
        let covered = self
            .entries
            .iter()
            .any(|e| e.costs.iter().zip(&costs).all(|(a, b)| a <= b));
        if covered {
            return Ok(InsertOutcome::Dominated);
        }
        let hv_gain = self.hvi(&costs)?;
        self.entries
            .retain(|e| !dominates_unchecked(&costs, &e.costs));
        self.entries.push(ArchiveEntry { point, costs });
        self.hv += hv_gain;
        Ok(InsertOutcome::Inserted { hv_gain })
    }

    /// Recomputes the hypervolume from scratch. The incremental value drifts
    /// from this by floating-point accumulation only; tests pin the two
    /// together.
    pub fn recompute_hypervolume(&self) -> Result<f64> {
        hypervolume::hypervolume_exact(&self.front_costs(), &self.reference)
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn dominance_requires_strict_improvement_somewhere() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[2.0, 2.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]).unwrap());
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(dominates(&[1.0], &[2.0]).is_ok());
        assert!(dominates(&[1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn reference_adds_margin_per_dimension() {
        let costs = vec![vec![0.0, 10.0], vec![4.0, 30.0]];
        let r = reference_from_costs(&costs, 0.1).unwrap();
        assert_relative_eq!(r[0], 4.4);
        assert_relative_eq!(r[1], 32.0);
    }

    #[test]
    fn archive_tracks_front_and_hypervolume() {
        let mut archive = ParetoArchive::new(vec![3.0, 3.0]).unwrap();
        let out = archive
            .insert(DesignPoint::new(vec![0]), vec![1.0, 2.0])
            .unwrap();
        assert_eq!(out, InsertOutcome::Inserted { hv_gain: 2.0 });
        let out = archive
            .insert(DesignPoint::new(vec![1]), vec![2.0, 1.0])
            .unwrap();
        assert_eq!(out, InsertOutcome::Inserted { hv_gain: 1.0 });
        assert_relative_eq!(archive.hypervolume(), 3.0);

        // Dominated and duplicate vectors bounce off.
        let out = archive
            .insert(DesignPoint::new(vec![2]), vec![2.5, 2.5])
            .unwrap();
        assert_eq!(out, InsertOutcome::Dominated);
        let out = archive
            .insert(DesignPoint::new(vec![3]), vec![1.0, 2.0])
            .unwrap();
        assert_eq!(out, InsertOutcome::Dominated);
        assert_eq!(archive.len(), 2);

        // A dominating point replaces what it covers.
        let out = archive
            .insert(DesignPoint::new(vec![4]), vec![0.5, 0.5])
            .unwrap();
        assert_eq!(out, InsertOutcome::Inserted { hv_gain: 3.25 });
        assert_eq!(archive.len(), 1);
        assert_relative_eq!(archive.hypervolume(), 6.25);
        assert_relative_eq!(archive.recompute_hypervolume().unwrap(), 6.25);
    }

    #[test]
    fn entries_beyond_reference_are_kept_but_contribute_nothing() {
        let mut archive = ParetoArchive::new(vec![1.0, 1.0]).unwrap();
        let out = archive
            .insert(DesignPoint::new(vec![0]), vec![0.5, 2.0])
            .unwrap();
        assert_eq!(out, InsertOutcome::Inserted { hv_gain: 0.0 });
        assert_eq!(archive.len(), 1);
        assert_eq!(archive.hypervolume(), 0.0);

        let out = archive
            .insert(DesignPoint::new(vec![1]), vec![0.6, 0.5])
            .unwrap();
        match out {
            InsertOutcome::Inserted { hv_gain } => assert_relative_eq!(hv_gain, 0.2),
            other => panic!("expected insertion, got {other:?}"),
        }
        assert_eq!(archive.len(), 2);
    }

    proptest! {
        #[test]
        fn dominance_is_a_strict_partial_order(
            a in proptest::collection::vec(0.0f64..1.0, 4),
            b in proptest::collection::vec(0.0f64..1.0, 4),
            c in proptest::collection::vec(0.0f64..1.0, 4),
        ) {
            // Irreflexive and asymmetric.
            prop_assert!(!dominates_unchecked(&a, &a));
            if dominates_unchecked(&a, &b) {
                prop_assert!(!dominates_unchecked(&b, &a));
            }
            // Transitive.
            if dominates_unchecked(&a, &b) && dominates_unchecked(&b, &c) {
                prop_assert!(dominates_unchecked(&a, &c));
            }
        }

        #[test]
        fn archive_entries_stay_mutually_non_dominated(
            batches in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 3),
                1..30,
            ),
        ) {
            let mut archive = ParetoArchive::new(vec![1.0, 1.0, 1.0]).unwrap();
            for (i, costs) in batches.into_iter().enumerate() {
                archive.insert(DesignPoint::new(vec![i]), costs).unwrap();
            }
            let entries = archive.entries();
            for x in entries {
                for y in entries {
                    if x.point != y.point {
                        prop_assert!(!dominates_unchecked(&x.costs, &y.costs)
                            || !dominates_unchecked(&y.costs, &x.costs));
                        prop_assert!(!dominates_unchecked(&x.costs, &y.costs));
                    }
                }
            }
            let recomputed = archive.recompute_hypervolume().unwrap();
            prop_assert!((archive.hypervolume() - recomputed).abs() < 1e-9);
        }
    }
}
