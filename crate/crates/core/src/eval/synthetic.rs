//! Synthetic benchmark problems with known Pareto fronts, defined over the
//! continuous embedding of a grid space. They are cheap, but they go
//! through the same [`Evaluator`] interface (and query counter) as the real
//! cost model so optimizer tests exercise the full path.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::objective::{ObjectiveVector, Sense};
use crate::space::{DesignPoint, DesignSpace};

/// The classic two-objective problem with a convex front: at the optimum
/// every trailing coordinate is zero and `f2 = 1 - sqrt(f1)`.
pub struct Zdt1Evaluator {
    space: DesignSpace,
    names: Vec<String>,
    senses: Vec<Sense>,
    queries: AtomicU64,
}

impl Zdt1Evaluator {
    pub fn new(space: DesignSpace) -> Result<Self> {
        if space.dimension() < 2 {
            return Err(Error::validation("zdt1 needs at least two dimensions"));
        }
        Ok(Zdt1Evaluator {
            space,
            names: vec!["f1".to_string(), "f2".to_string()],
            senses: vec![Sense::Minimize, Sense::Minimize],
            queries: AtomicU64::new(0),
        })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }
}

/// ZDT1 on already-encoded coordinates in `[0, 1]^D`.
pub fn zdt1(x: &[f64]) -> (f64, f64) {
    let d = x.len();
    let f1 = x[0];
    let tail: f64 = x[1..].iter().sum();
    let g = 1.0 + 9.0 * tail / (d - 1) as f64;
    let f2 = g * (1.0 - (f1 / g).sqrt());
    (f1, f2)
}

impl Evaluator for Zdt1Evaluator {
    fn objective_names(&self) -> &[String] {
        &self.names
    }

    fn senses(&self) -> &[Sense] {
        &self.senses
    }

    fn evaluate(&self, point: &DesignPoint) -> Result<ObjectiveVector> {
        let x = self.space.encode(point)?;
        let (f1, f2) = zdt1(&x);
        let out = ObjectiveVector::new(vec![f1, f2])?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// The spherical many-objective problem: with the distance coordinates at
/// 0.5 the objective vector lies on the unit sphere, `sum(f^2) = 1`.
pub struct Dtlz2Evaluator {
    space: DesignSpace,
    objectives: usize,
    names: Vec<String>,
    senses: Vec<Sense>,
    queries: AtomicU64,
}

impl Dtlz2Evaluator {
    pub fn new(space: DesignSpace, objectives: usize) -> Result<Self> {
        if objectives < 2 {
            return Err(Error::validation("dtlz2 needs at least two objectives"));
        }
        if space.dimension() < objectives {
            return Err(Error::validation(format!(
                "dtlz2 with {objectives} objectives needs at least {objectives} dimensions"
            )));
        }
        Ok(Dtlz2Evaluator {
            space,
            objectives,
            names: (1..=objectives).map(|i| format!("f{i}")).collect(),
            senses: vec![Sense::Minimize; objectives],
            queries: AtomicU64::new(0),
        })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }
}

/// DTLZ2 on already-encoded coordinates in `[0, 1]^D`.
pub fn dtlz2(x: &[f64], objectives: usize) -> Vec<f64> {
    let m = objectives;
    let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut f = 1.0 + g;
        for v in &x[..m - 1 - j] {
            f *= (v * std::f64::consts::FRAC_PI_2).cos();
        }
        if j > 0 {
            f *= (x[m - 1 - j] * std::f64::consts::FRAC_PI_2).sin();
        }
        out.push(f);
    }
    out
}

impl Evaluator for Dtlz2Evaluator {
    fn objective_names(&self) -> &[String] {
        &self.names
    }

    fn senses(&self) -> &[Sense] {
        &self.senses
    }

    fn evaluate(&self, point: &DesignPoint) -> Result<ObjectiveVector> {
        let x = self.space.encode(point)?;
        let out = ObjectiveVector::new(dtlz2(&x, self.objectives))?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
