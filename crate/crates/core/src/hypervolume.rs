//! Hypervolume indicators under the minimization convention.
//!
//! The hypervolume of a front is the volume of the region dominated by the
//! front and bounded above by a reference point. Points are clipped to the
//! reference box first, so coordinates beyond the reference contribute zero
//! extent instead of failing. The exact routine uses the
//! exclusive-contribution recursion (inclusive box volume minus the
//! hypervolume of the limited set) with a sweep fast path for two
//! objectives, and is capped at [`MAX_EXACT_OBJECTIVES`]; beyond that the
//! Monte Carlo estimator is the supported path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;

/// Upper bound on objective count for the exact algorithm.
pub const MAX_EXACT_OBJECTIVES: usize = 6;

/// Samples drawn per seeded chunk of the Monte Carlo estimator. Fixing the
/// chunk layout (rather than the thread count) keeps estimates identical
/// between parallel and sequential builds.
const MC_CHUNK: usize = 16384;

fn validate_front(front: &[Vec<f64>], reference: &[f64]) -> Result<()> {
    if reference.is_empty() {
        return Err(Error::validation("reference point must be non-empty"));
    }
    if reference.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("reference point must be finite"));
    }
    for (i, p) in front.iter().enumerate() {
        if p.len() != reference.len() {
            return Err(Error::validation(format!(
                "front point {} has {} objectives but the reference has {}",
                i,
                p.len(),
                reference.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!("front point {i} must be finite")));
        }
    }
    Ok(())
}

/// Clips points to the reference box, then drops points with a zero-extent
/// box as well as duplicated or dominated points. The survivors are mutually
/// non-dominated with strictly positive box volume.
fn clipped_non_dominated(front: &[Vec<f64>], reference: &[f64]) -> Vec<Vec<f64>> {
    let clipped: Vec<Vec<f64>> = front
        .iter()
        .map(|p| {
            p.iter()
                .zip(reference)
                .map(|(&v, &r)| v.min(r))
                .collect::<Vec<f64>>()
        })
        .filter(|p| p.iter().zip(reference).all(|(&v, &r)| v < r))
        .collect();
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(clipped.len());
    for (i, p) in clipped.iter().enumerate() {
        let mut skip = false;
        for (j, q) in clipped.iter().enumerate() {
            if i == j {
                continue;
            }
            let weakly = q.iter().zip(p).all(|(a, b)| a <= b);
            if weakly && (q != p || j < i) {
                // q dominates p, or is an earlier duplicate of it.
                skip = true;
                break;
            }
        }
        if !skip {
            kept.push(p.clone());
        }
    }
    kept
}

fn box_volume(point: &[f64], reference: &[f64]) -> f64 {
    point.iter().zip(reference).map(|(&v, &r)| r - v).product()
}

fn componentwise_max(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
}

/// Sweep over a mutually non-dominated 2-D front: sorted by the first
/// objective ascending, the second objective descends strictly, and each
/// point adds the rectangle between its predecessor's height and its own.
fn hv_two(points: &mut [Vec<f64>], reference: &[f64]) -> f64 {
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    let mut prev_second = reference[1];
    let mut total = 0.0;
    for p in points {
        total += (reference[0] - p[0]) * (prev_second - p[1]);
        prev_second = p[1];
    }
    total
}

/// Exclusive-contribution recursion. `points` must be mutually
/// non-dominated, clipped, and have positive box volumes.
fn hv_recursive(points: &mut Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    match points.len() {
        0 => return 0.0,
        1 => return box_volume(&points[0], reference),
        _ => {}
    }
    if reference.len() == 2 {
        return hv_two(points, reference);
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    let mut total = 0.0;
    for i in 0..points.len() {
        let p = &points[i];
        let inclusive = box_volume(p, reference);
        let limited: Vec<Vec<f64>> = points[i + 1..]
            .iter()
            .map(|q| componentwise_max(p, q))
            .collect();
        let mut limited = clipped_non_dominated(&limited, reference);
        total += inclusive - hv_recursive(&mut limited, reference);
    }
    total
}

/// Exact hypervolume of `front` with respect to `reference`, both in the
/// minimization convention. An empty front has hypervolume zero.
pub fn hypervolume_exact(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    validate_front(front, reference)?;
    if reference.len() > MAX_EXACT_OBJECTIVES {
        return Err(Error::TooManyObjectives {
            got: reference.len(),
            max: MAX_EXACT_OBJECTIVES,
        });
    }
    if reference.len() == 1 {
        let best = front
            .iter()
            .map(|p| p[0].min(reference[0]))
            .fold(reference[0], f64::min);
        return Ok(reference[0] - best);
    }
    let mut points = clipped_non_dominated(front, reference);
    Ok(hv_recursive(&mut points, reference))
}

/// Hypervolume improvement of `candidate` over `front`: the exclusive volume
/// the candidate would add, i.e. `hv(front + candidate) - hv(front)`. Zero
/// when the candidate is dominated by (or equal to) the front or lies
/// outside the reference box.
pub fn hvi(front: &[Vec<f64>], reference: &[f64], candidate: &[f64]) -> Result<f64> {
    validate_front(front, reference)?;
    if candidate.len() != reference.len() || candidate.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(
            "candidate must be finite and match the reference dimension",
        ));
    }
    if reference.len() > MAX_EXACT_OBJECTIVES {
        return Err(Error::TooManyObjectives {
            got: reference.len(),
            max: MAX_EXACT_OBJECTIVES,
        });
    }
    let clipped: Vec<f64> = candidate
        .iter()
        .zip(reference)
        .map(|(&v, &r)| v.min(r))
        .collect();
    if clipped.iter().zip(reference).any(|(&v, &r)| v >= r) {
        return Ok(0.0);
    }
    let inclusive = box_volume(&clipped, reference);
    let points = clipped_non_dominated(front, reference);
    let limited: Vec<Vec<f64>> = points
        .iter()
        .map(|q| componentwise_max(&clipped, q))
        .collect();
    let mut limited = clipped_non_dominated(&limited, reference);
    let exclusive = inclusive - hv_recursive(&mut limited, reference);
    // The recursion is exact, but subtraction can leave a tiny negative
    // residue when the candidate is fully covered.
    Ok(exclusive.max(0.0))
}

/// Monte Carlo hypervolume estimate: `(estimate, standard_error)`. Samples
/// are drawn uniformly from the box spanned by the componentwise minimum of
/// the clipped front and the reference point, in fixed-size chunks with one
/// generator per chunk, so the estimate depends only on `n_samples` and
/// `seed`.
pub fn hypervolume_mc(
    front: &[Vec<f64>],
    reference: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    validate_front(front, reference)?;
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be at least 1"));
    }
    let points = clipped_non_dominated(front, reference);
    if points.is_empty() {
        return Ok((0.0, 0.0));
    }
    let m = reference.len();
    let mut lower = vec![f64::INFINITY; m];
    for p in &points {
        for d in 0..m {
            lower[d] = lower[d].min(p[d]);
        }
    }
    let volume: f64 = lower
        .iter()
        .zip(reference)
        .map(|(&lo, &r)| r - lo)
        .product();
    if volume <= 0.0 {
        return Ok((0.0, 0.0));
    }

    let n_chunks = n_samples.div_ceil(MC_CHUNK);
    let chunk_ids: Vec<usize> = (0..n_chunks).collect();
    let hits = par::map_collect(&chunk_ids, |&chunk| {
        let len = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64 + 1);
        let mut sample = vec![0.0f64; m];
        let mut count = 0u64;
        for _ in 0..len {
            for d in 0..m {
                sample[d] = lower[d] + rng.random::<f64>() * (reference[d] - lower[d]);
            }
            if points
                .iter()
                .any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s))
            {
                count += 1;
            }
        }
        count
    });
    let dominated: u64 = hits.iter().sum();
    let fraction = dominated as f64 / n_samples as f64;
    let estimate = volume * fraction;
    let std_error = volume * (fraction * (1.0 - fraction) / n_samples as f64).sqrt();
    Ok((estimate, std_error))
}
