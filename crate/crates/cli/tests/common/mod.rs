//! Reference implementations for the acceptance suite. Each is a
//! deliberately naive method that can be audited by hand; the optimized
//! implementations in `crossbow-core` are checked against them.

use crossbow_core::gp::log_marginal_likelihood;
use crossbow_core::gp::{kernel, KernelHyperparams};

/// Floor applied to the target standard deviation before standardizing,
/// mirroring the model's guard against constant targets.
const STD_FLOOR: f64 = 1e-12;

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve_linear_system(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| m[r1][col].abs().total_cmp(&m[r2][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col] != 0.0, "matrix is singular");
        let p = m[col][col];
        for j in col..=n {
            m[col][j] /= p;
        }
        for row in 0..n {
            if row != col && m[row][col] != 0.0 {
                let f = m[row][col];
                for j in col..=n {
                    m[row][j] -= f * m[col][j];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n]).collect()
}

/// Gaussian-process posterior mean and variance in raw target units,
/// computed with dense solves and no Cholesky factorization. Targets are
/// standardized with the population deviation, as the model does.
pub fn gp_posterior_by_dense_solve(
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &KernelHyperparams,
    query: &[f64],
) -> (f64, f64) {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt().max(STD_FLOOR);
    let y_std: Vec<f64> = y.iter().map(|v| (v - mean) / std).collect();

    let noise = hyper.noise_variance();
    let gram: Vec<Vec<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            x.iter()
                .enumerate()
                .map(|(j, xj)| kernel(xi, xj, hyper) + if i == j { noise } else { 0.0 })
                .collect()
        })
        .collect();
    let alpha = solve_linear_system(&gram, &y_std);
    let k_query: Vec<f64> = x.iter().map(|xi| kernel(xi, query, hyper)).collect();
    let mu = k_query.iter().zip(&alpha).map(|(k, a)| k * a).sum::<f64>();
    let gram_inv_k = solve_linear_system(&gram, &k_query);
    let explained = k_query
        .iter()
        .zip(&gram_inv_k)
        .map(|(k, s)| k * s)
        .sum::<f64>();
    let sigma2 = (kernel(query, query, hyper) - explained).max(0.0);
    (mean + std * mu, std * std * sigma2)
}

fn hyper_to_logs(hyper: &KernelHyperparams) -> Vec<f64> {
    let mut logs = vec![hyper.signal_variance().ln()];
    logs.extend(hyper.length_scales().iter().map(|l| l.ln()));
    logs.push(hyper.noise_variance().ln());
    logs
}

fn hyper_from_logs(logs: &[f64]) -> KernelHyperparams {
    KernelHyperparams::new(
        logs[0].exp(),
        logs[1..logs.len() - 1].iter().map(|l| l.exp()).collect(),
        logs[logs.len() - 1].exp(),
    )
    .expect("exponentials are positive")
}

/// Central finite-difference gradient of the log marginal likelihood in
/// log-hyperparameter space.
pub fn mll_gradient_by_central_differences(
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &KernelHyperparams,
    step: f64,
) -> Vec<f64> {
    let logs = hyper_to_logs(hyper);
    (0..logs.len())
        .map(|j| {
            let mut hi = logs.clone();
            let mut lo = logs.clone();
            hi[j] += step;
            lo[j] -= step;
            let f_hi = log_marginal_likelihood(x, y, &hyper_from_logs(&hi)).unwrap();
            let f_lo = log_marginal_likelihood(x, y, &hyper_from_logs(&lo)).unwrap();
            (f_hi - f_lo) / (2.0 * step)
        })
        .collect()
}

/// Hypervolume by inclusion-exclusion over every non-empty subset of the
/// front. Exponential in the front size; callers keep fronts small.
pub fn hypervolume_by_inclusion_exclusion(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    let n = front.len();
    assert!(n <= 20, "subset enumeration needs a small front");
    let m = reference.len();
    let mut total = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut corner = vec![f64::NEG_INFINITY; m];
        for (i, point) in front.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for d in 0..m {
                    corner[d] = corner[d].max(point[d]);
                }
            }
        }
        let volume: f64 = corner
            .iter()
            .zip(reference)
            .map(|(c, r)| (r - c).max(0.0))
            .product();
        if mask.count_ones() % 2 == 1 {
            total += volume;
        } else {
            total -= volume;
        }
    }
    total
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Indices of the points no other point dominates, by pairwise scan.
pub fn non_dominated_by_pairwise_scan(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && dominates(other, &points[i]))
        })
        .collect()
}

/// Hypervolume of the best front reachable on a ZDT1 grid: first gene at
/// `i / (levels - 1)`, trailing genes at zero, giving the staircase of
/// points `(x, 1 - sqrt(x))` in order of increasing `x` and strictly
/// decreasing second objective.
pub fn zdt1_grid_front_hypervolume(levels: usize, reference: &[f64; 2]) -> f64 {
    let mut hv = 0.0;
    let mut prev_f2 = reference[1];
    for i in 0..levels {
        let x = i as f64 / (levels - 1) as f64;
        let f2 = 1.0 - x.sqrt();
        hv += (reference[0] - x) * (prev_f2 - f2);
        prev_f2 = f2;
    }
    hv
}
