//! Shared test oracles, kept independent of the library's solver paths.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use fracbs::caputo::L1Weights;
use fracbs::model::{GridSpec, MarketParams, UpperBoundary};

/// Dense Gaussian elimination with partial pivoting. The reference the
/// tridiagonal solver is checked against.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = matrix.len();
    let mut aug: Vec<Vec<f64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| {
            aug[i][col]
                .abs()
                .partial_cmp(&aug[j][col].abs())
                .unwrap()
        })?;
        if aug[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        aug.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = aug[row][col] / aug[col][col];
            for k in col..=n {
                aug[row][k] -= factor * aug[col][k];
            }
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = aug[row][n];
        for k in row + 1..n {
            acc -= aug[row][k] * x[k];
        }
        x[row] = acc / aug[row][row];
    }
    Some(x)
}

/// Expands a tridiagonal system into its dense form.
pub fn dense_from_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let m = diag.len();
    let mut full = vec![vec![0.0; m]; m];
    for i in 0..m {
        full[i][i] = diag[i];
        if i > 0 {
            full[i][i - 1] = lower[i - 1];
        }
        if i + 1 < m {
            full[i][i + 1] = upper[i];
        }
    }
    full
}

/// Naive stepper for the fully implicit scheme, written directly from the
/// update formulas with a dense solve. Used as the θ = 0 reduction oracle.
pub fn implicit_reference_surface(
    params: &MarketParams,
    grid: &GridSpec,
    weights: &L1Weights,
) -> Vec<Vec<f64>> {
    let n = grid.space_intervals;
    let steps = grid.time_steps;
    let dt = grid.dt(params.maturity);
    let dx = grid.dx();
    let coeffs = params.coefficients();
    let d = weights.scale();
    let diffuse = coeffs.diffusion * d / (dx * dx);
    let convect = coeffs.drift * d / (2.0 * dx);
    let m = n - 1;

    let mut dense = vec![vec![0.0; m]; m];
    for i in 0..m {
        dense[i][i] = 1.0 + 2.0 * diffuse + coeffs.reaction * d;
        if i > 0 {
            dense[i][i - 1] = -(diffuse - convect);
        }
        if i + 1 < m {
            dense[i][i + 1] = -(diffuse + convect);
        }
    }

    let q = |t: f64| {
        fracbs::model::upper_boundary(t, params, grid.x_max, UpperBoundary::PayoffCompatible)
    };
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    levels.push(
        (1..n)
            .map(|i| fracbs::model::call_payoff(grid.node(i), params.strike))
            .collect(),
    );

    for k in 0..steps {
        let mut rhs = vec![0.0; m];
        if k == 0 {
            rhs.clone_from(&levels[0]);
        } else {
            for j in 0..k {
                let w = weights.weight(j) - weights.weight(j + 1);
                for i in 0..m {
                    rhs[i] += w * levels[k - j][i];
                }
            }
            let w0 = weights.weight(k);
            for i in 0..m {
                rhs[i] += w0 * levels[0][i];
            }
        }
        rhs[m - 1] += (diffuse + convect) * q((k + 1) as f64 * dt);
        levels.push(dense_solve(&dense, &rhs).expect("reference solve"));
    }
    levels
}

/// Naive stepper for the fully explicit scheme (no linear solve at all).
/// Used as the θ = 1 reduction oracle.
pub fn explicit_reference_surface(
    params: &MarketParams,
    grid: &GridSpec,
    weights: &L1Weights,
) -> Vec<Vec<f64>> {
    let n = grid.space_intervals;
    let steps = grid.time_steps;
    let dt = grid.dt(params.maturity);
    let dx = grid.dx();
    let coeffs = params.coefficients();
    let d = weights.scale();
    let diffuse = coeffs.diffusion * d / (dx * dx);
    let convect = coeffs.drift * d / (2.0 * dx);
    let m = n - 1;

    let q = |t: f64| {
        fracbs::model::upper_boundary(t, params, grid.x_max, UpperBoundary::PayoffCompatible)
    };
    let apply_b = |v: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let mut acc = -(2.0 * diffuse + coeffs.reaction * d) * v[i];
                if i > 0 {
                    acc += (diffuse - convect) * v[i - 1];
                }
                if i + 1 < m {
                    acc += (diffuse + convect) * v[i + 1];
                }
                acc
            })
            .collect()
    };

    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    levels.push(
        (1..n)
            .map(|i| fracbs::model::call_payoff(grid.node(i), params.strike))
            .collect(),
    );

    for k in 0..steps {
        let bv = apply_b(&levels[k]);
        let mut next = vec![0.0; m];
        if k == 0 {
            for i in 0..m {
                next[i] = bv[i] + levels[0][i];
            }
        } else {
            for j in 0..k {
                let w = weights.weight(j) - weights.weight(j + 1);
                for i in 0..m {
                    next[i] += w * levels[k - j][i];
                }
            }
            let w0 = weights.weight(k);
            for i in 0..m {
                next[i] += w0 * levels[0][i] + bv[i];
            }
        }
        next[m - 1] += (diffuse + convect) * q(k as f64 * dt);
        levels.push(next);
    }
    levels
}

/// Gaver–Stehfest inversion of a Laplace transform at time t (14 terms).
pub fn gaver_stehfest(transform: impl Fn(f64) -> f64, t: f64) -> f64 {
    const HALF: i64 = 7;
    let factorial = |n: i64| -> f64 { (1..=n).map(|v| v as f64).product::<f64>().max(1.0) };
    let ln2 = std::f64::consts::LN_2;
    let mut acc = 0.0;
    for i in 1..=2 * HALF {
        let mut weight = 0.0;
        let lo = (i + 1) / 2;
        let hi = i.min(HALF);
        for k in lo..=hi {
            weight += (k as f64).powi(HALF as i32) * factorial(2 * k)
                / (factorial(HALF - k)
                    * factorial(k)
                    * factorial(k - 1)
                    * factorial(i - k)
                    * factorial(2 * k - i));
        }
        if (i + HALF) % 2 != 0 {
            weight = -weight;
        }
        acc += weight * transform(i as f64 * ln2 / t);
    }
    acc * ln2 / t
}
