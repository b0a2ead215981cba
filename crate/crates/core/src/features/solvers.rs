//! Per-reader regression solvers behind the WP-coefficient features.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{center_columns, column_means, matrix_from_rows, solve_spd, spd_is_well_conditioned};

/// Ridge added to a singular Gram matrix in [`fit_ols`].
pub const OLS_JITTER: f64 = 1e-8;
/// L2 penalty in [`fit_logistic_skip`]; keeps separable data finite.
pub const LOGISTIC_JITTER: f64 = 1e-6;
pub const LOGISTIC_MAX_ITER: usize = 100;
pub const LOGISTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + crate::linalg::dot(&self.coefficients, row)
    }
}

fn check_shape<R: AsRef<[f64]>>(x: &[R], n_targets: usize) -> Result<usize> {
    if x.len() != n_targets {
        return Err(Error::InvalidArgument(format!(
            "{} design rows but {} targets",
            x.len(),
            n_targets
        )));
    }
    let d = x.first().map(|r| r.as_ref().len()).unwrap_or(0);
    if x.iter().any(|r| r.as_ref().len() != d) {
        return Err(Error::InvalidArgument("ragged design matrix".into()));
    }
    if x.len() < d + 1 {
        return Err(Error::Underdetermined {
            rows: x.len(),
            params: d + 1,
        });
    }
    Ok(d)
}

/// Ordinary least squares with an intercept, via the normal equations on
/// centered data.
pub fn fit_ols<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<LinearFit> {
    let d = check_shape(x, y.len())?;
    let mut xm = matrix_from_rows(x, d);
    let means = column_means(&xm);
    center_columns(&mut xm, &means);
    let y_mean = crate::linalg::mean(y);
    let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - y_mean));

    let gram = xm.transpose() * &xm;
    let rhs = xm.transpose() * yc;
    let beta = if d == 0 {
        DVector::zeros(0)
    } else {
        let solved = if spd_is_well_conditioned(&gram) {
            solve_spd(gram.clone(), &rhs)
        } else {
            None
        };
        match solved {
            Some(b) => b,
            None => {
                let jittered = gram + DMatrix::identity(d, d) * OLS_JITTER;
                solve_spd(jittered, &rhs).ok_or_else(|| Error::Numeric("OLS normal equations are singular".into()))?
            }
        }
    };
    let intercept = y_mean - beta.dot(&means);
    Ok(LinearFit {
        coefficients: beta.iter().copied().collect(),
        intercept,
    })
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares (Newton steps with step halving). A tiny L2 penalty on all
/// parameters keeps the solution finite on separable data.
pub fn fit_logistic_skip<R: AsRef<[f64]>>(x: &[R], skipped: &[bool]) -> Result<LinearFit> {
    let d = check_shape(x, skipped.len())?;
    let n = x.len();
    let positives = skipped.iter().filter(|&&s| s).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateSkipPattern {
            n,
            class: if positives == 0 { "fixated" } else { "skipped" },
        });
    }

    // Centered predictors with a leading intercept column.
    let raw = matrix_from_rows(x, d);
    let means = column_means(&raw);
    let mut z = DMatrix::from_element(n, d + 1, 1.0);
    for j in 0..d {
        for i in 0..n {
            z[(i, j + 1)] = raw[(i, j)] - means[j];
        }
    }
    let y = DVector::from_iterator(n, skipped.iter().map(|&s| if s { 1.0 } else { 0.0 }));

    let objective = |beta: &DVector<f64>| -> f64 {
        let eta = &z * beta;
        let ll: f64 = eta.iter().zip(y.iter()).map(|(&e, &t)| t * e - softplus(e)).sum();
        ll - 0.5 * LOGISTIC_JITTER * beta.norm_squared()
    };

    let mut beta = DVector::zeros(d + 1);
    let mut current = objective(&beta);
    for _ in 0..LOGISTIC_MAX_ITER {
        let eta = &z * &beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| m * (1.0 - m));
        let grad = z.transpose() * (&y - &mu) - &beta * LOGISTIC_JITTER;
        let mut zw = z.clone();
        for (i, mut row) in zw.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let hessian = z.transpose() * zw + DMatrix::identity(d + 1, d + 1) * LOGISTIC_JITTER;
        let step = solve_spd(hessian, &grad).ok_or_else(|| Error::Numeric("logistic Hessian is singular".into()))?;

        let mut t = 1.0;
        let mut candidate = &beta + &step;
        let mut value = objective(&candidate);
        while (value.is_nan() || value < current) && t > 1e-10 {
            t *= 0.5;
            candidate = &beta + &step * t;
            value = objective(&candidate);
        }
        let delta = (&step * t).amax();
        beta = candidate;
        current = value;
        if delta < LOGISTIC_TOL {
            break;
        }
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Numeric("logistic fit diverged".into()));
    }
    let coefficients: Vec<f64> = beta.iter().skip(1).copied().collect();
    let intercept = beta[0] - crate::linalg::dot(&coefficients, means.as_slice());
    Ok(LinearFit {
        coefficients,
        intercept,
    })
}
