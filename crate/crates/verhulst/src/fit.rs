//! Parameter estimation from `(t, P)` observations.
//!
//! Two paths: [`fit_ratio_linear`] exploits the exact linearization
//! `ln R(t) = ln R0 - k t` of the niche ratio when the capacity is known,
//! and [`fit_full`] refines all three parameters by damped Gauss-Newton on
//! the population residuals. The refinement works in
//! `(ln M, ln k, ln |R0|)`, which keeps every parameter positive without
//! constraints and makes the steps scale-free; the sign of `R0` is fixed by
//! the starting branch, so decay-from-above data can be fitted by passing
//! an explicit interior-of-that-branch starting point.

use thiserror::Error;

use crate::model::LogisticParams;

const MAX_ITERATIONS: usize = 200;
/// An accepted step improving the residual sum by less than this relative
/// amount ends the iteration as converged.
const RSS_RELATIVE_TOL: f64 = 1e-12;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e100;

/// Ordered observations: strictly increasing times, finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    points: Vec<(f64, f64)>,
}

/// Rejected observation data. Rows are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SeriesError {
    #[error("time series is empty")]
    Empty,
    #[error("row {row}: time {t} does not increase over the previous row's {prev}")]
    NonIncreasingTime { row: usize, t: f64, prev: f64 },
    #[error("row {row}: non-finite value {value}")]
    NonFinite { row: usize, value: f64 },
}

impl TimeSeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, SeriesError> {
        if points.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (i, &(t, p)) in points.iter().enumerate() {
            let row = i + 1;
            if !t.is_finite() {
                return Err(SeriesError::NonFinite { row, value: t });
            }
            if !p.is_finite() {
                return Err(SeriesError::NonFinite { row, value: p });
            }
            if i > 0 {
                let prev = points[i - 1].0;
                if t <= prev {
                    return Err(SeriesError::NonIncreasingTime { row, t, prev });
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    RatioLinearized,
    NonlinearLS,
}

impl FitMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FitMethod::RatioLinearized => "RatioLinearized",
            FitMethod::NonlinearLS => "NonlinearLS",
        }
    }
}

/// Estimated parameters with residual diagnostics.
///
/// `converged = false` still carries the best parameters found; whether
/// they are usable is the caller's call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub params: LogisticParams,
    pub method: FitMethod,
    /// Sum of squared residuals in population space.
    pub rss: f64,
    pub converged: bool,
    /// Gauss-Newton iterations spent; 0 for the direct linearized solve.
    pub iterations: usize,
}

/// Estimation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("known capacity must be positive and finite, got {0}")]
    InvalidCapacity(f64),
    #[error("row {row}: population {value} is not below the known capacity {capacity}")]
    CapacityTooSmall { row: usize, value: f64, capacity: f64 },
    #[error("row {row}: population {value} must be positive for the ratio transform")]
    NonPositiveObservation { row: usize, value: f64 },
    #[error("starting point is unusable: {0}")]
    InvalidInit(String),
    #[error("data does not determine the parameters: {0}")]
    DegenerateData(String),
}

/// Fits `k` and `P0` with the capacity known, by ordinary least squares on
/// the exact linearization `ln R(t) = ln R0 - k t`, `R = (M - P)/P`.
///
/// Needs interior data: every observation strictly inside `(0, known_m)`.
/// `rss` is reported in population space, like [`fit_full`]'s.
pub fn fit_ratio_linear(data: &TimeSeries, known_m: f64) -> Result<FitResult, FitError> {
    if !known_m.is_finite() || known_m <= 0.0 {
        return Err(FitError::InvalidCapacity(known_m));
    }
    let pts = data.points();
    if pts.len() < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: pts.len() });
    }
    for (i, &(_, p)) in pts.iter().enumerate() {
        if p <= 0.0 {
            return Err(FitError::NonPositiveObservation { row: i + 1, value: p });
        }
        if p >= known_m {
            return Err(FitError::CapacityTooSmall { row: i + 1, value: p, capacity: known_m });
        }
    }
    let log_ratio: Vec<(f64, f64)> =
        pts.iter().map(|&(t, p)| (t, ((known_m - p) / p).ln())).collect();
    let (slope, intercept) = ols(&log_ratio)?;
    let k = -slope;
    if !k.is_finite() || k <= 0.0 {
        return Err(FitError::DegenerateData(
            "the log-ratio slope is not negative, so the data shows no decay toward the capacity"
                .into(),
        ));
    }
    let r0 = intercept.exp();
    let p0 = known_m / (1.0 + r0);
    let params = LogisticParams::new(known_m, k, p0)
        .map_err(|e| FitError::DegenerateData(e.to_string()))?;
    let rss = pts
        .iter()
        .map(|&(t, p)| {
            let r = p - params.eval(t).expect("interior evaluation is total");
            r * r
        })
        .sum();
    Ok(FitResult {
        params,
        method: FitMethod::RatioLinearized,
        rss,
        converged: true,
        iterations: 0,
    })
}

/// Fits `(M, k, P0)` by damped Gauss-Newton (Levenberg-Marquardt style) on
/// the population residuals, with analytic derivatives.
///
/// With no starting point the fit self-initializes for interior data:
/// `M = 1.05 max P`, then the linearized path for `k` and `R0`. An
/// exhausted iteration budget is not an error; the result comes back with
/// `converged = false` and the best parameters found.
pub fn fit_full(data: &TimeSeries, init: Option<LogisticParams>) -> Result<FitResult, FitError> {
    let pts = data.points();
    if pts.len() < 4 {
        return Err(FitError::TooFewPoints { needed: 4, got: pts.len() });
    }
    let (theta, sign) = match init {
        Some(params) => init_from_params(&params)?,
        None => self_init(pts)?,
    };
    let mut result = levenberg_marquardt(pts, theta, sign)?;
    if pts.iter().all(|&(_, p)| p == pts[0].1) {
        // A constant series is fitted exactly by arbitrarily small rates:
        // k is unidentifiable, and that must not read as success.
        result.converged = false;
    }
    Ok(result)
}

fn init_from_params(params: &LogisticParams) -> Result<([f64; 3], f64), FitError> {
    let branch = params.classify();
    let Some(r0) = branch.ratio_r0() else {
        return Err(FitError::InvalidInit(
            "a frozen-zero start has no ratio to refine".into(),
        ));
    };
    if r0 == 0.0 {
        return Err(FitError::InvalidInit(
            "a frozen-capacity start pins R0 = 0, leaving the rate free".into(),
        ));
    }
    Ok((
        [params.capacity().ln(), params.rate().ln(), r0.abs().ln()],
        r0.signum(),
    ))
}

fn self_init(pts: &[(f64, f64)]) -> Result<([f64; 3], f64), FitError> {
    // The series is validated, so every observation is finite.
    let p_max = pts.iter().map(|&(_, p)| p).fold(f64::NEG_INFINITY, f64::max);
    if p_max <= 0.0 {
        return Err(FitError::DegenerateData(
            "no positive observations to start from".into(),
        ));
    }
    let m0 = 1.05 * p_max;
    if !m0.is_finite() {
        return Err(FitError::DegenerateData("observations overflow the capacity guess".into()));
    }
    // Ratio transform of the usable observations. Noisy points at or below
    // zero carry no ratio information and are skipped here; the refinement
    // still sees every point.
    let usable: Vec<(f64, f64)> = pts
        .iter()
        .filter(|&&(_, p)| p > 0.0)
        .map(|&(t, p)| (t, ((m0 - p) / p).ln()))
        .collect();
    let linearized = if usable.len() >= 2 { ols(&usable).ok() } else { None };
    let (k0, log_r0) = match linearized {
        Some((slope, intercept)) if slope < 0.0 => (-slope, intercept),
        // Flat or rising log ratio: no decay visible. Start from the data's
        // own scales and let the refinement decide.
        _ => {
            let span = pts[pts.len() - 1].0 - pts[0].0;
            let k0 = 1.0 / span;
            let &(t_first, y_first) = usable.first().expect("p_max > 0 gives a usable point");
            (k0, y_first + k0 * t_first)
        }
    };
    Ok(([m0.ln(), k0.ln(), log_r0], 1.0))
}

/// Least-squares line through `(x, y)` pairs; returns `(slope, intercept)`.
fn ols(points: &[(f64, f64)]) -> Result<(f64, f64), FitError> {
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    if sxx <= 0.0 {
        return Err(FitError::DegenerateData("time values have zero variance".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, y_mean - slope * x_mean))
}

/// `1 / (1 + e^{-u})` without overflow on either tail.
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Model value for `theta = (ln M, ln k, ln |R0|)` and the sign of `R0`.
///
/// With `u = k t - ln |R0|`: interior (`sign > 0`) is `M sigmoid(u)`;
/// outside (`sign < 0`) is `M / (-expm1(-u))`, exact through the tails.
fn predict(theta: &[f64; 3], sign: f64, t: f64) -> f64 {
    let m = theta[0].exp();
    let k = theta[1].exp();
    let u = k * t - theta[2];
    if sign > 0.0 {
        m * sigmoid(u)
    } else {
        m / (-(-u).exp_m1())
    }
}

fn residual_rss(pts: &[(f64, f64)], theta: &[f64; 3], sign: f64) -> f64 {
    pts.iter()
        .map(|&(t, p)| {
            let r = p - predict(theta, sign, t);
            r * r
        })
        .sum()
}

/// Normal equations of the Gauss-Newton step: `a = J^T J`, `g = J^T r`
/// with `J = d predict / d theta` and `r` the residuals.
fn normal_equations(pts: &[(f64, f64)], theta: &[f64; 3], sign: f64) -> ([[f64; 3]; 3], [f64; 3]) {
    let k = theta[1].exp();
    let mut a = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    for &(t, p_obs) in pts {
        let u = k * t - theta[2];
        let pred = predict(theta, sign, t);
        // gfac = R0 e^{-u-ish} / (1 + R0 e^{...}): the shared factor of the
        // k and R0 derivatives, stable on both branches.
        let gfac = if sign > 0.0 { sigmoid(-u) } else { -1.0 / u.exp_m1() };
        let j = [pred, pred * gfac * (k * t), -(pred * gfac)];
        let r = p_obs - pred;
        for row in 0..3 {
            g[row] += j[row] * r;
            for col in 0..3 {
                a[row][col] += j[row] * j[col];
            }
        }
    }
    (a, g)
}

/// Solves the damped 3x3 system by Gaussian elimination with partial
/// pivoting; `None` when the system is numerically singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot_row = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !a[pivot_row][col].is_finite() || a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col];
        for row in (col + 1)..3 {
            let factor = a[row][col] / pivot[col];
            for (entry, p) in a[row].iter_mut().zip(pivot).skip(col) {
                *entry -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut sum = b[row];
        for col in (row + 1)..3 {
            sum -= a[row][col] * x[col];
        }
        x[row] = sum / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

fn levenberg_marquardt(
    pts: &[(f64, f64)],
    start: [f64; 3],
    sign: f64,
) -> Result<FitResult, FitError> {
    let mut theta = start;
    let mut rss = residual_rss(pts, &theta, sign);
    let mut lambda = LAMBDA_INIT;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        let (a, g) = normal_equations(pts, &theta, sign);
        let max_diag = a[0][0].max(a[1][1]).max(a[2][2]);
        let mut damped = a;
        for j in 0..3 {
            // Marquardt scaling with a floor, so a dead column cannot zero
            // out its own damping.
            let d = a[j][j].max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
            damped[j][j] += lambda * d;
        }
        let step = solve3(damped, g);
        let trial_rss = step.map(|s| {
            // The clamp keeps exp(theta) a positive finite number; a fit
            // walking toward a boundary stalls there instead of producing
            // a zero or infinite parameter.
            let trial = [
                (theta[0] + s[0]).clamp(-700.0, 700.0),
                (theta[1] + s[1]).clamp(-700.0, 700.0),
                (theta[2] + s[2]).clamp(-700.0, 700.0),
            ];
            (residual_rss(pts, &trial, sign), trial)
        });
        match trial_rss {
            Some((t_rss, trial)) if t_rss.is_finite() && t_rss <= rss => {
                let drop = rss - t_rss;
                theta = trial;
                let plateau = drop <= RSS_RELATIVE_TOL * rss.max(f64::MIN_POSITIVE);
                rss = t_rss;
                lambda = (lambda / 10.0).max(1e-15);
                if plateau {
                    converged = true;
                    break;
                }
            }
            _ => {
                lambda *= 10.0;
                if lambda > LAMBDA_MAX {
                    break;
                }
            }
        }
    }

    let m = theta[0].exp();
    let k = theta[1].exp();
    let r0 = sign * theta[2].exp();
    let p0 = m / (1.0 + r0);
    let params = LogisticParams::new(m, k, p0).map_err(|e| {
        FitError::DegenerateData(format!("the refined parameters do not define a model: {e}"))
    })?;
    Ok(FitResult {
        params,
        method: FitMethod::NonlinearLS,
        rss,
        converged,
        iterations,
    })
}
