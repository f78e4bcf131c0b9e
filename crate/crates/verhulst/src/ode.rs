//! Fixed-step integration of the growth equation and of the ratio equation,
//! reported against the closed forms.
//!
//! The integrators exist to cross-check the evaluators and to expose their
//! convergence order, so the step is fixed rather than adaptive: an error
//! controller would obscure the order study. Euler is included purely as
//! the first-order contrast to RK4. Integration always starts at `t = 0`.

use thiserror::Error;

use crate::model::{Branch, EvalError, LogisticParams, Trajectory};

/// Largest admissible step count; spans needing more are refused as runaway.
pub const MAX_STEPS: u64 = 100_000_000;

/// Absolute floor on `|1 + R|` below which the ratio-to-population map is
/// treated as singular.
const MAP_GUARD: f64 = 1e-12;

/// Stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classic fourth-order Runge-Kutta.
    Rk4,
    /// Forward Euler, first order.
    Euler,
}

impl Method {
    /// Lower-case tag used in CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        }
    }
}

/// Fixed-step settings. The grid is `t_i = i h` from `0` to `t_end`, with a
/// short final step when `t_end` is not a multiple of `h`; `t_end = 0`
/// degenerates to the single initial sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Step size, `> 0`.
    pub step_h: f64,
    pub method: Method,
    /// End of the integration interval, `>= 0`.
    pub t_end: f64,
}

/// Integration failures.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OdeError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("integration end must be finite and non-negative, got {0}")]
    InvalidSpan(f64),
    #[error("integration would take {required:.0} steps, above the runaway guard of {MAX_STEPS}")]
    StepOverflow { required: f64 },
    #[error("integration interval reaches the asymptote at tau0 = {tau0}")]
    SingularRegion { tau0: f64 },
    #[error("the map P = M / (1 + R) is singular near t = {t}: 1 + R crossed zero")]
    MapSingularity { t: f64 },
    #[error("ratio dynamics are undefined when the initial population is zero")]
    RatioUndefined,
}

/// Numerical trajectory plus error norms against the closed form, both
/// taken at the integrator's own grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationReport {
    pub trajectory: Trajectory,
    /// `max_i |P_i - P(t_i)|`.
    pub max_abs_error: f64,
    /// `sqrt(sum_i (P_i - P(t_i))^2)`.
    pub l2_error: f64,
    /// Steps taken; one fewer than the number of samples.
    pub steps: usize,
}

/// Integrates `dP/dt = k P (1 - P/M)` from `(0, P0)`.
///
/// The interval must not reach the asymptote of a `NegativeStart` branch;
/// that is a property of the problem, so it is rejected up front.
pub fn integrate_logistic(
    params: &LogisticParams,
    config: &IntegratorConfig,
) -> Result<IntegrationReport, OdeError> {
    let n = validate(config)?;
    check_clear_of_asymptote(params, config)?;
    let f = |p: f64| params.growth_rate(p);
    let samples = run_grid(params.initial(), n, config, f);
    report(params, samples)
}

/// Integrates `dR/dt = -k R` from `R0`, then maps each grid value back to
/// the population through `P = M / (1 + R)`; errors are reported in
/// population space.
///
/// Undefined for `FrozenZero` (no finite `R0` exists). On the outside
/// branches `1 + R` crosses zero at the asymptote; a crossing inside the
/// grid surfaces as `MapSingularity`.
pub fn integrate_ratio(
    params: &LogisticParams,
    config: &IntegratorConfig,
) -> Result<IntegrationReport, OdeError> {
    let n = validate(config)?;
    let Some(r0) = params.classify().ratio_r0() else {
        return Err(OdeError::RatioUndefined);
    };
    check_clear_of_asymptote(params, config)?;
    let k = params.rate();
    let f = |r: f64| -k * r;
    let ratio_samples = run_grid(r0, n, config, f);

    let m = params.capacity();
    let denom0 = 1.0 + r0;
    let mut samples = Vec::with_capacity(ratio_samples.len());
    for (t, r) in ratio_samples {
        let denom = 1.0 + r;
        if denom.abs() < MAP_GUARD || denom.signum() != denom0.signum() {
            return Err(OdeError::MapSingularity { t });
        }
        samples.push((t, m / denom));
    }
    report(params, samples)
}

fn validate(config: &IntegratorConfig) -> Result<u64, OdeError> {
    let h = config.step_h;
    if !h.is_finite() || h <= 0.0 {
        return Err(OdeError::InvalidStep(h));
    }
    if !config.t_end.is_finite() || config.t_end < 0.0 {
        return Err(OdeError::InvalidSpan(config.t_end));
    }
    // The 1e-9 slack keeps an exact multiple of h from gaining a step to
    // division rounding.
    let required = (config.t_end / h - 1e-9).ceil().max(0.0);
    if required > MAX_STEPS as f64 {
        return Err(OdeError::StepOverflow { required });
    }
    Ok(required as u64)
}

fn check_clear_of_asymptote(
    params: &LogisticParams,
    config: &IntegratorConfig,
) -> Result<(), OdeError> {
    if let Branch::NegativeStart { tau0, .. } = params.classify() {
        if tau0 <= config.t_end {
            return Err(OdeError::SingularRegion { tau0 });
        }
    }
    Ok(())
}

fn run_grid(y0: f64, n: u64, config: &IntegratorConfig, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let h = config.step_h;
    let mut samples = Vec::with_capacity(n as usize + 1);
    let mut y = y0;
    samples.push((0.0, y));
    for i in 1..=n {
        // Grid times come from multiplication, not accumulation, so they
        // carry no summation drift; the last point is t_end exactly.
        let t_prev = (i - 1) as f64 * h;
        let t = if i == n { config.t_end } else { i as f64 * h };
        let step = t - t_prev;
        y = match config.method {
            Method::Rk4 => rk4_step(&f, y, step),
            Method::Euler => y + step * f(y),
        };
        samples.push((t, y));
    }
    samples
}

fn rk4_step(f: &impl Fn(f64) -> f64, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
}

fn report(params: &LogisticParams, samples: Vec<(f64, f64)>) -> Result<IntegrationReport, OdeError> {
    let branch = params.classify();
    let mut max_abs = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &(t, p) in &samples {
        let reference = params.eval(t).map_err(|e| match e {
            // Only reachable when t_end stops inside the guard band just
            // short of the asymptote; the precheck covers everything else.
            EvalError::SingularInput { tau0, .. } => OdeError::SingularRegion { tau0 },
            EvalError::WrongBranch { .. } => unreachable!("eval is total over branches"),
        })?;
        let err = p - reference;
        max_abs = max_abs.max(err.abs());
        sum_sq += err * err;
    }
    let steps = samples.len() - 1;
    Ok(IntegrationReport {
        trajectory: Trajectory {
            params: *params,
            samples,
            singular_time: branch.singular_time(),
        },
        max_abs_error: max_abs,
        l2_error: sum_sq.sqrt(),
        steps,
    })
}
