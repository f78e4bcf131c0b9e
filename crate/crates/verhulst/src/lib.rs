//! Logistic (Verhulst) population growth, complete over every initial
//! condition.
//!
//! The model is `dP/dt = k P (1 - P/M)` with carrying capacity `M > 0` and
//! rate `k > 0`. With the initial niche ratio `R0 = (M - P0) / P0` the
//! closed-form solution is `P(t) = M / (1 + R0 e^{-kt})`, and the sign of
//! `R0` splits it into branches: the S-shaped curve inside `(0, M)`, a
//! decaying arch above `M`, a finite-time blow-up for negative starts, and
//! the two constant solutions `P = 0` and `P = M`.
//!
//! [`model`] holds the closed forms and derived quantities, [`ode`] the
//! fixed-step integrators used to cross-check them, and [`fit`] the
//! parameter estimators.
//!
//! ```
//! use verhulst::model::LogisticParams;
//!
//! let params = LogisticParams::new(10.0, 0.7, 1.0).unwrap();
//! let mid = params.max_growth_point().unwrap();
//! assert_eq!(mid.population, 5.0);
//! assert!((params.eval(mid.time).unwrap() - 5.0).abs() < 1e-9);
//! ```

pub mod fit;
pub mod model;
pub mod ode;

pub use fit::{fit_full, fit_ratio_linear, FitError, FitMethod, FitResult, SeriesError, TimeSeries};
pub use model::{Branch, EvalError, LogisticParams, MaxGrowthPoint, ParamError, Trajectory};
pub use ode::{integrate_logistic, integrate_ratio, IntegrationReport, IntegratorConfig, Method, OdeError};
