//! Closed-form logistic solutions in every branch, the niche-ratio
//! transform, and the growth-rate identities.
//!
//! All quantities are `f64`. Time carries no unit of its own; it is measured
//! in units of `1/k`. Branch classification compares `P0` against `0` and
//! `M` exactly: the degenerate constant solutions are a caller's explicit
//! choice, never a rounding accident.

use thiserror::Error;

/// Half-width of the guard band around the coth asymptote, measured in the
/// scaled time `k (t - tau0) / 2`. Inside the band the hyperbolic forms
/// exceed double range meaninglessly, so evaluation refuses the input
/// instead.
pub const SINGULARITY_GUARD: f64 = 1e-12;

/// Rejected model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("carrying capacity must be positive and finite, got {0}")]
    NonPositiveCapacity(f64),
    #[error("growth rate must be positive and finite, got {0}")]
    NonPositiveRate(f64),
    #[error("initial population must be finite, got {0}")]
    NonFiniteInitial(f64),
}

/// Failures of the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    /// `t` lies inside the guard band around the asymptote at `tau0`.
    #[error("t = {t} is inside the singular guard band around the asymptote at tau0 = {tau0}")]
    SingularInput { t: f64, tau0: f64 },
    /// The operation is defined on `expected` parameters only.
    #[error("{op} is only defined for {expected} parameters, got {actual}")]
    WrongBranch {
        op: &'static str,
        expected: &'static str,
        actual: &'static str,
    },
}

/// Solution family selected by the initial population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `0 < P0 < M`: the S-shaped curve. `r0 = (M - P0)/P0 > 0` and
    /// `tau0 = ln(r0) / k` is the time of the inflection, where `P = M/2`.
    Interior { r0: f64, tau0: f64 },
    /// `P0 > M`: decay toward the capacity along the upper coth arch.
    /// `s0 = (P0 - M)/P0` lies in `(0, 1)` and `tau0 = ln(s0) / k < 0`.
    AboveCapacity { s0: f64, tau0: f64 },
    /// `P0 < 0`: the lower coth arch, diverging to `-inf` as `t` approaches
    /// the asymptote at `tau0 = ln(s0) / k > 0` from below; `s0 > 1`.
    NegativeStart { s0: f64, tau0: f64 },
    /// `P0 = 0`: constant extinction. The ratio `R0` does not exist here.
    FrozenZero,
    /// `P0 = M`: constant saturation; `R0 = 0`.
    FrozenCapacity,
}

impl Branch {
    /// Stable tag used in messages and CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Interior { .. } => "Interior",
            Branch::AboveCapacity { .. } => "AboveCapacity",
            Branch::NegativeStart { .. } => "NegativeStart",
            Branch::FrozenZero => "FrozenZero",
            Branch::FrozenCapacity => "FrozenCapacity",
        }
    }

    /// Transition time: the inflection for interior solutions, the
    /// asymptote for the outside branches. Absent on the frozen branches.
    pub fn tau0(&self) -> Option<f64> {
        match *self {
            Branch::Interior { tau0, .. }
            | Branch::AboveCapacity { tau0, .. }
            | Branch::NegativeStart { tau0, .. } => Some(tau0),
            Branch::FrozenZero | Branch::FrozenCapacity => None,
        }
    }

    /// Initial niche ratio `R0 = (M - P0)/P0`, negative on the outside
    /// branches (`R0 = -s0`). Absent only for `FrozenZero`, which the
    /// ratio formulation cannot represent finitely.
    pub fn ratio_r0(&self) -> Option<f64> {
        match *self {
            Branch::Interior { r0, .. } => Some(r0),
            Branch::AboveCapacity { s0, .. } | Branch::NegativeStart { s0, .. } => Some(-s0),
            Branch::FrozenZero => None,
            Branch::FrozenCapacity => Some(0.0),
        }
    }

    /// `S0 = -R0 = (P0 - M)/P0`, the positive ratio of the coth branches.
    pub fn s0(&self) -> Option<f64> {
        match *self {
            Branch::AboveCapacity { s0, .. } | Branch::NegativeStart { s0, .. } => Some(s0),
            _ => None,
        }
    }

    /// Location of the coth asymptote, when the branch has one.
    pub fn singular_time(&self) -> Option<f64> {
        match *self {
            Branch::AboveCapacity { tau0, .. } | Branch::NegativeStart { tau0, .. } => Some(tau0),
            _ => None,
        }
    }

    /// True for the constant solutions `P = 0` and `P = M`.
    pub fn is_frozen(&self) -> bool {
        matches!(self, Branch::FrozenZero | Branch::FrozenCapacity)
    }
}

/// One model instance `(M, k, P0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    capacity: f64,
    rate: f64,
    initial: f64,
}

impl LogisticParams {
    /// Validates `M > 0` and `k > 0`; `P0` may be any finite real, and
    /// classification is total over it.
    pub fn new(capacity: f64, rate: f64, initial: f64) -> Result<Self, ParamError> {
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(ParamError::NonPositiveCapacity(capacity));
        }
        if !rate.is_finite() || rate <= 0.0 {
            return Err(ParamError::NonPositiveRate(rate));
        }
        if !initial.is_finite() {
            return Err(ParamError::NonFiniteInitial(initial));
        }
        Ok(Self { capacity, rate, initial })
    }

    /// Carrying capacity `M`.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Growth rate `k`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Initial population `P0 = P(0)`.
    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// Branch of the solution through `(0, P0)`, with the ratio and the
    /// transition time computed once so downstream code never re-derives
    /// them inconsistently.
    pub fn classify(&self) -> Branch {
        let (m, k, p0) = (self.capacity, self.rate, self.initial);
        if p0 == 0.0 {
            Branch::FrozenZero
        } else if p0 == m {
            Branch::FrozenCapacity
        } else if p0 > 0.0 && p0 < m {
            let r0 = (m - p0) / p0;
            Branch::Interior { r0, tau0: r0.ln() / k }
        } else {
            let s0 = (p0 - m) / p0;
            let tau0 = s0.ln() / k;
            if p0 > m {
                Branch::AboveCapacity { s0, tau0 }
            } else {
                Branch::NegativeStart { s0, tau0 }
            }
        }
    }

    fn guard(&self, t: f64, tau0: f64) -> Result<(), EvalError> {
        if (self.rate * (t - tau0) / 2.0).abs() < SINGULARITY_GUARD {
            Err(EvalError::SingularInput { t, tau0 })
        } else {
            Ok(())
        }
    }

    /// The textbook form `M / (1 + R0 e^{-kt})`.
    ///
    /// This is the oracle the hyperbolic forms are checked against, not the
    /// workhorse: `e^{-kt}` overflows for large negative `t` where tanh
    /// merely saturates. Defined on every branch except `FrozenZero`. On
    /// the outside branches the denominator crosses zero at `tau0`, and
    /// times inside the guard band are refused.
    pub fn eval_standard(&self, t: f64) -> Result<f64, EvalError> {
        let branch = self.classify();
        let Some(r0) = branch.ratio_r0() else {
            return Err(EvalError::WrongBranch {
                op: "eval_standard",
                expected: "a branch with a defined ratio",
                actual: branch.name(),
            });
        };
        if r0 == 0.0 {
            // FrozenCapacity: dodge 0 * e^{+inf} = NaN for very negative t.
            return Ok(self.capacity);
        }
        if let Some(tau0) = branch.singular_time() {
            self.guard(t, tau0)?;
        }
        Ok(self.capacity / (1.0 + r0 * (-self.rate * t).exp()))
    }

    /// The canonical interior form `(M/2) (1 + tanh(k (t - tau0) / 2))`.
    ///
    /// Saturates instead of overflowing, so it is preferred for interior
    /// parameters at any real `t`.
    pub fn eval_tanh(&self, t: f64) -> Result<f64, EvalError> {
        match self.classify() {
            Branch::Interior { tau0, .. } => {
                Ok(self.capacity / 2.0 * (1.0 + (self.rate * (t - tau0) / 2.0).tanh()))
            }
            other => Err(EvalError::WrongBranch {
                op: "eval_tanh",
                expected: "Interior",
                actual: other.name(),
            }),
        }
    }

    /// The outside form `(M/2) (1 + coth(k (t - tau0) / 2))` for `P0 > M`
    /// or `P0 < 0`.
    ///
    /// Above capacity the value decays toward `M` along the upper arch;
    /// for negative starts it is negative below `tau0` and diverges at the
    /// asymptote, which the guard band turns into `SingularInput`.
    pub fn eval_coth(&self, t: f64) -> Result<f64, EvalError> {
        match self.classify() {
            Branch::AboveCapacity { tau0, .. } | Branch::NegativeStart { tau0, .. } => {
                self.guard(t, tau0)?;
                let x = self.rate * (t - tau0) / 2.0;
                Ok(self.capacity / 2.0 * (1.0 + 1.0 / x.tanh()))
            }
            other => Err(EvalError::WrongBranch {
                op: "eval_coth",
                expected: "AboveCapacity or NegativeStart",
                actual: other.name(),
            }),
        }
    }

    /// Preferred evaluator: dispatches on the branch.
    ///
    /// Frozen branches return their constant. `t = 0` returns `P0` on every
    /// branch: `P(0) = P0` is an identity of the model, so it is anchored
    /// rather than left to rounding.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if t == 0.0 {
            return Ok(self.initial);
        }
        match self.classify() {
            Branch::FrozenZero => Ok(0.0),
            Branch::FrozenCapacity => Ok(self.capacity),
            Branch::Interior { .. } => self.eval_tanh(t),
            Branch::AboveCapacity { .. } | Branch::NegativeStart { .. } => self.eval_coth(t),
        }
    }

    /// Niche ratio `R(t) = R0 e^{-kt}`; equals `(M - P)/P` along the
    /// solution. Undefined for `FrozenZero`; identically `0` for
    /// `FrozenCapacity`.
    pub fn ratio(&self, t: f64) -> Result<f64, EvalError> {
        let branch = self.classify();
        let Some(r0) = branch.ratio_r0() else {
            return Err(EvalError::WrongBranch {
                op: "ratio",
                expected: "a branch with a defined ratio",
                actual: branch.name(),
            });
        };
        if r0 == 0.0 {
            // As in eval_standard: keep 0 * e^{+inf} from producing NaN.
            return Ok(0.0);
        }
        Ok(r0 * (-self.rate * t).exp())
    }

    /// Right-hand side of the model: `dP/dt = k P (1 - P/M)`, defined for
    /// every real `P`.
    pub fn growth_rate(&self, p: f64) -> f64 {
        self.rate * p * (1.0 - p / self.capacity)
    }

    /// The same rate written around its vertex:
    /// `dP/dt = M k / 4 - (k/M) (P - M/2)^2`.
    ///
    /// Agrees with [`growth_rate`](Self::growth_rate) to rounding; kept as
    /// a separate entry point so the identity stays testable.
    pub fn growth_rate_completed_square(&self, p: f64) -> f64 {
        let d = p - self.capacity / 2.0;
        self.capacity * self.rate / 4.0 - self.rate / self.capacity * d * d
    }

    /// Inflection point of an interior solution, where the growth rate
    /// peaks: `(tau0, M/2, M k / 4)`.
    pub fn max_growth_point(&self) -> Result<MaxGrowthPoint, EvalError> {
        match self.classify() {
            Branch::Interior { tau0, .. } => Ok(MaxGrowthPoint {
                time: tau0,
                population: self.capacity / 2.0,
                rate: self.capacity * self.rate / 4.0,
            }),
            other => Err(EvalError::WrongBranch {
                op: "max_growth_point",
                expected: "Interior",
                actual: other.name(),
            }),
        }
    }
}

/// Peak of the growth curve of an interior solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxGrowthPoint {
    /// Inflection time `tau0`.
    pub time: f64,
    /// Population at the inflection, `M/2`.
    pub population: f64,
    /// Peak growth rate, `M k / 4`.
    pub rate: f64,
}

/// A sampled solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Model the samples belong to.
    pub params: LogisticParams,
    /// `(t, P)` pairs, strictly increasing in `t`; none lies inside the
    /// singular guard band.
    pub samples: Vec<(f64, f64)>,
    /// Asymptote location, when the branch has one.
    pub singular_time: Option<f64>,
}
