//! Utility functions on wealth, with the derivative data the solvers need.
//!
//! Two domain types are supported: utilities finite on the whole real line
//! (exponential) and utilities finite only for positive wealth (power, log),
//! which evaluate to `-inf` below zero.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Seller,
    Buyer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    WholeLine,
    PositiveHalfLine,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied utility. The inverse marginal must be supplied as well; it
/// is never obtained by numerically inverting `derivative`.
#[derive(Clone)]
pub struct CustomUtility {
    pub eval: ScalarFn,
    pub derivative: ScalarFn,
    pub inverse_derivative: ScalarFn,
    /// Falls back to a central difference of `derivative` when absent.
    pub second_derivative: Option<ScalarFn>,
    pub domain: Domain,
    /// `U(+inf)`, possibly `f64::INFINITY`.
    pub sup_value: f64,
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomUtility")
            .field("domain", &self.domain)
            .field("sup_value", &self.sup_value)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Utility {
    /// `U(w) = -exp(-gamma w)`
    Exponential {
        gamma: f64,
    },
    /// `U(w) = w^(1-r) / (1-r)` on `w > 0`
    Power {
        r: f64,
    },
    /// `U(w) = ln w` on `w > 0`
    Log,
    Custom(CustomUtility),
}

impl Utility {
    pub fn exponential(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "risk aversion",
                value: gamma,
            });
        }
        Ok(Utility::Exponential { gamma })
    }

    /// CRRA utility; `r == 1` is the log utility.
    pub fn power(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "relative risk aversion",
                value: r,
            });
        }
        if r == 1.0 {
            return Ok(Utility::Log);
        }
        Ok(Utility::Power { r })
    }

    pub fn log() -> Self {
        Utility::Log
    }

    /// Wraps user functions after spot-checking monotonicity and concavity
    /// on a grid inside the domain.
    pub fn custom(c: CustomUtility) -> Result<Self> {
        let grid = probe_grid(c.domain);
        let mut prev: Option<(f64, f64, f64)> = None;
        for &w in &grid {
            let (u, du) = ((c.eval)(w), (c.derivative)(w));
            if !(du > 0.0) || !u.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "custom utility must be finite with positive marginal",
                    value: w,
                });
            }
            if let Some((pw, pu, pdu)) = prev {
                if !(u > pu) || !(du < pdu) {
                    return Err(Error::InvalidParameter {
                        name: "custom utility must be strictly increasing and concave",
                        value: w,
                    });
                }
                let _ = pw;
            }
            let back = (c.inverse_derivative)(du);
            if (back - w).abs() > 1e-6 * w.abs().max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "custom inverse marginal disagrees with marginal",
                    value: w,
                });
            }
            prev = Some((w, u, du));
        }
        Ok(Utility::Custom(c))
    }

    pub fn domain(&self) -> Domain {
        match self {
            Utility::Exponential { .. } => Domain::WholeLine,
            Utility::Power { .. } | Utility::Log => Domain::PositiveHalfLine,
            Utility::Custom(c) => c.domain,
        }
    }

    /// True for utilities defined only on positive wealth.
    pub fn is_half_line(&self) -> bool {
        self.domain() == Domain::PositiveHalfLine
    }

    pub fn in_domain(&self, w: f64) -> bool {
        match self.domain() {
            Domain::WholeLine => w.is_finite(),
            Domain::PositiveHalfLine => w > 0.0 && w.is_finite(),
        }
    }

    /// `U(+inf)`.
    pub fn sup_value(&self) -> f64 {
        match *self {
            Utility::Exponential { .. } => 0.0,
            Utility::Power { r } if r > 1.0 => 0.0,
            Utility::Power { .. } | Utility::Log => f64::INFINITY,
            Utility::Custom(ref c) => c.sup_value,
        }
    }

    /// `U(w)`, with `-inf` below the domain.
    pub fn evaluate(&self, w: f64) -> f64 {
        if w.is_nan() {
            return f64::NAN;
        }
        match *self {
            Utility::Exponential { gamma } => -(-gamma * w).exp(),
            Utility::Power { r } => {
                if w < 0.0 || (w == 0.0 && r > 1.0) {
                    f64::NEG_INFINITY
                } else {
                    w.powf(1.0 - r) / (1.0 - r)
                }
            }
            Utility::Log => {
                if w <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    w.ln()
                }
            }
            Utility::Custom(ref c) => {
                if c.domain == Domain::PositiveHalfLine && w <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (c.eval)(w)
                }
            }
        }
    }

    /// `U'(w)` for `w` strictly inside the domain.
    pub fn derivative(&self, w: f64) -> Result<f64> {
        if !self.in_domain(w) {
            return Err(Error::DomainError(w));
        }
        Ok(match *self {
            Utility::Exponential { gamma } => gamma * (-gamma * w).exp(),
            Utility::Power { r } => w.powf(-r),
            Utility::Log => 1.0 / w,
            Utility::Custom(ref c) => (c.derivative)(w),
        })
    }

    pub fn second_derivative(&self, w: f64) -> Result<f64> {
        if !self.in_domain(w) {
            return Err(Error::DomainError(w));
        }
        Ok(match *self {
            Utility::Exponential { gamma } => -gamma * gamma * (-gamma * w).exp(),
            Utility::Power { r } => -r * w.powf(-r - 1.0),
            Utility::Log => -1.0 / (w * w),
            Utility::Custom(ref c) => match &c.second_derivative {
                Some(f) => f(w),
                None => {
                    let mut h = 1e-5 * w.abs().max(1.0);
                    if c.domain == Domain::PositiveHalfLine {
                        h = h.min(0.5 * w);
                    }
                    ((c.derivative)(w + h) - (c.derivative)(w - h)) / (2.0 * h)
                }
            },
        })
    }

    /// The unique `w` with `U'(w) = y`.
    pub fn inverse_derivative(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::NonPositiveMarginal(y));
        }
        Ok(match *self {
            Utility::Exponential { gamma } => -(y / gamma).ln() / gamma,
            Utility::Power { r } => y.powf(-1.0 / r),
            Utility::Log => 1.0 / y,
            Utility::Custom(ref c) => (c.inverse_derivative)(y),
        })
    }

    /// Best-effort check of the asymptotic elasticity conditions on a finite
    /// set of far-out wealth levels. Built-in families satisfy them
    /// analytically and always return `None`; a `Some` is a warning only.
    pub fn asymptotic_elasticity_warning(&self) -> Option<&'static str> {
        let Utility::Custom(c) = self else {
            return None;
        };
        let elasticity = |x: f64| x * (c.derivative)(x) / (c.eval)(x);
        for &x in &[1e2, 1e3, 1e4, 1e5] {
            let u = (c.eval)(x);
            if u > 0.0 && elasticity(x) >= 1.0 {
                return Some("elasticity at +inf does not appear to stay below one");
            }
        }
        if c.domain == Domain::WholeLine {
            for &x in &[-1e1, -1e2, -1e3] {
                let e = elasticity(x);
                if e.is_finite() && e <= 1.0 {
                    return Some("elasticity at -inf does not appear to stay above one");
                }
            }
        }
        None
    }
}

fn probe_grid(domain: Domain) -> Vec<f64> {
    match domain {
        Domain::WholeLine => (0..41).map(|i| -5.0 + 0.25 * i as f64).collect(),
        Domain::PositiveHalfLine => (0..41).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64)).collect(),
    }
}

/// A trading party: preferences, initial wealth, and side of the trade.
#[derive(Debug, Clone)]
pub struct Agent {
    pub utility: Utility,
    pub wealth: f64,
    pub role: Role,
}

impl Agent {
    pub fn new(utility: Utility, wealth: f64, role: Role) -> Result<Self> {
        if !wealth.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial wealth",
                value: wealth,
            });
        }
        Ok(Self {
            utility,
            wealth,
            role,
        })
    }

    pub fn seller(utility: Utility, wealth: f64) -> Result<Self> {
        Self::new(utility, wealth, Role::Seller)
    }

    pub fn buyer(utility: Utility, wealth: f64) -> Result<Self> {
        Self::new(utility, wealth, Role::Buyer)
    }
}
