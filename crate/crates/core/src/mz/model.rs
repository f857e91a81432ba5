//! Parameters and closed-form pieces of the non-traded asset model
//!
//! ```text
//! dS = mu S dt + sigma S dW1
//! dY = b(Y, t) dt + a(Y, t) (rho dW1 + sqrt(1 - rho^2) dW2)
//! ```
//!
//! with a European claim `g(Y_T)` and exponential agents.

use crate::error::{Error, Result};
use crate::utility::Role;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

/// Coefficient function of `(y, t)` from a small catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `intercept + slope * y`
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// `kappa * (mean - y)`
    MeanReverting {
        kappa: f64,
        mean: f64,
    },
}

impl Coefficient {
    pub fn eval(&self, y: f64, _t: f64) -> f64 {
        match *self {
            Coefficient::Constant { value } => value,
            Coefficient::Linear { intercept, slope } => intercept + slope * y,
            Coefficient::MeanReverting { kappa, mean } => kappa * (mean - y),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match *self {
            Coefficient::Constant { value } => value.is_finite(),
            Coefficient::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Coefficient::MeanReverting { kappa, mean } => kappa.is_finite() && mean.is_finite(),
        };
        if !finite {
            return Err(Error::InvalidParameter {
                name: "coefficient parameters must be finite",
                value: f64::NAN,
            });
        }
        Ok(())
    }
}

/// Bounded payoff `g` from a small catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    Constant {
        value: f64,
    },
    /// `min(max(y - strike, 0), cap)`
    CappedCall {
        strike: f64,
        cap: f64,
    },
    /// `min(max(strike - y, 0), cap)`
    CappedPut {
        strike: f64,
        cap: f64,
    },
    /// `y` clamped to `[lower, upper]`
    ClampedLinear {
        lower: f64,
        upper: f64,
    },
}

impl Payoff {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Payoff::Constant { value } => value,
            Payoff::CappedCall { strike, cap } => (y - strike).max(0.0).min(cap),
            Payoff::CappedPut { strike, cap } => (strike - y).max(0.0).min(cap),
            Payoff::ClampedLinear { lower, upper } => y.max(lower).min(upper),
        }
    }

    /// `(inf g, sup g)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Payoff::Constant { value } => (value, value),
            Payoff::CappedCall { cap, .. } | Payoff::CappedPut { cap, .. } => (0.0, cap),
            Payoff::ClampedLinear { lower, upper } => (lower, upper),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Payoff::Constant { value } => value.is_finite(),
            Payoff::CappedCall { strike, cap } | Payoff::CappedPut { strike, cap } => {
                strike.is_finite() && cap.is_finite() && cap >= 0.0
            }
            Payoff::ClampedLinear { lower, upper } => {
                lower.is_finite() && upper.is_finite() && lower <= upper
            }
        };
        if !ok {
            return Err(Error::InvalidParameter {
                name: "payoff must be bounded",
                value: f64::NAN,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzModel {
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
    /// Diffusion of `Y`.
    pub a: Coefficient,
    /// Drift of `Y` under the physical measure.
    pub b: Coefficient,
    pub g: Payoff,
    pub horizon: f64,
    pub gamma_s: f64,
    pub gamma_b: f64,
    pub x_s: f64,
    pub x_b: f64,
    pub lambda: f64,
}

/// Indifference and risk sharing prices at one `(t, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzPriceResult {
    pub t: f64,
    pub y: f64,
    pub v_s: f64,
    pub v_b: f64,
    pub delta_s: f64,
    pub delta_b: f64,
    pub p_star: f64,
    /// Monte Carlo standard errors of `v_s`, `v_b`; zero for the PDE engine.
    pub stderr_v_s: f64,
    pub stderr_v_b: f64,
}

/// Optimal losses at one time given the indifference prices there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzSharing {
    pub eps_s: f64,
    pub eps_b: f64,
    pub multiplier: f64,
    /// `lambda eps_s + (1 - lambda) eps_b`
    pub total: f64,
}

impl MzModel {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        check(self.mu.is_finite(), "mu", self.mu)?;
        check(
            self.sigma > 0.0 && self.sigma.is_finite(),
            "sigma",
            self.sigma,
        )?;
        check(self.rho > -1.0 && self.rho < 1.0, "rho", self.rho)?;
        check(
            self.horizon > 0.0 && self.horizon.is_finite(),
            "horizon",
            self.horizon,
        )?;
        check(
            self.gamma_s > 0.0 && self.gamma_s.is_finite(),
            "gamma_s",
            self.gamma_s,
        )?;
        check(
            self.gamma_b > 0.0 && self.gamma_b.is_finite(),
            "gamma_b",
            self.gamma_b,
        )?;
        check(self.x_s.is_finite(), "x_s", self.x_s)?;
        check(self.x_b.is_finite(), "x_b", self.x_b)?;
        check(
            self.lambda > 0.0 && self.lambda < 1.0,
            "lambda",
            self.lambda,
        )?;
        self.a.validate()?;
        self.b.validate()?;
        self.g.validate()
    }

    pub fn rho_bar_sq(&self) -> f64 {
        1.0 - self.rho * self.rho
    }

    /// Drift of `Y` under the minimal-entropy measure.
    pub fn q0_drift(&self, y: f64, t: f64) -> f64 {
        self.b.eval(y, t) - self.rho * self.mu / self.sigma * self.a.eval(y, t)
    }

    pub fn gamma(&self, side: Role) -> f64 {
        match side {
            Role::Seller => self.gamma_s,
            Role::Buyer => self.gamma_b,
        }
    }

    pub fn wealth(&self, side: Role) -> f64 {
        match side {
            Role::Seller => self.x_s,
            Role::Buyer => self.x_b,
        }
    }

    /// `delta_t = exp(gamma x + mu^2 (T - t) / (2 sigma^2))`.
    pub fn delta(&self, side: Role, t: f64) -> f64 {
        (self.gamma(side) * self.wealth(side)
            + self.mu * self.mu * (self.horizon - t) / (2.0 * self.sigma * self.sigma))
            .exp()
    }

    /// Exponent `c` in the expectation `E[exp(c g(Y_T))]` defining each
    /// indifference price: `+gamma_s (1 - rho^2)` or `-gamma_b (1 - rho^2)`.
    pub fn exponent(&self, side: Role) -> f64 {
        match side {
            Role::Seller => self.gamma_s * self.rho_bar_sq(),
            Role::Buyer => -self.gamma_b * self.rho_bar_sq(),
        }
    }

    /// Indifference price from `E[exp(c g(Y_T)) | Y_t = y]`.
    pub fn price_from_expectation(&self, side: Role, expectation: f64) -> f64 {
        expectation.ln() / self.exponent(side)
    }

    /// Reservation price at loss `eps` given the indifference price `v`.
    pub fn reservation_price(&self, side: Role, t: f64, v: f64, eps: f64) -> Result<f64> {
        let arg = 1.0 + eps * self.delta(side, t);
        if !(arg > 0.0) {
            return Err(Error::LogDomain(arg));
        }
        Ok(match side {
            Role::Seller => v - arg.ln() / self.gamma_s,
            Role::Buyer => v + arg.ln() / self.gamma_b,
        })
    }

    /// `ln(1 + eps delta_t) / gamma`, the price shift at loss `eps`.
    pub fn lambda_shift(&self, side: Role, t: f64, eps: f64) -> Result<f64> {
        let arg = 1.0 + eps * self.delta(side, t);
        if !(arg > 0.0) {
            return Err(Error::LogDomain(arg));
        }
        Ok(arg.ln() / self.gamma(side))
    }

    /// Risk sharing price from the indifference prices at one time. The ratio
    /// `delta_b / delta_s` does not depend on time.
    pub fn risk_sharing_price(&self, v_s: f64, v_b: f64) -> f64 {
        let (gs, gb, l) = (self.gamma_s, self.gamma_b, self.lambda);
        let total = gs + gb;
        // ln(delta_b / delta_s) without forming either exponential
        let log_ratio = gb * self.x_b - gs * self.x_s;
        (gs * v_s + gb * v_b) / total
            + ((gs * l) / (gb * (1.0 - l))).ln() / total
            + log_ratio / total
    }

    /// Optimal losses at time `t`, with claim-free values `u = -1/delta_t`.
    pub fn sharing(&self, t: f64, v_s: f64, v_b: f64) -> MzSharing {
        let (gs, gb, l) = (self.gamma_s, self.gamma_b, self.lambda);
        let total = gs + gb;
        let us = -1.0 / self.delta(Role::Seller, t);
        let ub = -1.0 / self.delta(Role::Buyer, t);
        let log_m = (gb / total) * (-us * l * gs).ln()
            + (gs / total) * (-ub * (1.0 - l) * gb).ln()
            + gs * gb * (v_s - v_b) / total;
        let m = log_m.exp();
        let eps_s = us + m / (l * gs);
        let eps_b = ub + m / ((1.0 - l) * gb);
        MzSharing {
            eps_s,
            eps_b,
            multiplier: m,
            total: l * eps_s + (1.0 - l) * eps_b,
        }
    }

    /// Assembles a price result from indifference prices.
    pub fn price_result(
        &self,
        t: f64,
        y: f64,
        v_s: f64,
        v_b: f64,
        se: (f64, f64),
    ) -> MzPriceResult {
        MzPriceResult {
            t,
            y,
            v_s,
            v_b,
            delta_s: self.delta(Role::Seller, t),
            delta_b: self.delta(Role::Buyer, t),
            p_star: self.risk_sharing_price(v_s, v_b),
            stderr_v_s: se.0,
            stderr_v_b: se.1,
        }
    }

    /// Mean and standard deviation scale of `Y` used to size grids:
    /// the stationary law for mean-reverting drift with constant
    /// diffusion, otherwise `y0` and `a(y0) sqrt(T)`.
    pub fn scale(&self, y0: f64, t: f64) -> (f64, f64, f64) {
        let a0 = self.a.eval(y0, t).abs();
        match (self.b, self.a) {
            (Coefficient::MeanReverting { kappa, mean }, Coefficient::Constant { value })
                if kappa > 0.0 =>
            {
                let q_mean = mean - self.rho * self.mu * value / (self.sigma * kappa);
                (mean, q_mean, value.abs() / (2.0 * kappa).sqrt())
            }
            _ => (y0, y0, a0 * (self.horizon - t).max(0.0).sqrt()),
        }
    }
}
