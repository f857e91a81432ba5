//! Indifference prices and reservation-price curves.
//!
//! With `u(x)` the claim-free value and `eps` a loss of indirect utility:
//!
//! ```text
//! seller  P_s(eps) = phi(u(x) - eps; -B) - x      (+inf when eps <= u(x) - U(+inf))
//! buyer   P_b(eps) = x - phi(u(x) - eps;  B)      (-inf when eps <= u(x) - U(+inf))
//! ```
//!
//! The seller curve is strictly decreasing and convex, the buyer curve
//! strictly increasing and concave.

use alloc::collections::BTreeMap;
use core::cell::RefCell;

use crate::error::{Error, Result};
use crate::market::{arbitrage_bounds, Claim, FiniteMarket};
use crate::utility::{Agent, Role};
use crate::value::ValueFunction;

const CACHE_LIMIT: usize = 1 << 16;

/// Open interval `(lower, upper)`; empty when `lower >= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lower: f64,
    pub upper: f64,
}

impl OpenInterval {
    pub fn is_empty(&self) -> bool {
        !(self.lower < self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lower && v < self.upper
    }
}

/// Reservation-price curve of one agent for one claim.
///
/// Evaluations are memoized per exact `eps`, so a curve is cheap to query
/// repeatedly but is not `Sync`; clone it per thread.
#[derive(Debug, Clone)]
pub struct PriceCurve {
    agent: Agent,
    claim: Claim,
    /// `u(.; -B)` for the seller, `u(.; B)` for the buyer.
    position: ValueFunction,
    /// `u(x)` without the claim.
    benchmark: f64,
    a_lower: f64,
    cache: RefCell<BTreeMap<u64, f64>>,
}

impl PriceCurve {
    pub fn new(market: &FiniteMarket, agent: &Agent, claim: &Claim) -> Result<Self> {
        let held = match agent.role {
            Role::Seller => -claim,
            Role::Buyer => claim.clone(),
        };
        let position = ValueFunction::new(market, &agent.utility, &held)?;
        let free = ValueFunction::new(market, &agent.utility, &Claim::zero(market.n_states()))?;
        let benchmark = free.value(agent.wealth)?;
        Ok(Self {
            agent: agent.clone(),
            claim: claim.clone(),
            position,
            benchmark,
            a_lower: benchmark - agent.utility.sup_value(),
            cache: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn side(&self) -> Role {
        self.agent.role
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    /// Value function of the agent's claim position.
    pub fn position(&self) -> &ValueFunction {
        &self.position
    }

    /// `u(x)`, the claim-free indirect utility at the agent's wealth.
    pub fn benchmark_utility(&self) -> f64 {
        self.benchmark
    }

    /// Left end of the admissible loss set `(u(x) - U(+inf), inf)`.
    pub fn a_lower(&self) -> f64 {
        self.a_lower
    }

    /// Range of finite prices: `(floor - x, inf)` for the seller,
    /// `(-inf, x - floor)` for the buyer, where `floor` is the wealth floor
    /// of the claim position.
    pub fn price_range(&self) -> OpenInterval {
        let floor = self.position.floor();
        let x = self.agent.wealth;
        match self.agent.role {
            Role::Seller => OpenInterval {
                lower: floor - x,
                upper: f64::INFINITY,
            },
            Role::Buyer => OpenInterval {
                lower: f64::NEG_INFINITY,
                upper: x - floor,
            },
        }
    }

    /// Wealth held after trading at `price`.
    pub fn wealth_at(&self, price: f64) -> f64 {
        match self.agent.role {
            Role::Seller => self.agent.wealth + price,
            Role::Buyer => self.agent.wealth - price,
        }
    }

    fn price_from_wealth(&self, w: f64) -> f64 {
        match self.agent.role {
            Role::Seller => w - self.agent.wealth,
            Role::Buyer => self.agent.wealth - w,
        }
    }

    /// Reservation price at loss `eps`, with the infinite branch below the
    /// admissible set.
    pub fn price(&self, eps: f64) -> Result<f64> {
        if eps.is_nan() {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: eps,
            });
        }
        if eps <= self.a_lower {
            return Ok(match self.agent.role {
                Role::Seller => f64::INFINITY,
                Role::Buyer => f64::NEG_INFINITY,
            });
        }
        let key = eps.to_bits();
        if let Some(&p) = self.cache.borrow().get(&key) {
            return Ok(p);
        }
        let w = match self.position.inverse(self.benchmark - eps) {
            Ok(w) => w,
            // below the range of a value function bounded at its floor
            Err(Error::OutOfRange(_)) if self.position.floor().is_finite() => self.position.floor(),
            Err(e) => return Err(e),
        };
        let p = self.price_from_wealth(w);
        let mut cache = self.cache.borrow_mut();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, p);
        Ok(p)
    }

    /// `dP/deps`: `-1/u'(x + P_s; -B)` for the seller, `1/u'(x - P_b; B)`
    /// for the buyer.
    pub fn derivative(&self, eps: f64) -> Result<f64> {
        if !(eps > self.a_lower) || !eps.is_finite() {
            return Err(Error::DomainError(eps));
        }
        let p = self.price(eps)?;
        let du = self.position.marginal(self.wealth_at(p))?;
        Ok(match self.agent.role {
            Role::Seller => -1.0 / du,
            Role::Buyer => 1.0 / du,
        })
    }

    /// Loss of indirect utility when trading at `price`; inverse of
    /// [`price`](Self::price). `+inf` beyond the wealth floor.
    pub fn loss(&self, price: f64) -> Result<f64> {
        Ok(self.benchmark - self.position.value_extended(self.wealth_at(price))?)
    }

    /// Losses whose reservation price is arbitrage-free.
    pub fn nonarbitrage_eps_interval(&self) -> Result<OpenInterval> {
        let bounds = arbitrage_bounds(self.position.market(), &self.claim)?;
        let (lo, hi) = (self.loss(bounds.upper)?, self.loss(bounds.lower)?);
        Ok(match self.agent.role {
            // seller price decreases in eps: sup price <-> smallest loss
            Role::Seller => OpenInterval {
                lower: lo,
                upper: hi,
            },
            Role::Buyer => OpenInterval {
                lower: hi,
                upper: lo,
            },
        })
    }

    /// Indifference price `P(0)`.
    pub fn indifference_price(&self) -> Result<f64> {
        self.price(0.0)
    }
}

/// Seller or buyer indifference price, according to `agent.role`.
pub fn indifference_price(market: &FiniteMarket, agent: &Agent, b: &Claim) -> Result<f64> {
    PriceCurve::new(market, agent, b)?.indifference_price()
}

/// Reservation prices for exponential utility in terms of the indifference
/// price `v` and the claim-free value `u = u(x) < 0`.
pub mod exponential {
    #[allow(unused_imports)] // inherent methods win when std is linked
    use num_traits::Float;

    /// `v - ln(1 - eps/u) / gamma`
    pub fn seller_price(v: f64, gamma: f64, u: f64, eps: f64) -> f64 {
        if eps <= u {
            return f64::INFINITY;
        }
        v - (1.0 - eps / u).ln() / gamma
    }

    /// `v + ln(1 - eps/u) / gamma`
    pub fn buyer_price(v: f64, gamma: f64, u: f64, eps: f64) -> f64 {
        if eps <= u {
            return f64::NEG_INFINITY;
        }
        v + (1.0 - eps / u).ln() / gamma
    }

    /// `(1/gamma) / (u - eps)`, negative on the admissible set.
    pub fn seller_slope(gamma: f64, u: f64, eps: f64) -> f64 {
        1.0 / (gamma * (u - eps))
    }

    /// `-(1/gamma) / (u - eps)`, positive on the admissible set.
    pub fn buyer_slope(gamma: f64, u: f64, eps: f64) -> f64 {
        -1.0 / (gamma * (u - eps))
    }

    /// `dP_s/dx_s = eps / (u(x_s) - eps)` at fixed `eps`.
    pub fn seller_wealth_sensitivity(u: f64, eps: f64) -> f64 {
        eps / (u - eps)
    }
}
