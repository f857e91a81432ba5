//! Claims on a non-traded asset `Y` correlated with one traded stock, for
//! two exponential-utility agents.
//!
//! Indifference prices are certainty equivalents under the minimal-entropy
//! measure:
//!
//! ```text
//! v_s = ln E[exp( gamma_s (1 - rho^2) g(Y_T)) | Y_t = y] / ( gamma_s (1 - rho^2))
//! v_b = ln E[exp(-gamma_b (1 - rho^2) g(Y_T)) | Y_t = y] / (-gamma_b (1 - rho^2))
//! ```
//!
//! evaluated by Monte Carlo ([`mc`]) or a Crank-Nicolson PDE ([`pde`]).

pub mod mc;
pub mod model;
pub mod pde;
pub mod stopping;

pub use mc::McSpec;
pub use model::{Coefficient, MzModel, MzPriceResult, MzSharing, Payoff};
pub use pde::{GridSpec, PdeField};
pub use stopping::{optimal_trading_time, StoppingResult};

use crate::error::Result;

/// Expectation engine for indifference prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    MonteCarlo(McSpec),
    Pde(GridSpec),
}

/// Indifference and risk sharing prices at `(t, y)`.
pub fn indifference_prices(
    model: &MzModel,
    t: f64,
    y: f64,
    engine: &Engine,
) -> Result<MzPriceResult> {
    match engine {
        Engine::MonteCarlo(spec) => mc::indifference_prices(model, t, y, spec),
        Engine::Pde(grid) => pde::indifference_prices(model, t, y, grid),
    }
}

/// Risk sharing price at `(t, y)`.
pub fn risk_sharing_price(model: &MzModel, t: f64, y: f64, engine: &Engine) -> Result<f64> {
    Ok(indifference_prices(model, t, y, engine)?.p_star)
}

/// Reservation price at `(t, y)` for loss `eps`.
pub fn reservation_price(
    model: &MzModel,
    t: f64,
    y: f64,
    side: crate::utility::Role,
    eps: f64,
    engine: &Engine,
) -> Result<f64> {
    let r = indifference_prices(model, t, y, engine)?;
    let v = match side {
        crate::utility::Role::Seller => r.v_s,
        crate::utility::Role::Buyer => r.v_b,
    };
    model.reservation_price(side, t, v, eps)
}
