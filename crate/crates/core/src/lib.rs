//! Risk sharing prices for non-replicable claims.
//!
//! Two agents, a seller and a buyer, each maximize expected utility in an
//! incomplete market. The risk sharing price splits the total loss of
//! indirect utility between them with weight `lambda` on the seller:
//!
//! ```text
//! minimize   lambda * eps_s + (1 - lambda) * eps_b
//! subject to P_s(eps_s) <= P_b(eps_b)
//! ```
//!
//! where `P_s`, `P_b` are the reservation-price curves. Two computable
//! regimes are provided: a finite-state one-period market ([`market`]) and
//! a diffusion model with a non-traded asset ([`mz`]).
//!
//! The crate is `no_std` with `alloc`; IO lives in the companion CLI crate.
#![no_std]
// `!(x > 0.0)` rejects NaN along with the values it names
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// matrix code reads closer to its formulas with explicit indices
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod mz;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod pricing;
pub mod roots;
pub mod sharing;
pub mod utility;
pub mod value;

pub use error::{Error, Result};
pub use market::{
    arbitrage_bounds, is_replicable, validate_market, x_zero, Claim, FiniteMarket, MarketReport,
    PriceInterval, Replication,
};
pub use pricing::{indifference_price, PriceCurve};
pub use sharing::{Psi, RiskSharingProblem, RiskSharingSolution};
pub use utility::{Agent, CustomUtility, Domain, Role, Utility};
pub use value::{inverse_value, value_function, ValueResult};
