use thiserror::Error;

/// Errors raised by the pricing core.
///
/// Variant names double as the one-word diagnostics printed by the CLI, so
/// keep them stable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ArbitrageDetected: no strictly positive martingale measure exists")]
    ArbitrageDetected,
    #[error("CompleteMarket: the martingale measure is unique")]
    CompleteMarket,
    #[error("InvalidMarket: {0}")]
    InvalidMarket(&'static str),
    #[error("InvalidParameter: {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("DomainError: wealth {0} lies outside the utility domain")]
    DomainError(f64),
    #[error("NonPositiveMarginal: marginal utility {0} must be strictly positive")]
    NonPositiveMarginal(f64),
    #[error("InfeasibleWealth: wealth {wealth} must exceed {required}")]
    InfeasibleWealth { wealth: f64, required: f64 },
    #[error("NonConvergence: {0}")]
    NonConvergence(&'static str),
    #[error("OutOfRange: target utility {0} lies outside the range of the value function")]
    OutOfRange(f64),
    #[error("NoOverlap: seller prices start at {seller_floor}, buyer prices end at {buyer_cap}")]
    NoOverlap { seller_floor: f64, buyer_cap: f64 },
    #[error("WrongUtilityKind: {0}")]
    WrongUtilityKind(&'static str),
    #[error("NonMonotonePsi: {0}")]
    NonMonotonePsi(&'static str),
    #[error("EmptyFeasibleGrid: no grid pair satisfies the price constraint")]
    EmptyFeasibleGrid,
    #[error("StepUnderflow: time step {0} is too small")]
    StepUnderflow(f64),
    #[error("LogDomain: 1 + eps * delta = {0} is not positive")]
    LogDomain(f64),
    #[error("GridTooCoarse: {0}")]
    GridTooCoarse(&'static str),
    #[error("LpInfeasible")]
    LpInfeasible,
    #[error("LpUnbounded")]
    LpUnbounded,
}

pub type Result<T> = core::result::Result<T, Error>;
