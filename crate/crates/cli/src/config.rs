//! JSON run configuration and its conversion into core types.

use anyhow::{bail, Context, Result};
use riskshare_core::mz::{Coefficient, GridSpec, McSpec, MzModel, Payoff};
use riskshare_core::{Agent, Claim, FiniteMarket, Utility};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_GRID: (usize, usize) = (400, 400);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mz: Option<MzConfig>,
    pub seller: AgentConfig,
    pub buyer: AgentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<Vec<f64>>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_sweep: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<RangeConfig>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub probs: Vec<f64>,
    /// One row per asset, one entry per state.
    pub increments: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub utility: UtilityConfig,
    pub wealth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityConfig {
    Exponential { gamma: f64 },
    Power { r: f64 },
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl RangeConfig {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 2
            || !self.start.is_finite()
            || !self.stop.is_finite()
            || self.start >= self.stop
        {
            bail!("range needs count >= 2 and finite start < stop");
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|k| {
                if k == self.count - 1 {
                    self.stop
                } else {
                    self.start + k as f64 * step
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MzConfig {
    pub mu: f64,
    pub sigma: f64,
    pub rho: f64,
    pub a: CoefficientConfig,
    pub b: CoefficientConfig,
    pub g: PayoffConfig,
    pub horizon: f64,
    /// Evaluation point.
    #[serde(default)]
    pub t: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    MeanReverting { kappa: f64, mean: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffConfig {
    Constant { value: f64 },
    CappedCall { strike: f64, cap: f64 },
    CappedPut { strike: f64, cap: f64 },
    ClampedLinear { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Mc,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// `(ny, nt)` for the PDE and stopping lattice.
    #[serde(default = "default_grid")]
    pub grid: (usize, usize),
    /// Restrict trading to the horizon in `mz stop`.
    #[serde(default)]
    pub terminal_only: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            engine: default_engine(),
            seed: DEFAULT_SEED,
            paths: DEFAULT_PATHS,
            grid: DEFAULT_GRID,
            terminal_only: false,
        }
    }
}

fn default_engine() -> EngineKind {
    EngineKind::Pde
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_paths() -> usize {
    DEFAULT_PATHS
}
fn default_grid() -> (usize, usize) {
    DEFAULT_GRID
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks that do not need the solvers.
    pub fn validate(&self) -> Result<()> {
        match (&self.market, &self.mz) {
            (Some(_), None) => {
                if self.claim.is_none() {
                    bail!("a finite-market config needs a claim");
                }
            }
            (None, Some(_)) => {
                if self.claim.is_some() {
                    bail!("an mz config takes its claim from the payoff g");
                }
            }
            _ => bail!("exactly one of market and mz must be present"),
        }
        let (ny, nt) = self.options.grid;
        if ny < 5 || nt < 4 {
            bail!("grid must be at least 5,4");
        }
        if self.options.paths < 2 {
            bail!("paths must be at least 2");
        }
        Ok(())
    }

    pub fn market(&self) -> Result<FiniteMarket> {
        let m = self.market.as_ref().context("config has no market block")?;
        Ok(FiniteMarket::new(m.probs.clone(), m.increments.clone())?)
    }

    pub fn claim(&self) -> Result<Claim> {
        let c = self.claim.as_ref().context("config has no claim")?;
        Ok(Claim::new(c.clone())?)
    }

    pub fn seller(&self) -> Result<Agent> {
        Ok(Agent::seller(
            self.seller.utility.build()?,
            self.seller.wealth,
        )?)
    }

    pub fn buyer(&self) -> Result<Agent> {
        Ok(Agent::buyer(
            self.buyer.utility.build()?,
            self.buyer.wealth,
        )?)
    }

    pub fn mz_model(&self) -> Result<MzModel> {
        let c = self.mz.as_ref().context("config has no mz block")?;
        let gamma = |a: &AgentConfig| match a.utility {
            UtilityConfig::Exponential { gamma } => Ok(gamma),
            _ => Err(riskshare_core::Error::WrongUtilityKind(
                "the non-traded asset model needs exponential agents",
            )),
        };
        let model = MzModel {
            mu: c.mu,
            sigma: c.sigma,
            rho: c.rho,
            a: c.a.build(),
            b: c.b.build(),
            g: c.g.build(),
            horizon: c.horizon,
            gamma_s: gamma(&self.seller)?,
            gamma_b: gamma(&self.buyer)?,
            x_s: self.seller.wealth,
            x_b: self.buyer.wealth,
            lambda: self.lambda,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.options.grid.0, self.options.grid.1)
    }

    pub fn mc_spec(&self) -> McSpec {
        McSpec::new(self.options.paths, self.options.seed)
    }
}

impl UtilityConfig {
    pub fn build(&self) -> Result<Utility> {
        Ok(match *self {
            UtilityConfig::Exponential { gamma } => Utility::exponential(gamma)?,
            UtilityConfig::Power { r } => Utility::power(r)?,
            UtilityConfig::Log => Utility::log(),
        })
    }
}

impl CoefficientConfig {
    pub fn build(&self) -> Coefficient {
        match *self {
            CoefficientConfig::Constant { value } => Coefficient::Constant { value },
            CoefficientConfig::Linear { intercept, slope } => {
                Coefficient::Linear { intercept, slope }
            }
            CoefficientConfig::MeanReverting { kappa, mean } => {
                Coefficient::MeanReverting { kappa, mean }
            }
        }
    }
}

impl PayoffConfig {
    pub fn build(&self) -> Payoff {
        match *self {
            PayoffConfig::Constant { value } => Payoff::Constant { value },
            PayoffConfig::CappedCall { strike, cap } => Payoff::CappedCall { strike, cap },
            PayoffConfig::CappedPut { strike, cap } => Payoff::CappedPut { strike, cap },
            PayoffConfig::ClampedLinear { lower, upper } => Payoff::ClampedLinear { lower, upper },
        }
    }
}
