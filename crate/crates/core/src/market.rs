//! One-period finite-state market: states, probabilities, discounted asset
//! increments, claims, and the martingale-measure polytope
//! `{q >= 0, sum q = 1, increments · q = 0}`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Neg;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp;

/// Relative tolerance for rank and feasibility decisions.
pub const TOL: f64 = 1e-9;
/// State probabilities below this are rejected as null states.
pub const MIN_PROB: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMarket {
    probs: Vec<f64>,
    /// `d x n`, row j = discounted gain of asset j in each state.
    increments: Vec<Vec<f64>>,
    /// `n x d`, the same data indexed by state.
    by_state: Vec<Vec<f64>>,
    polytope_dim: usize,
}

/// Outcome of [`validate_market`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarketReport {
    /// Dimension of the affine hull of the martingale-measure polytope.
    pub polytope_dimension: usize,
}

impl FiniteMarket {
    /// Builds a market, failing unless it is arbitrage free and incomplete.
    pub fn new(probs: Vec<f64>, increments: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_market(&probs, &increments)?;
        let n = probs.len();
        let by_state = (0..n)
            .map(|i| increments.iter().map(|row| row[i]).collect())
            .collect();
        Ok(Self {
            probs,
            increments,
            by_state,
            polytope_dim: report.polytope_dimension,
        })
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn n_assets(&self) -> usize {
        self.increments.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn increments(&self) -> &[Vec<f64>] {
        &self.increments
    }

    /// Increment vector (one entry per asset) in state `i`.
    pub fn state_increment(&self, i: usize) -> &[f64] {
        &self.by_state[i]
    }

    pub fn polytope_dimension(&self) -> usize {
        self.polytope_dim
    }

    /// Gain of holding `theta` in state `i`.
    pub fn gain(&self, theta: &[f64], i: usize) -> f64 {
        linalg::dot(theta, &self.by_state[i])
    }

    pub fn expectation(&self, values: &[f64]) -> f64 {
        linalg::dot(&self.probs, values)
    }

    pub(crate) fn check_claim(&self, b: &Claim) -> Result<()> {
        if b.len() != self.n_states() {
            return Err(Error::InvalidParameter {
                name: "claim length",
                value: b.len() as f64,
            });
        }
        Ok(())
    }

    /// Equality block `[1; increments] q = (1, 0, .., 0)` of the polytope.
    fn measure_constraints(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        measure_constraints(self.n_states(), &self.increments)
    }
}

fn measure_constraints(n: usize, increments: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = Vec::with_capacity(increments.len() + 1);
    a.push(vec![1.0; n]);
    a.extend(increments.iter().cloned());
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0;
    (a, b)
}

/// Terminal payoff per state, in numeraire units.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    payoffs: Vec<f64>,
}

impl Claim {
    pub fn new(payoffs: Vec<f64>) -> Result<Self> {
        if let Some(&v) = payoffs.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "claim payoff",
                value: v,
            });
        }
        Ok(Self { payoffs })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            payoffs: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            payoffs: vec![c; n],
        }
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub fn len(&self) -> usize {
        self.payoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payoffs.is_empty()
    }

    pub fn shifted(&self, cash: f64) -> Self {
        Self {
            payoffs: self.payoffs.iter().map(|v| v + cash).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.payoffs.iter().all(|&v| v == 0.0)
    }
}

impl Neg for &Claim {
    type Output = Claim;

    fn neg(self) -> Claim {
        Claim {
            payoffs: self.payoffs.iter().map(|v| -v).collect(),
        }
    }
}

/// Interval of arbitrage-free prices for a claim.
///
/// Endpoints are computed over the closed polytope. `attained_*` is true when
/// the endpoint is reached by an equivalent (strictly positive) measure, which
/// on a finite market happens exactly when the claim is replicable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceInterval {
    pub lower: f64,
    pub upper: f64,
    pub attained_lower: bool,
    pub attained_upper: bool,
}

impl PriceInterval {
    pub fn new_open(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            attained_lower: false,
            attained_upper: false,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.upper - self.lower <= TOL * self.lower.abs().max(self.upper.abs()).max(1.0)
    }

    /// Membership in the arbitrage-free set: open interval unless degenerate.
    pub fn contains(&self, p: f64) -> bool {
        if self.is_degenerate() {
            (p - self.lower).abs() <= TOL * p.abs().max(1.0)
        } else {
            p > self.lower && p < self.upper
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Checks the no-arbitrage and incompleteness conditions on raw market data.
pub fn validate_market(probs: &[f64], increments: &[Vec<f64>]) -> Result<MarketReport> {
    let n = probs.len();
    if n < 2 {
        return Err(Error::InvalidMarket("need at least two states"));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < MIN_PROB) {
        return Err(Error::InvalidMarket("state probabilities must be positive"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > TOL {
        return Err(Error::InvalidMarket("state probabilities must sum to one"));
    }
    if increments.is_empty() {
        return Err(Error::InvalidMarket("need at least one risky asset"));
    }
    if increments.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMarket(
            "increment rows must have one entry per state",
        ));
    }
    if increments.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMarket("increments must be finite"));
    }
    let d = increments.len();
    if linalg::rank(increments, TOL) < d {
        return Err(Error::InvalidMarket(
            "asset increments are linearly dependent",
        ));
    }

    // max t  s.t.  q = t 1 + s,  A q = e1,  t, s >= 0
    let (a, b) = measure_constraints(n, increments);
    let lifted: Vec<Vec<f64>> = a
        .iter()
        .map(|row| {
            let mut r = Vec::with_capacity(n + 1);
            r.push(row.iter().sum());
            r.extend_from_slice(row);
            r
        })
        .collect();
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    let t_star = match lp::maximize(&c, &lifted, &b) {
        Ok(sol) => sol.objective,
        Err(Error::LpInfeasible) => return Err(Error::ArbitrageDetected),
        Err(e) => return Err(e),
    };
    if t_star <= TOL {
        return Err(Error::ArbitrageDetected);
    }

    let dim = n - linalg::rank(&a, TOL);
    if dim == 0 {
        return Err(Error::CompleteMarket);
    }
    Ok(MarketReport {
        polytope_dimension: dim,
    })
}

/// `(inf, sup)` of `E_Q[b]` over the closed martingale polytope, by LP.
pub fn arbitrage_bounds(m: &FiniteMarket, b: &Claim) -> Result<PriceInterval> {
    m.check_claim(b)?;
    let (a, rhs) = m.measure_constraints();
    let lower = lp::minimize(b.payoffs(), &a, &rhs)?.objective;
    let upper = lp::maximize(b.payoffs(), &a, &rhs)?.objective;
    let mut interval = PriceInterval::new_open(lower, upper.max(lower));
    if interval.is_degenerate() {
        interval.attained_lower = true;
        interval.attained_upper = true;
    }
    Ok(interval)
}

/// Cash amount and holdings replicating a claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub cash: f64,
    pub theta: Vec<f64>,
}

/// Returns the replicating portfolio when `b` lies in the span of cash and
/// the asset increments.
pub fn is_replicable(m: &FiniteMarket, b: &Claim) -> Result<Option<Replication>> {
    m.check_claim(b)?;
    let rows: Vec<Vec<f64>> = (0..m.n_states())
        .map(|i| {
            let mut r = Vec::with_capacity(m.n_assets() + 1);
            r.push(1.0);
            r.extend_from_slice(m.state_increment(i));
            r
        })
        .collect();
    Ok(
        linalg::solve_consistent(&rows, b.payoffs(), TOL).map(|z| Replication {
            cash: z[0],
            theta: z[1..].to_vec(),
        }),
    )
}

/// Superhedging bound `sup E_Q[b]` over the closed polytope.
pub fn x_zero(m: &FiniteMarket, b: &Claim) -> Result<f64> {
    Ok(arbitrage_bounds(m, b)?.upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trinomial() -> FiniteMarket {
        FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 0.0, -1.0]]).unwrap()
    }

    #[test]
    fn trinomial_has_one_dimensional_polytope() {
        assert_eq!(trinomial().polytope_dimension(), 1);
    }

    #[test]
    fn binomial_is_complete() {
        let r = FiniteMarket::new(vec![0.5, 0.5], vec![vec![1.0, -1.0]]);
        assert_eq!(r.unwrap_err(), Error::CompleteMarket);
    }

    #[test]
    fn one_signed_increments_are_arbitrage() {
        let r = FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 2.0, 3.0]]);
        assert_eq!(r.unwrap_err(), Error::ArbitrageDetected);
        // weak arbitrage: zero in one state, positive elsewhere
        let r = FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 0.0, 0.0]]);
        assert_eq!(r.unwrap_err(), Error::ArbitrageDetected);
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        let r = FiniteMarket::new(vec![0.5, 0.5 - 1e-13, 1e-13], vec![vec![1.0, 0.0, -1.0]]);
        assert!(matches!(r, Err(Error::InvalidMarket(_))));
    }

    #[test]
    fn bounds_for_middle_state_digital() {
        let m = trinomial();
        let iv = arbitrage_bounds(&m, &Claim::new(vec![0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert!(iv.lower.abs() < 1e-12 && (iv.upper - 1.0).abs() < 1e-12);
        assert!(!iv.attained_lower && !iv.attained_upper);
    }

    #[test]
    fn bounds_for_replicable_and_constant_claims() {
        let m = trinomial();
        let iv = arbitrage_bounds(&m, &Claim::new(vec![1.0, 0.0, -1.0]).unwrap()).unwrap();
        assert!(iv.lower.abs() < 1e-12 && iv.upper.abs() < 1e-12 && iv.attained_lower);
        let iv = arbitrage_bounds(&m, &Claim::constant(3, 2.5)).unwrap();
        assert!((iv.lower - 2.5).abs() < 1e-12 && (iv.upper - 2.5).abs() < 1e-12);
    }

    #[test]
    fn replication_examples() {
        let m = trinomial();
        let r = is_replicable(&m, &Claim::new(vec![1.0, 0.0, -1.0]).unwrap())
            .unwrap()
            .unwrap();
        assert!(r.cash.abs() < 1e-12 && (r.theta[0] - 1.0).abs() < 1e-12);
        assert!(is_replicable(&m, &Claim::new(vec![0.0, 1.0, 0.0]).unwrap())
            .unwrap()
            .is_none());
        let r = is_replicable(&m, &Claim::constant(3, 5.0))
            .unwrap()
            .unwrap();
        assert!((r.cash - 5.0).abs() < 1e-12 && r.theta[0].abs() < 1e-12);
    }

    #[test]
    fn x_zero_examples() {
        let m = trinomial();
        let x = x_zero(&m, &Claim::new(vec![0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert!((x_zero(&m, &Claim::constant(3, -0.7)).unwrap() + 0.7).abs() < 1e-12);
        assert!(
            x_zero(&m, &Claim::new(vec![1.0, 0.0, -1.0]).unwrap())
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn claim_length_is_checked() {
        let m = trinomial();
        assert!(arbitrage_bounds(&m, &Claim::zero(4)).is_err());
    }
}
