//! Risk sharing price between a seller and a buyer.
//!
//! Minimizes `lambda * eps_s + (1 - lambda) * eps_b` subject to
//! `P_s(eps_s) <= P_b(eps_b)`. At the optimum the constraint binds and, for a
//! multiplier `m > 0`,
//!
//! ```text
//! u_s'(x_s + P; -B) = m / lambda        u_b'(x_b - P; B) = m / (1 - lambda)
//! ```
//!
//! so the solver inverts both marginals for a trial `m` and searches `ln m`
//! until the implied seller and buyer prices coincide. The seller price
//! decreases and the buyer price increases in `m`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::market::{x_zero, Claim, FiniteMarket, PriceInterval};
use crate::pricing::PriceCurve;
use crate::roots;
use crate::utility::{Agent, Role, Utility};

const MAX_OUTER: usize = 200;
const GAP_TOL: f64 = 1e-10;
/// `lambda` is searched on `logit(lambda)` in `[-LOGIT_SPAN, LOGIT_SPAN]`.
const LOGIT_SPAN: f64 = 30.0;

#[derive(Debug, Clone)]
pub struct RiskSharingProblem {
    market: FiniteMarket,
    seller: Agent,
    buyer: Agent,
    claim: Claim,
    lambda: f64,
    seller_curve: PriceCurve,
    buyer_curve: PriceCurve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSharingSolution {
    pub lambda: f64,
    pub eps_s: f64,
    pub eps_b: f64,
    /// Lagrange multiplier of the price constraint.
    pub multiplier: f64,
    pub price: f64,
    /// `lambda * psi_s(eps_s) + (1 - lambda) * psi_b(eps_b)`; plain losses
    /// unless solved with [`RiskSharingProblem::solve_generalized`].
    pub objective: f64,
    /// `|p_s(m) - p_b(m)|` at the returned multiplier.
    pub price_gap: f64,
    pub iterations: usize,
}

/// Residuals of the optimality system at a reported solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `|P_s(eps_s) - P_b(eps_b)|`
    pub constraint: f64,
    /// `|P_s'(eps_s) + lambda / m|`
    pub stationarity_s: f64,
    /// `|P_b'(eps_b) - (1 - lambda) / m|`
    pub stationarity_b: f64,
}

/// Strictly convex increasing transform of a loss.
#[derive(Clone)]
pub struct Psi {
    pub value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Psi").finish_non_exhaustive()
    }
}

impl Psi {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn identity() -> Self {
        Self::new(|e| e, |_| 1.0)
    }

    pub fn exp() -> Self {
        Self::new(|e: f64| e.exp(), |e: f64| e.exp())
    }
}

impl RiskSharingProblem {
    /// Roles are taken from the argument position, not from `Agent::role`.
    pub fn new(
        market: &FiniteMarket,
        seller: &Agent,
        buyer: &Agent,
        claim: &Claim,
        lambda: f64,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        let seller = Agent {
            role: Role::Seller,
            ..seller.clone()
        };
        let buyer = Agent {
            role: Role::Buyer,
            ..buyer.clone()
        };
        // half-line agents need positive wealth that also carries the position
        if seller.utility.is_half_line() {
            let required = x_zero(market, claim)?.max(0.0);
            if !(seller.wealth > required) {
                return Err(Error::InfeasibleWealth {
                    wealth: seller.wealth,
                    required,
                });
            }
        }
        if buyer.utility.is_half_line() {
            let required = x_zero(market, &-claim)?.max(0.0);
            if !(buyer.wealth > required) {
                return Err(Error::InfeasibleWealth {
                    wealth: buyer.wealth,
                    required,
                });
            }
        }
        let seller_curve = PriceCurve::new(market, &seller, claim)?;
        let buyer_curve = PriceCurve::new(market, &buyer, claim)?;
        Ok(Self {
            market: market.clone(),
            seller,
            buyer,
            claim: claim.clone(),
            lambda,
            seller_curve,
            buyer_curve,
        })
    }

    /// Same agents and claim under another sharing rule.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }

    pub fn market(&self) -> &FiniteMarket {
        &self.market
    }

    pub fn seller(&self) -> &Agent {
        &self.seller
    }

    pub fn buyer(&self) -> &Agent {
        &self.buyer
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seller_curve(&self) -> &PriceCurve {
        &self.seller_curve
    }

    pub fn buyer_curve(&self) -> &PriceCurve {
        &self.buyer_curve
    }

    fn check_overlap(&self) -> Result<(f64, f64)> {
        let seller_floor = self.seller_curve.price_range().lower;
        let buyer_cap = self.buyer_curve.price_range().upper;
        if !(buyer_cap > seller_floor) {
            return Err(Error::NoOverlap {
                seller_floor,
                buyer_cap,
            });
        }
        Ok((seller_floor, buyer_cap))
    }

    /// Inverts both marginals at `m = exp(log_m)`; returns `(w_s, w_b)`.
    fn marginal_wealths(&self, log_m: f64) -> Result<(f64, f64)> {
        let ws = self
            .seller_curve
            .position()
            .inverse_marginal((log_m - self.lambda.ln()).exp())?;
        let wb = self
            .buyer_curve
            .position()
            .inverse_marginal((log_m - (1.0 - self.lambda).ln()).exp())?;
        Ok((ws, wb))
    }

    fn initial_log_m(&self, seller_floor: f64, buyer_cap: f64) -> Result<f64> {
        let p = match (seller_floor.is_finite(), buyer_cap.is_finite()) {
            (true, true) => 0.5 * (seller_floor + buyer_cap),
            (true, false) => seller_floor.max(-1.0) + 1.0,
            (false, true) => buyer_cap.min(1.0) - 1.0,
            (false, false) => 0.0,
        };
        let ms = self
            .seller_curve
            .position()
            .marginal(self.seller.wealth + p)?;
        let mb = self
            .buyer_curve
            .position()
            .marginal(self.buyer.wealth - p)?;
        Ok(0.5 * ((self.lambda * ms).ln() + ((1.0 - self.lambda) * mb).ln()))
    }

    /// Searches `ln m` for equal seller and buyer prices. `wealths` maps
    /// `ln m` to `(w_s, w_b)`.
    fn solve_outer<F>(&self, mut wealths: F, bracket: Option<(f64, f64)>) -> Result<Outer>
    where
        F: FnMut(f64) -> Result<(f64, f64)>,
    {
        let (seller_floor, buyer_cap) = self.check_overlap()?;
        let (xs, xb) = (self.seller.wealth, self.buyer.wealth);
        let mut iterations = 0usize;
        let mut gap = |log_m: f64| -> Result<f64> {
            iterations += 1;
            let (ws, wb) = wealths(log_m)?;
            Ok((ws - xs) - (xb - wb))
        };
        let (lo, hi) = match bracket {
            None => {
                let start = self.initial_log_m(seller_floor, buyer_cap)?;
                roots::bracket_decreasing(&mut gap, start, None, MAX_OUTER)?
            }
            Some((mut lo, mut hi)) => {
                if lo > hi {
                    core::mem::swap(&mut lo, &mut hi);
                }
                // widen only the end on the wrong side of the root
                let w = (hi - lo).max(1.0);
                let mut expand = 0;
                while gap(lo)? < 0.0 {
                    (lo, hi) = (lo - w * 2f64.powi(expand), lo);
                    expand += 1;
                    if expand > 60 {
                        return Err(Error::NonConvergence("multiplier bracket expansion"));
                    }
                }
                while gap(hi)? > 0.0 {
                    (lo, hi) = (hi, hi + w * 2f64.powi(expand));
                    expand += 1;
                    if expand > 60 {
                        return Err(Error::NonConvergence("multiplier bracket expansion"));
                    }
                }
                (lo, hi)
            }
        };
        let log_m = if lo == hi {
            lo
        } else {
            roots::brent(&mut gap, lo, hi, 1e-14, MAX_OUTER)?
        };
        let (ws, wb) = wealths(log_m)?;
        let (ps, pb) = (ws - xs, xb - wb);
        let price_gap = (ps - pb).abs();
        if price_gap > GAP_TOL * ps.abs().max(1.0) {
            return Err(Error::NonConvergence("seller and buyer prices do not meet"));
        }
        Ok(Outer {
            log_m,
            price: ps,
            price_gap,
            iterations,
        })
    }

    pub fn solve(&self) -> Result<RiskSharingSolution> {
        self.solve_from(None)
    }

    /// Like [`solve`](Self::solve) with an explicit starting bracket for
    /// `ln m`, widened until it contains the root.
    pub fn solve_with_bracket(&self, log_m_lo: f64, log_m_hi: f64) -> Result<RiskSharingSolution> {
        self.solve_from(Some((log_m_lo, log_m_hi)))
    }

    fn solve_from(&self, bracket: Option<(f64, f64)>) -> Result<RiskSharingSolution> {
        let out = self.solve_outer(|lm| self.marginal_wealths(lm), bracket)?;
        let eps_s = self.seller_curve.loss(out.price)?;
        let eps_b = self.buyer_curve.loss(out.price)?;
        Ok(RiskSharingSolution {
            lambda: self.lambda,
            eps_s,
            eps_b,
            multiplier: out.log_m.exp(),
            price: out.price,
            objective: self.lambda * eps_s + (1.0 - self.lambda) * eps_b,
            price_gap: out.price_gap,
            iterations: out.iterations,
        })
    }

    /// Closed-form solution when both agents have exponential utility.
    pub fn solve_exponential_closed_form(&self) -> Result<RiskSharingSolution> {
        let (gs, gb) = match (&self.seller.utility, &self.buyer.utility) {
            (Utility::Exponential { gamma: a }, Utility::Exponential { gamma: b }) => (*a, *b),
            _ => {
                return Err(Error::WrongUtilityKind(
                    "closed form needs exponential agents",
                ))
            }
        };
        let ExpData { vs, vb, us, ub } = self.exponential_data()?;
        let l = self.lambda;
        let total = gs + gb;
        let price =
            (gs * vs + gb * vb) / total + (l * gs * us / ((1.0 - l) * gb * ub)).ln() / total;
        let log_m = (gb / total) * (-us * l * gs).ln()
            + (gs / total) * (-ub * (1.0 - l) * gb).ln()
            + gs * gb * (vs - vb) / total;
        let m = log_m.exp();
        let eps_s = us + m / (l * gs);
        let eps_b = ub + m / ((1.0 - l) * gb);
        Ok(RiskSharingSolution {
            lambda: l,
            eps_s,
            eps_b,
            multiplier: m,
            price,
            objective: l * eps_s + (1.0 - l) * eps_b,
            price_gap: 0.0,
            iterations: 0,
        })
    }

    fn exponential_data(&self) -> Result<ExpData> {
        Ok(ExpData {
            vs: self.seller_curve.indifference_price()?,
            vb: self.buyer_curve.indifference_price()?,
            us: self.seller_curve.benchmark_utility(),
            ub: self.buyer_curve.benchmark_utility(),
        })
    }

    /// Residuals of the binding constraint and the stationarity conditions.
    pub fn diagnostics(&self, sol: &RiskSharingSolution) -> Result<Diagnostics> {
        let ps = self.seller_curve.price(sol.eps_s)?;
        let pb = self.buyer_curve.price(sol.eps_b)?;
        let ds = self.seller_curve.derivative(sol.eps_s)?;
        let db = self.buyer_curve.derivative(sol.eps_b)?;
        Ok(Diagnostics {
            constraint: (ps - pb).abs(),
            stationarity_s: (ds + self.lambda / sol.multiplier).abs(),
            stationarity_b: (db - (1.0 - self.lambda) / sol.multiplier).abs(),
        })
    }

    /// Solutions for each `lambda`, ordered by `lambda`.
    pub fn lambda_sweep(&self, lambdas: &[f64]) -> Result<Vec<RiskSharingSolution>> {
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted
            .iter()
            .map(|&l| self.with_lambda(l)?.solve())
            .collect()
    }

    /// `lambda` at which the risk sharing price equals `a`, clamped to
    /// `0` or `1` when `a` is outside the attainable price range.
    pub fn lambda_for_price(&self, a: f64) -> Result<f64> {
        let price_at =
            |z: f64| -> Result<f64> { Ok(self.with_lambda(logistic(z))?.solve()?.price) };
        let (p_lo, p_hi) = (price_at(-LOGIT_SPAN)?, price_at(LOGIT_SPAN)?);
        let increasing = p_hi >= p_lo;
        let (min_p, max_p) = if increasing {
            (p_lo, p_hi)
        } else {
            (p_hi, p_lo)
        };
        if a <= min_p {
            return Ok(if increasing { 0.0 } else { 1.0 });
        }
        if a >= max_p {
            return Ok(if increasing { 1.0 } else { 0.0 });
        }
        let z = roots::brent(
            |z| price_at(z).map(|p| p - a),
            -LOGIT_SPAN,
            LOGIT_SPAN,
            1e-13,
            MAX_OUTER,
        )?;
        Ok(logistic(z))
    }

    /// `(lambda_low, lambda_high)` such that the risk sharing price lies in
    /// the open `target` interval exactly for `lambda` between them, by
    /// numeric inversion of `lambda -> P*`. `None` for a degenerate target.
    pub fn lambda_bounds(&self, target: &PriceInterval) -> Result<Option<(f64, f64)>> {
        if target.is_degenerate() {
            return Ok(None);
        }
        let a = self.lambda_for_price(target.lower)?;
        let b = self.lambda_for_price(target.upper)?;
        Ok(Some((a.min(b), a.max(b))))
    }

    /// `b(a) = K(a) / (K(a) + 1)` with
    /// `K(a) = exp(a (g_s + g_b)) M`,
    /// `M = exp(-g_s (v_s - x_s) - g_b (v_b + x_b)) g_b u_b(0) / (g_s u_s(0))`:
    /// the sharing rule whose exponential risk sharing price is `a`.
    pub fn lambda_bound_function(&self, a: f64) -> Result<f64> {
        let (gs, gb) = match (&self.seller.utility, &self.buyer.utility) {
            (Utility::Exponential { gamma: s }, Utility::Exponential { gamma: b }) => (*s, *b),
            _ => {
                return Err(Error::WrongUtilityKind(
                    "bound function needs exponential agents",
                ))
            }
        };
        let ExpData { vs, vb, us, ub } = self.exponential_data()?;
        let (xs, xb) = (self.seller.wealth, self.buyer.wealth);
        // u(0) = exp(gamma x) u(x)
        let (us0, ub0) = (gs * xs + (-us).ln(), gb * xb + (-ub).ln());
        let log_k = a * (gs + gb) - gs * (vs - xs) - gb * (vb + xb) + gb.ln() + ub0 - gs.ln() - us0;
        Ok(logistic(log_k))
    }

    /// [`lambda_bounds`](Self::lambda_bounds) via the exponential bound
    /// function.
    pub fn lambda_bounds_exponential(&self, target: &PriceInterval) -> Result<Option<(f64, f64)>> {
        if target.is_degenerate() {
            return Ok(None);
        }
        let a = self.lambda_bound_function(target.lower)?;
        let b = self.lambda_bound_function(target.upper)?;
        Ok(Some((a.min(b), a.max(b))))
    }

    /// Minimizes `lambda psi_s(eps_s) + (1 - lambda) psi_b(eps_b)` under the
    /// same price constraint.
    pub fn solve_generalized(&self, psi_s: &Psi, psi_b: &Psi) -> Result<RiskSharingSolution> {
        check_psi(psi_s, &self.seller_curve)?;
        check_psi(psi_b, &self.buyer_curve)?;
        let l = self.lambda;
        let inner = |curve: &PriceCurve, psi: &Psi, weight: f64, log_m: f64| -> Result<f64> {
            let vf = curve.position();
            let bench = curve.benchmark_utility();
            // ln(psi'(eps(w)) u'(w)) decreases in w; we invert its negative
            let f = |w: f64| -> Result<f64> {
                let du = match vf.marginal(w) {
                    Ok(v) => v,
                    Err(Error::InfeasibleWealth { .. }) => return Ok(f64::NEG_INFINITY),
                    Err(e) => return Err(e),
                };
                let dpsi = (psi.derivative)(bench - vf.value(w)?);
                if !(dpsi > 0.0) {
                    return Ok(f64::INFINITY);
                }
                Ok(-(dpsi.ln() + du.ln()))
            };
            let floor = vf.floor();
            let x = curve.agent().wealth;
            let start = if x > floor { x } else { floor.max(-1.0) + 1.0 };
            roots::invert_increasing(
                f,
                weight.ln() - log_m,
                floor.is_finite().then_some(floor),
                start,
            )
        };
        let out = self.solve_outer(
            |lm| {
                Ok((
                    inner(&self.seller_curve, psi_s, l, lm)?,
                    inner(&self.buyer_curve, psi_b, 1.0 - l, lm)?,
                ))
            },
            None,
        )?;
        let eps_s = self.seller_curve.loss(out.price)?;
        let eps_b = self.buyer_curve.loss(out.price)?;
        Ok(RiskSharingSolution {
            lambda: l,
            eps_s,
            eps_b,
            multiplier: out.log_m.exp(),
            price: out.price,
            objective: l * (psi_s.value)(eps_s) + (1.0 - l) * (psi_b.value)(eps_b),
            price_gap: out.price_gap,
            iterations: out.iterations,
        })
    }

    /// `lambda u_s(x_s + p; -B) + (1 - lambda) u_b(x_b - p; B)`, the weighted
    /// expected utility of both optimally hedged residual positions at
    /// transaction price `p`. Maximized at the risk sharing price.
    pub fn residual_risk_objective(&self, price: f64) -> Result<f64> {
        let s = self
            .seller_curve
            .position()
            .value_extended(self.seller.wealth + price)?;
        let b = self
            .buyer_curve
            .position()
            .value_extended(self.buyer.wealth - price)?;
        Ok(self.lambda * s + (1.0 - self.lambda) * b)
    }
}

struct Outer {
    log_m: f64,
    price: f64,
    price_gap: f64,
    iterations: usize,
}

struct ExpData {
    vs: f64,
    vb: f64,
    us: f64,
    ub: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
        });
    }
    Ok(())
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Spot-checks `psi' > 0` and non-decreasing on losses inside the curve's
/// admissible set.
fn check_psi(psi: &Psi, curve: &PriceCurve) -> Result<()> {
    let lo = curve.a_lower().max(-5.0);
    let mut prev = 0.0;
    for k in 1..=40 {
        let eps = lo + (5.0 - lo) * k as f64 / 40.0;
        let d = (psi.derivative)(eps);
        if !(d > 0.0) {
            return Err(Error::NonMonotonePsi("derivative must be positive"));
        }
        if d < prev * (1.0 - 1e-12) {
            return Err(Error::NonMonotonePsi("derivative must be non-decreasing"));
        }
        prev = d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::arbitrage_bounds;
    use alloc::vec;

    fn trinomial() -> FiniteMarket {
        FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 0.0, -1.0]]).unwrap()
    }

    fn middle() -> Claim {
        Claim::new(vec![0.0, 1.0, 0.0]).unwrap()
    }

    fn exp_problem(gs: f64, gb: f64, lambda: f64, claim: &Claim) -> RiskSharingProblem {
        RiskSharingProblem::new(
            &trinomial(),
            &Agent::seller(Utility::exponential(gs).unwrap(), 0.0).unwrap(),
            &Agent::buyer(Utility::exponential(gb).unwrap(), 0.0).unwrap(),
            claim,
            lambda,
        )
        .unwrap()
    }

    fn midpoint() -> f64 {
        0.5 * (((2.0 + 1f64.exp()) / 3.0).ln() - ((2.0 + (-1f64).exp()) / 3.0).ln())
    }

    #[test]
    fn canonical_midpoint() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let s = p.solve().unwrap();
        assert!((s.price - midpoint()).abs() < 1e-10);
        assert!((s.eps_s - s.eps_b).abs() < 1e-10);
        let d = p.diagnostics(&s).unwrap();
        assert!(d.constraint < 1e-8 && d.stationarity_s < 1e-6 && d.stationarity_b < 1e-6);
    }

    #[test]
    fn closed_form_matches_generic_on_grid() {
        for &gs in &[0.5, 1.0, 2.0] {
            for &gb in &[0.5, 1.0, 2.0] {
                for k in 1..=9 {
                    let p = exp_problem(gs, gb, 0.1 * k as f64, &middle());
                    let a = p.solve().unwrap();
                    let b = p.solve_exponential_closed_form().unwrap();
                    assert!((a.price - b.price).abs() < 1e-8);
                    assert!((a.multiplier - b.multiplier).abs() < 1e-8 * b.multiplier);
                    assert!((a.eps_s - b.eps_s).abs() < 1e-8);
                    assert!((a.eps_b - b.eps_b).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn price_increases_with_seller_weight() {
        // the closed form has ln(lambda / (1 - lambda)) / (g_s + g_b) in P*
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let rows = p.lambda_sweep(&[0.9, 0.1, 0.3, 0.5, 0.7]).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].lambda < w[1].lambda);
            assert!(w[0].price < w[1].price);
        }
        let near_one = p.with_lambda(1.0 - 1e-6).unwrap().solve().unwrap();
        assert!(near_one.price - rows[2].price > 5.0);
    }

    #[test]
    fn replicable_claim_prices_at_zero() {
        let hedge = Claim::new(vec![1.0, 0.0, -1.0]).unwrap();
        let s = exp_problem(1.0, 1.0, 0.5, &hedge).solve().unwrap();
        assert!(s.price.abs() < 1e-10);
        assert!((s.eps_s - s.eps_b).abs() < 1e-10);
    }

    #[test]
    fn identical_agents_eps_difference() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let e = 1f64.exp();
        // u(x; B) u(x; -B) for the buyer and seller positions at x = 0
        let prod = ((2.0 + 1.0 / e) / 3.0) * ((2.0 + e) / 3.0);
        for &l in &[0.25, 0.5, 0.75] {
            let s = p.with_lambda(l).unwrap().solve().unwrap();
            let expected = prod.sqrt() * (1.0 - 2.0 * l) / (l * (1.0 - l)).sqrt();
            assert!((s.eps_s - s.eps_b - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn uniqueness_over_brackets() {
        let p = exp_problem(1.0, 2.0, 0.3, &middle());
        let base = p.solve().unwrap().price;
        for k in 0..20 {
            let lo = -30.0 + 2.5 * k as f64;
            let s = p.solve_with_bracket(lo, lo + 0.1 + 0.7 * k as f64).unwrap();
            assert!((s.price - base).abs() < 1e-8);
        }
    }

    #[test]
    fn constraint_binds() {
        let p = exp_problem(1.0, 1.0, 0.4, &middle());
        let s = p.solve().unwrap();
        for &d in &[1e-4, 1e-3] {
            let ps = p.seller_curve().price(s.eps_s - d).unwrap();
            let pb = p.buyer_curve().price(s.eps_b).unwrap();
            assert!(ps > pb);
        }
    }

    #[test]
    fn lambda_bounds_agree() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let target = arbitrage_bounds(p.market(), p.claim()).unwrap();
        let (lo, hi) = p.lambda_bounds(&target).unwrap().unwrap();
        let (elo, ehi) = p.lambda_bounds_exponential(&target).unwrap().unwrap();
        assert!((lo - elo).abs() < 1e-6 && (hi - ehi).abs() < 1e-6);
        assert!(lo < 0.5 && 0.5 < hi);
        // b(P*(lambda)) = lambda
        let s = p.with_lambda(0.37).unwrap().solve().unwrap();
        assert!((p.lambda_bound_function(s.price).unwrap() - 0.37).abs() < 1e-9);
        let hedge = Claim::new(vec![1.0, 0.0, -1.0]).unwrap();
        let r = exp_problem(1.0, 1.0, 0.5, &hedge);
        let t = arbitrage_bounds(r.market(), r.claim()).unwrap();
        assert_eq!(r.lambda_bounds(&t).unwrap(), None);
    }

    #[test]
    fn lambda_high_tends_to_one_for_small_seller_aversion() {
        let p = exp_problem(1e-3, 1.0, 0.5, &middle());
        let target = arbitrage_bounds(p.market(), p.claim()).unwrap();
        let (_, hi) = p.lambda_bounds_exponential(&target).unwrap().unwrap();
        assert!(hi > 0.99);
    }

    #[test]
    fn generalized_reduces_to_plain() {
        let p = exp_problem(1.0, 1.5, 0.35, &middle());
        let a = p.solve().unwrap();
        let b = p
            .solve_generalized(&Psi::identity(), &Psi::identity())
            .unwrap();
        assert!((a.price - b.price).abs() < 1e-9);
        assert!((a.eps_s - b.eps_s).abs() < 1e-9);
        assert!((a.eps_b - b.eps_b).abs() < 1e-9);
    }

    #[test]
    fn generalized_symmetric_case() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let s = p.solve_generalized(&Psi::exp(), &Psi::exp()).unwrap();
        assert!((s.eps_s - s.eps_b).abs() < 1e-9);
    }

    #[test]
    fn generalized_rejects_concave_psi() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let bad = Psi::new(|e: f64| -(-e).exp(), |e: f64| (-e).exp());
        assert!(matches!(
            p.solve_generalized(&bad, &Psi::identity()),
            Err(Error::NonMonotonePsi(_))
        ));
    }

    #[test]
    fn residual_risk_identity_and_maximizer() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        let s = p.solve().unwrap();
        let at = p.residual_risk_objective(s.price).unwrap();
        for &d in &[-0.05, 0.05] {
            assert!(p.residual_risk_objective(s.price + d).unwrap() < at);
        }
        let e = 1f64.exp();
        let direct = 0.5 * (-(2.0 + e) / 3.0 * (-0.3f64).exp())
            + 0.5 * (-(2.0 + 1.0 / e) / 3.0 * (0.3f64).exp());
        assert!((p.residual_risk_objective(0.3).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn log_agents_and_assumption_checks() {
        let m = trinomial();
        let b = middle();
        let p = RiskSharingProblem::new(
            &m,
            &Agent::seller(Utility::log(), 2.0).unwrap(),
            &Agent::buyer(Utility::log(), 1.5).unwrap(),
            &b,
            0.5,
        )
        .unwrap();
        let s = p.solve().unwrap();
        let d = p.diagnostics(&s).unwrap();
        assert!(d.constraint < 1e-6 && d.stationarity_s < 1e-6 && d.stationarity_b < 1e-6);
        let too_poor = RiskSharingProblem::new(
            &m,
            &Agent::seller(Utility::log(), 0.5).unwrap(),
            &Agent::buyer(Utility::log(), 1.5).unwrap(),
            &b,
            0.5,
        );
        assert!(matches!(too_poor, Err(Error::InfeasibleWealth { .. })));
        // marginals past float resolution at the floor still bracket the root
        for (lo, hi) in [(35.0, 50.0), (-60.0, -40.0), (20.0, 21.0)] {
            let r = p.solve_with_bracket(lo, hi).unwrap();
            assert!((r.price - s.price).abs() <= 1e-8);
        }
    }

    #[test]
    fn rejects_bad_lambda() {
        let p = exp_problem(1.0, 1.0, 0.5, &middle());
        assert!(p.with_lambda(1.0).is_err());
        assert!(p.with_lambda(0.0).is_err());
    }
}
