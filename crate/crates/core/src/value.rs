//! Indirect utility `u(x; B) = max_theta E[U(x + theta . dS + B)]` on a
//! finite market, its marginal, and its inverse in wealth.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp;
use crate::market::{Claim, FiniteMarket};
use crate::roots;
use crate::utility::Utility;

const MAX_NEWTON: usize = 200;
const GRAD_TOL: f64 = 1e-13;
const ARMIJO: f64 = 1e-4;

/// Solution of the utility maximization at one wealth level.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueResult {
    pub value: f64,
    /// `u'(x; B)` by the envelope theorem.
    pub marginal: f64,
    pub theta: Vec<f64>,
    pub x: f64,
    pub claim: Claim,
    /// Optimal terminal wealth per state.
    pub wealth: Vec<f64>,
}

/// The map `x -> u(x; B)` for a fixed market, utility and claim.
///
/// Construction does all the `x`-independent work: for exponential utility
/// the optimal holdings do not depend on `x`; for half-line utilities the
/// wealth floor and a strictly feasible starting portfolio come from one LP.
#[derive(Debug, Clone)]
pub struct ValueFunction {
    market: FiniteMarket,
    utility: Utility,
    claim: Claim,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    /// `u(x) = -exp(-gamma x + log_sum)`
    Exponential {
        gamma: f64,
        log_sum: f64,
        theta: Vec<f64>,
    },
    General {
        floor: f64,
        theta0: Vec<f64>,
    },
}

impl ValueFunction {
    pub fn new(market: &FiniteMarket, utility: &Utility, claim: &Claim) -> Result<Self> {
        market.check_claim(claim)?;
        let kind = match *utility {
            Utility::Exponential { gamma } => {
                let (theta, log_sum) = minimize_log_sum_exp(market, gamma, claim)?;
                Kind::Exponential {
                    gamma,
                    log_sum,
                    theta,
                }
            }
            _ if utility.is_half_line() => {
                let (theta0, floor) = max_min_wealth(market, claim)?;
                Kind::General { floor, theta0 }
            }
            _ => Kind::General {
                floor: f64::NEG_INFINITY,
                theta0: vec![0.0; market.n_assets()],
            },
        };
        Ok(Self {
            market: market.clone(),
            utility: utility.clone(),
            claim: claim.clone(),
            kind,
        })
    }

    pub fn market(&self) -> &FiniteMarket {
        &self.market
    }

    pub fn utility(&self) -> &Utility {
        &self.utility
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    /// Open lower limit of feasible wealth, `x_0(-B)`; `-inf` for
    /// whole-line utilities.
    pub fn floor(&self) -> f64 {
        match self.kind {
            Kind::Exponential { .. } => f64::NEG_INFINITY,
            Kind::General { floor, .. } => floor,
        }
    }

    /// `lim u(x; B)` as `x -> inf`.
    pub fn sup_value(&self) -> f64 {
        self.utility.sup_value()
    }

    pub fn solve(&self, x: f64) -> Result<ValueResult> {
        if !x.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wealth",
                value: x,
            });
        }
        match &self.kind {
            Kind::Exponential {
                gamma,
                log_sum,
                theta,
            } => {
                let scale = (-gamma * x + log_sum).exp();
                Ok(ValueResult {
                    value: -scale,
                    marginal: gamma * scale,
                    theta: theta.clone(),
                    x,
                    claim: self.claim.clone(),
                    wealth: self.terminal_wealth(x, theta),
                })
            }
            Kind::General { floor, theta0 } => {
                if x <= *floor {
                    return Err(Error::InfeasibleWealth {
                        wealth: x,
                        required: *floor,
                    });
                }
                self.maximize(x, theta0.clone())
            }
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::Exponential { gamma, log_sum, .. } => Ok(-(-gamma * x + log_sum).exp()),
            Kind::General { .. } => Ok(self.solve(x)?.value),
        }
    }

    /// Like [`value`](Self::value) but `-inf` at or below the wealth floor.
    pub fn value_extended(&self, x: f64) -> Result<f64> {
        match self.value(x) {
            Err(Error::InfeasibleWealth { .. }) => Ok(f64::NEG_INFINITY),
            other => other,
        }
    }

    pub fn marginal(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::Exponential { gamma, log_sum, .. } => Ok(gamma * (-gamma * x + log_sum).exp()),
            Kind::General { .. } => Ok(self.solve(x)?.marginal),
        }
    }

    /// `phi(y; B)`: the wealth `x` with `u(x; B) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y >= self.sup_value() {
            return Err(Error::OutOfRange(y));
        }
        match self.kind {
            Kind::Exponential { gamma, log_sum, .. } => Ok((log_sum - (-y).ln()) / gamma),
            Kind::General { floor, .. } => {
                let start = if floor.is_finite() {
                    floor.max(-1.0) + 1.0
                } else {
                    0.0
                };
                let lim = floor.is_finite().then_some(floor);
                let x = roots::invert_increasing(|x| self.value_extended(x), y, lim, start)
                    .map_err(|e| match e {
                        Error::NonConvergence(_) => Error::OutOfRange(y),
                        e => e,
                    })?;
                // roots within rounding of the floor cannot be resolved further
                if x - floor <= 1e-12 * floor.abs().max(1.0) {
                    return Ok(x.max(floor.next_up()));
                }
                let got = self.value(x)?;
                if (got - y).abs() > 1e-10 * y.abs().max(1.0) {
                    return Err(Error::NonConvergence("value inversion residual too large"));
                }
                Ok(x)
            }
        }
    }

    /// The wealth `x` with `u'(x; B) = y`.
    pub fn inverse_marginal(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::NonPositiveMarginal(y));
        }
        match self.kind {
            Kind::Exponential { gamma, log_sum, .. } => Ok((log_sum + gamma.ln() - y.ln()) / gamma),
            Kind::General { floor, .. } => {
                // -ln u'(x) is increasing; +inf marginal at the floor maps to -inf
                let f = |x: f64| match self.marginal(x) {
                    Ok(v) => Ok(-v.ln()),
                    Err(Error::InfeasibleWealth { .. }) => Ok(f64::NEG_INFINITY),
                    Err(e) => Err(e),
                };
                let start = if floor.is_finite() {
                    floor.max(-1.0) + 1.0
                } else {
                    0.0
                };
                roots::invert_increasing(f, -y.ln(), floor.is_finite().then_some(floor), start)
            }
        }
    }

    fn terminal_wealth(&self, x: f64, theta: &[f64]) -> Vec<f64> {
        let b = self.claim.payoffs();
        (0..self.market.n_states())
            .map(|i| x + self.market.gain(theta, i) + b[i])
            .collect()
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let p = self.market.probs();
        let mut s = 0.0;
        for (pi, &wi) in p.iter().zip(w) {
            let u = self.utility.evaluate(wi);
            if u == f64::NEG_INFINITY || u.is_nan() {
                return f64::NEG_INFINITY;
            }
            s += pi * u;
        }
        s
    }

    /// Sum of absolute summands of each state's terminal wealth; bounds its
    /// rounding error in ulps.
    fn wealth_magnitudes(&self, x: f64, theta: &[f64]) -> Vec<f64> {
        let b = self.claim.payoffs();
        (0..self.market.n_states())
            .map(|i| {
                let inc = self.market.state_increment(i);
                x.abs()
                    + b[i].abs()
                    + theta
                        .iter()
                        .zip(inc)
                        .map(|(t, s)| (t * s).abs())
                        .sum::<f64>()
            })
            .collect()
    }

    /// Gradient, Hessian and gradient tolerance at holdings `theta`.
    ///
    /// The tolerance is the larger of `GRAD_TOL` relative to the gradient
    /// scale and the gradient's rounding noise: terminal wealth carries an
    /// absolute error of a few ulps of its largest summand, which near the
    /// wealth floor dominates `U'`.
    fn derivatives(&self, x: f64, theta: &[f64], w: &[f64]) -> Result<Derivatives> {
        let d = self.market.n_assets();
        let mag = self.wealth_magnitudes(x, theta);
        let mut g = vec![0.0; d];
        let mut h = vec![vec![0.0; d]; d];
        let (mut scale, mut noise) = (0.0, 0.0);
        for (i, (&pi, &wi)) in self.market.probs().iter().zip(w).enumerate() {
            let du = self.utility.derivative(wi)?;
            let d2u = self.utility.second_derivative(wi)?;
            let inc = self.market.state_increment(i);
            let dw = 4.0 * f64::EPSILON * mag[i];
            for j in 0..d {
                g[j] += pi * du * inc[j];
                scale += pi * du * inc[j].abs();
                noise += pi * d2u.abs() * dw * inc[j].abs();
                for k in 0..d {
                    h[j][k] += pi * d2u * inc[j] * inc[k];
                }
            }
        }
        let tol = (GRAD_TOL * scale).max(noise).max(f64::MIN_POSITIVE);
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Derivatives { g, h, gnorm, tol })
    }

    /// Damped Newton with Armijo backtracking; golden section on the search
    /// direction when backtracking stalls.
    fn maximize(&self, x: f64, mut theta: Vec<f64>) -> Result<ValueResult> {
        let d = theta.len();
        let mut w = self.terminal_wealth(x, &theta);
        let mut f = self.objective(&w);
        if f == f64::NEG_INFINITY {
            return Err(Error::InfeasibleWealth {
                wealth: x,
                required: self.floor(),
            });
        }
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let Derivatives { g, h, gnorm, tol } = self.derivatives(x, &theta, &w)?;
            if gnorm <= tol {
                converged = true;
                break;
            }
            let neg_h: Vec<Vec<f64>> = h.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
            let mut dir = linalg::solve(&neg_h, &g).unwrap_or_else(|| g.clone());
            let mut slope = linalg::dot(&g, &dir);
            if !(slope > 0.0) || dir.iter().any(|v| !v.is_finite()) {
                dir = g.clone();
                slope = linalg::dot(&g, &g);
            }
            let dw: Vec<f64> = (0..w.len())
                .map(|i| linalg::dot(&dir, self.market.state_increment(i)))
                .collect();
            let mut alpha_max = f64::INFINITY;
            if self.utility.is_half_line() {
                for (wi, dwi) in w.iter().zip(&dw) {
                    if *dwi < 0.0 {
                        alpha_max = alpha_max.min(-wi / dwi);
                    }
                }
            }
            let alpha0 = if alpha_max <= 1.0 {
                0.99 * alpha_max
            } else {
                1.0
            };
            let trial = |alpha: f64| -> (Vec<f64>, f64) {
                let wt: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a + alpha * b).collect();
                let ft = self.objective(&wt);
                (wt, ft)
            };

            let mut alpha = alpha0;
            let mut accepted = None;
            for _ in 0..60 {
                let (wt, ft) = trial(alpha);
                // the second clause accepts full steps whose change is below rounding
                if ft >= f + ARMIJO * alpha * slope
                    || (alpha == alpha0 && ft >= f - 1e-14 * f.abs().max(1.0))
                {
                    accepted = Some((alpha, wt, ft));
                    break;
                }
                alpha *= 0.5;
            }
            let (alpha, wt, ft) = match accepted {
                Some(a) => a,
                None => {
                    let alpha = golden_max(|a| trial(a).1, 0.0, alpha0, 100);
                    let (wt, ft) = trial(alpha);
                    if !(ft > f) {
                        // no ascent available at working precision
                        converged = gnorm <= 1e4 * tol;
                        break;
                    }
                    (alpha, wt, ft)
                }
            };
            for j in 0..d {
                theta[j] += alpha * dir[j];
            }
            // stalled once no terminal wealth moves beyond its rounding error
            let mag = self.wealth_magnitudes(x, &theta);
            let stalled = dw
                .iter()
                .zip(&mag)
                .all(|(dwi, m)| (alpha * dwi).abs() <= 4.0 * f64::EPSILON * m);
            w = wt;
            f = ft;
            if stalled {
                converged = self.derivatives(x, &theta, &w)?.gnorm <= 1e4 * tol;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence("utility maximization"));
        }
        let marginal: f64 = self
            .market
            .probs()
            .iter()
            .zip(&w)
            .map(|(p, &wi)| self.utility.derivative(wi).map(|du| p * du))
            .sum::<Result<f64>>()?;
        Ok(ValueResult {
            value: f,
            marginal,
            theta,
            x,
            claim: self.claim.clone(),
            wealth: w,
        })
    }
}

struct Derivatives {
    g: Vec<f64>,
    h: Vec<Vec<f64>>,
    gnorm: f64,
    tol: f64,
}

/// `min_theta ln E[exp(-gamma (theta . dS + B))]` by Newton with max-shifted
/// accumulation.
fn minimize_log_sum_exp(m: &FiniteMarket, gamma: f64, b: &Claim) -> Result<(Vec<f64>, f64)> {
    let d = m.n_assets();
    let n = m.n_states();
    let probs = m.probs();
    let eval = |theta: &[f64]| -> (f64, Vec<f64>) {
        let e: Vec<f64> = (0..n)
            .map(|i| probs[i].ln() - gamma * (m.gain(theta, i) + b.payoffs()[i]))
            .collect();
        let top = e.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let wts: Vec<f64> = e.iter().map(|v| (v - top).exp()).collect();
        let s: f64 = wts.iter().sum();
        (top + s.ln(), wts.iter().map(|v| v / s).collect())
    };
    let mut theta = vec![0.0; d];
    let (mut l, mut q) = eval(&theta);
    for _ in 0..MAX_NEWTON {
        // gradient -gamma E_q[dS], Hessian gamma^2 Cov_q[dS]
        let mean: Vec<f64> = (0..d)
            .map(|j| (0..n).map(|i| q[i] * m.increments()[j][i]).sum())
            .collect();
        let g: Vec<f64> = mean.iter().map(|v| -gamma * v).collect();
        let gscale: f64 = (0..n)
            .map(|i| {
                q[i] * m
                    .state_increment(i)
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
            })
            .sum::<f64>()
            * gamma;
        let gnorm = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gnorm <= GRAD_TOL * gscale.max(f64::MIN_POSITIVE) {
            return Ok((theta, l));
        }
        let mut h = vec![vec![0.0; d]; d];
        for i in 0..n {
            let inc = m.state_increment(i);
            for j in 0..d {
                for k in 0..d {
                    h[j][k] += gamma * gamma * q[i] * (inc[j] - mean[j]) * (inc[k] - mean[k]);
                }
            }
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let dir = linalg::solve(&h, &neg_g)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .unwrap_or_else(|| neg_g.clone());
        let slope = linalg::dot(&g, &dir);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, s)| t + alpha * s).collect();
            let (lc, qc) = eval(&cand);
            if lc <= l + ARMIJO * alpha * slope
                || (alpha == 1.0 && lc <= l + 1e-14 * l.abs().max(1.0))
            {
                theta = cand;
                l = lc;
                q = qc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            if gnorm <= 1e-9 * gscale.max(1.0) {
                return Ok((theta, l));
            }
            return Err(Error::NonConvergence("exponential utility maximization"));
        }
    }
    Err(Error::NonConvergence("exponential utility maximization"))
}

/// Holdings maximizing `min_i (theta . dS_i + B_i)`, and the resulting
/// wealth floor `-max min`, by LP over `theta = p - q`, `t = t+ - t-`.
fn max_min_wealth(m: &FiniteMarket, b: &Claim) -> Result<(Vec<f64>, f64)> {
    let (n, d) = (m.n_states(), m.n_assets());
    let cols = 2 * d + 2 + n;
    let mut a = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        // theta . dS_i - t - s_i = -B_i
        let mut row = vec![0.0; cols];
        let inc = m.state_increment(i);
        for j in 0..d {
            row[j] = inc[j];
            row[d + j] = -inc[j];
        }
        row[2 * d] = -1.0;
        row[2 * d + 1] = 1.0;
        row[2 * d + 2 + i] = -1.0;
        a.push(row);
        rhs.push(-b.payoffs()[i]);
    }
    let mut c = vec![0.0; cols];
    c[2 * d] = 1.0;
    c[2 * d + 1] = -1.0;
    let sol = lp::maximize(&c, &a, &rhs)?;
    let theta = (0..d).map(|j| sol.x[j] - sol.x[d + j]).collect();
    Ok((theta, -sol.objective))
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

pub fn value_function(m: &FiniteMarket, u: &Utility, x: f64, b: &Claim) -> Result<ValueResult> {
    ValueFunction::new(m, u, b)?.solve(x)
}

pub fn inverse_value(m: &FiniteMarket, u: &Utility, y: f64, b: &Claim) -> Result<f64> {
    ValueFunction::new(m, u, b)?.inverse(y)
}

/// `max_j |sum_i p_i U'(w_i) dS_ji|` at the reported optimum.
pub fn stationarity_residual(m: &FiniteMarket, u: &Utility, r: &ValueResult) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..m.n_assets() {
        let mut s = 0.0;
        for i in 0..m.n_states() {
            s += m.probs()[i] * u.derivative(r.wealth[i])? * m.increments()[j][i];
        }
        worst = worst.max(s.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {

    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn trinomial() -> FiniteMarket {
        FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 0.0, -1.0]]).unwrap()
    }

    fn middle() -> Claim {
        Claim::new(vec![0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn exponential_zero_claim() {
        let r = value_function(
            &trinomial(),
            &Utility::exponential(1.0).unwrap(),
            0.0,
            &Claim::zero(3),
        )
        .unwrap();
        assert!((r.value + 1.0).abs() < 1e-15);
        assert!(r.theta[0].abs() < 1e-12);
        assert!((r.marginal - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_seller_claim() {
        let u = Utility::exponential(1.0).unwrap();
        let r = value_function(&trinomial(), &u, 0.0, &-&middle()).unwrap();
        let e = 1f64.exp();
        assert!((r.value + (2.0 + e) / 3.0).abs() < 1e-14);
        assert!(r.theta[0].abs() < 1e-12);
    }

    #[test]
    fn log_utility_symmetric() {
        let r = value_function(&trinomial(), &Utility::log(), 1.0, &Claim::zero(3)).unwrap();
        assert!(r.value.abs() < 1e-14);
        assert!(r.theta[0].abs() < 1e-12);
    }

    #[test]
    fn inverse_value_examples() {
        let u = Utility::exponential(1.0).unwrap();
        let m = trinomial();
        assert!(inverse_value(&m, &u, -1.0, &Claim::zero(3)).unwrap().abs() < 1e-15);
        let x = inverse_value(&m, &u, -1.0, &-&middle()).unwrap();
        assert!((x - ((2.0 + 1f64.exp()) / 3.0).ln()).abs() < 1e-14);
        assert_eq!(
            inverse_value(&m, &u, 0.0, &Claim::zero(3)),
            Err(Error::OutOfRange(0.0))
        );
    }

    #[test]
    fn log_floor_matches_superhedging_bound() {
        let m = trinomial();
        let b = -&middle();
        let vf = ValueFunction::new(&m, &Utility::log(), &b).unwrap();
        let x0 = crate::market::x_zero(&m, &middle()).unwrap();
        assert!((vf.floor() - x0).abs() < 1e-12);
        assert!(matches!(vf.solve(0.5), Err(Error::InfeasibleWealth { .. })));
        let r = vf.solve(1.2).unwrap();
        assert!(stationarity_residual(&m, &Utility::log(), &r).unwrap() < 1e-9);
    }

    #[test]
    fn generic_inverse_round_trips() {
        let m = trinomial();
        for u in [
            Utility::log(),
            Utility::power(3.0).unwrap(),
            Utility::power(0.5).unwrap(),
        ] {
            let vf = ValueFunction::new(&m, &u, &-&middle()).unwrap();
            for &x in &[1.05, 1.5, 3.0, 20.0] {
                let y = vf.value(x).unwrap();
                let back = vf.inverse(y).unwrap();
                assert!((back - x).abs() < 1e-9 * x, "{u:?} x={x} back={back}");
                let mx = vf.marginal(x).unwrap();
                let back = vf.inverse_marginal(mx).unwrap();
                assert!((back - x).abs() < 1e-8 * x, "{u:?} x={x} back={back}");
            }
        }
    }

    fn quad_market(a: f64, b: f64) -> FiniteMarket {
        FiniteMarket::new(vec![0.25; 4], vec![vec![a, 0.3, -0.2, -b]]).unwrap()
    }

    proptest! {
        #[test]
        fn envelope_matches_finite_difference(
            a in 0.2f64..2.0, bb in 0.2f64..2.0,
            c in proptest::collection::vec(-1.0f64..1.0, 4),
            x in 2.0f64..5.0, k in 0usize..3,
        ) {
            let m = quad_market(a, bb);
            let u = [Utility::exponential(0.8).unwrap(), Utility::log(), Utility::power(2.0).unwrap()][k].clone();
            let claim = Claim::new(c).unwrap();
            let vf = ValueFunction::new(&m, &u, &claim).unwrap();
            let r = vf.solve(x).unwrap();
            prop_assert!(stationarity_residual(&m, &u, &r).unwrap() <= 1e-9);
            let h = 1e-5;
            let fd = (vf.value(x + h).unwrap() - vf.value(x - h).unwrap()) / (2.0 * h);
            prop_assert!((fd - r.marginal).abs() <= 1e-6 * r.marginal.abs());
            // concavity on a 50-point grid
            let vals: Vec<f64> = (0..50).map(|i| vf.value(x + 0.05 * i as f64).unwrap()).collect();
            for w in vals.windows(3) {
                prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12);
            }
            // cash additivity
            let shifted = ValueFunction::new(&m, &u, &claim.shifted(0.3)).unwrap();
            let lhs = shifted.value(x).unwrap();
            let rhs = vf.value(x + 0.3).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn exponential_factorization(g in 0.1f64..3.0, x in -3.0f64..3.0, c in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let m = trinomial();
            let vf = ValueFunction::new(&m, &Utility::exponential(g).unwrap(), &Claim::new(c).unwrap()).unwrap();
            let lhs = vf.value(x).unwrap();
            let rhs = (-g * x).exp() * vf.value(0.0).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }
    }

    #[test]
    fn replicable_claim_identity() {
        let m = trinomial();
        let b = Claim::new(vec![1.5, 0.5, -0.5]).unwrap();
        let price = crate::market::arbitrage_bounds(&m, &b).unwrap().lower;
        for u in [Utility::exponential(1.0).unwrap(), Utility::log()] {
            let lhs = value_function(&m, &u, 2.0, &b).unwrap().value;
            let rhs = value_function(&m, &u, 2.0 + price, &Claim::zero(3))
                .unwrap()
                .value;
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
