//! Crank-Nicolson solver for the linear backward problem
//!
//! ```text
//! Phi_t + a^2/2 Phi_yy + (b - rho mu a / sigma) Phi_y + (R'/R) Phi = 0
//! Phi(y, T) = exp(c g(y)) / R(T),   R(t) = (1 + eps delta_t)^(1 - rho^2)
//! ```
//!
//! with `c = gamma_s (1 - rho^2)` for the seller and `-gamma_b (1 - rho^2)`
//! for the buyer. Prices are `P = ln(Phi) / c`.
//!
//! `R'/R` depends on `t` only, so it commutes with the spatial operator and
//! is integrated exactly by the factor `R(t_{n+1}) / R(t_n)` after each
//! diffusion step. Boundaries impose `Phi_yy = 0` with one-sided first
//! derivatives. The first two steps are replaced by four implicit Euler
//! half steps to damp the payoff kink.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use super::model::{MzModel, MzPriceResult};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::utility::Role;

/// Tolerance on the scaled quasilinear residual.
pub const RESIDUAL_TOL: f64 = 1e-3;
/// Half-width of the default domain in stationary standard deviations.
pub const DOMAIN_DEVIATIONS: f64 = 6.0;
const RANNACHER_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of spatial nodes, including both boundaries.
    pub ny: usize,
    /// Number of time steps from the evaluation time to the horizon.
    pub nt: usize,
    /// Explicit `(y_min, y_max)`; `None` picks the default domain.
    pub y_range: Option<(f64, f64)>,
    /// Fail with `GridTooCoarse` when the quasilinear residual exceeds
    /// [`RESIDUAL_TOL`].
    pub check_residual: bool,
}

impl GridSpec {
    pub fn new(ny: usize, nt: usize) -> Self {
        GridSpec {
            ny,
            nt,
            y_range: None,
            check_residual: true,
        }
    }

    /// `[y_min, y_max]` for a solve starting at `(t0, y0)`: six deviations
    /// around the union of `y0`, the physical mean and the
    /// minimal-entropy mean.
    pub fn domain(&self, model: &MzModel, t0: f64, y0: f64) -> (f64, f64) {
        if let Some(r) = self.y_range {
            return r;
        }
        let (p_mean, q_mean, dev) = model.scale(y0, t0);
        let dev = if dev > 0.0 { dev } else { 1.0 };
        let lo = y0.min(p_mean).min(q_mean) - DOMAIN_DEVIATIONS * dev;
        let hi = y0.max(p_mean).max(q_mean) + DOMAIN_DEVIATIONS * dev;
        (lo, hi)
    }
}

/// Solution of the `Phi` problem on a `(t, y)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeField {
    pub side: Role,
    pub eps: f64,
    /// Signed exponent `c`.
    pub c: f64,
    /// Increasing time levels `t0 = t[0] < ... < t[nt] = T`.
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// `phi[n][j]` at `(t[n], y[j])`.
    pub phi: Vec<Vec<f64>>,
}

impl PdeField {
    pub fn price(&self, n: usize, j: usize) -> f64 {
        self.phi[n][j].ln() / self.c
    }

    /// Price row at time level `n`.
    pub fn price_row(&self, n: usize) -> Vec<f64> {
        self.phi[n].iter().map(|p| p.ln() / self.c).collect()
    }

    /// Linear interpolation of the price in `y` at time level `n`; clamps
    /// outside the grid.
    pub fn price_at(&self, n: usize, y: f64) -> f64 {
        let row = &self.phi[n];
        let ys = &self.y;
        let h = ys[1] - ys[0];
        let s = ((y - ys[0]) / h).clamp(0.0, (ys.len() - 1) as f64);
        let j = (s.floor() as usize).min(ys.len() - 2);
        let w = s - j as f64;
        let phi = (1.0 - w) * row[j] + w * row[j + 1];
        phi.ln() / self.c
    }

    /// Largest scaled residual of the quasilinear price equation over the
    /// interior region: the first three quarters of the time span and the
    /// inner 80% of the spatial domain. Residuals are divided by the largest
    /// sum of absolute term values over the same region.
    pub fn quasilinear_residual(&self, model: &MzModel) -> f64 {
        let nt = self.t.len() - 1;
        let ny = self.y.len();
        if nt < 2 || ny < 3 {
            return 0.0;
        }
        let t_end = self.t[0] + 0.75 * (self.t[nt] - self.t[0]);
        let j_lo = (ny / 10).max(1);
        let j_hi = (ny - ny / 10).min(ny - 1);
        let h = self.y[1] - self.y[0];
        let rows: Vec<Vec<f64>> = (0..=nt).map(|n| self.price_row(n)).collect();
        let mut worst: f64 = 0.0;
        // floor so that a flat field with rounding-level terms passes
        let mut scale: f64 = 1e-9 / (self.t[nt] - self.t[0]);
        for n in 1..nt {
            let t = self.t[n];
            if t > t_end {
                break;
            }
            let dt = self.t[n + 1] - self.t[n - 1];
            let source = source_rate(model, self.side, self.eps, t) / self.c;
            for j in j_lo..j_hi {
                let p_t = (rows[n + 1][j] - rows[n - 1][j]) / dt;
                let p_y = (rows[n][j + 1] - rows[n][j - 1]) / (2.0 * h);
                let p_yy = (rows[n][j + 1] - 2.0 * rows[n][j] + rows[n][j - 1]) / (h * h);
                let a = model.a.eval(self.y[j], t);
                let d = model.q0_drift(self.y[j], t);
                let terms = [
                    p_t,
                    0.5 * a * a * p_yy,
                    d * p_y,
                    0.5 * self.c * a * a * p_y * p_y,
                    source,
                ];
                worst = worst.max(terms.iter().sum::<f64>().abs());
                scale = scale.max(terms.iter().map(|x| x.abs()).sum());
            }
        }
        worst / scale
    }
}

/// `R'(t) / R(t) = (1 - rho^2) d/dt ln(1 + eps delta_t)`.
fn source_rate(model: &MzModel, side: Role, eps: f64, t: f64) -> f64 {
    let delta = model.delta(side, t);
    let ddelta = -model.mu * model.mu / (2.0 * model.sigma * model.sigma) * delta;
    model.rho_bar_sq() * eps * ddelta / (1.0 + eps * delta)
}

fn log_r(model: &MzModel, side: Role, eps: f64, t: f64) -> Result<f64> {
    let arg = 1.0 + eps * model.delta(side, t);
    if !(arg > 0.0) {
        return Err(Error::LogDomain(arg));
    }
    Ok(model.rho_bar_sq() * arg.ln())
}

/// Solves for `Phi` on `[t0, T]` for one side and loss `eps`.
pub fn solve_phi(
    model: &MzModel,
    side: Role,
    eps: f64,
    t0: f64,
    y0: f64,
    grid: &GridSpec,
) -> Result<PdeField> {
    model.validate()?;
    if grid.ny < 5 || grid.nt < 2 * RANNACHER_STEPS {
        return Err(Error::GridTooCoarse("need ny >= 5 and nt >= 4"));
    }
    let span = model.horizon - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t must precede the horizon",
            value: t0,
        });
    }
    let (y_min, y_max) = grid.domain(model, t0, y0);
    if !(y_min.is_finite() && y_max.is_finite() && y_min < y_max) {
        return Err(Error::InvalidParameter {
            name: "y_range",
            value: y_max - y_min,
        });
    }
    let ny = grid.ny;
    let nt = grid.nt;
    let h = (y_max - y_min) / (ny - 1) as f64;
    let dt = span / nt as f64;
    if !(dt >= 1e-12) {
        return Err(Error::StepUnderflow(dt));
    }
    let ys: Vec<f64> = (0..ny).map(|j| y_min + j as f64 * h).collect();
    let ts: Vec<f64> = (0..=nt)
        .map(|n| {
            if n == nt {
                model.horizon
            } else {
                t0 + n as f64 * dt
            }
        })
        .collect();
    let c = model.exponent(side);

    let mut phi = vec![Vec::new(); nt + 1];
    let log_rt = log_r(model, side, eps, model.horizon)?;
    phi[nt] = ys
        .iter()
        .map(|&y| (c * model.g.eval(y) - log_rt).exp())
        .collect();

    let mut op = Operator::new(ny);
    let mut current = phi[nt].clone();
    for n in (0..nt).rev() {
        let (t_hi, t_lo) = (ts[n + 1], ts[n]);
        if nt - n <= RANNACHER_STEPS {
            let t_mid = 0.5 * (t_hi + t_lo);
            current = op.step(model, &ys, h, &current, 0.5 * dt, t_mid + 0.25 * dt, 1.0)?;
            current = op.step(model, &ys, h, &current, 0.5 * dt, t_lo + 0.25 * dt, 1.0)?;
        } else {
            current = op.step(model, &ys, h, &current, dt, 0.5 * (t_hi + t_lo), 0.5)?;
        }
        let factor = (log_r(model, side, eps, t_hi)? - log_r(model, side, eps, t_lo)?).exp();
        for v in current.iter_mut() {
            *v *= factor;
        }
        if current.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::GridTooCoarse("Phi lost positivity"));
        }
        phi[n] = current.clone();
    }
    let field = PdeField {
        side,
        eps,
        c,
        t: ts,
        y: ys,
        phi,
    };
    if grid.check_residual && field.quasilinear_residual(model) > RESIDUAL_TOL {
        return Err(Error::GridTooCoarse("quasilinear residual above tolerance"));
    }
    Ok(field)
}

/// Indifference prices at `(t, y)` from the `eps = 0` problems.
pub fn indifference_prices(
    model: &MzModel,
    t: f64,
    y: f64,
    grid: &GridSpec,
) -> Result<MzPriceResult> {
    let fs = solve_phi(model, Role::Seller, 0.0, t, y, grid)?;
    let fb = solve_phi(model, Role::Buyer, 0.0, t, y, grid)?;
    Ok(model.price_result(t, y, fs.price_at(0, y), fb.price_at(0, y), (0.0, 0.0)))
}

/// Tridiagonal spatial operator with scratch buffers.
struct Operator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

impl Operator {
    fn new(ny: usize) -> Self {
        Operator {
            lower: vec![0.0; ny],
            diag: vec![0.0; ny],
            upper: vec![0.0; ny],
            rhs: vec![0.0; ny],
        }
    }

    /// One backward step of length `dt` with coefficients frozen at `t`:
    /// `(I - theta dt L) new = (I + (1 - theta) dt L) old`.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        model: &MzModel,
        ys: &[f64],
        h: f64,
        old: &[f64],
        dt: f64,
        t: f64,
        theta: f64,
    ) -> Result<Vec<f64>> {
        let ny = ys.len();
        for j in 0..ny {
            let y = ys[j];
            let a = model.a.eval(y, t);
            if !(a > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "diffusion a(y, t) must be positive",
                    value: a,
                });
            }
            let d = model.q0_drift(y, t);
            // (L v)_j = lo v_{j-1} + mid v_j + up v_{j+1}
            let (lo, mid, up) = if j == 0 {
                (0.0, -d / h, d / h)
            } else if j == ny - 1 {
                (-d / h, d / h, 0.0)
            } else {
                let alpha = 0.5 * a * a / (h * h);
                let beta = d / (2.0 * h);
                (alpha - beta, -2.0 * alpha, alpha + beta)
            };
            let e = (1.0 - theta) * dt;
            let mut r = old[j] + e * mid * old[j];
            if j > 0 {
                r += e * lo * old[j - 1];
            }
            if j + 1 < ny {
                r += e * up * old[j + 1];
            }
            self.rhs[j] = r;
            self.lower[j] = -theta * dt * lo;
            self.diag[j] = 1.0 - theta * dt * mid;
            self.upper[j] = -theta * dt * up;
        }
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut self.rhs);
        Ok(self.rhs.clone())
    }
}
