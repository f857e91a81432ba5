//! Optimal trading time: the stopping time minimizing the expected total
//! risk `E(t, Y_t) = lambda eps_s + (1 - lambda) eps_b` of trading the claim
//! at the risk sharing price.
//!
//! `E` is deterministic in `(t, y)`, obtained from the `eps = 0` PDE prices
//! of both sides. `Y` is approximated under the physical measure by a
//! trinomial Markov chain on a uniform lattice `y0 + k h` with
//! `h = a_max sqrt(3 dt)` and moment-matched probabilities; moves past the
//! lattice edges are clamped to the edge node. `lambda` stays fixed and
//! stopping uses only the path of `Y`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use super::model::MzModel;
use super::pde::{solve_phi, GridSpec, PdeField};
use crate::error::{Error, Result};
use crate::utility::Role;

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingResult {
    /// `V(0, y0)`, the minimal expected total risk.
    pub v0: f64,
    /// `E(0, y0)`, the total risk of trading immediately.
    pub e0: f64,
    /// Lattice value of `E[E(T, Y_T)]`, the risk of waiting until maturity.
    pub expected_terminal: f64,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// `stop[n][k]` is true where trading at `(t[n], y[k])` is optimal.
    pub stop: Vec<Vec<bool>>,
    pub value: Vec<Vec<f64>>,
    pub total_risk: Vec<Vec<f64>>,
    /// Index of `y0` in `y`.
    pub origin: usize,
}

/// Total risk `E(t, y)` from the indifference prices there.
pub fn total_risk(model: &MzModel, t: f64, v_s: f64, v_b: f64) -> f64 {
    model.sharing(t, v_s, v_b).total
}

/// Backward induction `V = min(E, E[V(t + dt)])` from `(0, y0)`. With
/// `terminal_only` the agents may trade only at the horizon.
pub fn optimal_trading_time(
    model: &MzModel,
    y0: f64,
    grid: &GridSpec,
    terminal_only: bool,
) -> Result<StoppingResult> {
    let fs = solve_phi(model, Role::Seller, 0.0, 0.0, y0, grid)?;
    let fb = solve_phi(model, Role::Buyer, 0.0, 0.0, y0, grid)?;
    induct(model, y0, &fs, &fb, terminal_only)
}

fn induct(
    model: &MzModel,
    y0: f64,
    fs: &PdeField,
    fb: &PdeField,
    terminal_only: bool,
) -> Result<StoppingResult> {
    let ts = fs.t.clone();
    let nt = ts.len() - 1;
    let dt = (ts[nt] - ts[0]) / nt as f64;
    let (y_min, y_max) = (fs.y[0], fs.y[fs.y.len() - 1]);
    let mut a_max: f64 = 0.0;
    for &t in &ts {
        for &y in &fs.y {
            a_max = a_max.max(model.a.eval(y, t));
        }
    }
    let h = a_max * (3.0 * dt).sqrt();
    if !(h > 0.0) {
        return Err(Error::GridTooCoarse("lattice spacing vanished"));
    }
    let below = ((y0 - y_min) / h).floor();
    let above = ((y_max - y0) / h).floor();
    if !(below >= 1.0 && above >= 1.0) {
        return Err(Error::GridTooCoarse(
            "lattice does not fit in the PDE domain",
        ));
    }
    let (below, above) = (below as usize, above as usize);
    let ys: Vec<f64> = (0..=below + above)
        .map(|k| y0 + (k as f64 - below as f64) * h)
        .collect();
    let nk = ys.len();

    let total: Vec<Vec<f64>> = (0..=nt)
        .map(|n| {
            ys.iter()
                .map(|&y| total_risk(model, ts[n], fs.price_at(n, y), fb.price_at(n, y)))
                .collect()
        })
        .collect();

    let mut value = vec![Vec::new(); nt + 1];
    let mut stop = vec![vec![false; nk]; nt + 1];
    value[nt] = total[nt].clone();
    stop[nt] = vec![true; nk];
    let mut terminal = total[nt].clone();
    for n in (0..nt).rev() {
        let mut row = vec![0.0; nk];
        let mut term_row = vec![0.0; nk];
        for k in 0..nk {
            let (pd, pm, pu) = probabilities(model, ys[k], ts[n], dt, h)?;
            let down = k.saturating_sub(1);
            let up = (k + 1).min(nk - 1);
            let next = &value[n + 1];
            let cont = pd * next[down] + pm * next[k] + pu * next[up];
            term_row[k] = pd * terminal[down] + pm * terminal[k] + pu * terminal[up];
            let e = total[n][k];
            // ties within rounding go to stopping
            if !terminal_only && e <= cont + 1e-14 * (1.0 + cont.abs()) {
                row[k] = e;
                stop[n][k] = true;
            } else {
                row[k] = cont;
            }
        }
        value[n] = row;
        terminal = term_row;
    }
    Ok(StoppingResult {
        v0: value[0][below],
        e0: total[0][below],
        expected_terminal: terminal[below],
        t: ts,
        y: ys,
        stop,
        value,
        total_risk: total,
        origin: below,
    })
}

/// Down, middle, up probabilities matching the mean `b dt` and second
/// moment `a^2 dt + (b dt)^2` of one step.
fn probabilities(model: &MzModel, y: f64, t: f64, dt: f64, h: f64) -> Result<(f64, f64, f64)> {
    let a = model.a.eval(y, t);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "diffusion a(y, t) must be positive",
            value: a,
        });
    }
    let m = model.b.eval(y, t) * dt / h;
    let s = a * a * dt / (h * h);
    let pu = 0.5 * (s + m * m + m);
    let pd = 0.5 * (s + m * m - m);
    let pm = 1.0 - s - m * m;
    if pu < 0.0 || pd < 0.0 || pm < 0.0 {
        return Err(Error::GridTooCoarse("negative lattice probability"));
    }
    Ok((pd, pm, pu))
}
