//! Euler-Maruyama Monte Carlo for conditional expectations of `f(Y_T)`
//! under the minimal-entropy measure.
//!
//! Paths come in pairs. Pair `k` draws from ChaCha8 stream `k` of the
//! master seed and pair means are reduced in index order, so estimates do
//! not depend on how pairs are batched.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::{MzModel, MzPriceResult};
use crate::error::{Error, Result};
use crate::utility::Role;

pub const DEFAULT_STEPS_PER_YEAR: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    /// Total paths; rounded down to an even count.
    pub n_paths: usize,
    pub seed: u64,
    pub steps_per_year: f64,
    /// Second path of each pair reuses the first path's normals negated.
    pub antithetic: bool,
}

impl McSpec {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McSpec {
            n_paths,
            seed,
            steps_per_year: DEFAULT_STEPS_PER_YEAR,
            antithetic: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Sample variance of the pair means.
    pub pair_variance: f64,
}

/// Simulates `Y` from `(t, y)` to the horizon under the minimal-entropy
/// drift and averages each integrand over the same paths.
pub fn conditional_expectations(
    model: &MzModel,
    t: f64,
    y: f64,
    integrands: &[&dyn Fn(f64) -> f64],
    spec: &McSpec,
) -> Result<Vec<McEstimate>> {
    model.validate()?;
    if spec.n_paths < 2 {
        return Err(Error::InvalidParameter {
            name: "n_paths",
            value: spec.n_paths as f64,
        });
    }
    if !(spec.steps_per_year > 0.0) {
        return Err(Error::InvalidParameter {
            name: "steps_per_year",
            value: spec.steps_per_year,
        });
    }
    let span = model.horizon - t;
    if !(span.is_finite() && y.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
        });
    }
    let n_steps = ((span * spec.steps_per_year).ceil() as usize).max(1);
    let dt = span / n_steps as f64;
    if !(dt >= 1e-12) {
        return Err(Error::StepUnderflow(dt));
    }
    let sqrt_dt = dt.sqrt();
    let pairs = spec.n_paths / 2;
    let mut pair_means = vec![Vec::with_capacity(pairs); integrands.len()];
    let mut normals = vec![0.0; n_steps];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for k in 0..pairs {
        rng.set_stream(k as u64);
        rng.set_word_pos(0);
        for z in normals.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        let first = simulate(model, t, y, dt, sqrt_dt, &normals, 1.0)?;
        let second = if spec.antithetic {
            simulate(model, t, y, dt, sqrt_dt, &normals, -1.0)?
        } else {
            for z in normals.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            simulate(model, t, y, dt, sqrt_dt, &normals, 1.0)?
        };
        for (f, means) in integrands.iter().zip(pair_means.iter_mut()) {
            means.push(0.5 * (f(first) + f(second)));
        }
    }
    Ok(pair_means.iter().map(|m| summarize(m)).collect())
}

/// Single-integrand form returning `(estimate, stderr)`.
pub fn conditional_expectation(
    model: &MzModel,
    t: f64,
    y: f64,
    integrand: &dyn Fn(f64) -> f64,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let est = conditional_expectations(model, t, y, &[integrand], &McSpec::new(n_paths, seed))?;
    Ok((est[0].mean, est[0].stderr))
}

/// Indifference prices at `(t, y)` from one set of paths. Standard errors
/// are propagated through the logarithm by the delta method.
pub fn indifference_prices(
    model: &MzModel,
    t: f64,
    y: f64,
    spec: &McSpec,
) -> Result<MzPriceResult> {
    let cs = model.exponent(Role::Seller);
    let cb = model.exponent(Role::Buyer);
    let g = model.g;
    let fs = move |yt: f64| (cs * g.eval(yt)).exp();
    let fb = move |yt: f64| (cb * g.eval(yt)).exp();
    let est = conditional_expectations(model, t, y, &[&fs, &fb], spec)?;
    let v_s = model.price_from_expectation(Role::Seller, est[0].mean);
    let v_b = model.price_from_expectation(Role::Buyer, est[1].mean);
    let se_s = est[0].stderr / (cs.abs() * est[0].mean);
    let se_b = est[1].stderr / (cb.abs() * est[1].mean);
    Ok(model.price_result(t, y, v_s, v_b, (se_s, se_b)))
}

fn simulate(
    model: &MzModel,
    t0: f64,
    y0: f64,
    dt: f64,
    sqrt_dt: f64,
    normals: &[f64],
    sign: f64,
) -> Result<f64> {
    let mut y = y0;
    for (i, z) in normals.iter().enumerate() {
        let t = t0 + i as f64 * dt;
        let a = model.a.eval(y, t);
        if !(a > 0.0) {
            return Err(Error::InvalidParameter {
                name: "diffusion a(y, t) must be positive",
                value: a,
            });
        }
        y += model.q0_drift(y, t) * dt + a * sqrt_dt * sign * z;
    }
    Ok(y)
}

fn summarize(values: &[f64]) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        pair_variance: var,
    }
}
