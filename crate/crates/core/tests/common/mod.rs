//! Random arbitrage-free markets for property tests.
#![allow(dead_code)] // each test binary uses a subset

use proptest::prelude::*;
use riskshare_core::{Claim, FiniteMarket};

/// Normalizes positive weights to a probability vector.
pub fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Builds a market whose increments have mean zero under the strictly
/// positive measure `q`, so no arbitrage holds by construction.
pub fn centered_market(probs: &[f64], q: &[f64], raw: &[Vec<f64>]) -> Option<FiniteMarket> {
    let q = normalize(q);
    let increments = raw
        .iter()
        .map(|row| {
            let mean: f64 = row.iter().zip(&q).map(|(v, p)| v * p).sum();
            row.iter().map(|v| v - mean).collect()
        })
        .collect();
    FiniteMarket::new(normalize(probs), increments).ok()
}

/// Incomplete markets with `d` assets and `d + 2 ..= max_states` states,
/// paired with a claim in `[-1, 1]^n`.
pub fn market_and_claim(
    max_states: usize,
    max_assets: usize,
) -> impl Strategy<Value = (FiniteMarket, Claim)> {
    (1..=max_assets)
        .prop_flat_map(move |d| (Just(d), (d + 2)..=max_states))
        .prop_flat_map(|(d, n)| {
            (
                prop::collection::vec(0.05f64..1.0, n),
                prop::collection::vec(0.05f64..1.0, n),
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), d),
                prop::collection::vec(-1.0f64..1.0, n),
            )
        })
        .prop_filter_map("degenerate market", |(p, q, raw, b)| {
            Some((centered_market(&p, &q, &raw)?, Claim::new(b).ok()?))
        })
}

pub fn trinomial() -> FiniteMarket {
    FiniteMarket::new(vec![1.0 / 3.0; 3], vec![vec![1.0, 0.0, -1.0]]).unwrap()
}

pub fn middle_digital() -> Claim {
    Claim::new(vec![0.0, 1.0, 0.0]).unwrap()
}
