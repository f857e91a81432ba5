mod common;

use common::market_and_claim;
use proptest::prelude::*;
use riskshare_core::pricing::exponential;
use riskshare_core::{Agent, PriceCurve, Role, Utility};

fn agent() -> impl Strategy<Value = Agent> {
    (
        prop_oneof![
            (0.3f64..3.0).prop_map(|g| Utility::exponential(g).unwrap()),
            Just(Utility::log()),
            (0.3f64..3.0).prop_map(|r| Utility::power(r).unwrap()),
        ],
        prop::bool::ANY,
    )
        .prop_map(|(u, seller)| {
            // wealth 3 carries any claim in [-1, 1]^n for half-line utilities
            let x = if u.is_half_line() { 3.0 } else { 0.5 };
            let role = if seller { Role::Seller } else { Role::Buyer };
            Agent::new(u, x, role).unwrap()
        })
}

/// 100 interior losses of the admissible set, spacing `h`.
fn loss_grid(c: &PriceCurve) -> (Vec<f64>, f64) {
    let lo = c.a_lower().max(-2.0);
    let h = (2.0 - lo) / 101.0;
    ((1..=100).map(|k| lo + h * k as f64).collect(), h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loss_inverts_the_price((m, b) in market_and_claim(5, 2), a in agent()) {
        let c = PriceCurve::new(&m, &a, &b).unwrap();
        for eps in loss_grid(&c).0 {
            let p = c.price(eps).unwrap();
            prop_assert!((c.loss(p).unwrap() - eps).abs() < 1e-8, "eps={} p={}", eps, p);
        }
    }

    #[test]
    fn curves_are_strictly_monotone_and_curved((m, b) in market_and_claim(5, 2), a in agent()) {
        let c = PriceCurve::new(&m, &a, &b).unwrap();
        let (grid, h) = loss_grid(&c);
        let p: Vec<f64> = grid.iter().map(|&e| c.price(e).unwrap()).collect();
        let sign = if a.role == Role::Seller { 1.0 } else { -1.0 };
        for w in p.windows(3) {
            let (d1, d2) = (w[1] - w[0], w[2] - 2.0 * w[1] + w[0]);
            prop_assert!(sign * d1 < -1e-10 * h, "d1={}", d1);
            prop_assert!(sign * d2 > 0.0, "d2={}", d2);
        }
    }

    #[test]
    fn zero_loss_gives_the_indifference_price((m, b) in market_and_claim(5, 2), a in agent()) {
        let c = PriceCurve::new(&m, &a, &b).unwrap();
        let v = c.indifference_price().unwrap();
        prop_assert!((c.price(0.0).unwrap() - v).abs() < 1e-9);
    }

    #[test]
    fn exponential_curves_match_closed_forms(
        (m, b) in market_and_claim(5, 2),
        g in 0.3f64..3.0,
        x in -1.0f64..1.0,
        seller in prop::bool::ANY,
    ) {
        let role = if seller { Role::Seller } else { Role::Buyer };
        let c = PriceCurve::new(&m, &Agent::new(Utility::exponential(g).unwrap(), x, role).unwrap(), &b).unwrap();
        let v = c.indifference_price().unwrap();
        let u = c.benchmark_utility();
        for eps in loss_grid(&c).0 {
            let closed = match role {
                Role::Seller => exponential::seller_price(v, g, u, eps),
                Role::Buyer => exponential::buyer_price(v, g, u, eps),
            };
            prop_assert!((c.price(eps).unwrap() - closed).abs() <= 1e-10 * closed.abs().max(1.0));
        }
    }
}
