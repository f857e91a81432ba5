mod common;

use common::{centered_market, trinomial};
use proptest::prelude::*;
use riskshare_core::oracle::covering_risk_sharing;
use riskshare_core::{Agent, Claim, FiniteMarket, RiskSharingProblem, Utility};

/// One-asset markets with three or four states, a claim in `[0, 1]^n`,
/// and two agents of the same family.
#[derive(Debug, Clone)]
struct Instance {
    market: FiniteMarket,
    claim: Claim,
    seller: Agent,
    buyer: Agent,
    lambda: f64,
}

impl Instance {
    fn problem(&self) -> RiskSharingProblem {
        RiskSharingProblem::new(
            &self.market,
            &self.seller,
            &self.buyer,
            &self.claim,
            self.lambda,
        )
        .unwrap()
    }
}

fn instance(allow_log: bool) -> impl Strategy<Value = Instance> {
    (3usize..=4)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(0.1f64..1.0, n),
                prop::collection::vec(0.1f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
                0.5f64..2.0,
                0.5f64..2.0,
                prop::bool::weighted(if allow_log { 0.5 } else { 0.0 }),
                0.2f64..0.8,
            )
        })
        .prop_filter_map(
            "degenerate market",
            |(p, q, raw, b, gs, gb, log, lambda)| {
                let market = centered_market(&p, &q, &[raw])?;
                let claim = Claim::new(b).ok()?;
                let (us, ub, x) = if log {
                    (Utility::log(), Utility::log(), 3.0)
                } else {
                    (
                        Utility::exponential(gs).ok()?,
                        Utility::exponential(gb).ok()?,
                        0.0,
                    )
                };
                Some(Instance {
                    market,
                    claim,
                    seller: Agent::seller(us, x).ok()?,
                    buyer: Agent::buyer(ub, x).ok()?,
                    lambda,
                })
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn solver_matches_grid_oracle(inst in instance(true)) {
        let sol = inst.problem().solve().unwrap();
        let o = covering_risk_sharing(&inst.market, &inst.seller, &inst.buyer, &inst.claim, inst.lambda, 1e-3).unwrap();
        prop_assert!((o.objective - sol.objective).abs() <= 2e-3, "objective {} vs {}", o.objective, sol.objective);
        prop_assert!((o.price - sol.price).abs() <= 5e-3, "price {} vs {}", o.price, sol.price);
    }

    #[test]
    fn constraint_binds_at_the_optimum(inst in instance(true)) {
        let p = inst.problem();
        let sol = p.solve().unwrap();
        let pb = p.buyer_curve().price(sol.eps_b).unwrap();
        for delta in [1e-4, 1e-3] {
            prop_assert!(p.seller_curve().price(sol.eps_s - delta).unwrap() > pb);
        }
        let d = p.diagnostics(&sol).unwrap();
        prop_assert!(d.constraint <= 1e-6 && d.stationarity_s <= 1e-6 && d.stationarity_b <= 1e-6, "{:?}", d);
    }

    #[test]
    fn solution_is_independent_of_the_starting_bracket(
        inst in instance(true),
        brackets in prop::collection::vec((-30.0f64..10.0, 0.1f64..20.0), 20),
    ) {
        let p = inst.problem();
        let reference = p.solve().unwrap().price;
        for (lo, width) in brackets {
            let price = p.solve_with_bracket(lo, lo + width).unwrap().price;
            prop_assert!((price - reference).abs() <= 1e-8);
        }
    }

    #[test]
    fn exponential_closed_form_matches_generic(inst in instance(false)) {
        let p = inst.problem();
        let generic = p.solve().unwrap();
        let closed = p.solve_exponential_closed_form().unwrap();
        prop_assert!((generic.price - closed.price).abs() <= 1e-8);
        prop_assert!((generic.eps_s - closed.eps_s).abs() <= 1e-8);
        prop_assert!((generic.eps_b - closed.eps_b).abs() <= 1e-8);
    }

    #[test]
    fn price_increases_with_seller_weight(inst in instance(true)) {
        let lambdas: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
        let sweep = inst.problem().lambda_sweep(&lambdas).unwrap();
        for w in sweep.windows(2) {
            prop_assert!(w[1].price > w[0].price);
        }
    }
}

#[test]
fn canonical_instance_closed_forms() {
    let u = Utility::exponential(1.0).unwrap();
    let p = RiskSharingProblem::new(
        &trinomial(),
        &Agent::seller(u.clone(), 0.0).unwrap(),
        &Agent::buyer(u, 0.0).unwrap(),
        &common::middle_digital(),
        0.5,
    )
    .unwrap();
    let e = 1f64.exp();
    let vs = ((2.0 + e) / 3.0).ln();
    let vb = -((2.0 + 1.0 / e) / 3.0).ln();
    let sol = p.solve().unwrap();
    assert!((sol.price - 0.5 * (vs + vb)).abs() < 1e-9);
    assert!((sol.eps_s - sol.eps_b).abs() < 1e-9);
}
