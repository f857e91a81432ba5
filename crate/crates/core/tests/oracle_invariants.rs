mod common;

use common::{centered_market, trinomial};
use proptest::prelude::*;
use riskshare_core::oracle::{brute_force_value, price_sweep_objective, search_value, GridSpec};
use riskshare_core::{Agent, Claim, Utility};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refining_the_holding_grid_never_lowers_the_value(
        p in prop::collection::vec(0.1f64..1.0, 4),
        q in prop::collection::vec(0.1f64..1.0, 4),
        raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..=2),
        b in prop::collection::vec(-1.0f64..1.0, 4),
        g in 0.3f64..3.0,
    ) {
        let Some(m) = centered_market(&p, &q, &raw) else { return Ok(()) };
        let b = Claim::new(b).unwrap();
        let u = Utility::exponential(g).unwrap();
        let mut previous = f64::NEG_INFINITY;
        // nested grids: each step halves the spacing
        for step in [0.2, 0.1, 0.05, 0.025] {
            let mut grid = GridSpec::symmetric(2.0, step);
            grid.theta = (-2.0, 2.0);
            let (v, _) = brute_force_value(&m, &u, 0.0, &b, &grid).unwrap();
            prop_assert!(v >= previous);
            previous = v;
        }
        if m.n_assets() == 1 {
            prop_assert!(previous <= search_value(&m, &u, 0.0, &b).unwrap() + 1e-12);
        }
    }

    #[test]
    fn oracle_is_a_pure_function(lambda in 0.1f64..0.9) {
        let u = Utility::exponential(1.0).unwrap();
        let (s, b) = (Agent::seller(u.clone(), 0.0).unwrap(), Agent::buyer(u, 0.0).unwrap());
        let grid = GridSpec::symmetric(1.0, 1e-2);
        let m = trinomial();
        let claim = common::middle_digital();
        let first = price_sweep_objective(&m, &s, &b, &claim, lambda, &grid).unwrap();
        let second = price_sweep_objective(&m, &s, &b, &claim, lambda, &grid).unwrap();
        prop_assert_eq!(first.to_bits(), second.to_bits());
    }
}
