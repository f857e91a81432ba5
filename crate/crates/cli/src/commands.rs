//! Subcommand implementations. Each returns the JSON summary for stdout
//! and, for grid outputs, the CSV text.

use anyhow::Result;
use riskshare_core::mz::{self, pde, Engine};
use riskshare_core::{arbitrage_bounds, Error, RiskSharingProblem, Role, Utility};
use serde_json::{json, Value};

use crate::config::{EngineKind, RangeConfig, RunConfig};
use crate::output::{fmt_sig, Csv};

/// Result of one command.
pub struct Output {
    pub json: Option<Value>,
    pub csv: Option<String>,
}

const DEFAULT_EPS_GRID: RangeConfig = RangeConfig {
    start: -0.25,
    stop: 0.25,
    count: 101,
};

fn problem(cfg: &RunConfig) -> Result<RiskSharingProblem> {
    Ok(RiskSharingProblem::new(
        &cfg.market()?,
        &cfg.seller()?,
        &cfg.buyer()?,
        &cfg.claim()?,
        cfg.lambda,
    )?)
}

fn is_exponential(p: &RiskSharingProblem) -> bool {
    matches!(p.seller().utility, Utility::Exponential { .. })
        && matches!(p.buyer().utility, Utility::Exponential { .. })
}

pub fn price(cfg: &RunConfig) -> Result<Output> {
    let p = problem(cfg)?;
    let sol = p.solve()?;
    let interval = arbitrage_bounds(p.market(), p.claim())?;
    let bounds = p.lambda_bounds(&interval)?;
    let json = json!({
        "lambda": cfg.lambda,
        "price": sol.price,
        "eps_s": sol.eps_s,
        "eps_b": sol.eps_b,
        "multiplier": sol.multiplier,
        "v_s": p.seller_curve().indifference_price()?,
        "v_b": p.buyer_curve().indifference_price()?,
        "arbitrage_interval": { "lower": interval.lower, "upper": interval.upper },
        "inside_bounds": interval.contains(sol.price),
        "lambda_bounds": bounds.map(|(lo, hi)| json!({ "low": lo, "high": hi })),
    });
    Ok(Output {
        json: Some(json),
        csv: None,
    })
}

pub fn curves(cfg: &RunConfig) -> Result<Output> {
    let p = problem(cfg)?;
    let grid = cfg.eps_grid.unwrap_or(DEFAULT_EPS_GRID).points()?;
    let mut csv = Csv::new(&["eps", "P_s", "P_b", "dP_s", "dP_b"]);
    for eps in grid {
        let cells = [
            p.seller_curve().price(eps),
            p.buyer_curve().price(eps),
            p.seller_curve().derivative(eps),
            p.buyer_curve().derivative(eps),
        ];
        let mut row = vec![fmt_sig(eps)];
        let mut inside = true;
        for c in cells {
            match c {
                Ok(v) if v.is_finite() => row.push(fmt_sig(v)),
                // outside the domain of one of the curves
                Ok(_) | Err(Error::DomainError(_)) | Err(Error::OutOfRange(_)) => inside = false,
                Err(e) => return Err(e.into()),
            }
        }
        if inside {
            csv.row(&row);
        }
    }
    Ok(Output {
        json: None,
        csv: Some(csv.into_string()),
    })
}

pub fn sweep(cfg: &RunConfig) -> Result<Output> {
    let p = problem(cfg)?;
    let lambdas = match &cfg.lambda_sweep {
        Some(l) => l.clone(),
        None => (1..=99).map(|k| k as f64 / 100.0).collect(),
    };
    let interval = arbitrage_bounds(p.market(), p.claim())?;
    let mut csv = Csv::new(&[
        "kind",
        "lambda",
        "price",
        "eps_s",
        "eps_b",
        "multiplier",
        "inside_bounds",
    ]);
    for s in p.lambda_sweep(&lambdas)? {
        csv.row(&[
            "sweep".into(),
            fmt_sig(s.lambda),
            fmt_sig(s.price),
            fmt_sig(s.eps_s),
            fmt_sig(s.eps_b),
            fmt_sig(s.multiplier),
            interval.contains(s.price).to_string(),
        ]);
    }
    let mut bound_rows = |name: &str, bounds: Option<(f64, f64)>| {
        if let Some((lo, hi)) = bounds {
            for (suffix, lambda, price) in
                [("low", lo, interval.lower), ("high", hi, interval.upper)]
            {
                csv.row(&[
                    format!("{name}_{suffix}"),
                    fmt_sig(lambda),
                    fmt_sig(price),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
        }
    };
    bound_rows("lambda", p.lambda_bounds(&interval)?);
    if is_exponential(&p) {
        bound_rows(
            "lambda_exponential",
            p.lambda_bounds_exponential(&interval)?,
        );
    }
    Ok(Output {
        json: None,
        csv: Some(csv.into_string()),
    })
}

fn engine(cfg: &RunConfig) -> Engine {
    match cfg.options.engine {
        EngineKind::Mc => Engine::MonteCarlo(cfg.mc_spec()),
        EngineKind::Pde => Engine::Pde(cfg.grid()),
    }
}

pub fn mz_price(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.mz_model()?;
    let at = cfg.mz.expect("validated mz block");
    let r = mz::indifference_prices(&model, at.t, at.y, &engine(cfg))?;
    let json = json!({
        "engine": cfg.options.engine,
        "t": r.t,
        "y": r.y,
        "v_s": r.v_s,
        "v_b": r.v_b,
        "delta_s": r.delta_s,
        "delta_b": r.delta_b,
        "p_star": r.p_star,
        "stderr_v_s": r.stderr_v_s,
        "stderr_v_b": r.stderr_v_b,
    });
    Ok(Output {
        json: Some(json),
        csv: None,
    })
}

pub fn mz_field(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.mz_model()?;
    let at = cfg.mz.expect("validated mz block");
    let grid = cfg.grid();
    let fs = pde::solve_phi(&model, Role::Seller, 0.0, at.t, at.y, &grid)?;
    let fb = pde::solve_phi(&model, Role::Buyer, 0.0, at.t, at.y, &grid)?;
    let mut csv = Csv::new(&["t", "y", "v_s", "v_b", "p_star"]);
    for n in 0..fs.t.len() {
        for j in 0..fs.y.len() {
            let (vs, vb) = (fs.price(n, j), fb.price(n, j));
            csv.row(&[
                fmt_sig(fs.t[n]),
                fmt_sig(fs.y[j]),
                fmt_sig(vs),
                fmt_sig(vb),
                fmt_sig(model.risk_sharing_price(vs, vb)),
            ]);
        }
    }
    Ok(Output {
        json: None,
        csv: Some(csv.into_string()),
    })
}

pub fn mz_stop(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.mz_model()?;
    let at = cfg.mz.expect("validated mz block");
    let terminal_only = cfg.options.terminal_only;
    let r = mz::optimal_trading_time(&model, at.y, &cfg.grid(), terminal_only)?;
    let mut csv = Csv::new(&["t", "y", "stop", "value", "total_risk"]);
    for n in 0..r.t.len() {
        for k in 0..r.y.len() {
            csv.row(&[
                fmt_sig(r.t[n]),
                fmt_sig(r.y[k]),
                u8::from(r.stop[n][k]).to_string(),
                fmt_sig(r.value[n][k]),
                fmt_sig(r.total_risk[n][k]),
            ]);
        }
    }
    let json = json!({
        "y0": at.y,
        "terminal_only": terminal_only,
        "v0": r.v0,
        "e0": r.e0,
        "expected_terminal": r.expected_terminal,
    });
    Ok(Output {
        json: Some(json),
        csv: Some(csv.into_string()),
    })
}

/// Exit code for a failed command: 2 for an infeasible but well-posed
/// instance, 3 for invalid input, 4 for numerical failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) => match e {
            Error::NoOverlap { .. } | Error::InfeasibleWealth { .. } => 2,
            Error::ArbitrageDetected
            | Error::CompleteMarket
            | Error::InvalidMarket(_)
            | Error::InvalidParameter { .. }
            | Error::DomainError(_)
            | Error::OutOfRange(_)
            | Error::WrongUtilityKind(_)
            | Error::NonMonotonePsi(_)
            | Error::LogDomain(_) => 3,
            _ => 4,
        },
        None => 3,
    }
}
