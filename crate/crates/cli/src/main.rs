//! Command-line surface over the screening engines: solve the optimal
//! market, screen a given market, evaluate closed forms, trace frontiers,
//! run the fixed-inventory variant, brute-force small instances, generate
//! mean-preserving spreads, and run the acceptance suite.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use screenopt::closedform;
use screenopt::corpus;
use screenopt::fbvp;
use screenopt::frontier::{self, FrontierEngine};
use screenopt::inventory::{self, InventoryModel};
use screenopt::oracle::{self, OracleMode};
use screenopt::piecewise::{PiecewiseFn, QuantileJson, SegmentJson};
use screenopt::screening;
use screenopt::verify;
use screenopt::{make_cost, CostKind, CostModel, Error, QuantileFn, WelfareWeight};

mod output;
use output::{fmt17, write_text};

#[derive(Parser)]
#[command(
    name = "screenopt",
    about = "Optimal market composition and seller screening outcomes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Seed for randomized property corpora
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance for the adaptive solvers
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (defaults to stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config file with key=value lines (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Fbvp,
    Closedform,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Ascent,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Quadratic,
    Linear,
    Elasticity,
}

#[derive(Clone, Copy, ValueEnum)]
enum MpsKind {
    Finite,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Golden,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the optimal-market free-boundary problem
    Solve {
        /// quadratic | elasticity:ETA | generic:FILE
        #[arg(long)]
        cost: String,
        /// Welfare weight on consumer surplus, in `[0,1]`
        #[arg(long)]
        k: f64,
    },
    /// Screen a market: seller-optimal menu and payoffs
    Screen {
        /// Market JSON file (quantile segments)
        #[arg(long)]
        market: PathBuf,
        /// quadratic | elasticity:ETA | generic:FILE
        #[arg(long)]
        cost: String,
        /// Menu grid size in rank space
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Evaluate the closed-form engines
    Closedform {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        k: f64,
        /// Elasticity parameter (case = elasticity)
        #[arg(long)]
        eta: Option<f64>,
        /// Marginal cost (case = linear)
        #[arg(long, default_value_t = 0.0)]
        m: f64,
        /// Capacity (case = linear)
        #[arg(long, default_value_t = 1.0)]
        qbar: f64,
    },
    /// Trace the consumer-surplus/profit frontier over k
    Frontier {
        #[arg(long)]
        cost: String,
        /// Grid as LO:HI:STEP
        #[arg(long = "k-grid")]
        k_grid: String,
        #[arg(long, value_enum)]
        engine: EngineArg,
    },
    /// Fixed-inventory variant
    Inventory {
        /// uniform | two-point | FILE (piecewise quantile JSON)
        #[arg(long)]
        inv: String,
        #[arg(long)]
        k: f64,
        /// Write the region CSV (columns b,cs,pi) to this file
        #[arg(long)]
        region: Option<PathBuf>,
        /// b-grid size for the region
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Brute-force oracle over discretized monotone profiles
    Oracle {
        #[arg(long)]
        cost: String,
        #[arg(long)]
        k: f64,
        /// Number of rank cells
        #[arg(long)]
        n: usize,
        /// Level grid resolution (exhaustive mode)
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
    },
    /// Generate mean-preserving-spread priors of an optimal market
    Mps {
        #[arg(long, value_enum)]
        kind: MpsKind,
        /// Spread anchor in (0, vlow)
        #[arg(long)]
        a: f64,
        /// Base market JSON (default: quadratic optimum at --k)
        #[arg(long)]
        market: Option<PathBuf>,
        /// Welfare weight for the default base market
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Support points (finite) or quantile grid (smooth)
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the acceptance suite and print a pass/fail table
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Emit a market corpus sample as JSON (inspection helper)
    Sample {
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

struct Settings {
    seed: u64,
    tol: f64,
    out: Option<PathBuf>,
}

/// Flags override the config file, which overrides defaults.
fn settings(global: &GlobalArgs) -> Result<Settings, Error> {
    let mut seed: u64 = 0;
    let mut tol: f64 = 1e-10;
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {} is not key=value", lineno + 1))
            })?;
            match key.trim() {
                "seed" => {
                    seed = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad seed in config: {value}")))?
                }
                "tol" => {
                    tol = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad tol in config: {value}")))?
                }
                "threads" => std::env::set_var("SCREENOPT_THREADS", value.trim()),
                other => return Err(Error::InvalidInput(format!("unknown config key '{other}'"))),
            }
        }
    }
    Ok(Settings {
        seed: global.seed.unwrap_or(seed),
        tol: global.tol.unwrap_or(tol),
        out: global.out.clone(),
    })
}

fn parse_cost(spec: &str) -> Result<CostModel, Error> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (spec, None),
    };
    match kind {
        "quadratic" => make_cost(CostKind::Quadratic, &[]),
        "elasticity" => {
            let eta: f64 = rest
                .ok_or_else(|| Error::InvalidCost("elasticity needs :ETA".into()))?
                .parse()
                .map_err(|_| Error::InvalidCost("bad elasticity parameter".into()))?;
            make_cost(CostKind::Elasticity, &[eta])
        }
        "linear" => {
            let params: Vec<f64> = rest
                .ok_or_else(|| Error::InvalidCost("linear needs :M,QBAR".into()))?
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::InvalidCost("bad linear parameters".into()))?;
            make_cost(CostKind::Linear, &params)
        }
        "generic" => {
            let path = rest.ok_or_else(|| Error::InvalidCost("generic needs :FILE".into()))?;
            let text = fs::read_to_string(path)?;
            let coeffs: Vec<f64> = serde_json::from_str::<serde_json::Value>(&text)?
                .get("coeffs")
                .and_then(|c| c.as_array())
                .ok_or_else(|| Error::InvalidCost("generic file needs {\"coeffs\": [...]}".into()))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::InvalidCost("non-numeric coeff".into()))
                })
                .collect::<Result<_, _>>()?;
            make_cost(CostKind::Generic, &coeffs)
        }
        other => Err(Error::InvalidCost(format!("unknown cost kind '{other}'"))),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "grid must be LO:HI:STEP, got '{spec}'"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidInput("bad grid LO".into()))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidInput("bad grid HI".into()))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| Error::InvalidInput("bad grid STEP".into()))?;
    if !step.is_finite() || step <= 0.0 || hi < lo {
        return Err(Error::InvalidInput(
            "grid needs LO <= HI and STEP > 0".into(),
        ));
    }
    let mut grid = Vec::new();
    let n = ((hi - lo) / step).round() as usize;
    for i in 0..=n {
        let k = lo + step * i as f64;
        if k <= hi + 1e-12 {
            grid.push(k.min(hi));
        }
    }
    Ok(grid)
}

fn load_market(path: &PathBuf) -> Result<QuantileFn, Error> {
    let text = fs::read_to_string(path)?;
    let json: QuantileJson = serde_json::from_str(&text)?;
    QuantileFn::from_json(&json)
}

fn run(cli: Cli) -> Result<(), Error> {
    let settings = settings(&cli.global)?;
    match cli.command {
        Command::Solve { cost, k } => {
            let cost = parse_cost(&cost)?;
            let kw = WelfareWeight::new(k)?;
            let sol = fbvp::solve_optimal_market(&cost, kw, settings.tol)?;
            let market = fbvp::to_market(&sol)?;
            let doc = serde_json::json!({
                "k": k,
                "degenerate": sol.degenerate,
                "b": sol.b,
                "t_horizon": sol.t_horizon,
                "cs": sol.cs,
                "pi": sol.pi,
                "ts": sol.cs + sol.pi,
                "vlow": sol.lower_value(),
                "el_residual_max": sol.el_residual_max,
                "samples": sol.samples,
                "market": market.to_json(),
            });
            write_text(&settings.out, &serde_json::to_string_pretty(&doc)?)
        }
        Command::Screen { market, cost, grid } => {
            let q = load_market(&market)?;
            let cost = parse_cost(&cost)?;
            let menu = screening::seller_menu(&q, &cost, grid)?;
            let payoff = screening::evaluate_market(&q, &cost)?;
            let mut csv = String::from("v,q,t\n");
            for row in &menu.rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(row.v),
                    fmt17(row.q),
                    fmt17(row.t)
                ));
            }
            write_text(&settings.out, &csv)?;
            let summary = serde_json::json!({
                "cs": payoff.cs,
                "pi": payoff.pi,
                "ts": payoff.ts,
                "rows": menu.rows.len(),
                "top_atom": menu.top_atom,
            });
            println!("{}", serde_json::to_string(&summary)?);
            Ok(())
        }
        Command::Closedform {
            case,
            k,
            eta,
            m,
            qbar,
        } => {
            let kw = WelfareWeight::new(k)?;
            let doc = match case {
                CaseArg::Quadratic => {
                    let sol = closedform::quadratic_optimal(kw)?;
                    serde_json::json!({
                        "case": "quadratic",
                        "k": k,
                        "b": sol.b,
                        "t_horizon": sol.t_horizon,
                        "theta": sol.theta,
                        "cs": sol.cs,
                        "pi": sol.pi,
                        "ts": sol.cs + sol.pi,
                        "vlow": sol.lower_value(),
                    })
                }
                CaseArg::Linear => {
                    let sol = closedform::linear_optimal(kw, m, qbar)?;
                    serde_json::json!({
                        "case": "linear",
                        "k": k,
                        "m": m,
                        "qbar": qbar,
                        "r": sol.r,
                        "cs": sol.payoff.cs,
                        "pi": sol.payoff.pi,
                        "ts": sol.payoff.ts,
                        "value": sol.value,
                        "market": sol.market.to_json(),
                    })
                }
                CaseArg::Elasticity => {
                    let eta = eta
                        .ok_or_else(|| Error::InvalidInput("elasticity case needs --eta".into()))?;
                    let sol = closedform::elasticity_optimal(kw, eta)?;
                    serde_json::json!({
                        "case": "elasticity",
                        "k": k,
                        "eta": eta,
                        "t_horizon": sol.t_horizon,
                        "b": sol.b,
                        "vlow": sol.vlow,
                        "qhat_lambda": sol.qhat_lambda,
                    })
                }
            };
            write_text(&settings.out, &serde_json::to_string_pretty(&doc)?)
        }
        Command::Frontier {
            cost,
            k_grid,
            engine,
        } => {
            let cost = parse_cost(&cost)?;
            let grid = parse_grid(&k_grid)?;
            let engine = match engine {
                EngineArg::Fbvp => FrontierEngine::Fbvp,
                EngineArg::Closedform => FrontierEngine::ClosedForm,
                EngineArg::Linear => FrontierEngine::Linear,
            };
            let curve = frontier::trace_frontier(&cost, &grid, engine)?;
            let mut csv = String::from("k,b,cs,pi,ts,vlow\n");
            for row in &curve.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt17(row.k),
                    fmt17(row.b),
                    fmt17(row.cs),
                    fmt17(row.pi),
                    fmt17(row.ts),
                    fmt17(row.vlow)
                ));
            }
            write_text(&settings.out, &csv)
        }
        Command::Inventory {
            inv,
            k,
            region,
            grid,
        } => {
            let model = match inv.as_str() {
                "uniform" => InventoryModel::uniform(),
                "two-point" => InventoryModel::two_point(),
                path => {
                    let text = fs::read_to_string(path)?;
                    let json: Vec<SegmentJson> = serde_json::from_str(&text)?;
                    let segs = json
                        .iter()
                        .map(SegmentJson::to_segment)
                        .collect::<Result<Vec<_>, _>>()?;
                    InventoryModel::custom(PiecewiseFn::new(segs)?)?
                }
            };
            let kw = WelfareWeight::new(k)?;
            let (b, payoff) = inventory::inventory_optimal(kw, &model)?;
            if let Some(path) = region {
                let reg = inventory::inventory_region(&model, grid)?;
                let mut csv = String::from("b,cs,pi\n");
                for p in &reg.curve {
                    csv.push_str(&format!("{},{},{}\n", fmt17(p.b), fmt17(p.cs), fmt17(p.pi)));
                }
                fs::write(path, csv)?;
            }
            let doc = serde_json::json!({
                "k": k,
                "b": b,
                "cs": payoff.cs,
                "pi": payoff.pi,
                "ts": payoff.ts,
            });
            write_text(&settings.out, &serde_json::to_string_pretty(&doc)?)
        }
        Command::Oracle {
            cost,
            k,
            n,
            m,
            mode,
        } => {
            let cost = parse_cost(&cost)?;
            let kw = WelfareWeight::new(k)?;
            let mode = match mode {
                ModeArg::Exhaustive => OracleMode::Exhaustive,
                ModeArg::Ascent => OracleMode::Ascent,
            };
            let found = oracle::oracle_maximize(&cost, kw, n, m, mode)?;
            let doc = serde_json::json!({
                "k": k,
                "n": n,
                "m": m,
                "levels": found.levels,
                "objective": found.objective,
            });
            write_text(&settings.out, &serde_json::to_string_pretty(&doc)?)
        }
        Command::Mps {
            kind,
            a,
            market,
            k,
            n,
        } => {
            let base = match market {
                Some(path) => load_market(&path)?,
                None => {
                    let kw = WelfareWeight::new(k)?;
                    closedform::quadratic_optimal(kw)?.market(8192)?
                }
            };
            let spread = match kind {
                MpsKind::Finite => frontier::mps_finite(&base, n.unwrap_or(3), a)?,
                MpsKind::Smooth => frontier::mps_smooth(&base, a, n.unwrap_or(4096))?,
            };
            write_text(
                &settings.out,
                &serde_json::to_string_pretty(&spread.to_json())?,
            )
        }
        Command::Verify { suite } => {
            let outcomes = match suite {
                SuiteArg::All => verify::run_all(settings.seed)?,
                SuiteArg::Golden => verify::run_golden(settings.seed)?,
            };
            let mut all_passed = true;
            let mut table = String::new();
            for c in &outcomes {
                table.push_str(&format!(
                    "criterion {:>2}: {} — {}\n",
                    c.id,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name
                ));
                if !c.passed {
                    all_passed = false;
                    table.push_str(&c.details);
                }
            }
            write_text(&settings.out, &table)?;
            if all_passed {
                Ok(())
            } else {
                Err(Error::Numerical("acceptance criteria failed".into()))
            }
        }
        Command::Sample { count } => {
            let markets = corpus::market_corpus(settings.seed, count);
            let docs: Vec<QuantileJson> = markets.iter().map(|m| m.to_json()).collect();
            write_text(&settings.out, &serde_json::to_string_pretty(&docs)?)
        }
    }
}
