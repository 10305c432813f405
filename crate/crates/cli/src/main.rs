mod matrix_io;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pismg::markov::{
    cesaro, projection_residual, AVERAGING_MAX_TERMS, AVERAGING_TOL, DEFLATION_TOL,
};
use pismg::simulator::estimate_payoff;
use pismg::solver::{payoff_vector, SADDLE_REL_TOL};
use pismg::strategy::{PureStrategy, StrategySpace, ENUMERATION_CAP};
use pismg::{
    parse_game, solve, validate, CesaroMethod, CesaroOptions, Game, Player, SolveOptions,
    StochasticMatrix,
};

use crate::report::Spaces;

#[derive(Parser)]
#[command(
    name = "pismg",
    version,
    about = "Solve perfect-information semi-Markov games under the limiting ratio-average payoff"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file and report its strategy counts.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// List the pure stationary strategies of both players.
    Enumerate {
        file: PathBuf,
        /// Print the action chosen at every controlled state.
        #[arg(long)]
        tables: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cesàro limit of a stochastic matrix (JSON array of rows, or CSV).
    Cesaro {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Value vector and optimal pure strategies for every initial state.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        limit: LimitArgs,
        /// Relative tolerance for saddle tests, scaled by max(1, max |a_ij|).
        #[arg(long, default_value_t = SADDLE_REL_TOL)]
        saddle_tol: f64,
        /// Include every payoff matrix and strategy table in the output.
        #[arg(long)]
        emit_matrices: bool,
        /// Refuse strategy spaces larger than this.
        #[arg(long, default_value_t = ENUMERATION_CAP)]
        max_strategies: u128,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte-Carlo estimate of the payoff of one pure stationary pair.
    Simulate {
        file: PathBuf,
        /// Player I strategy as a label (f3) or 1-based ordinal (3).
        #[arg(long = "max", conflicts_with = "max_actions")]
        max_strategy: Option<String>,
        /// Player II strategy as a label (g1) or 1-based ordinal (1).
        #[arg(long = "min", conflicts_with = "min_actions")]
        min_strategy: Option<String>,
        /// Player I actions per state, e.g. `1=a2,2=a1`.
        #[arg(long)]
        max_actions: Option<String>,
        /// Player II actions per state, e.g. `3=b2,4=b1`.
        #[arg(long)]
        min_actions: Option<String>,
        /// 1-based initial state.
        #[arg(long)]
        start: usize,
        /// Decision epochs per replication.
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 200)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = CesaroMethod::Structural)]
    method: CesaroMethod,
    /// Multiplicity tolerance for the unit root (lazari).
    #[arg(long, default_value_t = DEFLATION_TOL)]
    deflation_tol: f64,
    /// Convergence tolerance between successive partial averages.
    #[arg(long, default_value_t = AVERAGING_TOL)]
    averaging_tol: f64,
    /// Largest horizon for partial averages.
    #[arg(long, default_value_t = AVERAGING_MAX_TERMS)]
    averaging_max: u64,
}

impl LimitArgs {
    fn options(&self) -> CesaroOptions {
        CesaroOptions {
            method: self.method,
            deflation_tol: self.deflation_tol,
            averaging_tol: self.averaging_tol,
            averaging_max_terms: self.averaging_max,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Omit the version line from text output.
    #[arg(long)]
    no_banner: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_game(path: &Path) -> Result<Game> {
    parse_game(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn emit(
    out: &OutputArgs,
    text: impl FnOnce(bool) -> String,
    json: impl FnOnce() -> String,
) -> Result<()> {
    let body = match out.format {
        Format::Text => text(!out.no_banner),
        Format::Json => json(),
    };
    std::io::stdout().lock().write_all(body.as_bytes())?;
    Ok(())
}

/// `f3` / `3` against the player's enumeration, or `1=a2,2=a1` action
/// labels; a player with a single strategy needs neither.
fn pick_strategy(
    game: &Game,
    space: &StrategySpace,
    label: Option<&str>,
    actions: Option<&str>,
) -> Result<PureStrategy> {
    let player = space.player();
    if let Some(spec) = actions {
        let picks = spec
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (s, a) = p
                    .split_once('=')
                    .ok_or_else(|| anyhow!("expected STATE=ACTION, got `{p}`"))?;
                let s: usize = s
                    .trim()
                    .parse()
                    .with_context(|| format!("bad state in `{p}`"))?;
                Ok((s, a.trim().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(space.from_labels(game, &picks)?);
    }
    let Some(label) = label else {
        if space.len() == 1 {
            return Ok(space.decode(0)?);
        }
        let flag = if player == Player::I {
            "--max"
        } else {
            "--min"
        };
        bail!(
            "player {player} has {} strategies; pass {flag}",
            space.len()
        );
    };
    let digits = label
        .strip_prefix(player.strategy_prefix())
        .unwrap_or(label);
    let ordinal: usize = digits
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| anyhow!("bad strategy `{label}` for player {player}"))?;
    Ok(space.decode(ordinal - 1)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { file, out } => {
            let game = load_game(&file)?;
            let report = validate(&game)?;
            emit(
                &out,
                |b| report::validate_text(&game, &report, b),
                || report::validate_json(&game, &report),
            )
        }
        Command::Enumerate { file, tables, out } => {
            let game = load_game(&file)?;
            let max = StrategySpace::new(&game, Player::I, ENUMERATION_CAP)?;
            let min = StrategySpace::new(&game, Player::II, ENUMERATION_CAP)?;
            emit(
                &out,
                |b| report::enumerate_text(&game, &max, &min, tables, b),
                || report::enumerate_json(&game, &max, &min, tables),
            )
        }
        Command::Cesaro { matrix, limit } => {
            let (rows, format) = matrix_io::parse_matrix(&read(&matrix)?)?;
            let q = StochasticMatrix::from_rows(&rows)?;
            let result = cesaro(&q, &limit.options())?;
            let residual = projection_residual(&q, &result.q_star);
            eprintln!(
                "{}",
                report::cesaro_diagnostics(&result.diagnostics, residual)
            );
            let body = matrix_io::render_matrix(&result.q_star.to_rows(), format);
            std::io::stdout().lock().write_all(body.as_bytes())?;
            Ok(())
        }
        Command::Solve {
            file,
            limit,
            saddle_tol,
            emit_matrices,
            max_strategies,
            out,
        } => {
            let game = load_game(&file)?;
            let opts = SolveOptions {
                cesaro: limit.options(),
                saddle_rel_tol: saddle_tol,
                enumeration_cap: max_strategies,
                ..SolveOptions::default()
            };
            let result = solve(&game, &opts)?;
            let max = StrategySpace::new(&game, Player::I, max_strategies)?;
            let min = StrategySpace::new(&game, Player::II, max_strategies)?;
            let spaces = Spaces {
                max: &max,
                min: &min,
            };
            for r in result.flagged_references() {
                eprintln!(
                    "note: state {} value {} differs from reference {} by {}",
                    r.state, r.computed, r.reference, r.delta
                );
            }
            emit(
                &out,
                |b| report::solve_text(&game, &result, &spaces, emit_matrices, b),
                || report::solve_json(&game, &result, &spaces, emit_matrices),
            )
        }
        Command::Simulate {
            file,
            max_strategy,
            min_strategy,
            max_actions,
            min_actions,
            start,
            horizon,
            reps,
            seed,
            out,
        } => {
            let game = load_game(&file)?;
            if !(1..=game.n()).contains(&start) {
                bail!("start state {start} outside 1..={}", game.n());
            }
            if reps < 2 {
                bail!("--reps must be at least 2");
            }
            let max = StrategySpace::new(&game, Player::I, ENUMERATION_CAP)?;
            let min = StrategySpace::new(&game, Player::II, ENUMERATION_CAP)?;
            let f = pick_strategy(&game, &max, max_strategy.as_deref(), max_actions.as_deref())?;
            let g = pick_strategy(&game, &min, min_strategy.as_deref(), min_actions.as_deref())?;
            let estimate = estimate_payoff(&game, &f, &g, start, horizon, reps, seed)?;
            let analytic = payoff_vector(&game, &f, &g, &CesaroOptions::default())?[start - 1];
            let sim = report::SimulationJson {
                maximiser: f.label(),
                minimiser: g.label(),
                start,
                estimate: &estimate,
                analytic,
            };
            emit(
                &out,
                |b| report::simulate_text(&sim, b),
                || report::to_json(&sim),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
