//! Text and JSON rendering for CLI output. JSON uses full round-trip float
//! precision and sorted keys, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use pismg::markov::CesaroDiagnostics;
use pismg::solver::ReferenceDelta;
use pismg::strategy::{PureStrategy, StrategySpace};
use pismg::{Certificate, Game, PayoffEstimate, SolveReport, ValidationReport};
use serde::Serialize;

pub const BANNER: &str = concat!("pismg ", env!("CARGO_PKG_VERSION"));

/// `%g`-style formatting with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s
            .split_once('e')
            .expect("scientific format has an exponent");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Action labels a strategy picks, keyed by 1-based state id.
fn strategy_actions(
    game: &Game,
    space: &StrategySpace,
    f: &PureStrategy,
) -> BTreeMap<usize, String> {
    space
        .states()
        .iter()
        .map(|&s| {
            let a = space.action_at(f, s).expect("controlled state");
            (s + 1, game.states[s].actions[a].label.clone())
        })
        .collect()
}

fn describe(actions: &BTreeMap<usize, String>) -> String {
    if actions.is_empty() {
        return "(no controlled states)".into();
    }
    actions
        .iter()
        .map(|(s, a)| format!("{s}={a}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct ValidateJson<'a> {
    name: &'a str,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

pub fn validate_json(game: &Game, report: &ValidationReport) -> String {
    to_json(&ValidateJson {
        name: &game.name,
        report,
    })
}

pub fn validate_text(game: &Game, report: &ValidationReport, banner: bool) -> String {
    let mut out = String::new();
    if banner {
        writeln!(out, "{BANNER}").unwrap();
    }
    let count = |c: Option<u128>| c.map_or_else(|| "overflow".to_string(), |c| c.to_string());
    writeln!(out, "game: {} ({} states) is valid", game.name, report.n).unwrap();
    writeln!(
        out,
        "player I controls {:?}, {} pure stationary strategies",
        report.max_states,
        count(report.max_strategy_count)
    )
    .unwrap();
    writeln!(
        out,
        "player II controls {:?}, {} pure stationary strategies",
        report.min_states,
        count(report.min_strategy_count)
    )
    .unwrap();
    for w in &report.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    out
}

#[derive(Serialize)]
struct SpaceJson {
    states: Vec<usize>,
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategies: Option<BTreeMap<String, BTreeMap<usize, String>>>,
}

fn space_json(game: &Game, space: &StrategySpace, tables: bool) -> SpaceJson {
    SpaceJson {
        states: space.states().iter().map(|s| s + 1).collect(),
        count: space.len(),
        strategies: tables.then(|| {
            space
                .iter()
                .map(|f| (f.label(), strategy_actions(game, space, &f)))
                .collect()
        }),
    }
}

#[derive(Serialize)]
struct EnumerateJson {
    maximiser: SpaceJson,
    minimiser: SpaceJson,
}

pub fn enumerate_json(
    game: &Game,
    max: &StrategySpace,
    min: &StrategySpace,
    tables: bool,
) -> String {
    to_json(&EnumerateJson {
        maximiser: space_json(game, max, tables),
        minimiser: space_json(game, min, tables),
    })
}

pub fn enumerate_text(
    game: &Game,
    max: &StrategySpace,
    min: &StrategySpace,
    tables: bool,
    banner: bool,
) -> String {
    let mut out = String::new();
    if banner {
        writeln!(out, "{BANNER}").unwrap();
    }
    for (name, space) in [("player I", max), ("player II", min)] {
        let states: Vec<usize> = space.states().iter().map(|s| s + 1).collect();
        writeln!(
            out,
            "{name}: {} strategies over states {states:?}",
            space.len()
        )
        .unwrap();
        if tables {
            for f in space.iter() {
                writeln!(
                    out,
                    "  {:<6} {}",
                    f.label(),
                    describe(&strategy_actions(game, space, &f))
                )
                .unwrap();
            }
        }
    }
    out
}

pub fn cesaro_diagnostics(d: &CesaroDiagnostics, residual: f64) -> String {
    let detail = match d {
        CesaroDiagnostics::Lazari { m1, row_sum } => {
            format!("lazari: m1={m1} mean row sum={row_sum:e}")
        }
        CesaroDiagnostics::Averaging { terms, converged } => {
            format!("averaging: terms={terms} converged={converged}")
        }
        CesaroDiagnostics::Structural { classes, transient } => {
            let one_based = |v: &[usize]| v.iter().map(|s| s + 1).collect::<Vec<_>>();
            let classes: Vec<Vec<usize>> = classes.iter().map(|c| one_based(c)).collect();
            format!(
                "structural: recurrent classes={classes:?} transient={:?}",
                one_based(transient)
            )
        }
    };
    format!("{detail} projection residual={residual:e}")
}

#[derive(Serialize)]
struct SaddleJson {
    state: usize,
    value: f64,
    maximiser: String,
    minimiser: String,
    all: Vec<(String, String)>,
    maximin: f64,
    minimax: f64,
    tolerance: f64,
    interchangeable: bool,
    certificate: CertificateJson,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum CertificateJson {
    Pass,
    Violation {
        rows: (String, String),
        cols: (String, String),
    },
    Skipped {
        submatrices: u128,
    },
}

fn certificate_json(c: &Certificate, max: &StrategySpace, min: &StrategySpace) -> CertificateJson {
    let f = |i: usize| max.decode(i).expect("row in range").label();
    let g = |j: usize| min.decode(j).expect("column in range").label();
    match *c {
        Certificate::Pass => CertificateJson::Pass,
        Certificate::Violation { rows, cols } => CertificateJson::Violation {
            rows: (f(rows.0), f(rows.1)),
            cols: (g(cols.0), g(cols.1)),
        },
        Certificate::Skipped { submatrices } => CertificateJson::Skipped { submatrices },
    }
}

#[derive(Serialize)]
struct SolveDiagnosticsJson<'a> {
    method: String,
    max_strategy_count: usize,
    min_strategy_count: usize,
    pairs_evaluated: usize,
    averaging_nonconverged: usize,
    reference_source: Option<&'a str>,
    reference_deltas: &'a [ReferenceDelta],
    reference_flagged: Vec<usize>,
}

#[derive(Serialize)]
struct MatrixJson {
    state: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct StrategiesJson {
    maximiser: BTreeMap<String, BTreeMap<usize, String>>,
    minimiser: BTreeMap<String, BTreeMap<usize, String>>,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    game: &'a str,
    value: &'a [f64],
    maximiser: BTreeMap<usize, String>,
    minimiser: BTreeMap<usize, String>,
    strategies: StrategiesJson,
    saddles: Vec<SaddleJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<Vec<MatrixJson>>,
    diagnostics: SolveDiagnosticsJson<'a>,
}

/// Strategy spaces matching the report's labels.
pub struct Spaces<'a> {
    pub max: &'a StrategySpace,
    pub min: &'a StrategySpace,
}

fn used_strategies(
    game: &Game,
    space: &StrategySpace,
    picks: &[PureStrategy],
    all: bool,
) -> BTreeMap<String, BTreeMap<usize, String>> {
    let chosen: Vec<PureStrategy> = if all {
        space.iter().collect()
    } else {
        picks.to_vec()
    };
    chosen
        .iter()
        .map(|f| (f.label(), strategy_actions(game, space, f)))
        .collect()
}

pub fn solve_json(
    game: &Game,
    report: &SolveReport,
    spaces: &Spaces,
    emit_matrices: bool,
) -> String {
    let label_f = |i: usize| spaces.max.decode(i).expect("row in range").label();
    let label_g = |j: usize| spaces.min.decode(j).expect("column in range").label();
    let saddles = report
        .per_state
        .iter()
        .map(|ps| SaddleJson {
            state: ps.state,
            value: ps.saddle.value.expect("solved states have a saddle"),
            maximiser: label_f(ps.saddle.row.expect("saddle row")),
            minimiser: label_g(ps.saddle.col.expect("saddle column")),
            all: ps
                .saddle
                .all_saddles
                .iter()
                .map(|&(i, j)| (label_f(i), label_g(j)))
                .collect(),
            maximin: ps.saddle.maximin,
            minimax: ps.saddle.minimax,
            tolerance: ps.saddle.tolerance,
            interchangeable: ps.saddle.interchangeable,
            certificate: certificate_json(&ps.certificate, spaces.max, spaces.min),
        })
        .collect();
    let d = &report.diagnostics;
    let out = SolveJson {
        game: &game.name,
        value: &report.value,
        maximiser: per_state_labels(&report.maximiser.per_initial_state),
        minimiser: per_state_labels(&report.minimiser.per_initial_state),
        strategies: StrategiesJson {
            maximiser: used_strategies(
                game,
                spaces.max,
                &report.maximiser.per_initial_state,
                emit_matrices,
            ),
            minimiser: used_strategies(
                game,
                spaces.min,
                &report.minimiser.per_initial_state,
                emit_matrices,
            ),
        },
        saddles,
        matrices: emit_matrices.then(|| {
            report
                .per_state
                .iter()
                .map(|ps| MatrixJson {
                    state: ps.state,
                    rows: ps.matrix.to_rows(),
                })
                .collect()
        }),
        diagnostics: SolveDiagnosticsJson {
            method: report.method.to_string(),
            max_strategy_count: d.max_strategy_count,
            min_strategy_count: d.min_strategy_count,
            pairs_evaluated: d.pairs_evaluated,
            averaging_nonconverged: d.averaging_nonconverged,
            reference_source: d.reference_source.as_deref(),
            reference_deltas: &d.reference_deltas,
            reference_flagged: report.flagged_references().map(|r| r.state).collect(),
        },
    };
    to_json(&out)
}

fn per_state_labels(picks: &[PureStrategy]) -> BTreeMap<usize, String> {
    picks
        .iter()
        .enumerate()
        .map(|(s, f)| (s + 1, f.label()))
        .collect()
}

pub fn solve_text(
    game: &Game,
    report: &SolveReport,
    spaces: &Spaces,
    emit_matrices: bool,
    banner: bool,
) -> String {
    let mut out = String::new();
    if banner {
        writeln!(out, "{BANNER}").unwrap();
    }
    let d = &report.diagnostics;
    writeln!(
        out,
        "game: {} ({} states, {} x {} pure stationary pairs, method {})",
        game.name,
        game.n(),
        d.max_strategy_count,
        d.min_strategy_count,
        report.method
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:<6} {:>12}  {:<9} {:<9} {:>7}  2x2",
        "state", "value", "maximiser", "minimiser", "saddles"
    )
    .unwrap();
    for (k, ps) in report.per_state.iter().enumerate() {
        let cert = match &ps.certificate {
            Certificate::Pass => "pass".to_string(),
            Certificate::Violation { rows, cols } => format!(
                "violation {{{},{}}}x{{{},{}}}",
                spaces.max.decode(rows.0).unwrap().label(),
                spaces.max.decode(rows.1).unwrap().label(),
                spaces.min.decode(cols.0).unwrap().label(),
                spaces.min.decode(cols.1).unwrap().label()
            ),
            Certificate::Skipped { .. } => "skipped".to_string(),
        };
        writeln!(
            out,
            "{:<6} {:>12}  {:<9} {:<9} {:>7}  {cert}",
            ps.state,
            sig6(report.value[k]),
            report.maximiser.per_initial_state[k].label(),
            report.minimiser.per_initial_state[k].label(),
            ps.saddle.all_saddles.len()
        )
        .unwrap();
    }

    writeln!(out).unwrap();
    for (name, space, picks) in [
        ("player I", spaces.max, &report.maximiser.per_initial_state),
        ("player II", spaces.min, &report.minimiser.per_initial_state),
    ] {
        writeln!(out, "{name} strategies:").unwrap();
        for (label, actions) in used_strategies(game, space, picks, emit_matrices) {
            writeln!(out, "  {label:<6} {}", describe(&actions)).unwrap();
        }
    }

    if d.averaging_nonconverged > 0 {
        writeln!(
            out,
            "\nwarning: averaging did not converge for {} pairs",
            d.averaging_nonconverged
        )
        .unwrap();
    }
    if !d.reference_deltas.is_empty() {
        let source = d.reference_source.as_deref().unwrap_or("the game file");
        writeln!(out, "\nreference values from {source}:").unwrap();
        for r in &d.reference_deltas {
            writeln!(
                out,
                "  state {}: computed {} reference {} delta {}{}",
                r.state,
                sig6(r.computed),
                sig6(r.reference),
                sig6(r.delta),
                if r.flagged { "  FLAGGED" } else { "" }
            )
            .unwrap();
        }
    }

    if emit_matrices {
        for ps in &report.per_state {
            writeln!(out, "\npayoff matrix, initial state {}:", ps.state).unwrap();
            let header: Vec<String> = spaces
                .min
                .iter()
                .map(|g| format!("{:>12}", g.label()))
                .collect();
            writeln!(out, "{:<6}{}", "", header.join("")).unwrap();
            for (i, f) in spaces.max.iter().enumerate() {
                let cells: Vec<String> = ps
                    .matrix
                    .row(i)
                    .iter()
                    .map(|&x| format!("{:>12}", sig6(x)))
                    .collect();
                writeln!(out, "{:<6}{}", f.label(), cells.join("")).unwrap();
            }
        }
    }
    out
}

#[derive(Serialize)]
pub struct SimulationJson<'a> {
    pub maximiser: String,
    pub minimiser: String,
    pub start: usize,
    #[serde(flatten)]
    pub estimate: &'a PayoffEstimate,
    pub analytic: f64,
}

pub fn simulate_text(sim: &SimulationJson, banner: bool) -> String {
    let mut out = String::new();
    if banner {
        writeln!(out, "{BANNER}").unwrap();
    }
    let e = sim.estimate;
    writeln!(
        out,
        "pair ({}, {}) from state {}: {} replications of {} epochs, seed {}",
        sim.maximiser, sim.minimiser, sim.start, e.reps, e.horizon, e.seed
    )
    .unwrap();
    writeln!(
        out,
        "estimate  {}  (stderr {})",
        sig6(e.point),
        sig6(e.stderr)
    )
    .unwrap();
    writeln!(out, "analytic  {}", sig6(sim.analytic)).unwrap();
    out
}
