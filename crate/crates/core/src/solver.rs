//! Limiting ratio-average payoffs, per-initial-state payoff matrices over
//! pure stationary strategy pairs, pure saddle points, and assembly of the
//! value vector with optimal pure semi-stationary strategies.
//!
//! For a stationary pair `(f, g)` with induced chain `Q`, rewards `r` and
//! expected sojourn times `τ`, the payoff from state `s` is
//! `[Q* r](s) / [Q* τ](s)` where `Q*` is the Cesàro limit of `Q`. The
//! limits exist for stationary pairs, so the lower limit in the criterion is
//! an ordinary limit here and is computed exactly rather than approximated.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::game::{Game, Player};
use crate::markov::{cesaro, CesaroDiagnostics, CesaroMethod, CesaroOptions, MarkovError, Square};
use crate::strategy::{
    induce, InducedChain, PureStrategy, SemiStationaryStrategy, StrategyError, StrategySpace,
    ENUMERATION_CAP,
};

/// Relative saddle tolerance, scaled by `max(1, max |a_ij|)`.
pub const SADDLE_REL_TOL: f64 = 1e-9;
/// Refuse to evaluate more strategy pairs than this.
pub const PAIR_CAP: u128 = 10_000_000;
/// Skip the exhaustive 2×2 certificate above this many submatrices.
pub const CERTIFICATE_CAP: u128 = 50_000_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("limiting matrix for ({f}, {g}): {source}")]
    Markov {
        f: String,
        g: String,
        #[source]
        source: MarkovError,
    },
    #[error("{pairs} strategy pairs exceed the cap of {cap}")]
    TooManyPairs { pairs: u128, cap: u128 },
    #[error("pure-saddle existence violated: payoff matrix for initial state {state} has no pure saddle point")]
    NoSaddle {
        state: usize,
        matrix: Box<PayoffMatrix>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub cesaro: CesaroOptions,
    pub saddle_rel_tol: f64,
    pub enumeration_cap: u128,
    pub pair_cap: u128,
    pub certificate_cap: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cesaro: CesaroOptions::default(),
            saddle_rel_tol: SADDLE_REL_TOL,
            enumeration_cap: ENUMERATION_CAP,
            pair_cap: PAIR_CAP,
            certificate_cap: CERTIFICATE_CAP,
        }
    }
}

impl SolveOptions {
    pub fn with_method(method: CesaroMethod) -> Self {
        SolveOptions {
            cesaro: CesaroOptions::with_method(method),
            ..Self::default()
        }
    }
}

/// `[Q* r] / [Q* τ]` componentwise.
pub fn ratio_payoff(q_star: &Square, chain: &InducedChain) -> Vec<f64> {
    let num = q_star.matvec(&chain.r);
    let den = q_star.matvec(&chain.tau);
    num.iter().zip(&den).map(|(a, b)| a / b).collect()
}

/// Payoff vector over all initial states for one strategy pair.
pub fn payoff_vector(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
    opts: &CesaroOptions,
) -> Result<Vec<f64>, SolveError> {
    Ok(evaluate_pair(game, f, g, opts)?.payoff)
}

#[derive(Debug, Clone)]
struct PairEvaluation {
    payoff: Vec<f64>,
    averaging_converged: bool,
}

fn evaluate_pair(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
    opts: &CesaroOptions,
) -> Result<PairEvaluation, SolveError> {
    let chain = induce(game, f, g)?;
    let result = cesaro(&chain.q, opts).map_err(|source| SolveError::Markov {
        f: f.label(),
        g: g.label(),
        source,
    })?;
    let averaging_converged = !matches!(
        result.diagnostics,
        CesaroDiagnostics::Averaging {
            converged: false,
            ..
        }
    );
    Ok(PairEvaluation {
        payoff: ratio_payoff(&result.q_star, &chain),
        averaging_converged,
    })
}

/// `φ(s, f_i, g_j)` for a fixed initial state, rows indexed by player I's
/// strategies and columns by player II's, both in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMatrix {
    /// 1-based initial state.
    pub initial_state: usize,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn from_rows(initial_state: usize, rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged payoff matrix");
        PayoffMatrix {
            initial_state,
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// `SADDLE_REL_TOL`-style tolerance scaled to this matrix.
    pub fn saddle_tolerance(&self, rel: f64) -> f64 {
        rel * self.max_abs().max(1.0)
    }
}

/// Payoff vectors for every strategy pair, computed once and shared by all
/// initial states.
#[derive(Debug, Clone)]
pub struct PayoffTable {
    pub max_space: StrategySpace,
    pub min_space: StrategySpace,
    /// Indexed by `i * cols + j`.
    pub vectors: Vec<Vec<f64>>,
    pub averaging_nonconverged: usize,
}

impl PayoffTable {
    pub fn compute(game: &Game, opts: &SolveOptions) -> Result<Self, SolveError> {
        let max_space = StrategySpace::new(game, Player::I, opts.enumeration_cap)?;
        let min_space = StrategySpace::new(game, Player::II, opts.enumeration_cap)?;
        let (rows, cols) = (max_space.len(), min_space.len());
        let pairs = rows as u128 * cols as u128;
        if pairs > opts.pair_cap {
            return Err(SolveError::TooManyPairs {
                pairs,
                cap: opts.pair_cap,
            });
        }
        let fs: Vec<PureStrategy> = max_space.iter().collect();
        let gs: Vec<PureStrategy> = min_space.iter().collect();
        // par_iter().collect() keeps index order, so the table is identical
        // for any thread count
        let evaluated: Vec<Result<PairEvaluation, SolveError>> = (0..rows * cols)
            .into_par_iter()
            .map(|k| evaluate_pair(game, &fs[k / cols], &gs[k % cols], &opts.cesaro))
            .collect();
        let mut vectors = Vec::with_capacity(rows * cols);
        let mut averaging_nonconverged = 0;
        for e in evaluated {
            let e = e?;
            averaging_nonconverged += usize::from(!e.averaging_converged);
            vectors.push(e.payoff);
        }
        Ok(PayoffTable {
            max_space,
            min_space,
            vectors,
            averaging_nonconverged,
        })
    }

    /// Payoff matrix for 1-based initial state `s`.
    pub fn matrix(&self, s: usize) -> PayoffMatrix {
        PayoffMatrix {
            initial_state: s,
            rows: self.max_space.len(),
            cols: self.min_space.len(),
            entries: self.vectors.iter().map(|v| v[s - 1]).collect(),
        }
    }
}

/// Payoff matrix for a single 1-based initial state.
pub fn build_payoff_matrix(
    game: &Game,
    s: usize,
    opts: &SolveOptions,
) -> Result<PayoffMatrix, SolveError> {
    assert!(
        (1..=game.n()).contains(&s),
        "initial state {s} out of range"
    );
    Ok(PayoffTable::compute(game, opts)?.matrix(s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleResult {
    pub exists: bool,
    /// Selected saddle: lexicographically smallest `(row, col)`, 0-based.
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub value: Option<f64>,
    pub all_saddles: Vec<(usize, usize)>,
    /// `max_i min_j a_ij`.
    pub maximin: f64,
    /// `min_j max_i a_ij`.
    pub minimax: f64,
    pub tolerance: f64,
    /// Every saddle cell carries the same value within `tolerance`.
    pub interchangeable: bool,
}

/// Locate pure saddle points: entries that are minimal in their row and
/// maximal in their column (player I picks rows and maximises).
pub fn find_pure_saddle(a: &PayoffMatrix, tol: f64) -> SaddleResult {
    let row_min: Vec<f64> = (0..a.rows)
        .map(|i| a.row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let col_max: Vec<f64> = (0..a.cols)
        .map(|j| {
            (0..a.rows)
                .map(|i| a.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let maximin = row_min.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let minimax = col_max.iter().copied().fold(f64::INFINITY, f64::min);

    let mut all_saddles = Vec::new();
    for (i, &lo) in row_min.iter().enumerate() {
        for (j, &hi) in col_max.iter().enumerate() {
            let x = a.get(i, j);
            if x <= lo + tol && x >= hi - tol {
                all_saddles.push((i, j));
            }
        }
    }
    let first = all_saddles.first().copied();
    let value = first.map(|(i, j)| a.get(i, j));
    let interchangeable = value.is_none_or(|v| {
        all_saddles
            .iter()
            .all(|&(i, j)| (a.get(i, j) - v).abs() <= tol)
    });
    SaddleResult {
        exists: first.is_some(),
        row: first.map(|c| c.0),
        col: first.map(|c| c.1),
        value,
        all_saddles,
        maximin,
        minimax,
        tolerance: tol,
        interchangeable,
    }
}

/// Outcome of the exhaustive 2×2 submatrix check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Certificate {
    Pass,
    /// First submatrix (rows `i < i'`, cols `j < j'`, 0-based) without a
    /// pure saddle.
    Violation {
        rows: (usize, usize),
        cols: (usize, usize),
    },
    Skipped {
        submatrices: u128,
    },
}

impl Certificate {
    pub fn passed(&self) -> bool {
        matches!(self, Certificate::Pass)
    }
}

/// Whether `[[a, b], [c, d]]` lacks a pure saddle: both diagonal entries
/// strictly below both off-diagonal ones, or strictly above.
pub fn two_by_two_lacks_saddle(a: f64, b: f64, c: f64, d: f64, tol: f64) -> bool {
    let lt = |x: f64, y: f64| y - x > tol;
    (lt(a, b) && lt(a, c) && lt(d, c) && lt(d, b)) || (lt(b, a) && lt(c, a) && lt(c, d) && lt(b, d))
}

pub fn check_all_2x2(a: &PayoffMatrix, tol: f64) -> Certificate {
    for i in 0..a.rows {
        for i2 in i + 1..a.rows {
            let (ri, ri2) = (a.row(i), a.row(i2));
            for j in 0..a.cols {
                for j2 in j + 1..a.cols {
                    if two_by_two_lacks_saddle(ri[j], ri[j2], ri2[j], ri2[j2], tol) {
                        return Certificate::Violation {
                            rows: (i, i2),
                            cols: (j, j2),
                        };
                    }
                }
            }
        }
    }
    Certificate::Pass
}

fn pairs(k: usize) -> u128 {
    let k = k as u128;
    k * k.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSolution {
    /// 1-based initial state.
    pub state: usize,
    pub saddle: SaddleResult,
    pub certificate: Certificate,
    pub matrix: PayoffMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceDelta {
    pub state: usize,
    pub computed: f64,
    pub reference: f64,
    pub delta: f64,
    /// `|delta|` exceeds the reference tolerance.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub max_strategy_count: usize,
    pub min_strategy_count: usize,
    pub pairs_evaluated: usize,
    pub averaging_nonconverged: usize,
    pub reference_deltas: Vec<ReferenceDelta>,
    pub reference_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub value: Vec<f64>,
    pub maximiser: SemiStationaryStrategy,
    pub minimiser: SemiStationaryStrategy,
    pub per_state: Vec<StateSolution>,
    pub method: CesaroMethod,
    pub diagnostics: SolveDiagnostics,
}

impl SolveReport {
    /// States whose value disagrees with the game's reference values.
    pub fn flagged_references(&self) -> impl Iterator<Item = &ReferenceDelta> {
        self.diagnostics
            .reference_deltas
            .iter()
            .filter(|d| d.flagged)
    }
}

/// Solve the game from every initial state by complete enumeration of pure
/// stationary strategy pairs.
pub fn solve(game: &Game, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let table = PayoffTable::compute(game, opts)?;
    let (rows, cols) = (table.max_space.len(), table.min_space.len());
    let check_certificate = pairs(rows) * pairs(cols) <= opts.certificate_cap;

    let mut value = Vec::with_capacity(game.n());
    let mut per_max = Vec::with_capacity(game.n());
    let mut per_min = Vec::with_capacity(game.n());
    let mut per_state = Vec::with_capacity(game.n());
    for s in 1..=game.n() {
        let matrix = table.matrix(s);
        let tol = matrix.saddle_tolerance(opts.saddle_rel_tol);
        let saddle = find_pure_saddle(&matrix, tol);
        let (Some(i), Some(j), Some(v)) = (saddle.row, saddle.col, saddle.value) else {
            return Err(SolveError::NoSaddle {
                state: s,
                matrix: Box::new(matrix),
            });
        };
        let certificate = if check_certificate {
            check_all_2x2(&matrix, tol)
        } else {
            Certificate::Skipped {
                submatrices: pairs(rows) * pairs(cols),
            }
        };
        value.push(v);
        per_max.push(table.max_space.decode(i)?);
        per_min.push(table.min_space.decode(j)?);
        per_state.push(StateSolution {
            state: s,
            saddle,
            certificate,
            matrix,
        });
    }

    let (reference_deltas, reference_source) = match &game.reference {
        Some(r) if r.value.len() == game.n() => (
            value
                .iter()
                .zip(&r.value)
                .enumerate()
                .map(|(k, (&computed, &reference))| ReferenceDelta {
                    state: k + 1,
                    computed,
                    reference,
                    delta: computed - reference,
                    flagged: (computed - reference).abs() > r.tolerance,
                })
                .collect(),
            r.source.clone(),
        ),
        _ => (Vec::new(), None),
    };

    Ok(SolveReport {
        value,
        maximiser: SemiStationaryStrategy {
            player: Player::I,
            per_initial_state: per_max,
        },
        minimiser: SemiStationaryStrategy {
            player: Player::II,
            per_initial_state: per_min,
        },
        per_state,
        method: opts.cesaro.method,
        diagnostics: SolveDiagnostics {
            max_strategy_count: rows,
            min_strategy_count: cols,
            pairs_evaluated: rows * cols,
            averaging_nonconverged: table.averaging_nonconverged,
            reference_deltas,
            reference_source,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{parse_game, EXAMPLE_S5};
    use crate::strategy::enumerate_pure;

    fn m(rows: &[Vec<f64>]) -> PayoffMatrix {
        PayoffMatrix::from_rows(1, rows)
    }

    #[test]
    fn saddle_simple() {
        let a = m(&[vec![1.0, 0.0], vec![2.0, 3.0]]);
        let s = find_pure_saddle(&a, 1e-9);
        assert!(s.exists);
        assert_eq!((s.row, s.col, s.value), (Some(1), Some(0), Some(2.0)));
        assert_eq!(s.maximin, s.minimax);
    }

    #[test]
    fn matching_pennies() {
        let a = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = find_pure_saddle(&a, 1e-9);
        assert!(!s.exists);
        assert!(s.maximin < s.minimax);
        assert_eq!(
            check_all_2x2(&a, 1e-9),
            Certificate::Violation {
                rows: (0, 1),
                cols: (0, 1)
            }
        );
    }

    #[test]
    fn vacuous_certificate() {
        assert!(check_all_2x2(&m(&[vec![3.0, 1.0, 2.0]]), 1e-9).passed());
        assert!(check_all_2x2(&m(&[vec![3.0], vec![1.0]]), 1e-9).passed());
    }

    #[test]
    fn ties_choose_lexicographic_first() {
        let a = m(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let s = find_pure_saddle(&a, 1e-9);
        assert_eq!(s.all_saddles.len(), 4);
        assert_eq!((s.row, s.col), (Some(0), Some(0)));
        assert!(s.interchangeable);
    }

    #[test]
    fn example_payoffs() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        let fs = enumerate_pure(&g, Player::I, ENUMERATION_CAP).unwrap();
        let gs = enumerate_pure(&g, Player::II, ENUMERATION_CAP).unwrap();
        let opts = CesaroOptions::default();
        let p = payoff_vector(&g, &fs[0], &gs[0], &opts).unwrap();
        assert!((p[0] - 2.1).abs() < 1e-12 && (p[1] - 2.1).abs() < 1e-12);
        assert!((p[2] - 3.0).abs() < 1e-12);
        assert!((p[3] - 2.55).abs() < 1e-12);
        let p = payoff_vector(&g, &fs[2], &gs[0], &opts).unwrap();
        assert!((p[0] - 15.4 / 6.7).abs() < 1e-12);
        assert!((p[1] - 15.4 / 6.7).abs() < 1e-12);
    }

    #[test]
    fn example_matrices() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        let opts = SolveOptions::default();
        let a1 = build_payoff_matrix(&g, 1, &opts).unwrap();
        assert!(a1.row(0).iter().all(|&x| (x - 2.1).abs() < 1e-12));
        assert!(a1.row(2).iter().all(|&x| (x - 15.4 / 6.7).abs() < 1e-12));
        let s = find_pure_saddle(&a1, a1.saddle_tolerance(SADDLE_REL_TOL));
        assert_eq!(s.row, Some(2));
        assert!(check_all_2x2(&a1, 1e-9).passed());

        let a3 = build_payoff_matrix(&g, 3, &opts).unwrap();
        for i in 0..4 {
            assert!((a3.get(i, 0) - 3.0).abs() < 1e-12);
            assert!((a3.get(i, 2) - 2.9).abs() < 1e-12);
        }
    }

    #[test]
    fn one_by_one() {
        let g = parse_game(
            r#"{"name":"one","states":[{"id":1,"player":"II","actions":[
            {"label":"x","reward":3,"sojourn":{"kind":"deterministic","t":2},
             "transitions":[{"to":1,"prob":1}]}]}]}"#,
        )
        .unwrap();
        let r = solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(r.per_state[0].matrix.entries, vec![1.5]);
        assert_eq!(r.value, vec![1.5]);
    }

    #[test]
    fn example_reference_deltas() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        let r = solve(&g, &SolveOptions::default()).unwrap();
        let flagged: Vec<usize> = r.flagged_references().map(|d| d.state).collect();
        assert_eq!(flagged, vec![4]);
    }
}
