//! Game descriptions: states, controllers, actions, transition rows and
//! sojourn-time models, plus the JSON file format and its validation.
//!
//! Only perfect-information games are representable. Each state stores the
//! action list of the player who controls it; the other player has a single
//! implicit action there.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on transition row sums.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("schema error at line {line}, column {column}: {msg}")]
    Schema {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("game has no states")]
    Empty,
    #[error("state at position {position} has id {found}, expected {expected} (ids must be 1..N in order)")]
    StateId {
        position: usize,
        found: usize,
        expected: usize,
    },
    #[error("state {state}: no actions")]
    NoActions { state: usize },
    #[error("state {state} action {action}: transition to unknown state {to}")]
    UnknownTarget {
        state: usize,
        action: usize,
        to: usize,
    },
    #[error("state {state} action {action}: duplicate transition to state {to}")]
    DuplicateTarget {
        state: usize,
        action: usize,
        to: usize,
    },
    #[error("state {state} action {action}: probability {prob} outside [0, 1]")]
    BadProbability {
        state: usize,
        action: usize,
        prob: f64,
    },
    #[error("state {state} action {action}: transition probabilities sum to {sum}, not 1")]
    NotStochastic {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("state {state} action {action}: reward {reward} is not finite")]
    BadReward {
        state: usize,
        action: usize,
        reward: f64,
    },
    #[error("state {state} action {action}: nonpositive sojourn ({detail})")]
    NonpositiveSojourn {
        state: usize,
        action: usize,
        detail: String,
    },
    #[error("state {state} action {action}: transition to {to} has no sojourn model and the action has no default")]
    MissingSojourn {
        state: usize,
        action: usize,
        to: usize,
    },
}

impl GameError {
    fn from_json(err: serde_json::Error) -> Self {
        let (line, column, msg) = (err.line(), err.column(), err.to_string());
        match err.classify() {
            serde_json::error::Category::Data => GameError::Schema { line, column, msg },
            _ => GameError::Syntax { line, column, msg },
        }
    }
}

/// The two players. `I` maximises, `II` minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    I,
    II,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }

    /// Letter used for strategy labels (`f3`, `g1`).
    pub fn strategy_prefix(self) -> char {
        match self {
            Player::I => 'f',
            Player::II => 'g',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::I => f.write_str("I"),
            Player::II => f.write_str("II"),
        }
    }
}

/// Distribution of the time a transition takes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Sojourn {
    /// Only the expectation is known. Simulated as a constant.
    Mean {
        value: f64,
    },
    Deterministic {
        t: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
}

impl Sojourn {
    pub fn mean(&self) -> f64 {
        match *self {
            Sojourn::Mean { value } => value,
            Sojourn::Deterministic { t } => t,
            Sojourn::Exponential { rate } => 1.0 / rate,
            Sojourn::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    /// Same family with every time multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Sojourn {
        match *self {
            Sojourn::Mean { value } => Sojourn::Mean {
                value: value * factor,
            },
            Sojourn::Deterministic { t } => Sojourn::Deterministic { t: t * factor },
            Sojourn::Exponential { rate } => Sojourn::Exponential {
                rate: rate / factor,
            },
            Sojourn::Uniform { a, b } => Sojourn::Uniform {
                a: a * factor,
                b: b * factor,
            },
        }
    }

    fn check(&self) -> Result<(), String> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            Sojourn::Mean { value } if !ok(value) => Err(format!("mean value {value}")),
            Sojourn::Deterministic { t } if !ok(t) => Err(format!("deterministic t {t}")),
            Sojourn::Exponential { rate } if !ok(rate) => Err(format!("exponential rate {rate}")),
            Sojourn::Uniform { a, b } if !(a.is_finite() && b.is_finite() && a >= 0.0 && b > a) => {
                Err(format!("uniform a {a}, b {b}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    /// Destination state id (1-based).
    pub to: usize,
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sojourn: Option<Sojourn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub label: String,
    /// Immediate expected reward to player I.
    pub reward: f64,
    /// Default sojourn model for transitions that carry none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sojourn: Option<Sojourn>,
    pub transitions: Vec<Transition>,
}

impl Action {
    /// Sojourn model governing the transition at `index`.
    pub fn sojourn_for(&self, index: usize) -> Option<&Sojourn> {
        self.transitions[index]
            .sojourn
            .as_ref()
            .or(self.sojourn.as_ref())
    }

    /// Expected sojourn time: the probability-weighted mean of the
    /// per-destination sojourn means.
    pub fn expected_sojourn(&self) -> f64 {
        if self.transitions.iter().all(|t| t.sojourn.is_none()) {
            if let Some(default) = &self.sojourn {
                return default.mean();
            }
        }
        self.transitions
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let mean = self.sojourn_for(k).map_or(f64::NAN, Sojourn::mean);
                t.prob * mean
            })
            .sum()
    }

    /// Dense transition row over `n` states.
    pub fn row(&self, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; n];
        for t in &self.transitions {
            row[t.to - 1] += t.prob;
        }
        row
    }
}

/// Free-standing form of [`Action::expected_sojourn`].
pub fn expected_sojourn(action: &Action) -> f64 {
    action.expected_sojourn()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub id: usize,
    pub player: Player,
    pub actions: Vec<Action>,
}

/// Published or otherwise externally known values used to flag
/// discrepancies in solve reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub value: Vec<f64>,
    #[serde(default = "Reference::default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Reference {
    fn default_tolerance() -> f64 {
        5e-4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Game {
    pub name: String,
    pub states: Vec<State>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
}

/// Summary of a validated game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    /// States controlled by player I (ids).
    pub max_states: Vec<usize>,
    /// States controlled by player II (ids).
    pub min_states: Vec<usize>,
    /// Action counts at player I's states, in `max_states` order.
    pub max_action_counts: Vec<usize>,
    pub min_action_counts: Vec<usize>,
    /// Number of pure stationary strategies per player; `None` on overflow.
    pub max_strategy_count: Option<u128>,
    pub min_strategy_count: Option<u128>,
    pub warnings: Vec<String>,
}

impl Game {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// 0-based indices of the states controlled by `player`, ascending.
    pub fn controlled_by(&self, player: Player) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.player == player)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serialization cannot fail")
    }

    /// Multiply every reward by `factor`.
    pub fn scale_rewards(&mut self, factor: f64) {
        for a in self.states.iter_mut().flat_map(|s| s.actions.iter_mut()) {
            a.reward *= factor;
        }
    }

    /// Multiply every sojourn time by `factor` (so every mean scales by it).
    pub fn scale_sojourns(&mut self, factor: f64) {
        for a in self.states.iter_mut().flat_map(|s| s.actions.iter_mut()) {
            a.sojourn = a.sojourn.map(|s| s.scaled(factor));
            for t in &mut a.transitions {
                t.sojourn = t.sojourn.map(|s| s.scaled(factor));
            }
        }
    }

    /// Check every structural invariant and summarise the player partition.
    pub fn validate(&self) -> Result<ValidationReport, GameError> {
        let n = self.states.len();
        if n == 0 {
            return Err(GameError::Empty);
        }
        let mut warnings = Vec::new();
        for (pos, state) in self.states.iter().enumerate() {
            if state.id != pos + 1 {
                return Err(GameError::StateId {
                    position: pos + 1,
                    found: state.id,
                    expected: pos + 1,
                });
            }
            if state.actions.is_empty() {
                return Err(GameError::NoActions { state: state.id });
            }
            for (ai, action) in state.actions.iter().enumerate() {
                let (s, a) = (state.id, ai + 1);
                if !action.reward.is_finite() {
                    return Err(GameError::BadReward {
                        state: s,
                        action: a,
                        reward: action.reward,
                    });
                }
                let mut seen = BTreeSet::new();
                let mut sum = 0.0;
                for t in &action.transitions {
                    if t.to == 0 || t.to > n {
                        return Err(GameError::UnknownTarget {
                            state: s,
                            action: a,
                            to: t.to,
                        });
                    }
                    if !seen.insert(t.to) {
                        return Err(GameError::DuplicateTarget {
                            state: s,
                            action: a,
                            to: t.to,
                        });
                    }
                    if !(0.0..=1.0).contains(&t.prob) {
                        return Err(GameError::BadProbability {
                            state: s,
                            action: a,
                            prob: t.prob,
                        });
                    }
                    sum += t.prob;
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(GameError::NotStochastic {
                        state: s,
                        action: a,
                        sum,
                    });
                }
                let check = |soj: &Sojourn| {
                    soj.check().map_err(|detail| GameError::NonpositiveSojourn {
                        state: s,
                        action: a,
                        detail,
                    })
                };
                if let Some(d) = &action.sojourn {
                    check(d)?;
                }
                for (k, t) in action.transitions.iter().enumerate() {
                    match action.sojourn_for(k) {
                        Some(soj) => check(soj)?,
                        None => {
                            return Err(GameError::MissingSojourn {
                                state: s,
                                action: a,
                                to: t.to,
                            })
                        }
                    }
                }
                let tau = action.expected_sojourn();
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(GameError::NonpositiveSojourn {
                        state: s,
                        action: a,
                        detail: format!("expected sojourn {tau}"),
                    });
                }
                if action.transitions.iter().any(|t| t.prob == 0.0) {
                    warnings.push(format!(
                        "state {s} action {a}: zero-probability transition listed"
                    ));
                }
            }
        }
        if let Some(reference) = &self.reference {
            if reference.value.len() != n {
                warnings.push(format!(
                    "reference value vector has {} entries, game has {n} states; ignored",
                    reference.value.len()
                ));
            }
        }

        let collect = |player: Player| -> (Vec<usize>, Vec<usize>, Option<u128>) {
            let idx = self.controlled_by(player);
            let ids = idx.iter().map(|&k| k + 1).collect();
            let counts: Vec<usize> = idx.iter().map(|&k| self.states[k].actions.len()).collect();
            let total = counts
                .iter()
                .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128));
            (ids, counts, total)
        };
        let (max_states, max_action_counts, max_strategy_count) = collect(Player::I);
        let (min_states, min_action_counts, min_strategy_count) = collect(Player::II);
        Ok(ValidationReport {
            n,
            max_states,
            min_states,
            max_action_counts,
            min_action_counts,
            max_strategy_count,
            min_strategy_count,
            warnings,
        })
    }

    /// Rescale rows whose sums are within tolerance of 1 so they sum to 1.
    fn renormalize(&mut self) {
        for a in self.states.iter_mut().flat_map(|s| s.actions.iter_mut()) {
            let sum: f64 = a.transitions.iter().map(|t| t.prob).sum();
            // Rows already within rounding of 1 are left alone, which keeps
            // parse/serialize round trips exact.
            if (sum - 1.0).abs() > 4.0 * f64::EPSILON * a.transitions.len() as f64 {
                for t in &mut a.transitions {
                    t.prob /= sum;
                }
            }
        }
    }
}

/// Parse and validate a game file.
pub fn parse_game(text: &str) -> Result<Game, GameError> {
    let mut game: Game = serde_json::from_str(text).map_err(GameError::from_json)?;
    game.validate()?;
    game.renormalize();
    Ok(game)
}

/// Validate a game that is already in memory.
pub fn validate(game: &Game) -> Result<ValidationReport, GameError> {
    game.validate()
}

/// The four-state example game shipped with the crate.
pub const EXAMPLE_S5: &str = include_str!("../games/example_s5.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{"name":"loop","states":[{"id":1,"player":"I","actions":[
            {"label":"stay","reward":0,"sojourn":{"kind":"mean","value":1},
             "transitions":[{"to":1,"prob":1}]}]}]}"#
    }

    #[test]
    fn parses_example() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        assert_eq!(g.n(), 4);
        let players: Vec<_> = g.states.iter().map(|s| s.player).collect();
        assert_eq!(players, [Player::I, Player::I, Player::II, Player::II]);
        let counts: Vec<_> = g.states.iter().map(|s| s.actions.len()).collect();
        assert_eq!(counts, [2, 2, 2, 2]);
        let r = g.validate().unwrap();
        assert_eq!(r.max_states, [1, 2]);
        assert_eq!(r.min_states, [3, 4]);
        assert_eq!(r.max_strategy_count, Some(4));
        assert_eq!(r.min_strategy_count, Some(4));
    }

    #[test]
    fn parses_minimal() {
        let g = parse_game(minimal()).unwrap();
        assert_eq!(g.n(), 1);
        let r = g.validate().unwrap();
        assert!(r.min_states.is_empty());
        assert_eq!(r.min_strategy_count, Some(1));
    }

    #[test]
    fn rejects_substochastic_row() {
        let text = minimal().replace(r#""prob":1"#, r#""prob":0.9"#);
        let err = parse_game(&text).unwrap_err();
        assert!(matches!(err, GameError::NotStochastic { state: 1, .. }));
        assert!(err.to_string().contains("state 1"));
    }

    #[test]
    fn rejects_zero_sojourn() {
        let text = minimal().replace(r#""value":1"#, r#""value":0"#);
        let err = parse_game(&text).unwrap_err();
        assert!(err.to_string().contains("nonpositive sojourn"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_game("{\"name\": \n  oops}").unwrap_err();
        match err {
            GameError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let bad_kind = minimal().replace("\"mean\"", "\"pareto\"");
        assert!(matches!(
            parse_game(&bad_kind),
            Err(GameError::Schema { .. })
        ));
        let bad_player = minimal().replace("\"I\"", "\"III\"");
        assert!(matches!(
            parse_game(&bad_player),
            Err(GameError::Schema { .. })
        ));
        // a second action list for the other player is not representable
        let both = minimal().replace(r#""player":"I","#, r#""player":"I","opponent_actions":[],"#);
        assert!(matches!(parse_game(&both), Err(GameError::Schema { .. })));
    }

    #[test]
    fn rejects_bad_targets_and_ids() {
        let text = minimal().replace(r#""to":1"#, r#""to":2"#);
        assert!(matches!(
            parse_game(&text),
            Err(GameError::UnknownTarget { to: 2, .. })
        ));
        let text = minimal().replace(r#""id":1"#, r#""id":3"#);
        assert!(matches!(
            parse_game(&text),
            Err(GameError::StateId { found: 3, .. })
        ));
        let text = r#"{"name":"x","states":[]}"#;
        assert!(matches!(parse_game(text), Err(GameError::Empty)));
    }

    #[test]
    fn missing_sojourn() {
        let text = minimal().replace(r#""sojourn":{"kind":"mean","value":1},"#, "");
        assert!(matches!(
            parse_game(&text),
            Err(GameError::MissingSojourn { .. })
        ));
    }

    #[test]
    fn expected_sojourn_values() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        assert_eq!(expected_sojourn(&g.states[0].actions[1]), 0.9);

        let a = Action {
            label: "x".into(),
            reward: 0.0,
            sojourn: Some(Sojourn::Deterministic { t: 2.0 }),
            transitions: vec![
                Transition {
                    to: 1,
                    prob: 0.3,
                    sojourn: None,
                },
                Transition {
                    to: 2,
                    prob: 0.7,
                    sojourn: None,
                },
            ],
        };
        assert_eq!(a.expected_sojourn(), 2.0);

        // 0.5 * (1/2) + 0.5 * (0 + 3)/2
        let a = Action {
            label: "y".into(),
            reward: 0.0,
            sojourn: None,
            transitions: vec![
                Transition {
                    to: 1,
                    prob: 0.5,
                    sojourn: Some(Sojourn::Exponential { rate: 2.0 }),
                },
                Transition {
                    to: 2,
                    prob: 0.5,
                    sojourn: Some(Sojourn::Uniform { a: 0.0, b: 3.0 }),
                },
            ],
        };
        assert!((a.expected_sojourn() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sojourn_scaling_scales_mean() {
        for s in [
            Sojourn::Mean { value: 1.3 },
            Sojourn::Deterministic { t: 0.4 },
            Sojourn::Exponential { rate: 3.0 },
            Sojourn::Uniform { a: 0.5, b: 2.0 },
        ] {
            let scaled = s.scaled(2.5).mean();
            assert!((scaled - 2.5 * s.mean()).abs() < 1e-12);
        }
    }
}
