//! Pure stationary and semi-stationary strategies, and the Markov chain a
//! pair of pure stationary strategies induces.
//!
//! Strategies of one player are numbered in mixed radix over the states
//! that player controls, with the lowest-numbered controlled state as the
//! most significant digit. For two controlled states with two actions each
//! the order is `(1,1) (1,2) (2,1) (2,2)`, labelled `f1..f4` for player I
//! and `g1..g4` for player II. Coordinates at states a player does not
//! control are omitted; the player's single implicit action is played there.

use serde::Serialize;
use thiserror::Error;

use crate::game::{Game, Player};
use crate::markov::{Square, StochasticMatrix};

/// Default refusal threshold for strategy enumeration.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("player {player} has {count} pure stationary strategies, above the cap of {cap}")]
    TooMany {
        player: Player,
        count: String,
        cap: u128,
    },
    #[error("ordinal {ordinal} out of range: player {player} has {count} strategies")]
    OrdinalOutOfRange {
        player: Player,
        ordinal: usize,
        count: usize,
    },
    #[error("strategy for player {expected} expected, got one for player {found}")]
    WrongPlayer { expected: Player, found: Player },
    #[error("state {state}: action index {action} out of range")]
    BadChoice { state: usize, action: usize },
    #[error("state {state} is not controlled by player {player}")]
    NotControlled { state: usize, player: Player },
    #[error("state {state}: no action labelled `{label}`")]
    UnknownLabel { state: usize, label: String },
    #[error("choice covers {found} states, player controls {expected}")]
    WrongLength { expected: usize, found: usize },
}

/// A pure stationary strategy of one player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PureStrategy {
    pub player: Player,
    /// 0-based action index at each controlled state, in ascending state
    /// order (see [`StrategySpace::states`]).
    pub choice: Vec<usize>,
    /// 0-based position in the canonical enumeration.
    pub ordinal: usize,
}

impl PureStrategy {
    /// `f3`, `g1`, ... (1-based).
    pub fn label(&self) -> String {
        format!("{}{}", self.player.strategy_prefix(), self.ordinal + 1)
    }
}

/// The set of pure stationary strategies of one player, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySpace {
    player: Player,
    states: Vec<usize>,
    radices: Vec<usize>,
    count: usize,
}

impl StrategySpace {
    pub fn new(game: &Game, player: Player, cap: u128) -> Result<Self, StrategyError> {
        let states = game.controlled_by(player);
        let radices: Vec<usize> = states
            .iter()
            .map(|&s| game.states[s].actions.len())
            .collect();
        let total = radices
            .iter()
            .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128));
        match total {
            Some(c) if c <= cap && c <= usize::MAX as u128 => Ok(StrategySpace {
                player,
                states,
                radices,
                count: c as usize,
            }),
            other => Err(StrategyError::TooMany {
                player,
                count: other.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string()),
                cap,
            }),
        }
    }

    pub fn player(&self) -> Player {
        self.player
    }

    /// 0-based indices of the controlled states.
    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn decode(&self, ordinal: usize) -> Result<PureStrategy, StrategyError> {
        if ordinal >= self.count {
            return Err(StrategyError::OrdinalOutOfRange {
                player: self.player,
                ordinal,
                count: self.count,
            });
        }
        let mut rest = ordinal;
        let mut choice = vec![0; self.radices.len()];
        for (slot, &r) in choice.iter_mut().zip(&self.radices).rev() {
            *slot = rest % r;
            rest /= r;
        }
        Ok(PureStrategy {
            player: self.player,
            choice,
            ordinal,
        })
    }

    pub fn encode(&self, choice: &[usize]) -> Result<usize, StrategyError> {
        if choice.len() != self.radices.len() {
            return Err(StrategyError::WrongLength {
                expected: self.radices.len(),
                found: choice.len(),
            });
        }
        let mut ordinal = 0;
        for ((&c, &r), &s) in choice.iter().zip(&self.radices).zip(&self.states) {
            if c >= r {
                return Err(StrategyError::BadChoice {
                    state: s + 1,
                    action: c + 1,
                });
            }
            ordinal = ordinal * r + c;
        }
        Ok(ordinal)
    }

    /// Strategy from `(state id, action label)` pairs covering every
    /// controlled state.
    pub fn from_labels(
        &self,
        game: &Game,
        picks: &[(usize, String)],
    ) -> Result<PureStrategy, StrategyError> {
        let mut choice = vec![usize::MAX; self.states.len()];
        for (state_id, label) in picks {
            let slot = self.states.iter().position(|&s| s + 1 == *state_id).ok_or(
                StrategyError::NotControlled {
                    state: *state_id,
                    player: self.player,
                },
            )?;
            let idx = game.states[state_id - 1]
                .actions
                .iter()
                .position(|a| &a.label == label)
                .ok_or_else(|| StrategyError::UnknownLabel {
                    state: *state_id,
                    label: label.clone(),
                })?;
            choice[slot] = idx;
        }
        if choice.contains(&usize::MAX) {
            return Err(StrategyError::WrongLength {
                expected: self.states.len(),
                found: picks.len(),
            });
        }
        let ordinal = self.encode(&choice)?;
        self.decode(ordinal)
    }

    pub fn iter(&self) -> impl Iterator<Item = PureStrategy> + '_ {
        (0..self.count).map(|k| self.decode(k).expect("ordinal in range"))
    }

    /// Action chosen at 0-based state `s`, if this player controls it.
    pub fn action_at(&self, strategy: &PureStrategy, s: usize) -> Option<usize> {
        self.states
            .iter()
            .position(|&t| t == s)
            .map(|slot| strategy.choice[slot])
    }
}

/// All pure stationary strategies of `player`, in canonical order.
pub fn enumerate_pure(
    game: &Game,
    player: Player,
    cap: u128,
) -> Result<Vec<PureStrategy>, StrategyError> {
    let space = StrategySpace::new(game, player, cap)?;
    Ok(space.iter().collect())
}

/// Pure stationary strategy chosen per initial state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemiStationaryStrategy {
    pub player: Player,
    /// Entry `s` is the stationary strategy used when play starts in
    /// state `s + 1`.
    pub per_initial_state: Vec<PureStrategy>,
}

/// Chain, rewards and expected sojourn times under a pure strategy pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedChain {
    pub q: StochasticMatrix,
    pub r: Vec<f64>,
    pub tau: Vec<f64>,
    /// 0-based action played at each state.
    pub actions: Vec<usize>,
}

/// Action index played at every state under `(f, g)`.
pub fn joint_actions(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
) -> Result<Vec<usize>, StrategyError> {
    for (s, expected) in [(f, Player::I), (g, Player::II)] {
        if s.player != expected {
            return Err(StrategyError::WrongPlayer {
                expected,
                found: s.player,
            });
        }
    }
    let mut slots = [0usize, 0usize];
    let mut actions = Vec::with_capacity(game.n());
    for state in &game.states {
        let (strategy, slot) = match state.player {
            Player::I => (f, &mut slots[0]),
            Player::II => (g, &mut slots[1]),
        };
        let a = *strategy
            .choice
            .get(*slot)
            .ok_or(StrategyError::WrongLength {
                expected: *slot + 1,
                found: strategy.choice.len(),
            })?;
        if a >= state.actions.len() {
            return Err(StrategyError::BadChoice {
                state: state.id,
                action: a + 1,
            });
        }
        *slot += 1;
        actions.push(a);
    }
    Ok(actions)
}

pub fn induce(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
) -> Result<InducedChain, StrategyError> {
    let actions = joint_actions(game, f, g)?;
    Ok(induce_actions(game, &actions))
}

/// Chain for an explicit action profile (one 0-based action per state).
pub fn induce_actions(game: &Game, actions: &[usize]) -> InducedChain {
    let n = game.n();
    let mut q = Square::zeros(n);
    let mut r = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for (s, (state, &a)) in game.states.iter().zip(actions).enumerate() {
        let action = &state.actions[a];
        for t in &action.transitions {
            q[(s, t.to - 1)] += t.prob;
        }
        r.push(action.reward);
        tau.push(action.expected_sojourn());
    }
    InducedChain {
        q: StochasticMatrix::new(q).expect("validated game rows are stochastic"),
        r,
        tau,
        actions: actions.to_vec(),
    }
}
