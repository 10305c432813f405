//! Seeded random instances for property and cross-method checks.

use rand::Rng;

use crate::game::{Action, Game, Player, Sojourn, State, Transition};
use crate::markov::StochasticMatrix;

/// Random row: integer weights in `0..=max_weight` (at least one
/// positive), normalised, so every probability is rational.
fn random_row<R: Rng>(rng: &mut R, n: usize, zero_prob: f64, max_weight: u32) -> Vec<f64> {
    loop {
        let weights: Vec<u32> = (0..n)
            .map(|_| {
                if rng.random_bool(zero_prob) {
                    0
                } else {
                    rng.random_range(1..=max_weight)
                }
            })
            .collect();
        let total: u32 = weights.iter().sum();
        if total > 0 {
            return weights
                .iter()
                .map(|&w| f64::from(w) / f64::from(total))
                .collect();
        }
    }
}

/// Random `n×n` stochastic matrix with a mix of dense and sparse rows.
pub fn random_stochastic_matrix<R: Rng>(rng: &mut R, n: usize) -> StochasticMatrix {
    let zero_prob = rng.random_range(0.0..0.7);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_row(rng, n, zero_prob, 9)).collect();
    StochasticMatrix::from_rows(&rows).expect("normalised rows are stochastic")
}

#[derive(Debug, Clone, Copy)]
pub struct GameShape {
    pub max_states: usize,
    pub max_actions: usize,
    pub reward_range: (f64, f64),
    pub sojourn_range: (f64, f64),
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape {
            max_states: 6,
            max_actions: 3,
            reward_range: (-5.0, 5.0),
            sojourn_range: (0.5, 3.0),
        }
    }
}

/// Random perfect-information game: controllers, action counts, rational
/// transition rows (often sparse, so absorbing and transient structure
/// appears), uniform rewards and `mean` sojourns.
pub fn random_game<R: Rng>(rng: &mut R, shape: &GameShape) -> Game {
    let n = rng.random_range(1..=shape.max_states);
    let zero_prob = rng.random_range(0.2..0.8);
    let states = (1..=n)
        .map(|id| {
            let player = if rng.random_bool(0.5) {
                Player::I
            } else {
                Player::II
            };
            let k = rng.random_range(1..=shape.max_actions);
            let actions = (1..=k)
                .map(|a| {
                    let row = random_row(rng, n, zero_prob, 6);
                    Action {
                        label: format!("{}{}", if player == Player::I { 'a' } else { 'b' }, a),
                        reward: rng.random_range(shape.reward_range.0..=shape.reward_range.1),
                        sojourn: Some(Sojourn::Mean {
                            value: rng.random_range(shape.sojourn_range.0..=shape.sojourn_range.1),
                        }),
                        transitions: row
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p > 0.0)
                            .map(|(to, &prob)| Transition {
                                to: to + 1,
                                prob,
                                sojourn: None,
                            })
                            .collect(),
                    }
                })
                .collect();
            State {
                id,
                player,
                actions,
            }
        })
        .collect();
    Game {
        name: "random".into(),
        states,
        reference: None,
    }
}
