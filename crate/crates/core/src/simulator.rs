//! Monte-Carlo evaluation of a fixed pure strategy pair.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`.
//! Replication `k` of a run with seed `s` uses the stream seeded with
//! `s ^ k`, so replication 0 reproduces [`simulate`] with the same seed and
//! results do not depend on how replications are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::game::{Game, Sojourn};
use crate::strategy::{joint_actions, PureStrategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub cum_reward: f64,
    pub cum_time: f64,
    pub steps: u64,
    /// 1-based state reached after the last epoch.
    pub final_state: usize,
    /// Decision epochs spent in each state.
    pub visits: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffEstimate {
    /// Mean cumulative reward over mean cumulative time.
    pub point: f64,
    /// Delta-method standard error of the ratio.
    pub stderr: f64,
    pub reps: u64,
    pub horizon: u64,
    pub seed: u64,
}

pub fn rng_for(seed: u64, replication: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ replication)
}

fn sample_sojourn<R: Rng>(model: &Sojourn, rng: &mut R) -> f64 {
    match *model {
        Sojourn::Mean { value } => value,
        Sojourn::Deterministic { t } => t,
        Sojourn::Exponential { rate } => -(1.0 - rng.random::<f64>()).ln() / rate,
        Sojourn::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
    }
}

/// Run `horizon` decision epochs from 1-based state `start`.
pub fn simulate(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
    start: usize,
    horizon: u64,
    seed: u64,
) -> Result<TrajectoryStats, StrategyError> {
    let actions = joint_actions(game, f, g)?;
    Ok(run(game, &actions, start, horizon, &mut rng_for(seed, 0)))
}

fn run<R: Rng>(
    game: &Game,
    actions: &[usize],
    start: usize,
    horizon: u64,
    rng: &mut R,
) -> TrajectoryStats {
    assert!(
        (1..=game.n()).contains(&start),
        "start state {start} out of range"
    );
    let mut s = start - 1;
    let mut visits = vec![0u64; game.n()];
    let (mut cum_reward, mut cum_time) = (0.0, 0.0);
    for _ in 0..horizon {
        visits[s] += 1;
        let action = &game.states[s].actions[actions[s]];
        cum_reward += action.reward;
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        let mut pick = None;
        for (k, t) in action.transitions.iter().enumerate() {
            if t.prob <= 0.0 {
                continue;
            }
            pick = Some(k);
            acc += t.prob;
            if u < acc {
                break;
            }
        }
        let k = pick.expect("validated rows have positive mass");
        let model = action
            .sojourn_for(k)
            .expect("validated transitions have a sojourn model");
        cum_time += sample_sojourn(model, rng);
        s = action.transitions[k].to - 1;
    }
    TrajectoryStats {
        cum_reward,
        cum_time,
        steps: horizon,
        final_state: s + 1,
        visits,
    }
}

/// Ratio-of-means estimate over `reps` independent replications.
pub fn estimate_payoff(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
    start: usize,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> Result<PayoffEstimate, StrategyError> {
    assert!(
        reps >= 2,
        "at least two replications are needed for a standard error"
    );
    let actions = joint_actions(game, f, g)?;
    let runs: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|k| {
            let t = run(game, &actions, start, horizon, &mut rng_for(seed, k));
            (t.cum_reward, t.cum_time)
        })
        .collect();
    let (point, stderr) = ratio_with_stderr(&runs);
    Ok(PayoffEstimate {
        point,
        stderr,
        reps,
        horizon,
        seed,
    })
}

/// `Σy / Σx` and its delta-method standard error from `(y, x)` pairs.
pub fn ratio_with_stderr(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean_y = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_x = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let ratio = mean_y / mean_x;
    let (mut vy, mut vx, mut cxy) = (0.0, 0.0, 0.0);
    for &(y, x) in samples {
        let (dy, dx) = (y - mean_y, x - mean_x);
        vy += dy * dy;
        vx += dx * dx;
        cxy += dy * dx;
    }
    let denom = n - 1.0;
    let (vy, vx, cxy) = (vy / denom, vx / denom, cxy / denom);
    let var = (vy - 2.0 * ratio * cxy + ratio * ratio * vx) / (n * mean_x * mean_x);
    (ratio, var.max(0.0).sqrt())
}

/// Reward-over-time ratio along a single long trajectory. Agrees with
/// [`estimate_payoff`] in the limit only for starts inside a recurrent class.
pub fn sample_path_ratio(
    game: &Game,
    f: &PureStrategy,
    g: &PureStrategy,
    start: usize,
    horizon: u64,
    seed: u64,
) -> Result<f64, StrategyError> {
    let t = simulate(game, f, g, start, horizon, seed)?;
    Ok(t.cum_reward / t.cum_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{parse_game, Player, EXAMPLE_S5};
    use crate::strategy::{enumerate_pure, ENUMERATION_CAP};

    fn loop_game() -> Game {
        parse_game(
            r#"{"name":"loop","states":[{"id":1,"player":"I","actions":[
            {"label":"x","reward":2,"sojourn":{"kind":"deterministic","t":0.5},
             "transitions":[{"to":1,"prob":1}]}]}]}"#,
        )
        .unwrap()
    }

    fn strategies(g: &Game) -> (Vec<PureStrategy>, Vec<PureStrategy>) {
        (
            enumerate_pure(g, Player::I, ENUMERATION_CAP).unwrap(),
            enumerate_pure(g, Player::II, ENUMERATION_CAP).unwrap(),
        )
    }

    #[test]
    fn deterministic_loop() {
        let g = loop_game();
        let (fs, gs) = strategies(&g);
        let t = simulate(&g, &fs[0], &gs[0], 1, 10, 7).unwrap();
        assert_eq!((t.cum_reward, t.cum_time, t.steps), (20.0, 5.0, 10));
        let e = estimate_payoff(&g, &fs[0], &gs[0], 1, 10, 5, 7).unwrap();
        assert_eq!((e.point, e.stderr), (4.0, 0.0));
    }

    #[test]
    fn absorbing_state_three() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        let (fs, gs) = strategies(&g);
        let t = simulate(&g, &fs[0], &gs[0], 3, 100, 1).unwrap();
        assert_eq!((t.cum_reward, t.cum_time, t.final_state), (300.0, 100.0, 3));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let g = parse_game(EXAMPLE_S5).unwrap();
        let (fs, gs) = strategies(&g);
        let a = simulate(&g, &fs[2], &gs[0], 1, 1000, 42).unwrap();
        let b = simulate(&g, &fs[2], &gs[0], 1, 1000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&g, &fs[2], &gs[0], 1, 1000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_sojourn_means() {
        let mut rng = rng_for(3, 0);
        let n = 200_000;
        let exp: f64 = (0..n)
            .map(|_| sample_sojourn(&Sojourn::Exponential { rate: 2.0 }, &mut rng))
            .sum::<f64>()
            / n as f64;
        let uni: f64 = (0..n)
            .map(|_| sample_sojourn(&Sojourn::Uniform { a: 1.0, b: 3.0 }, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((exp - 0.5).abs() < 0.01, "{exp}");
        assert!((uni - 2.0).abs() < 0.01, "{uni}");
    }

    #[test]
    fn ratio_stderr_zero_for_constant_samples() {
        let (r, se) = ratio_with_stderr(&[(4.0, 2.0), (4.0, 2.0), (4.0, 2.0)]);
        assert_eq!((r, se), (2.0, 0.0));
    }
}
