use approx::assert_relative_eq;
use pismg::corpus::{random_game, GameShape};
use pismg::solver::{PayoffTable, SADDLE_REL_TOL};
use pismg::{
    check_all_2x2, find_pure_saddle, parse_game, solve, Certificate, CesaroMethod, Game,
    PayoffMatrix, SolveOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CYCLE_GAME: &str = include_str!("data/two_by_two_cycle.json");

fn corpus(seed: u64, count: usize) -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_game(&mut rng, &GameShape::default()))
        .collect()
}

fn saddle_sets(g: &Game) -> Vec<Vec<(usize, usize)>> {
    solve(g, &SolveOptions::default())
        .unwrap()
        .per_state
        .into_iter()
        .map(|s| s.saddle.all_saddles)
        .collect()
}

#[test]
fn value_equals_maximin_and_minimax() {
    for g in corpus(21, 60) {
        let report = solve(&g, &SolveOptions::default()).unwrap();
        for (k, ps) in report.per_state.iter().enumerate() {
            let tol = ps.saddle.tolerance;
            assert!((ps.saddle.maximin - ps.saddle.minimax).abs() <= tol);
            assert!((report.value[k] - ps.saddle.maximin).abs() <= tol);
            assert!(ps.saddle.interchangeable);
            // Any saddle row against any saddle column is again a saddle.
            for &(i, _) in &ps.saddle.all_saddles {
                for &(_, j) in &ps.saddle.all_saddles {
                    assert!(ps.saddle.all_saddles.contains(&(i, j)));
                }
            }
        }
    }
}

#[test]
fn lazari_and_structural_solve_alike() {
    for g in corpus(22, 40) {
        let a = solve(&g, &SolveOptions::with_method(CesaroMethod::Structural)).unwrap();
        let b = solve(&g, &SolveOptions::with_method(CesaroMethod::Lazari)).unwrap();
        for (x, y) in a.value.iter().zip(&b.value) {
            assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }
}

#[test]
fn payoffs_scale_with_rewards_and_inversely_with_time() {
    for g in corpus(23, 30) {
        let opts = SolveOptions::default();
        let base = PayoffTable::compute(&g, &opts).unwrap();
        let mut rewards = g.clone();
        rewards.scale_rewards(3.7);
        let mut times = g.clone();
        times.scale_sojourns(2.5);
        let by_reward = PayoffTable::compute(&rewards, &opts).unwrap();
        let by_time = PayoffTable::compute(&times, &opts).unwrap();
        for s in 1..=g.n() {
            let (a, r, t) = (base.matrix(s), by_reward.matrix(s), by_time.matrix(s));
            for k in 0..a.entries.len() {
                assert_relative_eq!(
                    r.entries[k],
                    3.7 * a.entries[k],
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
                assert_relative_eq!(
                    t.entries[k],
                    a.entries[k] / 2.5,
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
            }
        }
        assert_eq!(saddle_sets(&rewards), saddle_sets(&g));
        assert_eq!(saddle_sets(&times), saddle_sets(&g));
    }
}

#[test]
fn saddle_search_on_small_matrices() {
    let pennies = PayoffMatrix::from_rows(1, &[vec![1.0, -1.0], vec![-1.0, 1.0]]);
    let r = find_pure_saddle(&pennies, 1e-9);
    assert!(!r.exists);
    assert_eq!((r.maximin, r.minimax), (-1.0, 1.0));
    assert!(matches!(
        check_all_2x2(&pennies, 1e-9),
        Certificate::Violation { .. }
    ));

    let a = PayoffMatrix::from_rows(
        1,
        &[
            vec![3.0, 1.0, 4.0],
            vec![2.0, 2.0, 5.0],
            vec![0.0, 1.0, 9.0],
        ],
    );
    let r = find_pure_saddle(&a, 1e-9);
    assert_eq!((r.row, r.col, r.value), (Some(1), Some(1), Some(2.0)));
    assert_eq!(r.all_saddles, vec![(1, 1)]);
}

#[test]
fn ties_pick_the_smallest_cell_and_stay_interchangeable() {
    let a = PayoffMatrix::from_rows(1, &[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-12]]);
    let r = find_pure_saddle(&a, a.saddle_tolerance(SADDLE_REL_TOL));
    assert_eq!((r.row, r.col), (Some(0), Some(0)));
    assert_eq!(r.all_saddles.len(), 4);
    assert!(r.interchangeable);
}

/// A game whose payoff matrix has a pure saddle although one of its 2×2
/// submatrices has none: from state 1 player II either visits state 2 and
/// 3 with odds 1:2 (b1) or goes to 2 (b2); player I then stays (a2) or not
/// at each of the two states.
#[test]
fn saddle_exists_without_every_two_by_two_having_one() {
    let g = parse_game(CYCLE_GAME).unwrap();
    let act = |s: usize, a: usize| &g.states[s].actions[a];
    let ratio = |r: f64, t: f64| r / t;
    let (b1, b2) = (act(0, 0), act(0, 1));
    let (s2_back, s2_stay) = (act(1, 0), act(1, 1));
    let s3_stay_a1 = act(2, 0);
    let s3_stay_a2 = act(2, 1);

    // Rows f2 = (a1 at 2, a2 at 3) and f3 = (a2 at 2, a1 at 3); columns g1, g2.
    let f2_g1 = ratio(s3_stay_a2.reward, s3_stay_a2.expected_sojourn());
    let f2_g2 = ratio(
        b2.reward + s2_back.reward,
        b2.expected_sojourn() + s2_back.expected_sojourn(),
    );
    let f3_g1 = ratio(
        s2_stay.reward / 3.0 + 2.0 * s3_stay_a1.reward / 3.0,
        s2_stay.expected_sojourn() / 3.0 + 2.0 * s3_stay_a1.expected_sojourn() / 3.0,
    );
    let f3_g2 = ratio(s2_stay.reward, s2_stay.expected_sojourn());
    assert_eq!(b1.transitions.len(), 2);

    let table = PayoffTable::compute(&g, &SolveOptions::default()).unwrap();
    let a = table.matrix(1);
    for (got, want) in [
        (a.get(1, 0), f2_g1),
        (a.get(1, 1), f2_g2),
        (a.get(2, 0), f3_g1),
        (a.get(2, 1), f3_g2),
    ] {
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }
    // Diagonal above both off-diagonal entries: no saddle in this submatrix.
    assert!(f2_g1.min(f3_g2) > f2_g2.max(f3_g1) + 0.5);

    let tol = a.saddle_tolerance(SADDLE_REL_TOL);
    assert_eq!(
        check_all_2x2(&a, tol),
        Certificate::Violation {
            rows: (1, 2),
            cols: (0, 1)
        }
    );
    let r = find_pure_saddle(&a, tol);
    // f4 stays at 2 and at 3; g2 sends play to 2, where it remains.
    assert_eq!((r.row, r.col), (Some(3), Some(1)));
    assert_relative_eq!(r.value.unwrap(), f3_g2, max_relative = 1e-12);
    assert!(solve(&g, &SolveOptions::default()).is_ok());
}
