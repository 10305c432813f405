use pismg::simulator::sample_path_ratio;
use pismg::strategy::{PureStrategy, StrategySpace, ENUMERATION_CAP};
use pismg::{
    estimate_payoff, parse_game, payoff_vector, simulate, CesaroOptions, Game, Player, EXAMPLE_S5,
};

fn pair(game: &Game, f: usize, g: usize) -> (PureStrategy, PureStrategy) {
    let max = StrategySpace::new(game, Player::I, ENUMERATION_CAP).unwrap();
    let min = StrategySpace::new(game, Player::II, ENUMERATION_CAP).unwrap();
    (max.decode(f - 1).unwrap(), min.decode(g - 1).unwrap())
}

#[test]
fn occupancy_matches_stationary_distribution() {
    let game = parse_game(EXAMPLE_S5).unwrap();
    // Under f3 the chain on {1, 2} has π1 = π1/3 + π2/2, so π = (3/7, 4/7).
    let (f, g) = pair(&game, 3, 1);
    let horizon = 100_000u64;
    let t = simulate(&game, &f, &g, 1, horizon, 5).unwrap();
    for (s, p) in [(0, 3.0 / 7.0), (1, 4.0 / 7.0)] {
        let freq = t.visits[s] as f64 / horizon as f64;
        let se = (p * (1.0 - p) / horizon as f64).sqrt();
        assert!(
            (freq - p).abs() < 3.0 * se,
            "state {}: {freq} vs {p}",
            s + 1
        );
    }
    assert_eq!(t.visits[2] + t.visits[3], 0);
}

#[test]
fn estimate_from_transient_start_matches_limit() {
    let game = parse_game(EXAMPLE_S5).unwrap();
    // From 4 under g1: half to 3 (payoff 3), half to {1, 2} (payoff 2.1).
    let (f, g) = pair(&game, 1, 1);
    let e = estimate_payoff(&game, &f, &g, 4, 10_000, 200, 17).unwrap();
    let tol = (0.01 * 2.55f64).max(3.0 * e.stderr);
    assert!((e.point - 2.55).abs() <= tol, "{} ± {}", e.point, e.stderr);
}

#[test]
fn sampled_sojourns_leave_the_limit_unchanged() {
    let text = EXAMPLE_S5.replace(
        r#""sojourn": { "kind": "mean", "value": 2 }"#,
        r#""sojourn": { "kind": "exponential", "rate": 0.5 }"#,
    );
    let game = parse_game(&text).unwrap();
    assert_ne!(
        game,
        parse_game(EXAMPLE_S5).unwrap(),
        "substitution did not apply"
    );
    let (f, g) = pair(&game, 1, 1);
    let exact = payoff_vector(&game, &f, &g, &CesaroOptions::default()).unwrap()[3];
    let e = estimate_payoff(&game, &f, &g, 4, 10_000, 200, 3).unwrap();
    assert!((e.point - exact).abs() <= (0.01 * exact).max(3.0 * e.stderr));
}

#[test]
fn recurrent_start_single_path_converges() {
    let game = parse_game(EXAMPLE_S5).unwrap();
    let (f, g) = pair(&game, 3, 1);
    let r = sample_path_ratio(&game, &f, &g, 2, 200_000, 9).unwrap();
    assert!((r - 15.4 / 6.7).abs() < 0.01, "{r}");
}

#[test]
fn estimates_do_not_depend_on_scheduling() {
    let game = parse_game(EXAMPLE_S5).unwrap();
    let (f, g) = pair(&game, 2, 4);
    let a = estimate_payoff(&game, &f, &g, 1, 2_000, 16, 99).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| estimate_payoff(&game, &f, &g, 1, 2_000, 16, 99).unwrap());
    assert_eq!(a, b);
}
