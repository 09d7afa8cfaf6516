use coopbasin::basin::{
    basin_corr, basin_ind, basin_two_player, indifference_root, solve_cost_f64, solve_players_f64, strategy_values,
};
use coopbasin::config::{parse_session, parse_treatment, session_to_toml, treatment_to_toml};
use coopbasin::exact::{ratio, Rational};
use coopbasin::game::{signal_of, Action, Money, Signal, Treatment};
use coopbasin::simulator::{run_session, AdaptiveParams, MetricWindow, PlayMode, SessionConfig};
use coopbasin::strategies::{next_action, sample_strategy, update_state, Mixture, StrategyKind, StrategyState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn action(c: bool) -> Action {
    if c {
        Action::Cooperate
    } else {
        Action::Defect
    }
}

fn treatment(n: u32, x: Rational, delta: Rational, pi0: i64, dpi: i64) -> Treatment {
    Treatment::new(n, x, delta, Money::dollars(pi0), Money::dollars(dpi)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn signal_ignores_order(mut others in prop::collection::vec(any::<bool>(), 1..12), seed in any::<u64>()) {
        let actions: Vec<Action> = others.iter().copied().map(action).collect();
        let before = signal_of(&actions).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        others.shuffle(&mut rng);
        let shuffled: Vec<Action> = others.iter().copied().map(action).collect();
        prop_assert_eq!(before, signal_of(&shuffled).unwrap());
    }

    #[test]
    fn grim_trigger_never_resets(history in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
        let mut state = StrategyState::fresh(StrategyKind::Grim);
        let mut defected = false;
        for (own_c, success) in history {
            let planned = next_action(&state);
            if defected {
                prop_assert_eq!(planned, Action::Defect);
            }
            defected |= planned == Action::Defect;
            // Actions may be forced off the automaton's plan.
            let own = action(own_c);
            let signal = if success { Signal::Success } else { Signal::Failure };
            state = update_state(&state, own, signal);
        }
    }

    #[test]
    fn treatment_config_round_trips(n in 2u32..30, xn in 1i64..50, xd in 1i64..50, dn in 1i64..99, pi0 in -20i64..40, dpi in 1i64..40) {
        let t = treatment(n, ratio(xn, xd), ratio(dn, 100), pi0, dpi);
        let back = parse_treatment(&treatment_to_toml(&t)).unwrap();
        prop_assert_eq!(t, back);
    }

    #[test]
    fn session_config_round_trips(
        groups in 1u32..10,
        supergames in 1u32..30,
        seed in 0u64..(i64::MAX as u64),
        p in 0.0f64..=1.0,
        mode in 0u8..3,
    ) {
        let mixture = Mixture::new(p).unwrap();
        let mode = match mode {
            0 => PlayMode::Static { mixture },
            1 => PlayMode::FixedTypes { mixture },
            _ => PlayMode::Adaptive(AdaptiveParams::new(mixture)),
        };
        let cfg = SessionConfig::new(treatment(4, ratio(1, 9), ratio(3, 4), 11, 9), 4 * groups, mode, seed)
            .with_supergames(supergames)
            .with_window(MetricWindow::all(supergames));
        let back = parse_session(&session_to_toml(&cfg)).unwrap();
        prop_assert_eq!(cfg, back);
    }

    #[test]
    fn independent_basin_is_monotone(x in 0.01f64..1.0, n in 2u32..20, delta in 0.55f64..0.95) {
        let b = basin_ind(x, n, delta).unwrap();
        prop_assume!(b < 0.999);
        prop_assert!(basin_ind(x * 1.01, n, delta).unwrap() > b);
        prop_assert!(basin_ind(x, n + 1, delta).unwrap() > b);
        prop_assert!(basin_ind(x, n, delta + 0.01).unwrap() < b);
    }

    #[test]
    fn two_player_reduces_to_correlated(delta in 0.01f64..0.99, frac in 0.001f64..0.999) {
        let x = frac * delta / (1.0 - delta);
        let two = basin_two_player(x, x, delta).unwrap();
        prop_assert!((two - basin_corr(x, delta).unwrap()).abs() <= 1e-14);
    }

    #[test]
    fn design_inversions_round_trip(target in 0.02f64..0.98, n in 2u32..15, delta in 0.3f64..0.95) {
        let x = solve_cost_f64(target, n, delta).unwrap();
        prop_assert!((basin_ind(x, n, delta).unwrap() - target).abs() <= 1e-12);
        // Choose x so that the players solution is interior.
        let q = target.powi(n as i32 - 1);
        let x = q * delta / (1.0 - delta);
        let n_real = solve_players_f64(target, x, delta).unwrap();
        prop_assert!((n_real - f64::from(n)).abs() <= 1e-9 * f64::from(n));
    }

    #[test]
    fn value_difference_brackets_its_root(xn in 1i64..30, n in 2u32..10, dn in 50i64..95) {
        let t = treatment(n, ratio(xn, 10), ratio(dn, 100), 11, 9);
        let delta = f64::from(dn as u32) / 100.0;
        let q_star = (1.0 - delta) * (xn as f64 / 10.0) / delta;
        prop_assume!(q_star < 0.99 && q_star > 0.01);
        let lo = strategy_values(q_star - 0.01, &t).unwrap().difference();
        let hi = strategy_values(q_star + 0.01, &t).unwrap().difference();
        prop_assert!(lo < 0.0 && hi > 0.0);
        // Affine with slope δ·Δπ.
        prop_assert!(((hi - lo) / 0.02 - delta * 9.0).abs() < 1e-9);
    }

    #[test]
    fn indifference_is_scale_free(xn in 1i64..30, dn in 50i64..95, shift in -50i64..50, scale in 1i64..40) {
        let base = treatment(4, ratio(xn, 10), ratio(dn, 100), 11, 9);
        let moved = treatment(4, ratio(xn, 10), ratio(dn, 100), 11 + shift, 9 * scale);
        prop_assert_eq!(indifference_root(&base), indifference_root(&moved));
    }
}

#[test]
fn strategy_draws_are_binomial() {
    // Two-cell chi-square, 1 degree of freedom; 10.828 is the 0.001 critical value.
    let n = 100_000u32;
    for (i, p) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i as u64);
        let mixture = Mixture::new(p).unwrap();
        let grim = (0..n).filter(|_| sample_strategy(mixture, &mut rng) == StrategyKind::Grim).count() as f64;
        let e_grim = p * f64::from(n);
        let e_alld = (1.0 - p) * f64::from(n);
        let chi2 = (grim - e_grim).powi(2) / e_grim + (f64::from(n) - grim - e_alld).powi(2) / e_alld;
        assert!(chi2 < 10.828, "p = {p}: chi2 = {chi2}");
    }
}

#[test]
fn sessions_are_reproducible_and_signals_consistent() {
    let t = treatment(4, ratio(1, 1), ratio(3, 4), 11, 9);
    let cfg = SessionConfig::new(t, 40, PlayMode::static_mixture(0.6).unwrap(), 31);
    let a = run_session(&cfg).unwrap();
    let b = run_session(&cfg).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    for sg in &a.supergames {
        for round in &sg.rounds {
            for group in &sg.groups {
                for &me in group {
                    let others: Vec<Action> =
                        group.iter().filter(|&&o| o != me).map(|&o| round.actions[o as usize]).collect();
                    assert_eq!(round.signals[me as usize], signal_of(&others).unwrap());
                }
            }
        }
    }
}

#[test]
fn shared_schedules_fix_lengths_across_treatments() {
    let schedule = vec![1, 4, 2, 7, 3];
    let lengths = |t: Treatment, seed| {
        let cfg = SessionConfig::new(t, 20, PlayMode::static_mixture(0.5).unwrap(), seed)
            .with_supergames(5)
            .with_window(MetricWindow::all(5))
            .with_schedule(schedule.clone());
        run_session(&cfg).unwrap().lengths()
    };
    assert_eq!(lengths(treatment(2, ratio(1, 1), ratio(3, 4), 11, 9), 1), schedule);
    assert_eq!(lengths(treatment(10, ratio(1, 9), ratio(3, 4), 11, 9), 2), schedule);
}
