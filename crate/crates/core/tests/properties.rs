use nudge_core::dynamics::{
    conformity_update, optimal_strategy_in, revise_with_draws, utility_update, ModelParams, SimulationState,
};
use nudge_core::metrics::{
    fit_least_squares, impact_score, resilience_score, stability, system_energy, DissonanceNorm, StateSnapshot,
};
use nudge_core::population::{build_physical_network, Population, Position, SocialNetwork};
use nudge_core::rng::seeded;
use nudge_core::shocks::break_connections;
use proptest::prelude::*;
use rand::Rng;

fn random_population(n: usize, radius: f64, extra_edges: usize, seed: u64) -> Population<f64> {
    let mut rng = seeded(seed);
    let positions: Vec<_> = (0..n).map(|_| Position::new(rng.random::<f64>(), rng.random::<f64>())).collect();
    let mut social = SocialNetwork::empty(n);
    for _ in 0..extra_edges {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            social.add_edge(i, j);
        }
    }
    let strategies = (0..n).map(|_| rng.random::<f64>()).collect();
    Population::with_radius(positions, radius, social, strategies).unwrap()
}

/// Same population with agent `i` relabelled as `perm[i]`.
fn relabel(pop: &Population<f64>, perm: &[usize]) -> Population<f64> {
    let n = pop.len();
    let mut positions = vec![Position::new(0.0, 0.0); n];
    let mut strategies = vec![0.0; n];
    for i in 0..n {
        positions[perm[i]] = pop.positions()[i];
        strategies[perm[i]] = pop.strategies()[i];
    }
    let edges: Vec<_> = pop.social().edges().into_iter().map(|(i, j)| (perm[i], perm[j])).collect();
    let social = SocialNetwork::from_edges(n, &edges).unwrap();
    let physical = build_physical_network(&positions, 0.3);
    Population::from_parts(positions, physical, social, strategies).unwrap()
}

proptest! {
    #[test]
    fn conformity_stays_in_unit_interval(s in -1.0f64..2.0, opt in -1.0f64..2.0, delta in 0.0f64..5.0) {
        let out = conformity_update(s.clamp(0.0, 1.0), opt, delta);
        prop_assert!((0.0..=1.0).contains(&out));
        let raw = conformity_update(s, opt, delta);
        prop_assert!((0.0..=1.0).contains(&raw));
    }

    #[test]
    fn utility_stays_in_unit_interval(seed in 0u64..500, delta in 0.0f64..1.0) {
        let pop = random_population(12, 0.5, 10, seed);
        let mut state = SimulationState::new(pop);
        let mut rng = seeded(seed ^ 0xabc);
        state.epoch_payoff = (0..12).map(|_| rng.random::<f64>() * 10.0).collect();
        for i in 0..12 {
            let s = utility_update(i, &state, delta);
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn revision_ignores_iteration_order(seed in 0u64..200) {
        let n = 15;
        let pop = random_population(n, 0.3, 12, seed);
        let mut rng = seeded(seed + 7);
        let payoffs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 20.0).collect();
        let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let params = ModelParams::default();

        let mut a = SimulationState::new(pop.clone());
        a.epoch_payoff = payoffs.clone();
        let out_a = revise_with_draws(&a, &params, &draws);

        let mut b = SimulationState::new(relabel(&pop, &perm));
        let mut payoffs_b = vec![0.0; n];
        let mut draws_b = vec![0.0; n];
        for i in 0..n {
            payoffs_b[perm[i]] = payoffs[i];
            draws_b[perm[i]] = draws[i];
        }
        b.epoch_payoff = payoffs_b;
        let out_b = revise_with_draws(&b, &params, &draws_b);
        for i in 0..n {
            prop_assert!((out_a.strategies[i] - out_b.strategies[perm[i]]).abs() < 1e-12);
        }
        prop_assert_eq!(out_a.revised, out_b.revised);
    }

    #[test]
    fn resilience_bounded_and_symmetric(a in prop::collection::vec(0.0f64..=1.0, 1..40), shift in 0.0f64..1.0) {
        let b: Vec<f64> = a.iter().map(|x| (x + shift).min(1.0)).collect();
        let sa = StateSnapshot::from_strategies(a).unwrap();
        let sb = StateSnapshot::from_strategies(b).unwrap();
        let r = resilience_score(&sa, &sb).unwrap();
        prop_assert!(r > 0.0 && r <= 1.0);
        prop_assert_eq!(r, resilience_score(&sb, &sa).unwrap());
        prop_assert_eq!(resilience_score(&sa, &sa).unwrap(), 1.0);
    }

    #[test]
    fn impact_is_permutation_invariant(a in prop::collection::vec(0.0f64..=1.0, 2..40), seed in 0u64..100) {
        let b: Vec<f64> = a.iter().map(|x| 1.0 - x).collect();
        let mut idx: Vec<usize> = (0..a.len()).collect();
        let mut rng = seeded(seed);
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        let pa: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
        let pb: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
        let plain = impact_score(&StateSnapshot::from_strategies(a).unwrap(), &StateSnapshot::from_strategies(b).unwrap());
        let shuffled = impact_score(&StateSnapshot::from_strategies(pa).unwrap(), &StateSnapshot::from_strategies(pb).unwrap());
        match (plain, shuffled) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "only one ordering was defined"),
        }
    }
}

#[test]
fn resilience_decreases_with_displacement() {
    let mut rng = seeded(11);
    for _ in 0..500 {
        let base: Vec<f64> = (0..20).map(|_| rng.random::<f64>() * 0.5).collect();
        let small: Vec<f64> = base.iter().map(|x| x + 0.1).collect();
        let large: Vec<f64> = base.iter().map(|x| x + 0.2 + rng.random::<f64>() * 0.2).collect();
        let s0 = StateSnapshot::from_strategies(base).unwrap();
        let r_small = resilience_score(&s0, &StateSnapshot::from_strategies(small).unwrap()).unwrap();
        let r_large = resilience_score(&s0, &StateSnapshot::from_strategies(large).unwrap()).unwrap();
        assert!(r_large < r_small);
    }
}

#[test]
fn conformity_only_is_non_expansive() {
    let params = ModelParams { alpha: 1.0, ..ModelParams::default() };
    for seed in 0..10 {
        let pop = random_population(60, 0.2, 40, seed);
        let mut state = SimulationState::new(pop);
        let max_dev = |st: &SimulationState<f64>| {
            let s = st.population.strategies();
            (0..s.len()).map(|i| (optimal_strategy_in(&st.population, s, i) - s[i]).abs()).fold(0.0, f64::max)
        };
        let mut prev = max_dev(&state);
        let draws = vec![0.0; 60];
        for _ in 0..200 {
            let next = revise_with_draws(&state, &params, &draws);
            state.population.replace_strategies(next.strategies).unwrap();
            let dev = max_dev(&state);
            assert!(dev <= prev + 1e-12, "seed {seed}: {dev} > {prev}");
            prev = dev;
        }
    }
}

#[test]
fn energy_drops_under_one_conformity_step() {
    let params = ModelParams { alpha: 1.0, ..ModelParams::default() };
    for seed in 0..10 {
        let pop = random_population(40, 0.25, 60, seed);
        let state = SimulationState::new(pop);
        let before = system_energy(&state.snapshot(), &state.population, DissonanceNorm::Squared);
        let next = revise_with_draws(&state, &params, &vec![0.0; 40]);
        let mut after_pop = state.population.clone();
        after_pop.replace_strategies(next.strategies).unwrap();
        let after = system_energy(&StateSnapshot::capture(&after_pop), &after_pop, DissonanceNorm::Squared);
        assert!(after < before, "seed {seed}");
    }
}

#[test]
fn energy_zero_exactly_on_componentwise_uniform_states() {
    // Two components: {0, 1, 2} socially linked, {3, 4} linked; physical layer empty.
    let positions: Vec<_> = (0..5).map(|i| Position::new(i as f64 * 10.0, 0.0)).collect();
    let social = SocialNetwork::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
    let uniform = Population::with_radius(positions.clone(), 0.1, social.clone(), vec![0.2, 0.2, 0.2, 0.9, 0.9]).unwrap();
    assert_eq!(system_energy(&StateSnapshot::capture(&uniform), &uniform, DissonanceNorm::Squared), 0.0);
    assert_eq!(stability(&StateSnapshot::capture(&uniform), &uniform, DissonanceNorm::Squared), 1.0);
    let mixed = Population::with_radius(positions, 0.1, social, vec![0.2, 0.2, 0.3, 0.9, 0.9]).unwrap();
    assert!(system_energy(&StateSnapshot::capture(&mixed), &mixed, DissonanceNorm::Squared) > 0.0);
}

#[test]
fn stability_orders_inversely_to_deviation() {
    let pop = random_population(30, 0.3, 30, 5);
    let mut states = Vec::new();
    let mut rng = seeded(8);
    for _ in 0..20 {
        let s: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
        let mut p = pop.clone();
        p.replace_strategies(s).unwrap();
        let snap = StateSnapshot::capture(&p);
        let dev: f64 = snap.optima(&p).iter().zip(snap.strategies()).map(|(o, s)| (o - s).powi(2)).sum();
        states.push((dev, stability(&snap, &p, DissonanceNorm::Squared)));
    }
    states.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert!(states.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn least_squares_matches_closed_form() {
    let mut rng = seeded(99);
    let xs: Vec<f64> = (0..25).map(|i| i as f64 / 24.0 + rng.random::<f64>() * 0.01).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x + 0.2 + (rng.random::<f64>() - 0.5) * 0.1).collect();
    let fit = fit_least_squares(&xs, &ys).unwrap();

    // Textbook raw-sum formulas, deliberately different from the library's centred sums.
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());

    assert!((fit.slope - slope).abs() < 1e-9);
    assert!((fit.intercept - intercept).abs() < 1e-9);
    assert!((fit.r_squared - r * r).abs() < 1e-9);
}

#[test]
fn two_point_fit_is_the_line_through_them() {
    let fit = fit_least_squares(&[0.9f64, 0.95], &[0.4f64, 0.5]).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-12);
    assert!((fit.intercept + 1.4).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn connection_breaks_grow_with_magnitude() {
    let params = nudge_core::population::PopulationParams::<f64>::default();
    let magnitudes = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0];
    let mut totals = vec![0usize; magnitudes.len()];
    let mut all_edges = 0;
    for seed in 0..20 {
        let base = Population::generate(&params, 0.05, seed).unwrap();
        all_edges += base.social().edge_count();
        for (k, &p) in magnitudes.iter().enumerate() {
            let mut pop = base.clone();
            let removed = break_connections(&mut pop, p, &mut seeded(seed));
            assert_eq!(pop.social().edge_count(), base.social().edge_count() - removed);
            totals[k] += removed;
        }
    }
    assert_eq!(totals[0], 0);
    assert!(totals.windows(2).all(|w| w[0] < w[1]), "{totals:?}");
    assert_eq!(totals[magnitudes.len() - 1], all_edges);
}
