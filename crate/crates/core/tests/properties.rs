//! Property tests for the solver invariants that should survive any
//! input in their stated domain.

use proptest::prelude::*;
use std::sync::Arc;

use persuade_core::{
    build_primal, compute_q_interval, pairwise_split, receiver_best_response,
    remove_single_peaked_triples, solve_lp, solve_lp_with, theta_star, DiscreteProblem, Outcome,
    Posterior, PreferenceModel, Prior, SolveOptions,
};

fn posterior_strategy(k: usize) -> impl Strategy<Value = Posterior> {
    (
        proptest::collection::vec(0.01f64..0.99, k),
        proptest::collection::vec(0.05f64..1.0, k),
    )
        .prop_filter_map("states must be separated", |(mut states, weights)| {
            states.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in states.windows(2) {
                if w[1] - w[0] < 1e-3 {
                    return None;
                }
            }
            let total: f64 = weights.iter().sum();
            let pts: Vec<(f64, f64)> = states
                .into_iter()
                .zip(weights.into_iter().map(|w| w / total))
                .collect();
            Posterior::new(pts).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Splitting a posterior into pairwise pieces reproduces the mixture
    /// exactly and keeps the induced action fixed.
    #[test]
    fn pairwise_split_reconstructs(mu in posterior_strategy(5)) {
        let model = PreferenceModel::simple_receiver(
            |a, th| a * (0.5 + th * th),
            |_, th| 0.5 + th * th,
        );
        let a_star = receiver_best_response(&model, &mu).unwrap();
        let pieces = pairwise_split(&model, &mu).unwrap();
        let mut mix = std::collections::BTreeMap::new();
        for (w, eta) in &pieces {
            prop_assert!(eta.support_size() <= 2);
            let br = receiver_best_response(&model, eta).unwrap();
            prop_assert!((br - a_star).abs() <= 1e-9);
            for &(th, p) in eta.points() {
                *mix.entry((th * 1e12).round() as i64).or_insert(0.0) += w * p;
            }
        }
        for &(th, w) in mu.points() {
            let got = mix.get(&((th * 1e12).round() as i64)).copied().unwrap_or(0.0);
            prop_assert!((got - w).abs() <= 1e-12);
        }
    }

    /// θ* is nondecreasing in the action and leaves a vanishing residual.
    #[test]
    fn theta_star_monotone(lo in 0.1f64..0.4, span in 0.2f64..0.5) {
        let hi = (lo + span).min(0.95);
        let model = PreferenceModel::contest(lo, hi).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..32 {
            let a = model.a_range.0
                + (model.a_range.1 - model.a_range.0) * k as f64 / 31.0;
            let ts = theta_star(&model, a).unwrap();
            prop_assert!(model.u(a, ts).abs() <= 1e-10);
            prop_assert!(ts >= prev - 1e-12);
            prev = ts;
        }
    }

    /// The multiplier interval built from an upper-envelope price is
    /// never empty and contains the generating multiplier.
    #[test]
    fn q_interval_contains_generator(
        c in 0.2f64..2.0,
        shift in 0.0f64..0.5,
    ) {
        let model = PreferenceModel::simple_receiver(
            move |a, th| a * (c + th * th),
            move |_, th| c + th * th,
        );
        let theta_grid: Vec<f64> = (0..21).map(|k| k as f64 / 20.0).collect();
        let a_sub: Vec<f64> = (0..41).map(|k| k as f64 / 40.0).collect();
        let q0 = move |a: f64| c + shift * a;
        let p: Vec<f64> = theta_grid
            .iter()
            .map(|&th| {
                a_sub
                    .iter()
                    .map(|&a| model.big_v(a, th) + q0(a) * model.u(a, th))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        for &a in &a_sub {
            let (lo, hi) = compute_q_interval(&p, &theta_grid, &model, a).unwrap();
            prop_assert!(lo <= q0(a) + 1e-9 && q0(a) <= hi + 1e-9);
        }
    }

    /// LP optimal value is invariant to column permutations.
    #[test]
    fn lp_value_permutation_invariant(
        seed in 0u64..1000,
        m in 5usize..16,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b0 = rng.gen_range(-1.0..1.0);
        let b1 = rng.gen_range(-1.0..1.0);
        let b2 = rng.gen_range(-1.0..1.0);
        let model = Arc::new(PreferenceModel::simple_receiver(
            move |a, th| a * (b0 + b1 * th) + b2 * a * a,
            move |a, th| b0 + b1 * th + 2.0 * b2 * a,
        ));
        let atoms = vec![(0.1, 0.4), (0.55, 0.35), (0.9, 0.25)];
        let prior = Prior::atoms(atoms).unwrap();
        let problem = DiscreteProblem::from_prior(model, &prior, m, 0).unwrap();
        let built = build_primal(&problem).unwrap();
        let base = solve_lp(&problem, &built).unwrap();
        let mut order: Vec<usize> = (0..built.lp.ncols).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let permuted = solve_lp_with(&problem, &built, &SolveOptions {
            column_order: Some(order),
            ..Default::default()
        }).unwrap();
        prop_assert!((base.value - permuted.value).abs() <= 1e-10);
    }

    /// Removing single-peaked triples preserves the state marginal and
    /// the value exactly when the sender's utility is action-flat, and
    /// leaves no strictly single-peaked triple behind.
    #[test]
    fn triple_removal_invariants(
        seed in 0u64..500,
        n_pairs in 2usize..5,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g0 = rng.gen_range(-1.0..1.0);
        let g1 = rng.gen_range(-1.0..1.0);
        let model = PreferenceModel::simple_receiver(
            move |_, th| g0 + g1 * th,
            |_, _| 0.0,
        );
        // Random obedient pairs: each action holds a mean-balanced pair.
        let theta_values: Vec<f64> = (0..8).map(|k| k as f64 / 7.0).collect();
        let mut a_values = Vec::new();
        let mut entries = Vec::new();
        for _ in 0..n_pairs {
            let lo = rng.gen_range(0..4usize);
            let hi = rng.gen_range(4..8usize);
            let (tl, th_) = (theta_values[lo], theta_values[hi]);
            let w = rng.gen_range(0.1..1.0);
            let rho = rng.gen_range(0.2..0.8);
            let a = rho * tl + (1.0 - rho) * th_;
            a_values.push(a);
            entries.push((a_values.len() - 1, lo, w * rho));
            entries.push((a_values.len() - 1, hi, w * (1.0 - rho)));
        }
        let total: f64 = entries.iter().map(|e| e.2).sum();
        let mut outcome = Outcome::new(a_values, theta_values);
        for (ai, ti, mass) in entries {
            outcome.push(ai, ti, mass / total);
        }
        let before_value = persuade_core::value_under(&outcome, &model);
        let before_marginal = outcome.theta_marginal();
        let fixed = remove_single_peaked_triples(&outcome, &model, true).unwrap();
        let after_value = persuade_core::value_under(&fixed, &model);
        prop_assert!(after_value >= before_value - 1e-12);
        prop_assert!((after_value - before_value).abs() <= 1e-12);
        for (got, want) in fixed.theta_marginal().iter().zip(&before_marginal) {
            prop_assert!((got - want).abs() <= 1e-12);
        }
        let verdict = persuade_core::classify_dippedness(&fixed.support_points()).unwrap();
        prop_assert!(verdict.peaked_witness.is_none());
        prop_assert!(fixed.max_obedience_residual(&model) <= 1e-9);
    }
}
