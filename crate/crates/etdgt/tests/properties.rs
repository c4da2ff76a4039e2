//! Property checks: seeded sweeps over random networks and cost models,
//! plus proptest invariants for the pure data types.

use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use etdgt::engine::{self, Algorithm, TriggerPolicy};
use etdgt::network::{
    build_col_stochastic, build_row_stochastic, check_spanning_trees, contraction_factor,
    perron_vector, DiGraph, NetworkModel, Side,
};
use etdgt::objective::{self, CostModel};
use etdgt::oracle;
use etdgt::scenario::{gen_large_scenario, Scenario};
use etdgt::trigger::TriggerSchedule;

/// Strongly connected random digraph: directed cycle plus chords.
fn random_connected_graph(n: usize, rng: &mut ChaCha8Rng) -> DiGraph {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut seen: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for _ in 0..2 * n {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    DiGraph::new(n, edges).unwrap()
}

#[test]
fn random_networks_are_contractive() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let n = 3 + (trial % 18);
        let graph = random_connected_graph(n, &mut rng);
        let (ok, _) = check_spanning_trees(&graph, &graph);
        assert!(ok, "cycle backbone must be strongly connected");

        let r = build_row_stochastic(&graph);
        let c = build_col_stochastic(&graph);
        for i in 0..n {
            assert!((r.row(i).sum() - 1.0).abs() < 1e-12);
            assert!((c.column(i).sum() - 1.0).abs() < 1e-12);
        }

        let pi_r = perron_vector(&r, Side::Left).unwrap();
        let pi_c = perron_vector(&c, Side::Right).unwrap();
        assert!((pi_r.sum() - 1.0).abs() < 1e-12);
        assert!((pi_c.sum() - 1.0).abs() < 1e-12);
        let res_r = r.t().dot(&pi_r) - &pi_r;
        let res_c = c.dot(&pi_c) - &pi_c;
        assert!(res_r.iter().all(|x| x.abs() < 1e-10));
        assert!(res_c.iter().all(|x| x.abs() < 1e-10));

        let sigma_r = contraction_factor(&r, &pi_r, Side::Left).unwrap();
        let sigma_c = contraction_factor(&c, &pi_c, Side::Right).unwrap();
        assert!(sigma_r < 1.0 && sigma_c < 1.0);

        // Deflation annihilates the ones vector.
        let deflated = etdgt::network::deflate(&r, &pi_r, Side::Left);
        let out = deflated.dot(&Array1::from_elem(n, 1.0));
        assert!(out.iter().all(|x| x.abs() < 1e-12));
    }
}

fn random_cost_model(rng: &mut ChaCha8Rng) -> CostModel {
    let a = rng.random_range(0.01..0.1);
    let b = rng.random_range(0.0..5.0);
    let hi = rng.random_range(10.0..100.0);
    if rng.random_bool(0.5) {
        CostModel::quadratic(a, b, 0.0, hi, rng.random_range(0.0..30.0)).unwrap()
    } else {
        CostModel::quadratic_exp(
            a,
            b,
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..10.0),
            rng.random_range(10.0..40.0),
            0.0,
            hi,
            rng.random_range(0.0..30.0),
        )
        .unwrap()
    }
}

#[test]
fn dual_gradient_monotone_in_price() {
    // The reformulated dual objective is convex, so its gradient
    // d_i - argmin{x w + F_i(w)} is non-decreasing in x; equivalently the
    // agent's best response is non-increasing in the multiplier.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let model = random_cost_model(&mut rng);
        let x1 = rng.random_range(-20.0..20.0);
        let x2 = x1 + rng.random_range(0.0..10.0);
        let g1 = objective::dual_gradient(&model, Array1::from_elem(1, x1).view()).unwrap();
        let g2 = objective::dual_gradient(&model, Array1::from_elem(1, x2).view()).unwrap();
        assert!(
            g2[0] >= g1[0] - 1e-12,
            "dual gradient must be non-decreasing: g({x1}) = {}, g({x2}) = {}",
            g1[0],
            g2[0]
        );
        let w1 = &model.demand - &g1;
        let w2 = &model.demand - &g2;
        assert!(w2[0] <= w1[0] + 1e-12, "best response must be non-increasing");
    }
}

#[test]
fn dual_gradient_is_lipschitz_for_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let a = rng.random_range(0.01..0.1);
        let model =
            CostModel::quadratic(a, rng.random_range(0.0..5.0), 0.0, 80.0, 10.0).unwrap();
        let x1 = rng.random_range(-20.0..20.0);
        let x2 = rng.random_range(-20.0..20.0);
        let g1 = objective::dual_gradient(&model, Array1::from_elem(1, x1).view()).unwrap();
        let g2 = objective::dual_gradient(&model, Array1::from_elem(1, x2).view()).unwrap();
        assert!((g1[0] - g2[0]).abs() <= (x1 - x2).abs() / (2.0 * a) + 1e-9);
    }
}

#[test]
fn interior_minimizers_satisfy_stationarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut interior = 0;
    for _ in 0..1000 {
        let model = random_cost_model(&mut rng);
        let price = rng.random_range(-5.0..25.0);
        let w = objective::local_argmin(&model, Array1::from_elem(1, price).view()).unwrap()[0];
        assert!(w >= model.box_lo && w <= model.box_hi);
        if w > model.box_lo + 1e-6 && w < model.box_hi - 1e-6 {
            interior += 1;
            assert!(
                (model.gradient_scalar(w) - price).abs() < 1e-9,
                "interior stationarity violated"
            );
        }
    }
    assert!(interior > 100, "sweep should hit interior minimizers");
}

#[test]
fn mass_conservation_under_arbitrary_trigger_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..20 {
        let sc = gen_large_scenario(4 + trial % 10, 0.5, 1000 + trial as u64).unwrap();
        let (net, costs, _) = sc.build().unwrap();
        let demands = engine::demand_matrix(&costs);
        let d_norm = demands.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut state = engine::init_state(&net, &costs).unwrap();
        for _ in 0..120 {
            // Broadcast a random subset of agents, ignoring the law
            // entirely; the conservation identity must survive any
            // pattern.
            let k = state.k;
            if k > 0 {
                for i in 0..net.n() {
                    if rng.random_bool(0.4) {
                        let value = state.w_tilde.row(i).to_owned();
                        state
                            .trigger_w
                            .record_broadcast(i, value.view(), k, 0)
                            .unwrap();
                    }
                    if rng.random_bool(0.4) {
                        let value = state.s.row(i).to_owned();
                        state
                            .trigger_s
                            .record_broadcast(i, value.view(), k, 0)
                            .unwrap();
                    }
                }
            }
            engine::apply_updates(&mut state, &net, &costs, sc.alpha).unwrap();
            assert!(
                engine::mass_residual(&state, &demands) <= 1e-9 * (1.0 + d_norm),
                "tracker mass identity violated under a random trigger pattern"
            );
            for (i, cost) in costs.iter().enumerate() {
                let w = state.w[[i, 0]];
                assert!(w >= cost.box_lo && w <= cost.box_hi, "allocation left its box");
            }
        }
    }
}

#[test]
fn degenerate_schedule_matches_periodic_on_random_scenario() {
    let mut sc = gen_large_scenario(9, 0.4, 99).unwrap();
    sc.trigger.initial = 0.0;
    let (net, costs, _) = sc.build().unwrap();
    let et = engine::run_with(&sc, &net, &costs, Algorithm::EtDgt, 100, None).unwrap();
    let pd = engine::run_with(&sc, &net, &costs, Algorithm::Ddgt, 100, None).unwrap();
    assert_eq!(et.to_csv_string(), pd.to_csv_string());
}

#[test]
fn case1_errors_shrink_hundredfold() {
    let sc = Scenario::builtin("case1").unwrap();
    let (net, costs, _) = sc.build().unwrap();
    let trace = engine::run_with(&sc, &net, &costs, Algorithm::EtDgt, 2000, None).unwrap();
    let early = &trace.rows[10];
    let late = &trace.rows[2000];
    assert!(late.consensus_error < 0.01 * early.consensus_error);
    assert!(late.grad_norm < 0.01 * early.grad_norm);
}

#[test]
fn dual_gap_stays_nonnegative() {
    // f is convex with minimum f*, so the gap at the averaged price can
    // only be non-negative (up to solver tolerance).
    let sc = Scenario::builtin("case1").unwrap();
    let (net, costs, _) = sc.build().unwrap();
    let sol = oracle::solve_centralized(&costs).unwrap();
    let trace = engine::run_with(&sc, &net, &costs, Algorithm::EtDgt, 300, Some(&sol)).unwrap();
    for row in &trace.rows {
        assert!(row.dual_gap >= -1e-8, "dual gap {} at k = {}", row.dual_gap, row.k);
    }
}

#[test]
fn trigger_counts_monotone_and_bounded_by_periodic() {
    let sc = Scenario::builtin("case1").unwrap();
    let (net, costs, schedule) = sc.build().unwrap();
    let mut state = engine::init_state(&net, &costs).unwrap();
    let mut previous = (state.trigger_w.events, state.trigger_s.events);
    for k in 1..=400usize {
        engine::evaluate_triggers(&mut state, &net, TriggerPolicy::Schedule(schedule)).unwrap();
        let now = (state.trigger_w.events, state.trigger_s.events);
        assert!(now.0 >= previous.0 && now.1 >= previous.1);
        assert!(now.0 <= (k as u64 + 1) * net.n() as u64);
        previous = now;
        engine::apply_updates(&mut state, &net, &costs, sc.alpha).unwrap();
    }
}

proptest! {
    #[test]
    fn thresholds_are_non_increasing(initial in 0.0..10.0f64, decay in 0.0..0.999f64, k in 0usize..400) {
        let sch = TriggerSchedule::new(initial, decay).unwrap();
        prop_assert!(sch.threshold_at(k + 1) <= sch.threshold_at(k));
        prop_assert!(sch.threshold_at(k) <= initial);
    }

    #[test]
    fn local_argmin_respects_the_box(
        a in 0.005..0.5f64,
        b in -5.0..5.0f64,
        lo in -50.0..0.0f64,
        span in 0.0..100.0f64,
        price in -50.0..50.0f64,
        exponential in proptest::bool::ANY,
    ) {
        let model = if exponential {
            CostModel::quadratic_exp(a, b, 1.0, 2.0, 15.0, lo, lo + span, 0.0).unwrap()
        } else {
            CostModel::quadratic(a, b, lo, lo + span, 0.0).unwrap()
        };
        let w = objective::local_argmin(&model, Array1::from_elem(1, price).view()).unwrap()[0];
        prop_assert!(w >= lo && w <= lo + span);
    }

    #[test]
    fn generated_scenarios_round_trip(n in 2usize..12, seed in 0u64..500, frac in 0.2..0.9f64) {
        let sc = gen_large_scenario(n, frac, seed).unwrap();
        let back = Scenario::from_json(&sc.to_json_string()).unwrap();
        prop_assert_eq!(sc, back);
    }

    #[test]
    fn identical_agents_share_demand_evenly(n in 2usize..8, demand in 1.0..50.0f64) {
        let costs: Vec<CostModel> = (0..n)
            .map(|_| CostModel::quadratic(0.1, 1.0, -1e6, 1e6, demand).unwrap())
            .collect();
        let sol = oracle::solve_centralized(&costs).unwrap();
        for i in 0..n {
            prop_assert!((sol.w_star[[i, 0]] - demand).abs() < 1e-7);
        }
    }
}

#[test]
fn network_builds_deterministically() {
    let sc = Scenario::builtin("case1").unwrap();
    let a = NetworkModel::build(sc.graph_r().unwrap(), sc.graph_c().unwrap()).unwrap();
    let b = NetworkModel::build(sc.graph_r().unwrap(), sc.graph_c().unwrap()).unwrap();
    assert_eq!(a.pi_r, b.pi_r);
    assert_eq!(a.sigma_r.to_bits(), b.sigma_r.to_bits());
    assert_eq!(a.delta_cr.to_bits(), b.delta_cr.to_bits());
}
