mod common;

use fairmatch::baseline::{peel_matching, PeelingConfig};
use fairmatch::exact::{brute_force_opt, solve_exact_beta, BruteForceOptions};
use fairmatch::fairness::{check_delta_fair, satisfies_beta};
use fairmatch::graph::Edge;
use fairmatch::lp::solve_fair;
use fairmatch::{ColoredBipartiteGraph, FairnessSpec};
use proptest::prelude::*;

use common::{all_matchings, oracle_balanced, oracle_best_balanced, random_bounds, random_small_graph, rng, weight_of};

fn path3(colors: [usize; 3]) -> ColoredBipartiteGraph {
    ColoredBipartiteGraph::new(
        2,
        2,
        2,
        vec![Edge::new(0, 0, 1.0, colors[0]), Edge::new(1, 0, 1.0, colors[1]), Edge::new(1, 1, 1.0, colors[2])],
    )
    .unwrap()
}

#[test]
fn path_example_agrees_with_enumeration() {
    for colors in [[0, 1, 0], [0, 0, 1], [1, 0, 0]] {
        let g = path3(colors);
        let spec = FairnessSpec::global(0.5, 0.5).unwrap();
        let found = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap();
        let oracle = oracle_best_balanced(&g, &[(0.5, 0.5); 2]);
        assert_eq!(found.as_ref().map(|m| m.total_weight()), oracle);
    }
}

#[test]
fn exact_mode_attempt_outcomes_on_disjoint_pair() {
    // Each edge is matched independently with probability 1/2. An attempt
    // satisfies β = 0.6 iff both or neither edge is matched, so half the
    // attempts should pass and every passing non-empty attempt has both edges.
    let g = ColoredBipartiteGraph::new(2, 2, 2, vec![Edge::new(0, 0, 1.0, 0), Edge::new(1, 1, 1.0, 1)]).unwrap();
    let spec = FairnessSpec::global(0.0, 0.6).unwrap().with_epsilon(0.1).unwrap();
    let r = solve_exact_beta(&g, &spec, 4000, 17).unwrap();
    let ok = r.attempt_log.iter().filter(|a| a.satisfied_beta).count();
    let sigma = (0.25f64 / 4000.0).sqrt();
    assert!((ok as f64 / 4000.0 - 0.5).abs() <= 3.0 * sigma);
    assert!(r.attempt_log.iter().all(|a| a.satisfied_beta == (a.size != 1)));
    assert!(r.satisfied_beta);
    assert_eq!(r.matching.len(), 2);
}

#[test]
fn peeling_on_three_edge_path_agrees_with_brute_force() {
    let spec = FairnessSpec::global(0.4, 0.6).unwrap();
    for colors in [[0, 1, 0], [0, 0, 1]] {
        let g = path3(colors);
        let peel = peel_matching(&g, &spec, &PeelingConfig::default()).unwrap();
        match brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap() {
            Some(best) if best.len() == 2 => {
                assert_eq!(peel.len(), 2);
                assert_eq!(peel.per_color(), &[1, 1]);
            }
            _ => assert!(peel.is_empty()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn brute_force_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 10, 4, 3);
        let (a, b) = random_bounds(&mut r);
        let spec = FairnessSpec::global(a, b).unwrap();
        let bounds = spec.resolve(g.num_colors()).unwrap();
        let found = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap();
        let oracle = oracle_best_balanced(&g, &bounds);
        match (&found, oracle) {
            (Some(m), Some(w)) => {
                prop_assert!((m.total_weight() - w).abs() < 1e-9);
                prop_assert!(oracle_balanced(&g, m.edges(), &bounds));
                if !m.is_empty() {
                    let report = check_delta_fair(m, &spec, 0.0).unwrap();
                    prop_assert_eq!(report.pass, Some(true));
                }
            }
            (None, None) => {}
            _ => prop_assert!(false, "brute force {:?} vs oracle {:?}", found, oracle),
        }
    }

    #[test]
    fn brute_force_never_beats_the_relaxation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 10, 4, 3);
        let (a, b) = random_bounds(&mut r);
        let spec = FairnessSpec::global(a, b).unwrap();
        let best = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap();
        match solve_fair(&g, &spec, None) {
            Ok(x) => {
                let w = best.map_or(0.0, |m| m.total_weight());
                prop_assert!(w <= x.objective + 1e-9);
            }
            Err(_) => prop_assert!(best.is_none_or(|m| m.is_empty())),
        }
    }

    #[test]
    fn peeling_is_balanced_and_dominated(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 10, 4, 3);
        let (a, b) = random_bounds(&mut r);
        let spec = FairnessSpec::global(a, b).unwrap();
        let bounds = spec.resolve(g.num_colors()).unwrap();
        let peel = peel_matching(&g, &spec, &PeelingConfig::default()).unwrap();
        prop_assert!(all_matchings(&g).iter().any(|m| m == peel.edges()));
        if !peel.is_empty() {
            prop_assert!(oracle_balanced(&g, peel.edges(), &bounds));
            let best = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap().unwrap();
            prop_assert!(peel.total_weight() <= best.total_weight() + 1e-12);
            prop_assert!((weight_of(&g, peel.edges()) - peel.total_weight()).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_mode_flag_is_recomputed(seed in any::<u64>(), beta10 in 4usize..10) {
        let mut r = rng(seed);
        let g = random_small_graph(&mut r, 12, 5, 2);
        let spec = FairnessSpec::global(0.0, beta10 as f64 / 10.0).unwrap().with_epsilon(0.1).unwrap();
        if let Ok(res) = solve_exact_beta(&g, &spec, 10, seed) {
            let bounds = spec.resolve(g.num_colors()).unwrap();
            prop_assert_eq!(res.satisfied_beta, satisfies_beta(&res.matching, &bounds));
            if res.satisfied_beta && !res.matching.is_empty() {
                let size = res.matching.len() as f64;
                for &k in res.matching.per_color() {
                    prop_assert!(k as f64 <= spec.resolve(g.num_colors()).unwrap()[0].1 * size + 1e-9);
                }
            }
        }
    }
}
