use fairmatch::graph::{generate_erdos_renyi, generate_star_fixture, sample_gnp, ErdosRenyiParams};
use proptest::prelude::*;

#[test]
fn crossing_edge_count_tracks_expectation() {
    // For a fixed split the count is Binomial(|U||V|, p); the standardized
    // deviation averaged over seeds should be near zero.
    let p = 10.0 / 50.0;
    let mut z_sum = 0.0;
    let runs = 200;
    for seed in 0..runs {
        let g = generate_erdos_renyi(&ErdosRenyiParams::new(50, p, 2, seed)).unwrap();
        let pairs = (g.n_left() * g.n_right()) as f64;
        assert_eq!(g.n_left() + g.n_right(), 50);
        let mean = p * pairs;
        z_sum += (g.num_edges() as f64 - mean) / (pairs * p * (1.0 - p)).sqrt();
    }
    // the mean of 200 standard scores has standard deviation 1/sqrt(200)
    assert!((z_sum / runs as f64).abs() < 3.0 / (runs as f64).sqrt());
}

#[test]
fn colors_and_weights_cover_their_ranges() {
    let mut params = ErdosRenyiParams::new(60, 0.5, 3, 4);
    params.weight_range = (2.0, 5.0);
    let g = generate_erdos_renyi(&params).unwrap();
    assert!(g.edges().iter().all(|e| (2.0..5.0).contains(&e.weight)));
    for c in 0..3 {
        assert!(g.color_class(c).count() > 0);
    }
}

#[test]
fn general_sample_keeps_all_pairs() {
    let s = sample_gnp(&ErdosRenyiParams::new(6, 1.0, 1, 0)).unwrap();
    assert_eq!(s.edges.len(), 15);
    // K6 has triangles
    assert!(s.two_colored().is_err());
}

#[test]
fn star_fixture_examples() {
    let (g, x) = generate_star_fixture(10, 0.5).unwrap();
    assert_eq!(g.num_edges(), 11);
    assert!((x.total_mass() - 1.0).abs() < 1e-12);
    assert!((x.color_mass(&g, 1) - 0.5).abs() < 1e-15);
    assert!(x.max_vertex_load(&g) <= 1.0 + 1e-12);
    let (g1, x1) = generate_star_fixture(1, 0.5).unwrap();
    assert_eq!(g1.num_edges(), 2);
    assert_eq!(x1.x, vec![0.5, 0.5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_graphs_are_valid_and_reproducible(
        n in 2usize..40,
        p in 0.0f64..=1.0,
        ell in 1usize..5,
        seed in any::<u64>(),
    ) {
        let params = ErdosRenyiParams::new(n, p, ell, seed);
        let a = generate_erdos_renyi(&params).unwrap();
        let b = generate_erdos_renyi(&params).unwrap();
        prop_assert!(a.validate().is_empty());
        prop_assert_eq!(a.edges(), b.edges());
        prop_assert_eq!((a.n_left(), a.n_right()), (b.n_left(), b.n_right()));
    }

    #[test]
    fn star_fixture_is_feasible(n in 1usize..200, eps in 0.01f64..0.99) {
        let (g, x) = generate_star_fixture(n, eps).unwrap();
        prop_assert!(g.validate().is_empty());
        prop_assert!(x.max_vertex_load(&g) <= 1.0 + 1e-12);
        prop_assert!(x.check(&g, None).is_ok());
    }
}
