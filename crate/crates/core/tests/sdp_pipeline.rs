use anglenet::experiment::{generate_network, NetworkKind};
use anglenet::network::{synthesize_measurements, Regime, SensorNetwork};
use anglenet::sdp::{
    build_disturbed_program, build_exact_program, decompose_program, decompose_with_report,
    extract_positions, ground_truth_blocks, solve, Cone, SolveOptions, SolveStatus, Verdict,
};
use anglenet::{Error, Framework, Graph, Point2};

fn max_error(xs: &[Point2], net: &SensorNetwork) -> f64 {
    xs.iter()
        .zip(net.unknown_positions())
        .map(|(a, b)| (*a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn ground_truth_is_a_feasibility_witness() {
    for seed in 0..3 {
        let net = generate_network(NetworkKind::Bilateration, 9, 4, seed).unwrap();
        let data = synthesize_measurements(&net, Regime::Exact, seed).unwrap();
        let prog = build_exact_program(&net, &data).unwrap();
        let truth = ground_truth_blocks(&net, &prog).unwrap();
        assert!(prog.max_violation(&truth) < 1e-10);
    }
}

#[test]
fn acute_exact_solve_is_certified() {
    let net = generate_network(NetworkKind::AcuteTriangulated, 10, 3, 5).unwrap();
    let data = synthesize_measurements(&net, Regime::Exact, 5).unwrap();
    let prog = build_exact_program(&net, &data).unwrap();
    let sol = solve(&prog, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.primal_residual <= 1e-8 && sol.dual_residual <= 1e-8);
    let (xs, diag) = extract_positions(&sol, &net);
    assert_eq!(diag.verdict, Verdict::ExactRank3);
    assert!(diag.rank_z >= 3);
    assert!(max_error(&xs, &net) < 1e-5);
}

#[test]
fn decomposed_and_full_solves_agree() {
    let net = generate_network(NetworkKind::AcuteTriangulated, 12, 3, 8).unwrap();
    let data = synthesize_measurements(&net, Regime::Exact, 8).unwrap();
    let prog = build_exact_program(&net, &data).unwrap();
    let (dec, report) = decompose_with_report(&prog, &net).unwrap();
    assert!(report.gram_max_clique < prog.blocks[prog.gram_block()].dim);
    assert!(report.distance_cones.is_some());
    let full = solve(&prog, &SolveOptions::default()).unwrap();
    let part = solve(&dec, &SolveOptions::default()).unwrap();
    let (xf, df) = extract_positions(&full, &net);
    let (xd, dd) = extract_positions(&part, &net);
    assert_eq!(df.verdict, Verdict::ExactRank3);
    assert_eq!(dd.verdict, Verdict::ExactRank3);
    for (a, b) in xf.iter().zip(&xd) {
        assert!((*a - *b).norm() <= 1e-6, "{a:?} vs {b:?}");
    }
}

#[test]
fn non_triangulated_network_keeps_whole_distance_cone() {
    let net = (0..40)
        .map(|s| generate_network(NetworkKind::Bilateration, 9, 3, s).unwrap())
        .find(|n| !anglenet::graphkit::is_acute_triangulated(&n.grounded_framework()))
        .expect("some bilateration network is not acute-triangulated");
    let data = synthesize_measurements(&net, Regime::Exact, 0).unwrap();
    let prog = build_exact_program(&net, &data).unwrap();
    let dec = decompose_program(&prog, &net).unwrap();
    let d = prog.distance_block().unwrap();
    assert_eq!(dec.cones[d], Some(Cone::Full));
    assert!(dec.rank_targets.iter().any(|t| t.block == d));
    assert!(matches!(
        dec.cones[prog.gram_block()],
        Some(Cone::Cliques(_))
    ));
}

#[test]
fn grounded_graph_without_ordering_is_not_decomposable() {
    let g = Graph::from_edges(5, &[(1, 2), (1, 3), (2, 3), (1, 4), (2, 5), (4, 5)]).unwrap();
    let pts = [(0.0, 0.0), (1.0, 0.0), (0.3, 0.9), (0.2, -0.6), (0.9, -0.7)];
    let fw = Framework::new(g, pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap();
    let net = SensorNetwork::new(fw, 3).unwrap();
    let data = synthesize_measurements(&net, Regime::Exact, 0).unwrap();
    let prog = build_exact_program(&net, &data).unwrap();
    assert!(matches!(
        decompose_program(&prog, &net),
        Err(Error::NotDecomposable(_))
    ));
}

#[test]
fn disturbed_program_contains_the_truth_and_solves() {
    let net = generate_network(NetworkKind::AcuteTriangulated, 8, 3, 4).unwrap();
    let data = synthesize_measurements(&net, Regime::Bounded { tau_max: 0.01 }, 4).unwrap();
    let prog = build_disturbed_program(&net, &data).unwrap();
    assert!(prog.max_violation(&ground_truth_blocks(&net, &prog).unwrap()) < 1e-10);
    let sol = match solve(&prog, &SolveOptions::default()) {
        Ok(s) => s,
        Err(e) => e.best_iterate().cloned().expect("iterate"),
    };
    let (xs, diag) = extract_positions(&sol, &net);
    assert!(diag.rank_z >= 3);
    assert!(max_error(&xs, &net) < 0.2);
}
