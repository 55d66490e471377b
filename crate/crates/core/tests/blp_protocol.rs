use anglenet::blp::{check_blp_preconditions, run_blp, simulate, BlpWorld, Mode};
use anglenet::experiment::{generate_network, NetworkKind};
use anglenet::network::{synthesize_measurements, Regime};
use proptest::prelude::*;

/// Average ranks (ties share the mean rank).
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn random_bilateration_networks_converge_exactly() {
    for seed in 0..5 {
        let net = generate_network(NetworkKind::Bilateration, 60, 3, seed).unwrap();
        assert!(check_blp_preconditions(&net).satisfied);
        let data = synthesize_measurements(&net, Regime::Exact, seed).unwrap();
        let run = simulate(&net, &data, None).unwrap().unwrap();
        assert!(run.convergence_round.unwrap() <= net.n_unknowns());
        assert!(run.error().unwrap() <= 1e-9);
    }
}

#[test]
fn more_anchors_still_converge() {
    let net = generate_network(NetworkKind::Bilateration, 40, 6, 11).unwrap();
    assert!(check_blp_preconditions(&net).satisfied);
    let data = synthesize_measurements(&net, Regime::Exact, 0).unwrap();
    let run = simulate(&net, &data, None).unwrap().unwrap();
    assert!(run.error().unwrap() <= 1e-9);
}

#[test]
fn later_sensors_accumulate_more_error() {
    let (mut rounds, mut errors) = (Vec::new(), Vec::new());
    for seed in 0..100 {
        let net = generate_network(NetworkKind::Bilateration, 30, 3, seed).unwrap();
        let data = synthesize_measurements(&net, Regime::Bounded { tau_max: 0.01 }, seed).unwrap();
        let run = match simulate(&net, &data, None).unwrap() {
            Ok(r) => r,
            Err(e) => e.partial_run().clone(),
        };
        for (r, e) in run
            .localization_rounds(net.n_anchors())
            .into_iter()
            .zip(run.unknown_errors)
        {
            if let (Some(r), Some(e)) = (r, e) {
                rounds.push(r as f64);
                errors.push(e);
            }
        }
    }
    let rho = spearman(&rounds, &errors);
    assert!(rho >= 0.0, "rank correlation {rho}");
}

#[test]
fn round_limit_is_reported() {
    let net = generate_network(NetworkKind::Bilateration, 50, 3, 2).unwrap();
    let data = synthesize_measurements(&net, Regime::Exact, 0).unwrap();
    let err = simulate(&net, &data, Some(1)).unwrap().unwrap_err();
    assert_eq!(err.partial_run().logs.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn localized_sets_only_grow(seed in 0u64..1000, n in 5usize..40) {
        let net = generate_network(NetworkKind::Bilateration, n, 3, seed).unwrap();
        let data = synthesize_measurements(&net, Regime::Exact, seed).unwrap();
        let mut w = BlpWorld::new(&net, &data).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        let mut before: Vec<Mode> = w.sensors.iter().map(|s| s.mode).collect();
        for _ in 0..net.n_unknowns() {
            let log = w.step_round();
            for v in &log.newly_localized {
                prop_assert!(seen.insert(*v));
                prop_assert!(!net.is_anchor(*v));
            }
            for (s, b) in w.sensors.iter().zip(&before) {
                prop_assert!(*b == Mode::Unlocalized || s.mode == Mode::Localized);
                prop_assert_eq!(s.mode == Mode::Localized, s.position.is_some());
            }
            before = w.sensors.iter().map(|s| s.mode).collect();
        }
        prop_assert_eq!(seen.len(), net.n_unknowns());
    }

    #[test]
    fn frames_do_not_change_the_outcome(seed in 0u64..1000) {
        let net = generate_network(NetworkKind::Bilateration, 20, 3, seed).unwrap();
        let other = net.clone().randomize_frames(seed + 1);
        let a = simulate(&net, &synthesize_measurements(&net, Regime::Exact, 0).unwrap(), None).unwrap().unwrap();
        let b = simulate(&other, &synthesize_measurements(&other, Regime::Exact, 0).unwrap(), None).unwrap().unwrap();
        prop_assert_eq!(a.convergence_round, b.convergence_round);
        for (x, y) in a.positions.iter().zip(&b.positions) {
            prop_assert!((x.unwrap() - y.unwrap()).norm() < 1e-9);
        }
    }
}

#[test]
fn run_is_deterministic() {
    let net = generate_network(NetworkKind::Bilateration, 80, 3, 5).unwrap();
    let data = synthesize_measurements(&net, Regime::Bounded { tau_max: 0.01 }, 5).unwrap();
    let mut w1 = BlpWorld::new(&net, &data).unwrap();
    let mut w2 = BlpWorld::new(&net, &data).unwrap();
    assert_eq!(run_blp(&mut w1, None), run_blp(&mut w2, None));
}
