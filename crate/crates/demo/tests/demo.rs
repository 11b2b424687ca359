use mhjump_demo::{geometry, moment_errors, paths, ALPHA_STEPS, EPSILONS};

#[test]
fn paths_have_the_documented_layout() {
    let (points, n) = (50, 3);
    let out = paths("m2", "double_well", 0.01, 0.5, 1.0, points, n, 4).unwrap();
    assert_eq!(out.len(), 2 * n * (points + 1));
    for series in out.chunks(points + 1) {
        assert_eq!(series[0], 0.5);
        assert!(series.iter().all(|v| v.is_finite()));
    }
    // The jump paths move.
    assert!(out[..points + 1].iter().any(|&v| v != 0.5));
}

#[test]
fn paths_are_seeded() {
    let a = paths("mix:0.5", "quadratic", 0.05, 1.0, 0.5, 10, 2, 1).unwrap();
    let b = paths("mix:0.5", "quadratic", 0.05, 1.0, 0.5, 10, 2, 1).unwrap();
    let c = paths("mix:0.5", "quadratic", 0.05, 1.0, 0.5, 10, 2, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(paths("m4", "quadratic", 0.1, 0.0, 1.0, 10, 1, 0).is_err());
    assert!(paths("m1", "nope", 0.1, 0.0, 1.0, 10, 1, 0).is_err());
    assert!(paths("m1", "quadratic", 0.1, 0.0, 1.0, 0, 1, 0).is_err());
    assert!(moment_errors("m1", "quadratic", &[]).is_err());
    assert!(geometry(1, 10, 0).is_err());
}

#[test]
fn moment_errors_shrink_with_eps() {
    let rows = moment_errors("m1", "double_well", &[-1.0, 0.4, 1.3]).unwrap();
    assert_eq!(rows.len(), 3 * EPSILONS.len());
    let drift: Vec<f64> = rows.chunks(3).map(|r| r[1]).collect();
    assert!(drift.windows(2).all(|w| w[1] < w[0]), "{drift:?}");
}

#[test]
fn geometry_segment_is_flat_and_optimal() {
    let draws = 200;
    let out = geometry(5, draws, 3).unwrap();
    assert_eq!(out.len(), 1 + ALPHA_STEPS + draws);
    let opt = out[0];
    assert!(out[1..=ALPHA_STEPS].iter().all(|d| (d - opt).abs() < 1e-12));
    assert!(out[1 + ALPHA_STEPS..].iter().all(|&d| d >= opt - 1e-12));
}
