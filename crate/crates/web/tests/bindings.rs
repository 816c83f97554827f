use homcomb_web::{dip_trace, singles_fringe, visibility_decay};

#[test]
fn dip_reaches_zero_at_revival() {
    let c = dip_trace(666.0, 100.0, 0, 20.0, 0.0, 401).unwrap();
    assert_eq!(c.x().len(), 401);
    let min = c.y().into_iter().fold(f64::INFINITY, f64::min);
    assert_eq!(min, 0.0);
    assert_eq!(c.y()[0], 0.5);
}

#[test]
fn fringe_detectors_are_complementary() {
    let c = singles_fringe(666.0, 100.0, 0.0, 64).unwrap();
    for (a, b) in c.y().iter().zip(c.y2()) {
        assert!((a + b - 2.0).abs() < 1e-12);
    }
    let hi = c.y().into_iter().fold(0.0, f64::max);
    assert!((hi - 1.99996).abs() < 2e-5);
}

#[test]
fn visibility_decay_matches_table() {
    let c = visibility_decay(666.0, 100.0, 42.0).unwrap();
    assert_eq!(c.x().len(), 85);
    assert!((c.y()[84] - 57.29).abs() < 0.01);
    assert!(c.y2().is_empty());
}
