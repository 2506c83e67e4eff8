//! The plain Rust API behind the browser bindings.

use kga_web::{steady_histogram, w1_curves, SwarmPair};

#[test]
fn sharper_selection_concentrates_the_histogram() {
    let peak = |kernel: &str, alpha: f64| {
        let d = steady_histogram(kernel, alpha, 0.1, 1.0, 2000, 60, 40, 1).unwrap();
        d.iter().copied().fold(0.0, f64::max)
    };
    assert!(peak("boltzmann", 1e4) > peak("boltzmann", 1e-3));
}

#[test]
fn larger_populations_track_the_reference_more_closely() {
    let c = w1_curves("boltzmann", 1e4, &[20, 500], 4000, 8, 20, 20, 2).unwrap();
    // Rows: N = 20 at k = 0, 20, then N = 500 at k = 0, 20.
    assert_eq!(c.len(), 4);
    assert!(c[3] < c[1], "{c:?}");
}

#[test]
fn swarms_are_reproducible() {
    let run = |seed| {
        let mut s = SwarmPair::create("rastrigin", 100, 0.3, false, seed).unwrap();
        s.advance(20).unwrap();
        (s.ga_positions(), s.cbo_positions())
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3).0, run(4).0);
}
