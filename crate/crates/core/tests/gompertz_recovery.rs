use equate_core::stats::gompertz::{fit_gompertz, gompertz, linearize_gompertz};
use equate_core::stats::normalize_time;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t_grid() -> Vec<f64> {
    (0..25).map(|i| -3.0 + 6.0 * i as f64 / 24.0).collect()
}

#[test]
fn zero_noise_box_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = t_grid();
    let mut failures = Vec::new();
    for case in 0..100 {
        let a = 10f64.powf(rng.random_range(0.0..9.0));
        let b = rng.random_range(0.1..10.0);
        let c = rng.random_range(0.1..5.0);
        let s: Vec<f64> = t.iter().map(|&x| gompertz(a, b, c, x)).collect();
        let fit = fit_gompertz(&t, &s).unwrap();
        let ok = [(fit.a, a), (fit.b, b), (fit.c, c)]
            .iter()
            .all(|(g, w)| ((g - w) / w).abs() < 1e-4);
        if !ok {
            failures.push((case, a, b, c, fit));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

fn sse(a: f64, b: f64, c: f64, t: &[f64], s: &[f64]) -> f64 {
    t.iter().zip(s).map(|(&x, &y)| (y - gompertz(a, b, c, x)).powi(2)).sum()
}

#[test]
fn beats_grid_search_on_noisy_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let raw: Vec<f64> = (0..30).map(|i| 2015.0 + i as f64 * 0.3).collect();
    let (t, _) = normalize_time(&raw).unwrap();
    let s: Vec<f64> = t
        .iter()
        .map(|&x| gompertz(4.0e9, 0.9, 1.3, x) * (1.0 + rng.random_range(-0.05..0.05)))
        .collect();
    let fit = fit_gompertz(&t, &s).unwrap();
    let max = s.iter().cloned().fold(0.0, f64::max);

    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / 49.0;
    let mut best = f64::INFINITY;
    for i in 0..50 {
        let a = lin(max, 3.0 * max, i);
        for j in 0..50 {
            let b = lin(0.05, 5.0, j);
            for k in 0..50 {
                best = best.min(sse(a, b, lin(0.05, 5.0, k), &t, &s));
            }
        }
    }
    assert!(fit.sse <= best, "fit {} grid {}", fit.sse, best);
    assert!(fit.a >= max);
}

#[test]
fn linearized_line_matches_independent_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = t_grid();
    let s: Vec<f64> = t
        .iter()
        .map(|&x| gompertz(100.0, 1.2, 0.8, x) * (1.0 + rng.random_range(-0.02..0.02)))
        .collect();
    let fit = fit_gompertz(&t, &s).unwrap();
    let lin = linearize_gompertz(&fit, &t, &s);
    let (slope, intercept) = lin.line().unwrap();

    // Normal equations solved by Cramer's rule.
    let n = lin.points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &lin.points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    let want_slope = (n * sxy - sx * sy) / det;
    let want_intercept = (sxx * sy - sx * sxy) / det;
    assert!((slope - want_slope).abs() < 1e-12);
    assert!((intercept - want_intercept).abs() < 1e-12);
}
