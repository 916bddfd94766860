use whitham_core::kernels::{
    check_complete_monotone, kernel_positivity_monotonicity, synthesize_custom, synthesize_kernel, weighted_kernel_sum,
    KERNEL_TAIL_WINDOW,
};
use whitham_core::quad::{cosine_transform, Tolerance};
use whitham_core::symbols::{resolvent_symbol, strip_halfwidth, whitham};
use whitham_core::{Grid, Multiplier, WaveSpeed};

fn resolvent(c: f64, grid: Grid) -> whitham_core::KernelTable {
    let c = WaveSpeed::new(c).unwrap();
    synthesize_kernel(Multiplier::Resolvent { c }, grid).unwrap()
}

#[test]
fn resolvent_kernel_is_even_on_the_grid() {
    let g = Grid::new(40.0, 1 << 13).unwrap();
    let t = resolvent(1.3, g);
    let o = g.origin_index() as i64;
    let scale = t.max_abs_off_origin();
    for j in 1..g.len() as i64 / 2 {
        let (a, b) = (t.value(g.wrap(o + j)), t.value(g.wrap(o - j)));
        assert!((a - b).abs() <= 1e-12 * scale, "x = {}: {a} vs {b}", g.x(g.wrap(o + j)));
    }
}

#[test]
fn doubling_n_leaves_values_unchanged() {
    let coarse = Grid::new(50.0, 1 << 14).unwrap();
    let fine = coarse.refined();
    for c in [1.1, 1.5, 2.0] {
        let (a, b) = (resolvent(c, coarse), resolvent(c, fine));
        for j in 0..coarse.len() {
            let x = coarse.x(j);
            if (0.1..=5.0).contains(&x) {
                let (u, v) = (a.value(j), b.value(fine.nearest_index(x)));
                assert!((u - v).abs() <= 1e-6 * v.abs(), "c = {c}, x = {x}: {u} vs {v}");
            }
        }
    }
}

#[test]
fn weighted_sums_bounded_or_growing_as_predicted() {
    // |x|^α |H|^p is integrable at 0 iff α > p/2 - 1
    let sums = |alpha: f64, p: f64| -> Vec<f64> {
        [1usize << 12, 1 << 14, 1 << 16]
            .iter()
            .map(|&n| weighted_kernel_sum(&resolvent(1.5, Grid::new(40.0, n).unwrap()), alpha, p))
            .collect()
    };
    let bounded = sums(0.3, 1.0);
    let (d1, d2) = (bounded[1] - bounded[0], bounded[2] - bounded[1]);
    assert!(d2.abs() < d1.abs(), "increments {d1:e}, {d2:e}");
    assert!(d2.abs() <= 1e-2 * bounded[2], "{bounded:?}");

    // |H|² = a²/x + (positive, integrable): each quadrupling of N adds at
    // least 2 a² ln 4, with a = 1/(c √(2π)), so the sums grow without bound
    let growing = sums(0.0, 2.0);
    let a2 = 1.0 / (1.5 * 1.5 * 2.0 * std::f64::consts::PI);
    let step = 2.0 * a2 * 4f64.ln();
    for w in growing.windows(2) {
        let d = w[1] - w[0];
        assert!(d >= 0.9 * step, "increment {d} vs {step}");
        assert!(d > 10.0 * d2.abs());
    }
}

#[test]
fn near_origin_value_matches_quadrature() {
    let c = WaveSpeed::new(1.5).unwrap();
    let t = synthesize_kernel(Multiplier::Resolvent { c }, Grid::default_line()).unwrap();
    let x = 1e-3;
    let (oracle, err) = cosine_transform(|xi| resolvent_symbol(xi, c).unwrap(), x, 60, Tolerance::default()).unwrap();
    assert!(err <= 1e-6 * oracle, "oracle error {err:e}");
    let v = t.value_at(x);
    assert!((v - oracle).abs() <= 5e-4 * oracle, "table {v} vs oracle {oracle}");
}

#[test]
fn resolvent_kernels_are_positive_and_decreasing() {
    for c in [1.2, 3.0] {
        let r = kernel_positivity_monotonicity(&resolvent(c, Grid::default_line()));
        assert!(r.pass, "c = {c}: {r:?}");
        assert!(r.checked_up_to > 10.0);
        // the next singularity (tanh's branch point at iπ/2) lies close to
        // δ_c for large c, so the pole term dominates only slowly there
        let ratio = r.pole_ratio_at_end.unwrap();
        assert!((ratio - 1.0).abs() < 5e-2, "pole ratio {ratio}");
    }
}

#[test]
fn sign_changing_kernel_is_caught() {
    let g = Grid::new(100.0, 1 << 15).unwrap();
    let t = synthesize_custom(|xi| xi.cos() * whitham(xi), &[], g, "cos m").unwrap();
    let r = kernel_positivity_monotonicity(&t);
    assert!(!r.pass);
    let x = r.first_violation.expect("violation location");
    assert!(x > 0.0 && x < 5.0, "violation at {x}");
}

#[test]
fn generator_is_completely_monotone() {
    let c = WaveSpeed::new(1.5).unwrap();
    let points: Vec<f64> = (0..50).map(|i| 1e-2 * 1e3f64.powf(i as f64 / 49.0)).collect();
    let r = check_complete_monotone(c, 4, &points).unwrap();
    assert!(r.pass, "{:?}", r.violations);
    assert!(r.min_signed_derivative.iter().all(|&d| d >= 0.0));
}

#[test]
fn tail_rate_reaches_strip_halfwidth() {
    let c = WaveSpeed::new(1.2).unwrap();
    let t = synthesize_kernel(Multiplier::Resolvent { c }, Grid::default_line()).unwrap();
    let nu = t.tail_rate(KERNEL_TAIL_WINDOW).unwrap();
    let delta = strip_halfwidth(c);
    assert!(nu >= 0.9 * delta, "rate {nu} vs {delta}");
    assert!((nu - delta).abs() <= 0.02 * delta, "rate {nu} vs {delta}");
}
