//! The three reliability routes checked against each other.

use moonrel::analysis::{enumerate_architectures, uniform_grid};
use moonrel::analytic::{analytic_reliability, layer_mttf, mttf};
use moonrel::ctmc::{self, build_generator, enumerate_states, reliability_at, solve_transient};
use moonrel::montecarlo::{estimate_curve, run_stream, simulate_failure_time};
use moonrel::{ArchitectureSpec, Layer, McConfig, DEFAULT_EPS};
use proptest::prelude::*;

const LS: f64 = 1e-5;
const LM: f64 = 1e-4;

fn spec(label: &str) -> ArchitectureSpec {
    ArchitectureSpec::parse(label, LS, LM).unwrap()
}

#[test]
fn ctmc_matches_closed_form_on_all_sixty() {
    let grid = uniform_grid(30_000.0, 50).unwrap();
    let mut worst: f64 = 0.0;
    for s in enumerate_architectures(3, 4, LS, LM).unwrap() {
        let curve = ctmc::sample_curve(&s, &grid, DEFAULT_EPS).unwrap();
        for (&t, &r) in grid.iter().zip(curve.values()) {
            worst = worst.max((r - analytic_reliability(&s, t)).abs());
        }
    }
    assert!(worst <= 1e-9, "worst deviation {worst:e}");
}

#[test]
fn survival_equals_one_minus_down_set_mass() {
    for label in ["2oo3/2oo3", "1oo2/3oo4", "3oo3/1oo4"] {
        let s = spec(label);
        let states = enumerate_states(&s);
        let q = build_generator(&s, &states);
        let p = solve_transient(&q, &states.initial_distribution(), 12_345.0, DEFAULT_EPS).unwrap();
        let down: f64 = states
            .iter()
            .filter(|(_, st)| !ctmc::is_operational(&s, *st))
            .map(|(i, _)| p.values()[i])
            .sum();
        assert!((reliability_at(&s, &states, &p) - (1.0 - down)).abs() < 1e-14);
    }
}

#[test]
fn state_probabilities_are_products_of_binomials() {
    // With independent layers, P(m, s) = Bin(m; N_M, p_M) · Bin(s; N_S, p_S).
    let s = spec("2oo3/2oo4");
    let t = 8_000.0;
    let states = enumerate_states(&s);
    let q = build_generator(&s, &states);
    let p = solve_transient(&q, &states.initial_distribution(), t, DEFAULT_EPS).unwrap();
    let pm = (-LM * t).exp();
    let ps = (-LS * t).exp();
    let bin = |n: u32, k: u32, p: f64| {
        moonrel::analytic::binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    };
    for (i, st) in states.iter() {
        let want = bin(4, st.m, pm) * bin(3, st.s, ps);
        assert!((p.values()[i] - want).abs() < 1e-12, "{st:?}");
    }
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn quadrature_mttf(s: &ArchitectureSpec) -> f64 {
    let r = |t: f64| ctmc::reliability(s, t, DEFAULT_EPS).unwrap();
    let mut end = 1_000.0;
    while r(end) >= 1e-9 {
        end *= 2.0;
    }
    // Split the range so each piece is resolved on its own time scale.
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b: f64 = 1_000.0;
    while a < end {
        total += simpson(&r, a, b.min(end), 1e-7);
        a = b;
        b *= 2.0;
    }
    total
}

#[test]
fn mttf_matches_quadrature_of_ctmc_curve() {
    for label in ["1oo1/1oo1", "2oo3/2oo3", "2oo3/2oo4", "1oo3/1oo4", "3oo3/3oo3"] {
        let s = spec(label);
        let exact = mttf(&s);
        let numeric = quadrature_mttf(&s);
        assert!((exact - numeric).abs() / exact <= 1e-6, "{label}: {exact} vs {numeric}");
    }
}

#[test]
fn single_layer_mttf_matches_quadrature() {
    let f = |t: f64| moonrel::analytic::layer_reliability(Layer::new(1, 2), LS, t);
    let numeric: f64 = (0..40)
        .map(|i| {
            let a = if i == 0 { 0.0 } else { 1e3 * 2f64.powi(i - 1) };
            simpson(&f, a, 1e3 * 2f64.powi(i), 1e-6)
        })
        .sum();
    let exact = layer_mttf(Layer::new(1, 2), LS);
    assert!((exact - 1.5e5).abs() < 1e-6);
    assert!((exact - numeric).abs() / exact <= 1e-6, "{exact} vs {numeric}");
}

#[test]
fn simulated_mean_failure_time_of_reference() {
    let s = spec("1oo1/1oo1");
    let n = 1_000_000u64;
    let mut rng = run_stream(2024, 0, &s);
    let mean = (0..n).map(|_| simulate_failure_time(&s, &mut rng)).sum::<f64>() / n as f64;
    let want = 1.0 / (LS + LM);
    assert!((mean - want).abs() / want < 0.01, "{mean}");
}

#[test]
fn monte_carlo_two_of_three_matches_closed_form() {
    let s = spec("2oo3/2oo3");
    let runs = 1_000_000;
    let est = estimate_curve(&s, &McConfig::new(runs, 17, vec![10_000.0]).unwrap());
    let r = analytic_reliability(&s, 10_000.0);
    assert!((r - 0.298_634_808_658_945_3).abs() < 1e-14);
    let bound = 4.0 * (r * (1.0 - r) / runs as f64).sqrt();
    assert!((est.estimate(0) - r).abs() <= bound, "{} vs {r}", est.estimate(0));
    let (lo, hi) = est.interval(0);
    assert!(lo <= r && r <= hi);
}

fn arb_spec() -> impl Strategy<Value = ArchitectureSpec> {
    (1u32..=4, 1u32..=5, 0u32..16, 0u32..16, -6.0f64..-3.0, -6.0f64..-3.0).prop_map(
        |(n_s, n_m, s, m, ls, lm)| {
            ArchitectureSpec::new(
                Layer::new(s % n_s + 1, n_s),
                Layer::new(m % n_m + 1, n_m),
                10f64.powf(ls),
                10f64.powf(lm),
            )
            .unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transient_solution_stays_stochastic(s in arb_spec(), t in 0.0f64..2e5) {
        let states = enumerate_states(&s);
        let q = build_generator(&s, &states);
        let p = solve_transient(&q, &states.initial_distribution(), t, DEFAULT_EPS).unwrap();
        prop_assert!((p.sum() - 1.0).abs() <= 1e-12);
        prop_assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((reliability_at(&s, &states, &p) - analytic_reliability(&s, t)).abs() <= 1e-9);
    }

    #[test]
    fn curves_are_nonincreasing(s in arb_spec(), t_max in 1e3f64..1e5) {
        let grid = uniform_grid(t_max, 40).unwrap();
        let c = ctmc::sample_curve(&s, &grid, DEFAULT_EPS).unwrap();
        prop_assert!(c.is_nonincreasing(1e-10));
    }

    #[test]
    fn point_values_do_not_depend_on_the_grid(s in arb_spec(), t in 1.0f64..5e4) {
        let alone = ctmc::sample_curve(&s, &[t], DEFAULT_EPS).unwrap();
        let in_grid = ctmc::sample_curve(&s, &[0.0, t * 0.3, t, t * 2.0], DEFAULT_EPS).unwrap();
        prop_assert_eq!(alone.values()[0].to_bits(), in_grid.values()[2].to_bits());
    }

    #[test]
    fn lower_thresholds_never_hurt(s in arb_spec(), t in 0.0f64..1e5) {
        let base = analytic_reliability(&s, t);
        for (ds, dm) in [(1, 0), (0, 1), (1, 1)] {
            let relaxed = ArchitectureSpec::new(
                Layer::new(s.s_required().saturating_sub(ds).max(1), s.n_sensors()),
                Layer::new(s.m_required().saturating_sub(dm).max(1), s.n_mcus()),
                s.lambda_sensor(),
                s.lambda_mcu(),
            ).unwrap();
            prop_assert!(analytic_reliability(&relaxed, t) >= base - 1e-15);
        }
    }
}
