use proptest::prelude::*;
use synlab::waveform::{net_peaks, net_potential, SpikeWaveform, WaveformParams};

const A_PLUS: f64 = 0.9;
const A_MINUS: f64 = 0.4;
const T_PLUS: f64 = 1.0;
const T_MINUS: f64 = 5.0;

fn default_spike() -> SpikeWaveform {
    SpikeWaveform::from_params(&WaveformParams::default()).unwrap()
}

/// Default spike written out by hand. `left` selects the left-continuous
/// version, so edges can be probed from both sides.
fn spike(t: f64, left: bool) -> f64 {
    let inside = |a: f64, b: f64| {
        if left {
            t > a && t <= b
        } else {
            t >= a && t < b
        }
    };
    if inside(-T_MINUS, 0.0) {
        -A_MINUS * (t + T_MINUS) / T_MINUS
    } else if inside(0.0, T_PLUS) {
        A_PLUS
    } else {
        0.0
    }
}

fn net(alpha: f64, dt: f64, t: f64, left: bool) -> f64 {
    alpha * spike(t, left) - spike(t - dt, left)
}

/// Brute-force extrema: a 1e-4 grid over both supports plus both one-sided
/// limits at every segment edge.
fn sampled_peaks(alpha: f64, dt: f64) -> (f64, f64) {
    let lo = (-T_MINUS).min(dt - T_MINUS) - 0.5;
    let hi = T_PLUS.max(dt + T_PLUS) + 0.5;
    let steps = ((hi - lo) / 1e-4).ceil() as usize;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut visit = |v: f64| {
        max = max.max(v);
        min = min.min(v);
    };
    for k in 0..=steps {
        visit(net(alpha, dt, lo + k as f64 * 1e-4, false));
    }
    for edge in [-T_MINUS, 0.0, T_PLUS] {
        for t in [edge, edge + dt] {
            visit(net(alpha, dt, t, false));
            visit(net(alpha, dt, t, true));
        }
    }
    (max, min)
}

#[test]
fn peaks_match_dense_sampling() {
    let w = default_spike();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(1000));
    runner
        .run(&(0.01f64..=1.0, -8.0f64..8.0), |(alpha, dt)| {
            let peaks = net_peaks(&w, &w, alpha, 0.0, dt);
            let (max, min) = sampled_peaks(alpha, dt);
            prop_assert!(
                (peaks.v_set_peak - max).abs() <= 1e-9,
                "set {} vs {}",
                peaks.v_set_peak,
                max
            );
            prop_assert!(
                (peaks.v_reset_peak - min).abs() <= 1e-9,
                "reset {} vs {}",
                peaks.v_reset_peak,
                min
            );
            Ok(())
        })
        .unwrap();
}

#[test]
fn sampled_oracle_agrees_with_the_library_potential() {
    let w = default_spike();
    for &(alpha, dt) in &[(1.0, 2.0), (0.6, 0.5), (0.73, -3.1)] {
        for k in -700..700 {
            let t = k as f64 * 0.01 + 0.003;
            let lib = net_potential(&w, &w, alpha, 0.0, dt, t);
            assert!(
                (lib - net(alpha, dt, t, false)).abs() < 1e-12,
                "alpha {alpha} dt {dt} t {t}"
            );
        }
    }
}

#[test]
fn dense_oracle_confirms_examples() {
    let (max, _) = sampled_peaks(1.0, 2.0);
    assert!((max - 1.22).abs() < 1e-9);
    let (max, _) = sampled_peaks(0.6, 0.5);
    assert!((max - 0.94).abs() < 1e-9);
    let (_, min) = sampled_peaks(1.0, -2.0);
    assert!((min + 1.22).abs() < 1e-9);
    let (max, _) = sampled_peaks(1.0, 20.0);
    assert!((max - 0.9).abs() < 1e-9);

    let set: Vec<f64> = (0..16)
        .map(|i| sampled_peaks(0.6 + 0.4 * i as f64 / 15.0, 2.0).0)
        .collect();
    let reset: Vec<f64> = (0..16)
        .map(|i| sampled_peaks(0.6 + 0.4 * i as f64 / 15.0, -2.0).1)
        .collect();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    assert!((spread(&set) - 0.36).abs() < 1e-9);
    assert!((spread(&reset) - 0.128).abs() < 1e-9);
}

proptest! {
    #[test]
    fn closed_form_peaks(alpha in 0.01f64..=1.0, dt in -6.0f64..6.0) {
        prop_assume!(dt.abs() > 1e-9 && dt.abs() < T_MINUS + T_PLUS);
        let w = default_spike();
        let peaks = net_peaks(&w, &w, alpha, 0.0, dt);
        // a lone spike still reaches its own levels when the overlap is weak
        if dt > 0.0 {
            let overlap = A_PLUS * alpha + A_MINUS * (1.0 - (dt - T_PLUS).max(0.0) / T_MINUS);
            let expected = overlap.max(A_MINUS).max(A_PLUS * alpha);
            prop_assert!((peaks.v_set_peak - expected).abs() <= 1e-12);
            if alpha >= 0.6 {
                prop_assert!((peaks.v_set_peak - overlap).abs() <= 1e-12);
            }
        } else {
            let expected = -(A_PLUS + A_MINUS * alpha * (1.0 - (-dt - T_PLUS).max(0.0) / T_MINUS));
            prop_assert!((peaks.v_reset_peak - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_spike_levels_outside_overlap(alpha in 0.01f64..=1.0, dt in 6.0f64..50.0, sign in prop::bool::ANY) {
        let dt = if sign { dt } else { -dt };
        let w = default_spike();
        let peaks = net_peaks(&w, &w, alpha, 0.0, dt);
        prop_assert!((peaks.v_set_peak - (A_PLUS * alpha).max(A_MINUS)).abs() <= 1e-12);
        prop_assert!((peaks.v_reset_peak + A_PLUS.max(A_MINUS * alpha)).abs() <= 1e-12);
    }

    #[test]
    fn peaks_monotone_in_alpha(a in 0.01f64..=1.0, b in 0.01f64..=1.0, dt in 0.001f64..8.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let w = default_spike();
        prop_assert!(net_peaks(&w, &w, lo, 0.0, dt).v_set_peak <= net_peaks(&w, &w, hi, 0.0, dt).v_set_peak + 1e-15);
        prop_assert!(
            net_peaks(&w, &w, lo, 0.0, -dt).v_reset_peak.abs()
                <= net_peaks(&w, &w, hi, 0.0, -dt).v_reset_peak.abs() + 1e-15
        );
    }

    #[test]
    fn scaling_the_pre_spike_equals_scaling_alpha(
        alpha in 0.01f64..=1.0,
        c in 0.05f64..1.0,
        dt in -8.0f64..8.0,
        t in -14.0f64..10.0,
    ) {
        prop_assume!(alpha * c <= 1.0);
        let w = default_spike();
        let scaled = w.scaled(c);
        let lhs = net_potential(&scaled, &w, alpha, 0.0, dt, t);
        let rhs = net_potential(&w, &w, alpha * c, 0.0, dt, t);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}
