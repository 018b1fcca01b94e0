//! Least-squares fits of the STDP window: `y = a + b·Δt` and `y = a·exp(b·Δt)`
//! per side.
//!
//! Reset-side fits are made on the magnitude of the (negative) conductance
//! change so that both sides share the same positive-amplitude model.

use serde::{Deserialize, Serialize};

use crate::config::{FitConfig, FitTarget};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 20;
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Exponential,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Set,
    Reset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FitStatus {
    Ok,
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub side: Side,
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Points dropped before fitting (non-positive ordinates for the
    /// exponential model).
    pub excluded: usize,
    pub domain: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
    #[serde(flatten)]
    pub status: FitStatus,
}

impl FitResult {
    fn skipped(
        model: FitModel,
        side: Side,
        domain: [f64; 2],
        n_points: usize,
        excluded: usize,
        reason: String,
    ) -> Self {
        Self {
            model,
            side,
            a: f64::NAN,
            b: f64::NAN,
            r_squared: f64::NAN,
            n_points,
            excluded,
            domain,
            converged: false,
            iterations: 0,
            status: FitStatus::Skipped { reason },
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.status, FitStatus::Skipped { .. })
    }

    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            FitModel::Linear => self.a + self.b * x,
            FitModel::Exponential => self.a * (self.b * x).exp(),
        }
    }
}

fn domain_of(points: &[(f64, f64)]) -> [f64; 2] {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    [lo, hi]
}

/// Coefficient of determination; 1 when the data are constant and fitted
/// exactly.
pub fn r_squared(points: &[(f64, f64)], predict: impl Fn(f64) -> f64) -> f64 {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - predict(p.0)).powi(2)).sum();
    if ss_tot == 0.0 {
        let scale: f64 = points
            .iter()
            .map(|p| p.1 * p.1)
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        return if ss_res <= 1e-24 * scale { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

fn ols(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::config("linear fit needs at least 2 points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::config("linear fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// Ordinary least squares `y = a + b·x`.
pub fn fit_linear(points: &[(f64, f64)], side: Side) -> Result<FitResult> {
    let (a, b) = ols(points)?;
    Ok(FitResult {
        model: FitModel::Linear,
        side,
        a,
        b,
        r_squared: r_squared(points, |x| a + b * x),
        n_points: points.len(),
        excluded: 0,
        domain: domain_of(points),
        converged: true,
        iterations: 1,
        status: FitStatus::Ok,
    })
}

fn ss_exp(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| (y - a * (b * x).exp()).powi(2))
        .sum()
}

/// `y = a·exp(b·x)`: log-linear initial guess refined by damped Gauss–Newton
/// on the original residuals. Non-positive ordinates are dropped; fewer than
/// three remaining points yields a skipped result.
pub fn fit_exponential(points: &[(f64, f64)], side: Side) -> FitResult {
    let positive: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.1 > 0.0 && p.1.is_finite())
        .collect();
    let excluded = points.len() - positive.len();
    let domain = if positive.is_empty() {
        domain_of(points)
    } else {
        domain_of(&positive)
    };
    if positive.len() < 3 {
        return FitResult::skipped(
            FitModel::Exponential,
            side,
            domain,
            positive.len(),
            excluded,
            format!("needs at least 3 positive points, have {}", positive.len()),
        );
    }
    let logs: Vec<(f64, f64)> = positive.iter().map(|&(x, y)| (x, y.ln())).collect();
    let (ln_a, mut b) = match ols(&logs) {
        Ok(v) => v,
        Err(e) => {
            return FitResult::skipped(
                FitModel::Exponential,
                side,
                domain,
                positive.len(),
                excluded,
                e.to_string(),
            )
        }
    };
    let mut a = ln_a.exp();
    let mut ss = ss_exp(&positive, a, b);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations JᵀJ δ = Jᵀr with J = [e^{bx}, a·x·e^{bx}].
        let (mut j11, mut j12, mut j22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &positive {
            let e = (b * x).exp();
            let da = e;
            let db = a * x * e;
            let r = y - a * e;
            j11 += da * da;
            j12 += da * db;
            j22 += db * db;
            g1 += da * r;
            g2 += db * r;
        }
        let det = j11 * j22 - j12 * j12;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_a = (j22 * g1 - j12 * g2) / det;
        let step_b = (j11 * g2 - j12 * g1) / det;

        let step_norm = step_a.hypot(step_b);
        let param_norm = a.hypot(b);
        if step_norm <= REL_TOL * param_norm {
            a += step_a;
            b += step_b;
            converged = true;
            break;
        }

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (na, nb) = (a + scale * step_a, b + scale * step_b);
            let nss = ss_exp(&positive, na, nb);
            if nss.is_finite() && nss <= ss {
                a = na;
                b = nb;
                ss = nss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        if (scale * step_norm) <= REL_TOL * a.hypot(b) {
            converged = true;
            break;
        }
    }

    FitResult {
        model: FitModel::Exponential,
        side,
        a,
        b,
        r_squared: r_squared(&positive, |x| a * (b * x).exp()),
        n_points: positive.len(),
        excluded,
        domain,
        converged: converged && a > 0.0,
        iterations,
        status: FitStatus::Ok,
    }
}

/// Per-grid-point window statistics that the fitters consume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub delta_t: f64,
    pub mean: f64,
    pub mode: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub target: FitTarget,
    #[serde(flatten)]
    pub fit: FitResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFits {
    pub target: FitTarget,
    pub set_exponential: FitResult,
    pub set_linear: FitResult,
    pub reset_exponential: FitResult,
    pub reset_linear: FitResult,
}

impl WindowFits {
    pub fn all(&self) -> [&FitResult; 4] {
        [
            &self.set_exponential,
            &self.set_linear,
            &self.reset_exponential,
            &self.reset_linear,
        ]
    }

    /// Flat records in the `fits.json` layout.
    pub fn records(&self) -> Vec<FitRecord> {
        self.all()
            .into_iter()
            .map(|f| FitRecord {
                target: self.target,
                fit: f.clone(),
            })
            .collect()
    }

    /// Fits that ran but did not converge.
    pub fn unconverged(&self) -> Vec<&FitResult> {
        self.all()
            .into_iter()
            .filter(|f| !f.is_skipped() && !f.converged)
            .collect()
    }
}

fn side_points(
    points: &[WindowPoint],
    target: FitTarget,
    [lo, hi]: [f64; 2],
    side: Side,
) -> Vec<(f64, f64)> {
    const EPS: f64 = 1e-9;
    points
        .iter()
        .filter(|p| p.delta_t >= lo - EPS && p.delta_t <= hi + EPS)
        .filter(|p| match side {
            Side::Set => p.delta_t >= 0.0,
            Side::Reset => p.delta_t < 0.0,
        })
        .map(|p| {
            let y = match target {
                FitTarget::Mode => p.mode,
                FitTarget::Mean => p.mean,
            };
            let y = match side {
                Side::Set => y,
                Side::Reset => -y,
            };
            (p.delta_t, y)
        })
        .collect()
}

fn fit_side(points: &[(f64, f64)], domain: [f64; 2], side: Side) -> (FitResult, FitResult) {
    let exp = fit_exponential(points, side);
    let lin = fit_linear(points, side).unwrap_or_else(|e| {
        FitResult::skipped(
            FitModel::Linear,
            side,
            domain,
            points.len(),
            0,
            e.to_string(),
        )
    });
    (exp, lin)
}

/// Both models on both sides of the window.
pub fn fit_window(points: &[WindowPoint], config: &FitConfig) -> WindowFits {
    let set = side_points(points, config.target, config.set_domain, Side::Set);
    let reset = side_points(points, config.target, config.reset_domain, Side::Reset);
    let (set_exponential, set_linear) = fit_side(&set, config.set_domain, Side::Set);
    let (reset_exponential, reset_linear) = fit_side(&reset, config.reset_domain, Side::Reset);
    WindowFits {
        target: config.target,
        set_exponential,
        set_linear,
        reset_exponential,
        reset_linear,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Solves the 2x2 normal equations [n Σx; Σx Σx²][a b]ᵀ = [Σy Σxy]ᵀ by
    /// Cramer's rule.
    fn normal_equations(points: &[(f64, f64)]) -> (f64, f64) {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let det = n * sxx - sx * sx;
        ((sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det)
    }

    #[test]
    fn linear_examples() {
        let exact: Vec<_> = (0..6).map(|i| (i as f64, 2.0 + 3.0 * i as f64)).collect();
        let f = fit_linear(&exact, Side::Set).unwrap();
        assert!((f.a - 2.0).abs() < 1e-12 && (f.b - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let flat: Vec<_> = (0..4).map(|i| (i as f64, 5.0)).collect();
        let f = fit_linear(&flat, Side::Set).unwrap();
        assert_eq!((f.a, f.b, f.r_squared), (5.0, 0.0, 1.0));

        let f = fit_linear(&[(1.0, 1.0), (2.0, 2.0), (3.0, 2.0)], Side::Set).unwrap();
        assert!((f.b - 0.5).abs() < 1e-15);
        assert!((f.a - 2.0 / 3.0).abs() < 1e-15);

        assert!(fit_linear(&[(1.0, 1.0)], Side::Set).is_err());
        assert!(fit_linear(&[(1.0, 1.0), (1.0, 2.0)], Side::Set).is_err());
    }

    #[test]
    fn exponential_recovers_parameters() {
        let pts: Vec<_> = (1..=5)
            .map(|i| (i as f64, 3.0 * (-0.8 * i as f64).exp()))
            .collect();
        let f = fit_exponential(&pts, Side::Set);
        assert!(f.converged);
        assert!((f.a - 3.0).abs() < 1e-6 * 3.0);
        assert!((f.b + 0.8).abs() < 1e-6 * 0.8);
        assert!(f.r_squared >= 1.0 - 1e-9);
    }

    #[test]
    fn exponential_constant_data() {
        let pts: Vec<_> = (1..=5).map(|i| (i as f64, 4.0)).collect();
        let f = fit_exponential(&pts, Side::Set);
        assert!(f.converged);
        assert!(f.b.abs() < 1e-6);
        assert!((f.a - 4.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_drops_nonpositive_points() {
        let mut pts: Vec<_> = (1..=5)
            .map(|i| (i as f64, 2.0 * (0.3 * i as f64).exp()))
            .collect();
        pts.push((6.0, 0.0));
        pts.push((7.0, -1.0));
        let f = fit_exponential(&pts, Side::Set);
        assert_eq!(f.excluded, 2);
        assert_eq!(f.n_points, 5);
        assert_eq!(f.domain, [1.0, 5.0]);
        let few = fit_exponential(&[(1.0, 1.0), (2.0, 0.0), (3.0, 2.0)], Side::Reset);
        assert!(few.is_skipped());
        assert!(!few.converged);
    }

    #[test]
    fn exponential_noisy_data_decreases_residual() {
        // Fixed pseudo-noise; the refined fit must beat the log-linear start.
        let noise = [0.3, -0.2, 0.5, -0.4, 0.1, 0.0, -0.3, 0.25, -0.15];
        let pts: Vec<_> = noise
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let x = 1.0 + 0.5 * i as f64;
                (x, 14.0 * (-0.45 * x).exp() + e)
            })
            .collect();
        let f = fit_exponential(&pts, Side::Set);
        assert!(f.converged);
        let logs: Vec<_> = pts.iter().map(|&(x, y)| (x, y.ln())).collect();
        let (la, lb) = ols(&logs).unwrap();
        assert!(ss_exp(&pts, f.a, f.b) <= ss_exp(&pts, la.exp(), lb));
    }

    #[test]
    fn window_fits_skip_empty_side() {
        let pts: Vec<WindowPoint> = (0..=50)
            .map(|i| {
                let dt = i as f64 * 0.1;
                WindowPoint {
                    delta_t: dt,
                    mean: 12.0 * (-0.4 * dt).exp(),
                    mode: (12.0 * (-0.4 * dt).exp()).round(),
                }
            })
            .collect();
        let fits = fit_window(&pts, &FitConfig::default());
        assert!(fits.set_exponential.converged && fits.set_linear.converged);
        assert!(fits.reset_exponential.is_skipped() && fits.reset_linear.is_skipped());
        assert_eq!(fits.records().len(), 4);
        assert!(fits.unconverged().is_empty());
        let json = serde_json::to_value(fits.records()).unwrap();
        assert_eq!(json[2]["status"], "skipped");
        assert_eq!(json[0]["target"], "mode");
        assert_eq!(json[0]["model"], "exponential");
    }

    #[test]
    fn reset_side_uses_magnitudes() {
        let pts: Vec<WindowPoint> = (0..=40)
            .map(|i| {
                let dt = -5.0 + 0.1 * i as f64;
                let y = -10.0 * (0.3 * dt).exp();
                WindowPoint {
                    delta_t: dt,
                    mean: y,
                    mode: y,
                }
            })
            .collect();
        let cfg = FitConfig {
            target: FitTarget::Mean,
            ..Default::default()
        };
        let fits = fit_window(&pts, &cfg);
        assert!((fits.reset_exponential.a - 10.0).abs() < 1e-6);
        assert!((fits.reset_exponential.b - 0.3).abs() < 1e-6);
        assert_eq!(fits.reset_exponential.n_points, 41);
    }

    proptest! {
        #[test]
        fn linear_matches_normal_equations(
            xs in proptest::collection::vec(-10.0f64..10.0, 3..30),
            a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000,
        ) {
            let spread = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread > 1.0);
            let pts: Vec<_> = xs.iter().enumerate()
                .map(|(i, &x)| (x, a + b * x + (((i as u64 * 7919 + seed) % 101) as f64 / 101.0 - 0.5)))
                .collect();
            let f = fit_linear(&pts, Side::Set).unwrap();
            let (na, nb) = normal_equations(&pts);
            prop_assert!((f.a - na).abs() < 1e-10 * (1.0 + na.abs()));
            prop_assert!((f.b - nb).abs() < 1e-10 * (1.0 + nb.abs()));
        }

        #[test]
        fn exponential_scale_invariance(log_a in -3.0f64..3.0, b in -1.5f64..1.5) {
            let a = 10f64.powf(log_a);
            let pts: Vec<_> = (0..9).map(|i| { let x = 1.0 + 0.5 * i as f64; (x, a * (b * x).exp()) }).collect();
            let f = fit_exponential(&pts, Side::Set);
            prop_assert!(f.converged);
            prop_assert!(((f.a - a) / a).abs() < 1e-6);
            prop_assert!((f.b - b).abs() < 1e-6 * b.abs().max(1e-3));
        }

        #[test]
        fn r_squared_ignores_order(mut pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..20)) {
            let before = r_squared(&pts, |x| 0.3 + 0.7 * x);
            pts.reverse();
            let after = r_squared(&pts, |x| 0.3 + 0.7 * x);
            prop_assert!((before - after).abs() < 1e-12 || (before.is_nan() && after.is_nan()));
            prop_assert!(before <= 1.0);
        }
    }
}
