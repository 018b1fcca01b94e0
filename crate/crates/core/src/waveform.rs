//! Piecewise-linear spike waveforms and the net potential a spike pair puts
//! across one device.
//!
//! The default spike has a negative tail that precedes the nominal fire time
//! and a constant positive pulse after it:
//!
//! ```text
//!   +a_plus            ┌──────┐
//!                      │      │
//!   0 ───────┐         │      └──────
//!             ╲        │
//!               ╲      │
//!   -a_minus      ╲────┘
//!          -t_minus    0    t_plus
//! ```
//!
//! The tail magnitude grows linearly toward the pulse. With the net potential
//! defined as `alpha * pre(t - delay) - post(t - dt)`, a causal pair
//! (`dt > 0`) overlaps the pre pulse with the post tail and drives SET at
//! `a_plus * alpha + a_minus * f(dt)`; an anti-causal pair overlaps the
//! attenuated pre tail with the post pulse and drives RESET. Because the
//! attenuation multiplies the smaller tail on the RESET side, the per-branch
//! peaks bunch together there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One linear piece on the half-open interval `[t_start, t_end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub v_start: f64,
    pub v_end: f64,
}

impl Segment {
    /// Linear interpolation, extended past the segment ends. Used for one-sided
    /// limits at the closing edge.
    fn interpolate(&self, t: f64) -> f64 {
        let frac = (t - self.t_start) / (self.t_end - self.t_start);
        self.v_start + (self.v_end - self.v_start) * frac
    }
}

/// Piecewise-linear voltage-versus-time spike shape; zero outside its segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeWaveform {
    segments: Vec<Segment>,
}

/// Parameters of the default rectangular-pulse/ramp-tail waveform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformParams {
    pub a_plus: f64,
    pub t_plus: f64,
    pub a_minus: f64,
    pub t_minus: f64,
}

impl Default for WaveformParams {
    fn default() -> Self {
        Self {
            a_plus: 0.9,
            t_plus: 1.0,
            a_minus: 0.4,
            t_minus: 5.0,
        }
    }
}

impl WaveformParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a_plus, self.t_plus, self.a_minus, self.t_minus]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::config("waveform parameters must be finite"));
        }
        if self.a_plus <= 0.0 {
            return Err(Error::config("waveform.a_plus must be > 0"));
        }
        if self.t_plus <= 0.0 {
            return Err(Error::config("waveform.t_plus must be > 0"));
        }
        if self.a_minus < 0.0 {
            return Err(Error::config("waveform.a_minus must be >= 0"));
        }
        if self.t_minus < 0.0 {
            return Err(Error::config("waveform.t_minus must be >= 0"));
        }
        Ok(())
    }
}

/// Extrema of the net potential over all time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetPeaks {
    pub v_set_peak: f64,
    pub v_reset_peak: f64,
    pub t_at_set: f64,
    pub t_at_reset: f64,
}

/// Which spike of the pair passes through the dendritic attenuator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttenuateSide {
    #[default]
    Pre,
    Post,
}

impl SpikeWaveform {
    /// Builds a waveform from segments, rejecting overlaps, unsorted input and
    /// empty or non-finite pieces.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            let finite = [s.t_start, s.t_end, s.v_start, s.v_end]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::config("waveform segment values must be finite"));
            }
            if s.t_start >= s.t_end {
                return Err(Error::config(format!(
                    "waveform segment [{}, {}) is empty",
                    s.t_start, s.t_end
                )));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].t_start < pair[0].t_end {
                return Err(Error::config(
                    "waveform segments must be sorted and non-overlapping",
                ));
            }
        }
        Ok(Self { segments })
    }

    /// Negative ramp tail on `[-t_minus, 0)` followed by a flat pulse on
    /// `[0, t_plus)`.
    pub fn from_params(params: &WaveformParams) -> Result<Self> {
        params.validate()?;
        let mut segments = Vec::with_capacity(2);
        if params.t_minus > 0.0 {
            segments.push(Segment {
                t_start: -params.t_minus,
                t_end: 0.0,
                v_start: 0.0,
                v_end: -params.a_minus,
            });
        }
        segments.push(Segment {
            t_start: 0.0,
            t_end: params.t_plus,
            v_start: params.a_plus,
            v_end: params.a_plus,
        });
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Time span covered by the segments, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.t_start, self.segments.last()?.t_end))
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.containing(t).map(|s| s.interpolate(t)).unwrap_or(0.0)
    }

    /// Value approached from the left at `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| s.t_start < t && t <= s.t_end)
            .map(|s| s.interpolate(t))
            .unwrap_or(0.0)
    }

    fn containing(&self, t: f64) -> Option<&Segment> {
        let idx = self.segments.partition_point(|s| s.t_start <= t);
        let s = self.segments.get(idx.checked_sub(1)?)?;
        (t < s.t_end).then_some(s)
    }

    /// Copy with every voltage multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    v_start: s.v_start * c,
                    v_end: s.v_end * c,
                    ..*s
                })
                .collect(),
        }
    }

    /// Samples `[t_min, t_max]` at a fixed step (endpoints included when the
    /// step divides the range).
    pub fn sample(&self, t_min: f64, t_max: f64, step: f64) -> Result<Vec<(f64, f64)>> {
        if step <= 0.0 || !step.is_finite() {
            return Err(Error::config("sampling step must be > 0"));
        }
        if t_min.is_nan() || t_max.is_nan() || t_min > t_max {
            return Err(Error::config("sampling range must satisfy t_min <= t_max"));
        }
        let count = ((t_max - t_min) / step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| {
                let t = snap(t_min + i as f64 * step);
                (t, self.evaluate(t))
            })
            .collect())
    }
}

/// Rounds to nine decimals so grid coordinates print cleanly; also maps -0 to 0.
pub(crate) fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9 + 0.0
}

/// The spike pair seen by one device: `dt = t_post - t_pre`, the pre spike
/// fires at `t = 0`, and the attenuated spike additionally carries the branch
/// delay.
#[derive(Clone, Copy, Debug)]
pub struct SpikePair<'a> {
    pub pre: &'a SpikeWaveform,
    pub post: &'a SpikeWaveform,
    pub alpha: f64,
    pub delay: f64,
    pub side: AttenuateSide,
}

impl<'a> SpikePair<'a> {
    pub fn new(pre: &'a SpikeWaveform, post: &'a SpikeWaveform, alpha: f64, delay: f64) -> Self {
        Self {
            pre,
            post,
            alpha,
            delay,
            side: AttenuateSide::Pre,
        }
    }

    pub fn with_side(mut self, side: AttenuateSide) -> Self {
        self.side = side;
        self
    }

    /// (gain, shift) applied to the pre and post waveforms respectively.
    fn transforms(&self, dt: f64) -> ((f64, f64), (f64, f64)) {
        match self.side {
            AttenuateSide::Pre => ((self.alpha, self.delay), (1.0, dt)),
            AttenuateSide::Post => ((1.0, 0.0), (self.alpha, dt + self.delay)),
        }
    }

    /// Instantaneous potential across the device at time `t`.
    pub fn net_potential(&self, dt: f64, t: f64) -> f64 {
        let ((g_pre, s_pre), (g_post, s_post)) = self.transforms(dt);
        g_pre * self.pre.evaluate(t - s_pre) - g_post * self.post.evaluate(t - s_post)
    }

    fn net_left_limit(&self, dt: f64, t: f64) -> f64 {
        let ((g_pre, s_pre), (g_post, s_post)) = self.transforms(dt);
        g_pre * self.pre.left_limit(t - s_pre) - g_post * self.post.left_limit(t - s_post)
    }

    /// Exact extrema of the net potential. Both spikes are piecewise linear,
    /// so their difference is linear between merged breakpoints and the
    /// supremum/infimum is one of the one-sided limits at a breakpoint (or the
    /// zero level outside both supports).
    pub fn net_peaks(&self, dt: f64) -> NetPeaks {
        let ((_, s_pre), (_, s_post)) = self.transforms(dt);
        let breakpoints = self
            .pre
            .segments
            .iter()
            .flat_map(|s| [s.t_start + s_pre, s.t_end + s_pre])
            .chain(
                self.post
                    .segments
                    .iter()
                    .flat_map(|s| [s.t_start + s_post, s.t_end + s_post]),
            );

        let mut peaks = NetPeaks {
            v_set_peak: 0.0,
            v_reset_peak: 0.0,
            t_at_set: f64::NEG_INFINITY,
            t_at_reset: f64::NEG_INFINITY,
        };
        for t in breakpoints {
            for v in [self.net_left_limit(dt, t), self.net_potential(dt, t)] {
                if v > peaks.v_set_peak {
                    peaks.v_set_peak = v;
                    peaks.t_at_set = t;
                }
                if v < peaks.v_reset_peak {
                    peaks.v_reset_peak = v;
                    peaks.t_at_reset = t;
                }
            }
        }
        peaks
    }
}

/// `alpha * pre(t - delay) - post(t - dt)`.
pub fn net_potential(
    pre: &SpikeWaveform,
    post: &SpikeWaveform,
    alpha: f64,
    delay: f64,
    dt: f64,
    t: f64,
) -> f64 {
    SpikePair::new(pre, post, alpha, delay).net_potential(dt, t)
}

/// Extrema of [`net_potential`] over all `t`.
pub fn net_peaks(
    pre: &SpikeWaveform,
    post: &SpikeWaveform,
    alpha: f64,
    delay: f64,
    dt: f64,
) -> NetPeaks {
    SpikePair::new(pre, post, alpha, delay).net_peaks(dt)
}
