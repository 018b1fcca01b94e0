//! Bistable stochastic RRAM: Gaussian switching thresholds and binary state.
//!
//! The switching probability for a peak potential `v` is the Gaussian
//! threshold density integrated from 0 to `v`, i.e. the probability that a
//! freshly drawn threshold lies in `(0, v]`. Thresholds are redrawn for every
//! event.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceModel {
    pub v_th_set: f64,
    pub v_th_reset: f64,
    pub sigma_set: f64,
    pub sigma_reset: f64,
    pub r_on: f64,
    pub r_off: f64,
    /// Force the probability to zero unless the peak exceeds the mean
    /// threshold. Off by default; a sensitivity knob only.
    pub gate_below_threshold: bool,
}

impl Default for DeviceModel {
    fn default() -> Self {
        Self {
            v_th_set: 1.0,
            v_th_reset: -1.0,
            sigma_set: 0.1,
            sigma_reset: 0.1,
            r_on: 1.0,
            r_off: 1.0e6,
            gate_below_threshold: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceState {
    On,
    #[default]
    Off,
}

impl DeviceState {
    pub fn is_on(self) -> bool {
        self == DeviceState::On
    }
}

impl DeviceModel {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.v_th_set,
            self.v_th_reset,
            self.sigma_set,
            self.sigma_reset,
            self.r_on,
        ];
        if vals.iter().any(|v| !v.is_finite()) || self.r_off.is_nan() {
            return Err(Error::config("device parameters must be finite"));
        }
        if !(self.v_th_set > 0.0 && self.v_th_reset < 0.0) {
            return Err(Error::config(
                "device thresholds must satisfy v_th_set > 0 > v_th_reset",
            ));
        }
        if !(self.sigma_set > 0.0 && self.sigma_reset > 0.0) {
            return Err(Error::config("device sigmas must be > 0"));
        }
        if !(self.r_on > 0.0 && self.r_off > self.r_on) {
            return Err(Error::config(
                "device resistances must satisfy r_off > r_on > 0",
            ));
        }
        Ok(())
    }

    /// Probability that a positive peak `v_peak` SETs an OFF device.
    pub fn set_probability(&self, v_peak: f64) -> f64 {
        if v_peak.is_nan()
            || v_peak <= 0.0
            || (self.gate_below_threshold && v_peak <= self.v_th_set)
        {
            return 0.0;
        }
        let upper = normal::cdf((v_peak - self.v_th_set) / self.sigma_set);
        let lower = normal::cdf(-self.v_th_set / self.sigma_set);
        (upper - lower).clamp(0.0, 1.0)
    }

    /// Probability that a negative peak `v_peak` RESETs an ON device.
    pub fn reset_probability(&self, v_peak: f64) -> f64 {
        let th = -self.v_th_reset;
        let mag = -v_peak;
        if mag.is_nan() || mag <= 0.0 || (self.gate_below_threshold && mag <= th) {
            return 0.0;
        }
        let upper = normal::cdf((mag - th) / self.sigma_reset);
        let lower = normal::cdf(-th / self.sigma_reset);
        (upper - lower).clamp(0.0, 1.0)
    }

    pub fn conductance(&self, state: DeviceState) -> f64 {
        match state {
            DeviceState::On => 1.0 / self.r_on,
            DeviceState::Off => 1.0 / self.r_off,
        }
    }

    /// Uniform sweep of both switching probabilities over `[v_min, v_max]`.
    pub fn curve(&self, v_min: f64, v_max: f64, steps: usize) -> Result<Vec<CurvePoint>> {
        if steps < 2 {
            return Err(Error::config("device curve needs at least 2 steps"));
        }
        if v_min >= v_max || !v_min.is_finite() || !v_max.is_finite() {
            return Err(Error::config("device curve needs finite v_min < v_max"));
        }
        let step = (v_max - v_min) / (steps - 1) as f64;
        Ok((0..steps)
            .map(|i| {
                let voltage = if i == steps - 1 {
                    v_max
                } else {
                    crate::waveform::snap(v_min + i as f64 * step)
                };
                CurvePoint {
                    voltage,
                    p_set: self.set_probability(voltage),
                    p_reset: self.reset_probability(voltage),
                }
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub voltage: f64,
    pub p_set: f64,
    pub p_reset: f64,
}

/// One stochastic switching event. OFF devices SET when `u < p_set`, ON devices
/// RESET when `u < p_reset`.
pub fn sample_transition(state: DeviceState, p_set: f64, p_reset: f64, u: f64) -> DeviceState {
    match state {
        DeviceState::Off if u < p_set => DeviceState::On,
        DeviceState::On if u < p_reset => DeviceState::Off,
        s => s,
    }
}
