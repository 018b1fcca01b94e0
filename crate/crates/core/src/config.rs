//! JSON run configuration. Every field is optional; omitted fields take the
//! reference simulation values (16 devices, attenuation 0.6 to 1, thresholds
//! ±1 V with σ = 0.1, 0.9 V/1 tu pulse with 0.4 V/5 tu tail, 10,000 epochs).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::synapse::{linear_attenuators, CompoundSynapse, DendriticBranch};
use crate::waveform::{snap, AttenuateSide, SpikeWaveform, WaveformParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub waveform: WaveformParams,
    pub device: DeviceModel,
    pub synapse: SynapseConfig,
    pub protocol: StdpProtocol,
    pub fit: FitConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapseConfig {
    pub n: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Explicit per-branch attenuations; overrides the linear range when set.
    pub alphas: Vec<f64>,
    /// Per-branch delays in time units; zeros when empty.
    pub delays: Vec<f64>,
    pub attenuate_side: AttenuateSide,
}

impl Default for SynapseConfig {
    fn default() -> Self {
        Self {
            n: 16,
            alpha_min: 0.6,
            alpha_max: 1.0,
            alphas: Vec::new(),
            delays: Vec::new(),
            attenuate_side: AttenuateSide::Pre,
        }
    }
}

impl SynapseConfig {
    /// Same synapse without dendritic processing: every attenuation is 1.
    pub fn flat(&self) -> Self {
        Self {
            alpha_min: 1.0,
            alpha_max: 1.0,
            alphas: Vec::new(),
            delays: Vec::new(),
            ..self.clone()
        }
    }

    pub fn branches(&self) -> Result<Vec<DendriticBranch>> {
        let mut branches = if self.alphas.is_empty() {
            linear_attenuators(self.n, self.alpha_min, self.alpha_max)?
        } else {
            if self.alphas.len() != self.n {
                return Err(Error::config(format!(
                    "synapse.alphas has {} entries but synapse.n = {}",
                    self.alphas.len(),
                    self.n
                )));
            }
            self.alphas
                .iter()
                .map(|&a| DendriticBranch::new(a, 0.0))
                .collect::<Result<Vec<_>>>()?
        };
        if !self.delays.is_empty() {
            if self.delays.len() != self.n {
                return Err(Error::config(format!(
                    "synapse.delays has {} entries but synapse.n = {}",
                    self.delays.len(),
                    self.n
                )));
            }
            for (b, &d) in branches.iter_mut().zip(&self.delays) {
                *b = DendriticBranch::new(b.alpha, d)?;
            }
        }
        Ok(branches)
    }
}

/// Initial device states before each epoch's spike pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    /// All OFF for `dt >= 0`, all ON for `dt < 0`.
    #[default]
    PolaritySplit,
    AllOff,
    AllOn,
    /// Each device independently ON with the given probability.
    Bernoulli(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpProtocol {
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_step: f64,
    pub epochs: usize,
    pub init_policy: InitPolicy,
    /// Timing jitter (time units); figure mode only.
    pub jitter_sigma: f64,
    /// Additive level noise on recorded Δg; figure mode only.
    pub noise_sigma: f64,
    pub figure_mode: bool,
    pub seed: u64,
}

impl Default for StdpProtocol {
    fn default() -> Self {
        Self {
            dt_min: -5.0,
            dt_max: 5.0,
            dt_step: 0.1,
            epochs: 10_000,
            init_policy: InitPolicy::PolaritySplit,
            jitter_sigma: 0.05,
            noise_sigma: 0.25,
            figure_mode: false,
            seed: 0,
        }
    }
}

impl StdpProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("protocol.epochs must be >= 1"));
        }
        if self.epochs > u32::MAX as usize {
            return Err(Error::config("protocol.epochs exceeds 2^32 - 1"));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::config("protocol.jitter_sigma must be >= 0"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config("protocol.noise_sigma must be >= 0"));
        }
        if let InitPolicy::Bernoulli(p) = self.init_policy {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(
                    "bernoulli init probability must lie in [0, 1]",
                ));
            }
        }
        self.dt_grid().map(|_| ())
    }

    /// Arithmetic Δt grid from `dt_min` to `dt_max` inclusive.
    pub fn dt_grid(&self) -> Result<Vec<f64>> {
        dt_grid(self.dt_min, self.dt_max, self.dt_step)
    }
}

pub fn dt_grid(dt_min: f64, dt_max: f64, dt_step: f64) -> Result<Vec<f64>> {
    if ![dt_min, dt_max, dt_step].iter().all(|v| v.is_finite()) {
        return Err(Error::config("Δt grid bounds must be finite"));
    }
    if dt_step.is_nan() || dt_step <= 0.0 {
        return Err(Error::config("protocol.dt_step must be > 0"));
    }
    if dt_max < dt_min {
        return Err(Error::config("protocol.dt_max must be >= dt_min"));
    }
    let count = ((dt_max - dt_min) / dt_step + 1e-9).floor() as usize + 1;
    if count > u32::MAX as usize {
        return Err(Error::config("Δt grid is too large"));
    }
    Ok((0..count)
        .map(|i| snap(dt_min + i as f64 * dt_step))
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitTarget {
    #[default]
    Mode,
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub set_domain: [f64; 2],
    pub reset_domain: [f64; 2],
    pub target: FitTarget,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            set_domain: [1.0, 5.0],
            reset_domain: [-5.0, -1.0],
            target: FitTarget::Mode,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("set_domain", self.set_domain),
            ("reset_domain", self.reset_domain),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(format!(
                    "fit.{name} must be a finite [lo, hi] with lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// Record written next to every run. Loading it back as `--config` reproduces
/// the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub config: RunConfig,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub version: String,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        self.device.validate()?;
        self.synapse.branches()?;
        self.protocol.validate()?;
        self.fit.validate()
    }

    /// Parses a bare configuration or a `run.json` record.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("invalid JSON: {e}")))?;
        let is_record = value.get("config").is_some() && value.get("wall_time_s").is_some();
        let config = if is_record {
            serde_json::from_value::<RunRecord>(value).map(|r| r.config)
        } else {
            serde_json::from_value::<RunConfig>(value)
        }
        .map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn waveform(&self) -> Result<SpikeWaveform> {
        SpikeWaveform::from_params(&self.waveform)
    }

    pub fn synapse(&self) -> Result<CompoundSynapse> {
        CompoundSynapse::new(
            self.synapse.branches()?,
            self.device,
            self.synapse.attenuate_side,
        )
    }

    /// The same run without dendritic attenuation.
    pub fn flat(&self) -> Self {
        Self {
            synapse: self.synapse.flat(),
            ..self.clone()
        }
    }
}
