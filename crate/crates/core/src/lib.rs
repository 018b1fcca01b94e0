//! Simulation of multi-level spike-timing-dependent plasticity in a compound
//! synapse built from `n` bistable stochastic resistive devices, each reached
//! through its own dendritic attenuator.
//!
//! The pipeline runs bottom-up:
//!
//! * [`waveform`]: piecewise-linear spikes and the exact peak net potential
//!   a pre/post pair puts across one device,
//! * [`device`]: Gaussian-threshold switching probabilities,
//! * [`synapse`]: per-branch probabilities, expected conductance and the exact
//!   Poisson-binomial law of the level change,
//! * [`experiment`]: reproducible parallel Monte Carlo of the STDP window,
//! * [`fitting`]: exponential and linear window fits,
//! * [`cli`], [`output`], [`render`]: the `synlab` command, data products and
//!   SVG figures.

pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod experiment;
pub mod fitting;
pub mod normal;
pub mod output;
pub mod render;
pub mod rng;
pub mod synapse;
pub mod waveform;

pub use config::{FitConfig, FitTarget, InitPolicy, RunConfig, StdpProtocol, SynapseConfig};
pub use device::{sample_transition, DeviceModel, DeviceState};
pub use error::{Error, Result};
pub use experiment::{compare_modes, Comparison, Experiment, GridPoint, StdpWindowResult};
pub use fitting::{fit_exponential, fit_linear, fit_window, FitModel, FitResult, Side, WindowFits};
pub use synapse::{
    expected_normalized_conductance, linear_attenuators, state_distribution, BranchProbabilities,
    CompoundSynapse, DendriticBranch, Polarity,
};
pub use waveform::{AttenuateSide, NetPeaks, SpikePair, SpikeWaveform, WaveformParams};
