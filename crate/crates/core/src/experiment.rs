//! Epoch-based Monte Carlo STDP window.
//!
//! Each epoch is an independent trial: fresh initial device states, one spike
//! pair at the grid's Δt, one recorded conductance change. Pairs with `Δt >= 0`
//! drive the SET bank (recorded as `+set_count`), pairs with `Δt < 0` the RESET
//! bank (`-reset_count`). The analytic reference for every grid point is the
//! Poisson-binomial law of the per-device success probabilities.
//!
//! Draw layout inside an epoch's substream, for `n` devices:
//!
//! | draw        | use                                   |
//! |-------------|---------------------------------------|
//! | 0           | timing jitter (figure mode)           |
//! | 1 ..= n     | initial state (bernoulli init policy) |
//! | n+1 ..= 2n  | switching decision of device i        |
//! | 2n+1        | level noise (figure mode)             |

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitPolicy, RunConfig, StdpProtocol};
use crate::device::DeviceState;
use crate::error::{Error, Result};
use crate::fitting::{fit_window, WindowFits, WindowPoint};
use crate::rng::RngStream;
use crate::synapse::{
    apply_transitions, state_distribution, BranchProbabilities, CompoundSynapse, Polarity,
};
use crate::waveform::SpikeWaveform;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub delta_g: i32,
    pub delta_g_noisy: f64,
}

/// Aggregates for one Δt. Level-indexed vectors run over `-n..=n`
/// (index = level + n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub delta_t: f64,
    pub histogram: Vec<u64>,
    pub mean: f64,
    pub std: f64,
    pub mode: i32,
    pub analytic_pmf: Vec<f64>,
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    pub analytic_mode: i32,
    pub tvd: f64,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

impl GridPoint {
    pub fn window_point(&self) -> WindowPoint {
        WindowPoint {
            delta_t: self.delta_t,
            mean: self.mean,
            mode: f64::from(self.mode),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StdpWindowResult {
    pub devices: usize,
    pub epochs: usize,
    pub seed: u64,
    pub figure_mode: bool,
    pub points: Vec<GridPoint>,
    pub wall_time_s: f64,
}

impl StdpWindowResult {
    pub fn window_points(&self) -> Vec<WindowPoint> {
        self.points.iter().map(GridPoint::window_point).collect()
    }

    pub fn level_index(&self, level: i32) -> usize {
        (level + self.devices as i32) as usize
    }
}

/// One row of the analytic state-probability matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateCurve {
    pub delta_t: f64,
    pub polarity: Polarity,
    /// `pmf[k]` is the probability that `k` devices switch.
    pub pmf: Vec<f64>,
}

impl StateCurve {
    /// Signed conductance change of count `k`.
    pub fn level(&self, k: usize) -> i32 {
        self.polarity.sign() * k as i32
    }
}

/// Most frequent level; ties go to the smaller |level| and then to the
/// negative side.
fn modal_level<T: PartialOrd + Copy>(weights: &[T], n: usize) -> i32 {
    let n = n as i32;
    let mut best = 0i32;
    for mag in 1..=n {
        for level in [-mag, mag] {
            if weights[(level + n) as usize] > weights[(best + n) as usize] {
                best = level;
            }
        }
    }
    best
}

pub struct Experiment {
    synapse: CompoundSynapse,
    pre: SpikeWaveform,
    post: SpikeWaveform,
    protocol: StdpProtocol,
}

impl Experiment {
    pub fn new(
        synapse: CompoundSynapse,
        waveform: SpikeWaveform,
        protocol: StdpProtocol,
    ) -> Result<Self> {
        protocol.validate()?;
        Ok(Self {
            synapse,
            pre: waveform.clone(),
            post: waveform,
            protocol,
        })
    }

    pub fn from_config(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Self::new(
            config.synapse()?,
            config.waveform()?,
            config.protocol.clone(),
        )
    }

    pub fn synapse(&self) -> &CompoundSynapse {
        &self.synapse
    }

    pub fn protocol(&self) -> &StdpProtocol {
        &self.protocol
    }

    pub fn branch_probabilities(&self, dt: f64) -> BranchProbabilities {
        self.synapse.branch_probabilities(&self.pre, &self.post, dt)
    }

    /// Probability that a device can take part in the bank's transition,
    /// i.e. that it starts OFF (SET bank) or ON (RESET bank).
    fn eligibility(&self, polarity: Polarity) -> f64 {
        match (self.protocol.init_policy, polarity) {
            (InitPolicy::PolaritySplit, _) => 1.0,
            (InitPolicy::AllOff, Polarity::SetFromAllOff) => 1.0,
            (InitPolicy::AllOff, Polarity::ResetFromAllOn) => 0.0,
            (InitPolicy::AllOn, Polarity::SetFromAllOff) => 0.0,
            (InitPolicy::AllOn, Polarity::ResetFromAllOn) => 1.0,
            (InitPolicy::Bernoulli(p), Polarity::SetFromAllOff) => 1.0 - p,
            (InitPolicy::Bernoulli(p), Polarity::ResetFromAllOn) => p,
        }
    }

    /// Per-device probabilities of switching at `dt` under the protocol's
    /// initial-state policy (un-jittered).
    pub fn success_probabilities(&self, dt: f64) -> (Polarity, Vec<f64>) {
        let polarity = Polarity::for_delta_t(dt);
        let eligible = self.eligibility(polarity);
        let probs = self.branch_probabilities(dt);
        let p = match polarity {
            Polarity::SetFromAllOff => probs.p_set(),
            Polarity::ResetFromAllOn => probs.p_reset(),
        };
        (polarity, p.into_iter().map(|q| q * eligible).collect())
    }

    pub fn per_device_probability_curves(&self, grid: &[f64]) -> Vec<BranchProbabilities> {
        grid.iter()
            .map(|&dt| self.branch_probabilities(dt))
            .collect()
    }

    pub fn state_probability_curves(&self, grid: &[f64]) -> Vec<StateCurve> {
        grid.iter()
            .map(|&dt| {
                let (polarity, p) = self.success_probabilities(dt);
                StateCurve {
                    delta_t: dt,
                    polarity,
                    pmf: state_distribution(&p),
                }
            })
            .collect()
    }

    fn initial_states(&self, polarity: Polarity, rng: &mut RngStream, states: &mut [DeviceState]) {
        let n = states.len() as u64;
        match self.protocol.init_policy {
            InitPolicy::PolaritySplit => {
                let s = match polarity {
                    Polarity::SetFromAllOff => DeviceState::Off,
                    Polarity::ResetFromAllOn => DeviceState::On,
                };
                states.iter_mut().for_each(|x| *x = s);
            }
            InitPolicy::AllOff => states.iter_mut().for_each(|x| *x = DeviceState::Off),
            InitPolicy::AllOn => states.iter_mut().for_each(|x| *x = DeviceState::On),
            InitPolicy::Bernoulli(p) => {
                rng.seek(1);
                for x in states.iter_mut() {
                    *x = if rng.uniform() < p {
                        DeviceState::On
                    } else {
                        DeviceState::Off
                    };
                }
            }
        }
        rng.seek(n + 1);
    }

    fn run_epoch(
        &self,
        grid_index: u32,
        epoch: u32,
        dt: f64,
        nominal: &BranchProbabilities,
    ) -> Sample {
        let n = self.synapse.len();
        let polarity = Polarity::for_delta_t(dt);
        let mut rng = RngStream::new(self.protocol.seed, grid_index, epoch);
        let figure = self.protocol.figure_mode;

        let jitter = rng.gaussian();
        let jittered;
        let probs = if figure && self.protocol.jitter_sigma > 0.0 {
            jittered = self
                .branch_probabilities(dt + jitter * self.protocol.jitter_sigma)
                .restricted_to(polarity);
            &jittered
        } else {
            nominal
        };

        let mut states = vec![DeviceState::Off; n];
        self.initial_states(polarity, &mut rng, &mut states);
        let draws: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let t = apply_transitions(&mut states, &probs.records, &draws);
        let delta_g = match polarity {
            Polarity::SetFromAllOff => t.set_count as i32,
            Polarity::ResetFromAllOn => -(t.reset_count as i32),
        };
        let noise = rng.gaussian();
        let delta_g_noisy = if figure {
            f64::from(delta_g) + noise * self.protocol.noise_sigma
        } else {
            f64::from(delta_g)
        };
        Sample {
            delta_g,
            delta_g_noisy,
        }
    }

    fn run_grid_point(&self, grid_index: u32, dt: f64) -> GridPoint {
        let n = self.synapse.len();
        let epochs = self.protocol.epochs;
        let polarity = Polarity::for_delta_t(dt);
        let nominal = self.branch_probabilities(dt).restricted_to(polarity);

        let samples: Vec<Sample> = (0..epochs as u32)
            .into_par_iter()
            .with_min_len(256)
            .map(|e| self.run_epoch(grid_index, e, dt, &nominal))
            .collect();

        let mut histogram = vec![0u64; 2 * n + 1];
        for s in &samples {
            histogram[(s.delta_g + n as i32) as usize] += 1;
        }
        let total = epochs as f64;
        let mean = samples.iter().map(|s| f64::from(s.delta_g)).sum::<f64>() / total;
        let std = if epochs > 1 {
            let ss: f64 = samples
                .iter()
                .map(|s| (f64::from(s.delta_g) - mean).powi(2))
                .sum();
            (ss / (total - 1.0)).sqrt()
        } else {
            0.0
        };

        let (_, p) = self.success_probabilities(dt);
        let counts_pmf = state_distribution(&p);
        let mut analytic_pmf = vec![0.0; 2 * n + 1];
        for (k, &w) in counts_pmf.iter().enumerate() {
            analytic_pmf[(polarity.sign() * k as i32 + n as i32) as usize] += w;
        }
        let sign = f64::from(polarity.sign());
        let analytic_mean = sign * p.iter().sum::<f64>();
        let analytic_variance = p.iter().map(|q| q * (1.0 - q)).sum();
        let tvd = 0.5
            * histogram
                .iter()
                .zip(&analytic_pmf)
                .map(|(&h, &w)| (h as f64 / total - w).abs())
                .sum::<f64>();

        GridPoint {
            delta_t: dt,
            mode: modal_level(&histogram, n),
            analytic_mode: modal_level(&analytic_pmf, n),
            histogram,
            mean,
            std,
            analytic_pmf,
            analytic_mean,
            analytic_variance,
            tvd: tvd.min(1.0),
            samples,
        }
    }

    /// Runs the whole window on the current rayon pool.
    pub fn run(&self) -> Result<StdpWindowResult> {
        let grid = self.protocol.dt_grid()?;
        let start = Instant::now();
        let points: Vec<GridPoint> = grid
            .par_iter()
            .enumerate()
            .map(|(i, &dt)| self.run_grid_point(i as u32, dt))
            .collect();
        Ok(StdpWindowResult {
            devices: self.synapse.len(),
            epochs: self.protocol.epochs,
            seed: self.protocol.seed,
            figure_mode: self.protocol.figure_mode,
            points,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }

    /// Runs on a dedicated pool of `threads` workers (0 = one per core).
    pub fn run_with_threads(&self, threads: usize) -> Result<StdpWindowResult> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| self.run())
    }
}

/// Result of one configuration inside a comparison.
#[derive(Clone, Debug)]
pub struct ModeRun {
    pub config: RunConfig,
    pub window: StdpWindowResult,
    pub fits: WindowFits,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub dendritic: ModeRun,
    pub flat: ModeRun,
}

pub fn run_mode(config: &RunConfig, threads: usize) -> Result<ModeRun> {
    let window = Experiment::from_config(config)?.run_with_threads(threads)?;
    let fits = fit_window(&window.window_points(), &config.fit);
    Ok(ModeRun {
        config: config.clone(),
        window,
        fits,
    })
}

/// Dendritic configuration against the same synapse with every attenuation
/// set to 1, on the same seed.
pub fn compare_modes(config: &RunConfig, threads: usize) -> Result<Comparison> {
    Ok(Comparison {
        dendritic: run_mode(config, threads)?,
        flat: run_mode(&config.flat(), threads)?,
    })
}
