//! Compound synapse: n bistable devices in parallel, each fed through its own
//! dendritic attenuator.

use serde::{Deserialize, Serialize};

use crate::device::{sample_transition, DeviceModel, DeviceState};
use crate::error::{Error, Result};
use crate::waveform::{AttenuateSide, SpikePair, SpikeWaveform};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DendriticBranch {
    pub alpha: f64,
    pub delay: f64,
}

impl DendriticBranch {
    pub fn new(alpha: f64, delay: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!("attenuation {alpha} outside (0, 1]")));
        }
        if !delay.is_finite() {
            return Err(Error::config("branch delay must be finite"));
        }
        Ok(Self { alpha, delay })
    }
}

/// `n` branches with attenuations evenly spaced over `[alpha_min, alpha_max]`.
pub fn linear_attenuators(
    n: usize,
    alpha_min: f64,
    alpha_max: f64,
) -> Result<Vec<DendriticBranch>> {
    if n == 0 {
        return Err(Error::config("synapse needs at least one device"));
    }
    if !(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0) {
        return Err(Error::config(format!(
            "attenuation range must satisfy 0 < alpha_min <= alpha_max <= 1, got [{alpha_min}, {alpha_max}]"
        )));
    }
    if n == 1 {
        return Ok(vec![DendriticBranch::new(alpha_min, 0.0)?]);
    }
    let step = (alpha_max - alpha_min) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let alpha = if i == n - 1 {
                alpha_max
            } else {
                alpha_min + i as f64 * step
            };
            DendriticBranch::new(alpha, 0.0)
        })
        .collect()
}

/// Switching probabilities of one device for a given spike timing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchProbability {
    pub index: usize,
    pub v_set_peak: f64,
    pub v_reset_peak: f64,
    pub p_set: f64,
    pub p_reset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchProbabilities {
    pub delta_t: f64,
    pub records: Vec<BranchProbability>,
}

impl BranchProbabilities {
    pub fn p_set(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_set).collect()
    }

    pub fn p_reset(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_reset).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Drops the probabilities of the polarity not driven by this bank.
    pub fn restricted_to(&self, polarity: Polarity) -> Self {
        let records = self
            .records
            .iter()
            .map(|r| match polarity {
                Polarity::SetFromAllOff => BranchProbability { p_reset: 0.0, ..*r },
                Polarity::ResetFromAllOn => BranchProbability { p_set: 0.0, ..*r },
            })
            .collect();
        Self {
            delta_t: self.delta_t,
            records,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    SetFromAllOff,
    ResetFromAllOn,
}

impl Polarity {
    /// Bank driven by a spike pair at `dt`; `dt = 0` belongs to the SET bank.
    pub fn for_delta_t(dt: f64) -> Self {
        if dt < 0.0 {
            Polarity::ResetFromAllOn
        } else {
            Polarity::SetFromAllOff
        }
    }

    /// Sign of the conductance change recorded for this bank.
    pub fn sign(self) -> i32 {
        match self {
            Polarity::SetFromAllOff => 1,
            Polarity::ResetFromAllOn => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Transitions {
    pub set_count: usize,
    pub reset_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompoundSynapse {
    branches: Vec<DendriticBranch>,
    model: DeviceModel,
    side: AttenuateSide,
    states: Vec<DeviceState>,
}

impl CompoundSynapse {
    /// New synapse with every device OFF.
    pub fn new(
        branches: Vec<DendriticBranch>,
        model: DeviceModel,
        side: AttenuateSide,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::config("synapse needs at least one branch"));
        }
        model.validate()?;
        let states = vec![DeviceState::Off; branches.len()];
        Ok(Self {
            branches,
            model,
            side,
            states,
        })
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branches(&self) -> &[DendriticBranch] {
        &self.branches
    }

    pub fn model(&self) -> &DeviceModel {
        &self.model
    }

    pub fn side(&self) -> AttenuateSide {
        self.side
    }

    pub fn states(&self) -> &[DeviceState] {
        &self.states
    }

    pub fn set_states(&mut self, states: Vec<DeviceState>) -> Result<()> {
        if states.len() != self.branches.len() {
            return Err(Error::config(format!(
                "expected {} device states, got {}",
                self.branches.len(),
                states.len()
            )));
        }
        self.states = states;
        Ok(())
    }

    pub fn fill_states(&mut self, state: DeviceState) {
        self.states.iter_mut().for_each(|s| *s = state);
    }

    /// Number of devices currently ON (the normalized conductance level).
    pub fn level(&self) -> usize {
        self.states.iter().filter(|s| s.is_on()).count()
    }

    /// Peak potentials and switching probabilities of every device at `dt`.
    pub fn branch_probabilities(
        &self,
        pre: &SpikeWaveform,
        post: &SpikeWaveform,
        dt: f64,
    ) -> BranchProbabilities {
        let records = self
            .branches
            .iter()
            .enumerate()
            .map(|(index, b)| {
                let peaks = SpikePair::new(pre, post, b.alpha, b.delay)
                    .with_side(self.side)
                    .net_peaks(dt);
                BranchProbability {
                    index,
                    v_set_peak: peaks.v_set_peak,
                    v_reset_peak: peaks.v_reset_peak,
                    p_set: self.model.set_probability(peaks.v_set_peak),
                    p_reset: self.model.reset_probability(peaks.v_reset_peak),
                }
            })
            .collect();
        BranchProbabilities {
            delta_t: dt,
            records,
        }
    }

    /// Average compound conductance (siemens) with both ON and OFF terms.
    pub fn expected_conductance(&self, probs: &BranchProbabilities, polarity: Polarity) -> f64 {
        let g_on = 1.0 / self.model.r_on;
        let g_off = 1.0 / self.model.r_off;
        probs
            .records
            .iter()
            .map(|r| {
                let p_on = match polarity {
                    Polarity::SetFromAllOff => r.p_set,
                    Polarity::ResetFromAllOn => 1.0 - r.p_reset,
                };
                p_on * g_on + (1.0 - p_on) * g_off
            })
            .sum()
    }

    /// Applies one stochastic spike-pair event; `draws[i]` is consumed by
    /// device `i` only.
    pub fn apply_spike_pair(
        &mut self,
        probs: &BranchProbabilities,
        draws: &[f64],
    ) -> Result<Transitions> {
        if draws.len() != self.states.len() || probs.len() != self.states.len() {
            return Err(Error::config(format!(
                "spike pair needs {} probabilities and draws, got {} and {}",
                self.states.len(),
                probs.len(),
                draws.len()
            )));
        }
        Ok(apply_transitions(&mut self.states, &probs.records, draws))
    }
}

pub(crate) fn apply_transitions(
    states: &mut [DeviceState],
    probs: &[BranchProbability],
    draws: &[f64],
) -> Transitions {
    let mut t = Transitions::default();
    for ((state, r), &u) in states.iter_mut().zip(probs).zip(draws) {
        let next = sample_transition(*state, r.p_set, r.p_reset, u);
        match (*state, next) {
            (DeviceState::Off, DeviceState::On) => t.set_count += 1,
            (DeviceState::On, DeviceState::Off) => t.reset_count += 1,
            _ => {}
        }
        *state = next;
    }
    t
}

/// Expected number of ON devices after a SET event from all-OFF, with the ON
/// conductance normalized to one and the OFF conductance neglected.
pub fn expected_normalized_conductance(probs: &BranchProbabilities) -> f64 {
    probs.records.iter().map(|r| r.p_set).sum()
}

/// Exact distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities (Poisson-binomial PMF over `0..=n`).
pub fn state_distribution(p: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(p.len() + 1);
    pmf.push(1.0);
    for &q in p {
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * (1.0 - q) + pmf[k - 1] * q;
        }
        pmf[0] *= 1.0 - q;
    }
    pmf
}

/// Mean of a PMF over `0..len`.
pub fn pmf_mean(pmf: &[f64]) -> f64 {
    pmf.iter().enumerate().map(|(k, &w)| k as f64 * w).sum()
}

/// Most probable count; ties go to the smaller count.
pub fn pmf_mode(pmf: &[f64]) -> usize {
    let mut best = 0;
    for (k, &w) in pmf.iter().enumerate() {
        if w > pmf[best] {
            best = k;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::WaveformParams;
    use proptest::prelude::*;

    fn defaults() -> (CompoundSynapse, SpikeWaveform) {
        let branches = linear_attenuators(16, 0.6, 1.0).unwrap();
        let syn =
            CompoundSynapse::new(branches, DeviceModel::default(), AttenuateSide::Pre).unwrap();
        let w = SpikeWaveform::from_params(&WaveformParams::default()).unwrap();
        (syn, w)
    }

    /// Sum over all 2^n outcomes.
    fn brute_force_pmf(p: &[f64]) -> Vec<f64> {
        let n = p.len();
        let mut out = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let mut w = 1.0;
            for (i, &q) in p.iter().enumerate() {
                w *= if mask >> i & 1 == 1 { q } else { 1.0 - q };
            }
            out[mask.count_ones() as usize] += w;
        }
        out
    }

    #[test]
    fn attenuator_examples() {
        let b = linear_attenuators(16, 0.6, 1.0).unwrap();
        assert_eq!(b.len(), 16);
        assert_eq!(b[0].alpha, 0.6);
        assert_eq!(b[15].alpha, 1.0);
        assert!((b[1].alpha - b[0].alpha - 0.4 / 15.0).abs() < 1e-15);
        assert!(b.iter().all(|x| x.delay == 0.0));
        let one = linear_attenuators(1, 0.7, 0.7).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].alpha, 0.7);
        assert!(linear_attenuators(16, 1.0, 1.0)
            .unwrap()
            .iter()
            .all(|x| x.alpha == 1.0));
        assert!(linear_attenuators(0, 0.6, 1.0).is_err());
        assert!(linear_attenuators(4, 0.0, 1.0).is_err());
        assert!(linear_attenuators(4, 0.8, 0.6).is_err());
        assert!(linear_attenuators(4, 0.6, 1.2).is_err());
    }

    #[test]
    fn branch_probability_examples() {
        let (syn, w) = defaults();
        let probs = syn.branch_probabilities(&w, &w, 2.0);
        let top = probs.records[15];
        assert!((top.v_set_peak - 1.22).abs() < 1e-12);
        assert!((top.p_set - 0.986097).abs() < 1e-4);
        let bottom = probs.records[0];
        assert!((bottom.v_set_peak - 0.86).abs() < 1e-12);
        assert!((bottom.p_set - 0.080757).abs() < 1e-4);
    }

    #[test]
    fn flat_baseline_records_are_identical() {
        let branches = linear_attenuators(16, 1.0, 1.0).unwrap();
        let syn =
            CompoundSynapse::new(branches, DeviceModel::default(), AttenuateSide::Pre).unwrap();
        let w = SpikeWaveform::from_params(&WaveformParams::default()).unwrap();
        for dt in [-3.0, -0.5, 0.0, 0.7, 2.0, 4.4] {
            let p = syn.branch_probabilities(&w, &w, dt);
            assert!(p
                .records
                .iter()
                .all(|r| r.p_set == p.records[0].p_set && r.p_reset == p.records[0].p_reset));
        }
    }

    #[test]
    fn expected_conductance_examples() {
        let (syn, _) = defaults();
        let ones = BranchProbabilities {
            delta_t: 0.0,
            records: (0..16)
                .map(|index| BranchProbability {
                    index,
                    v_set_peak: 0.0,
                    v_reset_peak: 0.0,
                    p_set: 1.0,
                    p_reset: 0.0,
                })
                .collect(),
        };
        let ideal = CompoundSynapse::new(
            linear_attenuators(16, 0.6, 1.0).unwrap(),
            DeviceModel {
                r_off: f64::INFINITY,
                ..Default::default()
            },
            AttenuateSide::Pre,
        )
        .unwrap();
        assert_eq!(
            ideal.expected_conductance(&ones, Polarity::SetFromAllOff),
            16.0
        );
        assert_eq!(
            ideal.expected_conductance(&ones, Polarity::ResetFromAllOn),
            16.0
        );
        let halves = BranchProbabilities {
            records: ones
                .records
                .iter()
                .map(|r| BranchProbability { p_set: 0.5, ..*r })
                .collect(),
            ..ones.clone()
        };
        assert_eq!(
            ideal.expected_conductance(&halves, Polarity::SetFromAllOff),
            8.0
        );
        let zeros = BranchProbabilities {
            records: ones
                .records
                .iter()
                .map(|r| BranchProbability { p_set: 0.0, ..*r })
                .collect(),
            ..ones.clone()
        };
        let lossy = CompoundSynapse::new(
            syn.branches().to_vec(),
            DeviceModel {
                r_off: 1000.0,
                ..Default::default()
            },
            AttenuateSide::Pre,
        )
        .unwrap();
        assert!(
            (lossy.expected_conductance(&zeros, Polarity::SetFromAllOff) - 0.016).abs() < 1e-15
        );
        assert_eq!(expected_normalized_conductance(&ones), 16.0);
        assert_eq!(expected_normalized_conductance(&zeros), 0.0);
    }

    #[test]
    fn expected_normalized_conductance_at_dt2() {
        // Sum of Φ over the 16 closed-form peaks, evaluated with mpmath.
        let (syn, w) = defaults();
        let g = expected_normalized_conductance(&syn.branch_probabilities(&w, &w, 2.0));
        assert!((g - 9.565386983206189).abs() < 1e-9, "{g}");
    }

    #[test]
    fn state_distribution_examples() {
        assert_eq!(state_distribution(&[0.5, 0.5]), vec![0.25, 0.5, 0.25]);
        let pmf = state_distribution(&[0.1, 0.5, 0.9]);
        for (got, want) in pmf.iter().zip([0.045, 0.455, 0.455, 0.045]) {
            assert!((got - want).abs() < 1e-15);
        }
        let zero = state_distribution(&[0.0; 16]);
        assert_eq!(zero[0], 1.0);
        assert!(zero[1..].iter().all(|&w| w == 0.0));
        assert_eq!(state_distribution(&[]), vec![1.0]);
    }

    #[test]
    fn pmf_summaries() {
        assert_eq!(pmf_mode(&[0.25, 0.5, 0.25]), 1);
        assert_eq!(pmf_mode(&[0.5, 0.5]), 0);
        assert!((pmf_mean(&[0.25, 0.5, 0.25]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_spike_pair_examples() {
        let (mut syn, _) = defaults();
        let make = |p_set: &dyn Fn(usize) -> f64, p_reset: f64| BranchProbabilities {
            delta_t: 0.0,
            records: (0..16)
                .map(|index| BranchProbability {
                    index,
                    v_set_peak: 0.0,
                    v_reset_peak: 0.0,
                    p_set: p_set(index),
                    p_reset,
                })
                .collect(),
        };
        let draws: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
        let t = syn.apply_spike_pair(&make(&|_| 1.0, 0.0), &draws).unwrap();
        assert_eq!(t.set_count, 16);
        assert_eq!(syn.level(), 16);

        let t = syn.apply_spike_pair(&make(&|_| 0.0, 0.0), &draws).unwrap();
        assert_eq!(t.reset_count, 0);
        assert_eq!(syn.level(), 16);

        syn.fill_states(DeviceState::Off);
        let alternating = make(&|i| if i % 2 == 0 { 1.0 } else { 0.0 }, 0.0);
        for draws in [vec![0.0; 16], vec![0.999; 16], draws.clone()] {
            syn.fill_states(DeviceState::Off);
            assert_eq!(
                syn.apply_spike_pair(&alternating, &draws)
                    .unwrap()
                    .set_count,
                8
            );
        }
        assert!(syn.apply_spike_pair(&alternating, &draws[..3]).is_err());
    }

    #[test]
    fn ordering_follows_attenuation() {
        let (syn, w) = defaults();
        for i in 0..=100 {
            let dt = crate::waveform::snap(-5.0 + 0.1 * i as f64);
            if dt == 0.0 {
                continue;
            }
            let p = syn.branch_probabilities(&w, &w, dt);
            for pair in p.records.windows(2) {
                assert!(pair[0].p_set <= pair[1].p_set, "dt={dt}");
                assert!(pair[0].p_reset <= pair[1].p_reset, "dt={dt}");
            }
        }
    }

    #[test]
    fn coincident_pulses_invert_the_ordering() {
        // At dt = 0 the two pulses and the two tails overlap exactly, leaving
        // 0.4·(1 - alpha) and -0.9·(1 - alpha): the weakest branch carries the
        // largest (far sub-threshold) peaks of both signs.
        let (syn, w) = defaults();
        let p = syn.branch_probabilities(&w, &w, 0.0);
        assert!((p.records[0].v_set_peak - 0.4 * 0.4).abs() < 1e-12);
        assert!((p.records[0].v_reset_peak + 0.9 * 0.4).abs() < 1e-12);
        assert_eq!(p.records[15].v_set_peak, 0.0);
        assert_eq!(p.records[15].v_reset_peak, 0.0);
        assert!(p.records[0].p_reset > p.records[15].p_reset);
        assert!(p
            .records
            .iter()
            .all(|r| r.p_set < 1e-15 && r.p_reset < 1e-9));
    }

    #[test]
    fn asymmetry_of_peak_spreads() {
        let (syn, w) = defaults();
        let spread = |v: Vec<f64>| {
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        let set = spread(
            syn.branch_probabilities(&w, &w, 2.0)
                .records
                .iter()
                .map(|r| r.v_set_peak)
                .collect(),
        );
        let reset = spread(
            syn.branch_probabilities(&w, &w, -2.0)
                .records
                .iter()
                .map(|r| r.v_reset_peak.abs())
                .collect(),
        );
        assert!((set - 0.36).abs() < 1e-12);
        assert!((reset - 0.128).abs() < 1e-12);
        assert!(set / reset >= 2.0);
    }

    proptest! {
        #[test]
        fn pmf_moments(p in proptest::collection::vec(0.0f64..=1.0, 0..40)) {
            let pmf = state_distribution(&p);
            let total: f64 = pmf.iter().sum();
            let mean = pmf_mean(&pmf);
            let var: f64 = pmf.iter().enumerate().map(|(k, w)| (k as f64 - mean).powi(2) * w).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((mean - p.iter().sum::<f64>()).abs() < 1e-12);
            prop_assert!((var - p.iter().map(|q| q * (1.0 - q)).sum::<f64>()).abs() < 1e-12);
        }

        #[test]
        fn pmf_matches_enumeration(p in proptest::collection::vec(0.0f64..=1.0, 1..=12)) {
            let dp = state_distribution(&p);
            let bf = brute_force_pmf(&p);
            for (a, b) in dp.iter().zip(&bf) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
