//! Primary-channel occupancy, cooperative sensing and collision-bounded access.
//!
//! Channel state is `true` when a primary user is present (busy). A sensing
//! report `Θ` is also a boolean: `true` means "sensed busy".

use rand::Rng;

use crate::error::{Error, Result};

/// Two-state Markov occupancy of one licensed channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryChannel {
    /// idle → busy
    pub p01: f64,
    /// busy → idle
    pub p10: f64,
    utilization: Option<f64>,
}

impl PrimaryChannel {
    pub fn new(p01: f64, p10: f64) -> Result<Self> {
        for (name, p) in [("P01", p01), ("P10", p10)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p01, p10, utilization: None })
    }

    /// Overrides the utilization used as the fusion prior.
    pub fn with_utilization(mut self, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::config(format!("utilization {eta} must lie in [0, 1)")));
        }
        self.utilization = Some(eta);
        Ok(self)
    }

    /// Stationary busy probability `P01/(P01+P10)`; zero for a frozen chain.
    pub fn stationary_busy(&self) -> f64 {
        let s = self.p01 + self.p10;
        if s == 0.0 {
            0.0
        } else {
            self.p01 / s
        }
    }

    /// `η`: the override if set, else the stationary busy probability.
    pub fn utilization(&self) -> f64 {
        self.utilization.unwrap_or_else(|| self.stationary_busy())
    }

    pub fn step<R: Rng + ?Sized>(&self, busy: bool, rng: &mut R) -> bool {
        if busy {
            !rng.random_bool(self.p10)
        } else {
            rng.random_bool(self.p01)
        }
    }

    /// A state drawn from the stationary distribution.
    pub fn initial<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.random_bool(self.stationary_busy())
    }
}

/// False-alarm `ε = P(Θ=busy | idle)` and miss-detection `δ = P(Θ=idle | busy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorProfile {
    pub false_alarm: f64,
    pub miss: f64,
}

impl SensorProfile {
    pub fn new(false_alarm: f64, miss: f64) -> Result<Self> {
        for (name, p) in [("false alarm", false_alarm), ("miss detection", miss)] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::config(format!("{name} probability {p} must lie in [0, 0.5)")));
            }
        }
        Ok(Self { false_alarm, miss })
    }

    pub const PERFECT: SensorProfile = SensorProfile { false_alarm: 0.0, miss: 0.0 };

    /// `P(Θ | busy) / P(Θ | idle)`.
    fn likelihood_ratio(&self, sensed_busy: bool) -> f64 {
        if sensed_busy {
            (1.0 - self.miss) / self.false_alarm
        } else {
            self.miss / (1.0 - self.false_alarm)
        }
    }

    fn check(&self) -> Result<()> {
        let ok = |p: f64| (0.0..1.0).contains(&p);
        if !ok(self.false_alarm) || !ok(self.miss) || self.false_alarm + self.miss >= 1.0 {
            return Err(Error::domain(format!("degenerate sensor (ε = {}, δ = {})", self.false_alarm, self.miss)));
        }
        Ok(())
    }
}

/// One noisy look at a channel.
pub fn sense<R: Rng + ?Sized>(busy: bool, profile: &SensorProfile, rng: &mut R) -> bool {
    if busy {
        !rng.random_bool(profile.miss)
    } else {
        rng.random_bool(profile.false_alarm)
    }
}

fn check_inputs(eta: f64, observations: &[bool], profiles: &[SensorProfile]) -> Result<()> {
    if observations.is_empty() {
        return Err(Error::contract("fusion needs at least one observation"));
    }
    if observations.len() != profiles.len() {
        return Err(Error::contract(format!(
            "{} observations but {} sensor profiles",
            observations.len(),
            profiles.len()
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!("prior busy probability {eta} is not a probability")));
    }
    profiles.iter().try_for_each(SensorProfile::check)
}

/// Posterior probability that the channel is idle, computed observation by
/// observation from the prior busy probability `eta`.
pub fn fuse_beliefs(eta: f64, observations: &[bool], profiles: &[SensorProfile]) -> Result<f64> {
    check_inputs(eta, observations, profiles)?;
    let mut pa = 1.0 / (1.0 + eta / (1.0 - eta) * profiles[0].likelihood_ratio(observations[0]));
    for (&theta, profile) in observations.iter().zip(profiles).skip(1) {
        pa = 1.0 / (1.0 + (1.0 / pa - 1.0) * profile.likelihood_ratio(theta));
    }
    if pa.is_nan() {
        return Err(Error::domain("observations contradict each other with certainty"));
    }
    Ok(pa)
}

/// The same posterior from the joint likelihoods in one shot.
pub fn fuse_beliefs_batch(eta: f64, observations: &[bool], profiles: &[SensorProfile]) -> Result<f64> {
    check_inputs(eta, observations, profiles)?;
    let (mut idle, mut busy) = (1.0 - eta, eta);
    for (&theta, p) in observations.iter().zip(profiles) {
        idle *= if theta { p.false_alarm } else { 1.0 - p.false_alarm };
        busy *= if theta { 1.0 - p.miss } else { p.miss };
    }
    let z = idle + busy;
    if z == 0.0 {
        return Err(Error::domain("observations have zero likelihood under both hypotheses"));
    }
    Ok(idle / z)
}

/// Largest access probability keeping `P(collision) = P^D·(1 − P^A) ≤ γ`.
pub fn access_probability(pa: f64, gamma: f64) -> f64 {
    if pa >= 1.0 {
        1.0
    } else {
        (gamma / (1.0 - pa)).min(1.0)
    }
}

/// Channels chosen for access in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessDecision {
    /// `A(t)`, ascending.
    pub channels: Vec<usize>,
    /// `G = Σ_{m∈A(t)} P^A_m`.
    pub expected_idle: f64,
}

/// Independently accesses each channel with probability `P^D_m`.
pub fn decide_access<R: Rng + ?Sized>(beliefs: &[f64], access: &[f64], rng: &mut R) -> AccessDecision {
    let channels: Vec<usize> =
        access.iter().enumerate().filter(|&(_, &pd)| rng.random_bool(pd.clamp(0.0, 1.0))).map(|(m, _)| m).collect();
    let expected_idle = channels.iter().map(|&m| beliefs[m]).sum();
    AccessDecision { channels, expected_idle }
}

/// Sensing reports for one slot.
///
/// Each of `users` CR users senses one channel, user `j` taking channel
/// `(j + slot) mod M`; each of `fbs_sensors` FBSs senses every channel. The
/// reports for channel `m` are returned in sensing order.
pub fn gather_reports<R: Rng + ?Sized>(
    states: &[bool],
    slot: u64,
    users: usize,
    fbs_sensors: usize,
    profile: &SensorProfile,
    rng: &mut R,
) -> Vec<Vec<bool>> {
    let m = states.len();
    let mut reports = vec![Vec::new(); m];
    if m == 0 {
        return reports;
    }
    for j in 0..users {
        let ch = ((j as u64 + slot) % m as u64) as usize;
        reports[ch].push(sense(states[ch], profile, rng));
    }
    for _ in 0..fbs_sensors {
        for (ch, r) in reports.iter_mut().enumerate() {
            r.push(sense(states[ch], profile, rng));
        }
    }
    reports
}

/// Posterior idle probability per channel; unsensed channels keep the prior.
pub fn channel_beliefs(etas: &[f64], reports: &[Vec<bool>], profile: &SensorProfile) -> Result<Vec<f64>> {
    etas.iter()
        .zip(reports)
        .map(
            |(&eta, obs)| {
                if obs.is_empty() {
                    Ok(1.0 - eta)
                } else {
                    fuse_beliefs(eta, obs, &vec![*profile; obs.len()])
                }
            },
        )
        .collect()
}
