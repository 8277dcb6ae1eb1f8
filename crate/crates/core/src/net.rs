//! Network topology, block-fading channel gains and unit conversions.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StationKind {
    Mbs,
    Fbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    /// 0 for the MBS, 1..=M for the FBSs.
    pub id: usize,
    pub kind: StationKind,
    /// Hz.
    pub bandwidth: f64,
}

/// One MBS plus `M` FBSs, and the femtocell (if any) covering each user.
///
/// Every user is covered by the MBS; `coverage[k] = Some(m)` additionally puts
/// user `k` inside femtocell `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    stations: Vec<BaseStation>,
    coverage: Vec<Option<usize>>,
}

impl Network {
    pub fn new(stations: Vec<BaseStation>, coverage: Vec<Option<usize>>) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::config("network needs an MBS"));
        }
        for (i, bs) in stations.iter().enumerate() {
            if bs.id != i {
                return Err(Error::config(format!("station at position {i} has id {}", bs.id)));
            }
            let expected = if i == 0 { StationKind::Mbs } else { StationKind::Fbs };
            if bs.kind != expected {
                return Err(Error::config(format!("station {i} must be {expected:?}")));
            }
            if !(bs.bandwidth > 0.0 && bs.bandwidth.is_finite()) {
                return Err(Error::config(format!("station {i} bandwidth must be positive")));
            }
        }
        let fbs = stations.len() - 1;
        for (k, c) in coverage.iter().enumerate() {
            if let Some(m) = *c {
                if m == 0 || m > fbs {
                    return Err(Error::config(format!("user {k} covered by FBS {m}, valid range is 1..={fbs}")));
                }
            }
        }
        Ok(Self { stations, coverage })
    }

    /// MBS with bandwidth `mbs_bw` and one FBS per entry of `fbs_bw`.
    pub fn with_bandwidths(mbs_bw: f64, fbs_bw: &[f64], coverage: Vec<Option<usize>>) -> Result<Self> {
        let mut stations = vec![BaseStation { id: 0, kind: StationKind::Mbs, bandwidth: mbs_bw }];
        stations.extend(fbs_bw.iter().enumerate().map(|(i, &b)| BaseStation {
            id: i + 1,
            kind: StationKind::Fbs,
            bandwidth: b,
        }));
        Self::new(stations, coverage)
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn coverage(&self) -> &[Option<usize>] {
        &self.coverage
    }

    /// Number of FBSs (`M`).
    pub fn num_fbs(&self) -> usize {
        self.stations.len() - 1
    }

    pub fn num_users(&self) -> usize {
        self.coverage.len()
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.bandwidth).collect()
    }
}

/// Per-slot gains `H[m][k]` from base station `m` to user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGainMatrix {
    gains: Vec<Vec<f64>>,
}

impl ChannelGainMatrix {
    pub fn new(gains: Vec<Vec<f64>>) -> Result<Self> {
        let users = gains.first().map_or(0, Vec::len);
        for (m, row) in gains.iter().enumerate() {
            if row.len() != users {
                return Err(Error::contract(format!("gain row {m} has {} users, expected {users}", row.len())));
            }
            if let Some(k) = row.iter().position(|h| !(*h > 0.0 && h.is_finite())) {
                return Err(Error::domain(format!("gain H[{m}][{k}] = {} is not positive", row[k])));
            }
        }
        Ok(Self { gains })
    }

    #[inline]
    pub fn get(&self, station: usize, user: usize) -> f64 {
        self.gains[station][user]
    }

    pub fn row(&self, station: usize) -> &[f64] {
        &self.gains[station]
    }

    pub fn num_stations(&self) -> usize {
        self.gains.len()
    }

    pub fn num_users(&self) -> usize {
        self.gains.first().map_or(0, Vec::len)
    }

    /// Multiplies every gain by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { gains: self.gains.iter().map(|r| r.iter().map(|h| h * factor).collect()).collect() }
    }
}

/// I.i.d. exponential (Rayleigh-power) block fading with per-link means.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSpec {
    means: Vec<Vec<f64>>,
    seed: u64,
}

impl FadingSpec {
    pub fn new(means: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        for (m, row) in means.iter().enumerate() {
            if let Some(k) = row.iter().position(|mu| !(*mu > 0.0 && mu.is_finite())) {
                return Err(Error::config(format!("fading mean for ({m},{k}) must be positive, got {}", row[k])));
            }
        }
        Ok(Self { means, seed })
    }

    pub fn uniform(stations: usize, users: usize, mean: f64, seed: u64) -> Result<Self> {
        Self::new(vec![vec![mean; users]; stations], seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Gains for one slot. Each station draws from its own `(seed, slot, m)`
    /// stream, users in index order.
    pub fn sample(&self, slot: u64) -> ChannelGainMatrix {
        let gains = self
            .means
            .iter()
            .enumerate()
            .map(|(m, row)| {
                let mut rng = rng::stream(self.seed, Purpose::Gains, &[slot, m as u64]);
                row.iter()
                    .map(|&mu| {
                        let x: f64 = rng.sample(Exp1);
                        // Exp1 can return exactly 0 with negligible probability.
                        (x * mu).max(f64::MIN_POSITIVE)
                    })
                    .collect()
            })
            .collect();
        ChannelGainMatrix { gains }
    }
}

/// `sample_gains` over an explicit network; the spec must cover all of it.
pub fn sample_gains(spec: &FadingSpec, network: &Network, slot: u64) -> Result<ChannelGainMatrix> {
    if spec.means.len() != network.stations().len() || spec.means.iter().any(|r| r.len() != network.num_users()) {
        return Err(Error::config(format!(
            "fading means are {}x{}, network is {}x{}",
            spec.means.len(),
            spec.means.first().map_or(0, Vec::len),
            network.stations().len(),
            network.num_users()
        )));
    }
    Ok(spec.sample(slot))
}

/// Watts to dBm.
pub fn to_dbm(watts: f64) -> Result<f64> {
    if !(watts > 0.0) || !watts.is_finite() {
        return Err(Error::domain(format!("power must be positive to convert to dBm, got {watts}")));
    }
    Ok(10.0 * (watts / 1e-3).log10())
}

/// dBm to watts.
pub fn from_dbm(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Interference footprint: one cylinder per station, height = bandwidth in MHz,
/// radius = `radius_per_watt * power`. Returns MHz·m².
pub fn footprint_volume(powers: &[f64], bandwidths_hz: &[f64], radius_per_watt: f64) -> f64 {
    powers
        .iter()
        .zip(bandwidths_hz)
        .map(|(p, b)| {
            let r = radius_per_watt * p;
            std::f64::consts::PI * r * r * (b / 1e6)
        })
        .sum()
}
