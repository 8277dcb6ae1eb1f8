//! Minimum-power layered multicast with superposition coding and SIC.
//!
//! Users are grouped by the level they request. A base station that serves
//! levels `l..=L` superposes one layer per level; a user at level `l` cancels
//! the layers below it and treats the layers above it as noise. Power is kept
//! in cumulative form `Q[m][l] = Σ_{i≥l} P[m][i]` so that the SNR constraint
//! becomes the scalar recursion [`f_step`].

mod bounds;
mod brute;
mod solvers;

pub use bounds::{bounds, Bounds};
pub use brute::{brute_force_multicast, BRUTE_FORCE_LIMIT};
pub use solvers::{heuristic_assign, solve_case1, solve_case2, solve_case3};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{ChannelGainMatrix, Network};

/// Relative tolerance on SNR slack.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// `2^(rate/bandwidth) − 1`.
pub fn snr_threshold(rate: f64, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("target rate must be non-negative, got {rate}")));
    }
    Ok((rate / bandwidth).exp2() - 1.0)
}

/// One step of the cumulative-power recursion.
///
/// `inv_gains` holds `1/H` of the users served at this level. With no users
/// the level costs nothing and `q_next` passes through.
pub fn f_step(q_next: f64, inv_gains: impl IntoIterator<Item = f64>, gamma: f64, noise: f64) -> f64 {
    match worst(inv_gains) {
        None => q_next,
        Some(w) => noise * gamma * w + (1.0 + gamma) * q_next,
    }
}

fn worst(inv_gains: impl IntoIterator<Item = f64>) -> Option<f64> {
    inv_gains.into_iter().fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
}

/// Which level each user requests. Levels are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDemand {
    levels: usize,
    user_level: Vec<usize>,
}

impl LevelDemand {
    pub fn new(levels: usize, user_level: Vec<usize>) -> Result<Self> {
        if levels == 0 {
            return Err(Error::config("at least one level is required"));
        }
        if let Some(k) = user_level.iter().position(|&l| l >= levels) {
            return Err(Error::config(format!(
                "user {k} requests level {} but only {levels} exist",
                user_level[k] + 1
            )));
        }
        Ok(Self { levels, user_level })
    }

    /// Random demand in which every level is requested by at least one user.
    pub fn random<R: Rng + ?Sized>(users: usize, levels: usize, rng: &mut R) -> Result<Self> {
        if users < levels {
            return Err(Error::config(format!("{users} users cannot cover {levels} nonempty levels")));
        }
        let mut user_level: Vec<usize> =
            (0..users).map(|k| if k < levels { k } else { rng.random_range(0..levels) }).collect();
        user_level.shuffle(rng);
        Self::new(levels, user_level)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn num_users(&self) -> usize {
        self.user_level.len()
    }

    pub fn level_of(&self, user: usize) -> usize {
        self.user_level[user]
    }

    pub fn user_levels(&self) -> &[usize] {
        &self.user_level
    }

    /// `U_l`.
    pub fn users_at(&self, level: usize) -> Vec<usize> {
        (0..self.user_level.len()).filter(|&k| self.user_level[k] == level).collect()
    }
}

/// Everything a multicast solver needs for one slot.
#[derive(Debug, Clone)]
pub struct Instance {
    coverage: Vec<Option<usize>>,
    demand: LevelDemand,
    gains: ChannelGainMatrix,
    gamma: Vec<f64>,
    noise: f64,
}

impl Instance {
    /// Thresholds are derived from the target rate and each station's bandwidth.
    pub fn new(
        network: &Network,
        demand: LevelDemand,
        gains: ChannelGainMatrix,
        rate: f64,
        noise: f64,
    ) -> Result<Self> {
        let gamma = network.stations().iter().map(|s| snr_threshold(rate, s.bandwidth)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(network.coverage().to_vec(), demand, gains, gamma, noise)
    }

    pub fn from_parts(
        coverage: Vec<Option<usize>>,
        demand: LevelDemand,
        gains: ChannelGainMatrix,
        gamma: Vec<f64>,
        noise: f64,
    ) -> Result<Self> {
        let stations = gamma.len();
        if stations == 0 {
            return Err(Error::contract("no base stations"));
        }
        if gains.num_stations() != stations {
            return Err(Error::contract(format!(
                "gain matrix has {} stations, thresholds have {stations}",
                gains.num_stations()
            )));
        }
        let users = demand.num_users();
        if coverage.len() != users || (users > 0 && gains.num_users() != users) {
            return Err(Error::contract(format!(
                "demand has {users} users, coverage {}, gains {}",
                coverage.len(),
                gains.num_users()
            )));
        }
        if let Some(k) = coverage.iter().position(|c| matches!(c, Some(m) if *m == 0 || *m >= stations)) {
            return Err(Error::contract(format!("user {k} has invalid coverage {:?}", coverage[k])));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::domain(format!("SNR threshold {g} is not a finite non-negative number")));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::domain(format!("noise power must be positive, got {noise}")));
        }
        Ok(Self { coverage, demand, gains, gamma, noise })
    }

    pub fn num_stations(&self) -> usize {
        self.gamma.len()
    }

    pub fn num_users(&self) -> usize {
        self.demand.num_users()
    }

    pub fn levels(&self) -> usize {
        self.demand.levels()
    }

    pub fn demand(&self) -> &LevelDemand {
        &self.demand
    }

    pub fn gains(&self) -> &ChannelGainMatrix {
        &self.gains
    }

    pub fn coverage(&self) -> &[Option<usize>] {
        &self.coverage
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn is_eligible(&self, user: usize, station: usize) -> bool {
        station == 0 || self.coverage[user] == Some(station)
    }

    /// `S_l^m`: users at `level` that station `m` can serve.
    pub fn eligible(&self, level: usize, station: usize) -> Vec<usize> {
        (0..self.num_users()).filter(|&k| self.demand.level_of(k) == level && self.is_eligible(k, station)).collect()
    }

    /// `W_m(U) = max_{k∈U} 1/H_m^k`, zero on the empty set.
    pub fn worst_inverse_gain(&self, station: usize, users: &[usize]) -> f64 {
        users.iter().map(|&k| 1.0 / self.gains.get(station, k)).fold(0.0, f64::max)
    }

    /// Same instance with the noise power replaced.
    pub fn with_noise(&self, noise: f64) -> Result<Self> {
        Self::from_parts(self.coverage.clone(), self.demand.clone(), self.gains.clone(), self.gamma.clone(), noise)
    }
}

/// A connection decision: one serving station per user, plus the derived
/// per-level sets `U_l^m` and exponents `c_l^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelAssignment {
    station: Vec<usize>,
    sets: Vec<Vec<Vec<usize>>>,
    exponents: Vec<Vec<u32>>,
}

impl LevelAssignment {
    pub fn from_stations(inst: &Instance, station: Vec<usize>) -> Result<Self> {
        if station.len() != inst.num_users() {
            return Err(Error::contract(format!(
                "assignment covers {} users, instance has {}",
                station.len(),
                inst.num_users()
            )));
        }
        let (m_count, levels) = (inst.num_stations(), inst.levels());
        let mut sets = vec![vec![Vec::new(); levels]; m_count];
        for (k, &m) in station.iter().enumerate() {
            if m >= m_count || !inst.is_eligible(k, m) {
                return Err(Error::contract(format!("user {k} cannot connect to station {m}")));
            }
            sets[m][inst.demand().level_of(k)].push(k);
        }
        let exponents = sets
            .iter()
            .map(|per_level: &Vec<Vec<usize>>| {
                let mut c = 0u32;
                per_level
                    .iter()
                    .map(|u| {
                        let here = c;
                        if !u.is_empty() {
                            c += 1;
                        }
                        here
                    })
                    .collect()
            })
            .collect();
        Ok(Self { station, sets, exponents })
    }

    /// Every user on station `m`.
    pub fn all_to(inst: &Instance, m: usize) -> Result<Self> {
        Self::from_stations(inst, vec![m; inst.num_users()])
    }

    pub fn station_of(&self, user: usize) -> usize {
        self.station[user]
    }

    pub fn stations(&self) -> &[usize] {
        &self.station
    }

    /// `U_l^m`.
    pub fn users(&self, station: usize, level: usize) -> &[usize] {
        &self.sets[station][level]
    }

    /// `c_l^m`.
    pub fn exponent(&self, station: usize, level: usize) -> u32 {
        self.exponents[station][level]
    }

    /// The indicator `I[m][k]`.
    pub fn indicator(&self, station: usize, user: usize) -> bool {
        self.station[user] == station
    }
}

/// Cumulative and per-level powers for every station, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// `q[m][l]` for `l = 0..=L`, with `q[m][L] = 0`.
    pub q: Vec<Vec<f64>>,
    /// `p[m][l] = q[m][l] − q[m][l+1]`.
    pub p: Vec<Vec<f64>>,
    pub total: f64,
    pub noise: f64,
}

impl PowerAllocation {
    fn from_cumulative(q: Vec<Vec<f64>>, noise: f64) -> Self {
        let p = q.iter().map(|row| row.windows(2).map(|w| w[0] - w[1]).collect()).collect();
        let total = q.iter().map(|row| row[0]).sum();
        Self { q, p, total, noise }
    }

    /// Total power of station `m`.
    pub fn station_total(&self, m: usize) -> f64 {
        self.q[m][0]
    }
}

/// Backward recursion of [`f_step`] from the top level down.
pub fn total_power(inst: &Instance, asg: &LevelAssignment) -> PowerAllocation {
    let levels = inst.levels();
    let q = (0..inst.num_stations())
        .map(|m| {
            let mut row = vec![0.0; levels + 1];
            for l in (0..levels).rev() {
                let inv = asg.users(m, l).iter().map(|&k| 1.0 / inst.gains().get(m, k));
                row[l] = f_step(row[l + 1], inv, inst.gamma()[m], inst.noise());
            }
            row
        })
        .collect();
    PowerAllocation::from_cumulative(q, inst.noise())
}

/// `Q[m][0]` for every station via the folded sum
/// `N0·Γ_m·Σ_l (1+Γ_m)^{c_l^m}·W_m(U_l^m)`.
pub fn folded_sum(inst: &Instance, asg: &LevelAssignment) -> Vec<f64> {
    (0..inst.num_stations())
        .map(|m| {
            let g = inst.gamma()[m];
            let s: f64 = (0..inst.levels())
                .map(|l| (1.0 + g).powi(asg.exponent(m, l) as i32) * inst.worst_inverse_gain(m, asg.users(m, l)))
                .sum();
            inst.noise() * g * s
        })
        .collect()
}

/// Per-user outcome of [`verify_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `snr/Γ − 1` per user (`snr − Γ` when `Γ = 0`).
    pub slack: Vec<f64>,
    pub snr: Vec<f64>,
    /// Violations of structural constraints (negative powers, transceiver count).
    pub violations: Vec<String>,
}

impl Feasibility {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Checks every user's SIC SNR against its station's threshold using the
/// per-level powers, plus `P ≥ 0` and the one-transceiver constraint.
pub fn verify_feasible(inst: &Instance, asg: &LevelAssignment, alloc: &PowerAllocation) -> Feasibility {
    let levels = inst.levels();
    let mut violations = Vec::new();
    let scale = alloc.total.abs().max(f64::MIN_POSITIVE);
    for (m, row) in alloc.p.iter().enumerate() {
        for (l, &p) in row.iter().enumerate() {
            if p < -FEASIBILITY_TOL * scale {
                violations.push(format!("P[{m}][{}] = {p} is negative", l + 1));
            }
        }
    }
    for k in 0..inst.num_users() {
        let count = (0..inst.num_stations()).filter(|&m| asg.indicator(m, k)).count();
        if count != 1 {
            violations.push(format!("user {k} connects to {count} stations"));
        }
    }
    let mut snr = Vec::with_capacity(inst.num_users());
    let mut slack = Vec::with_capacity(inst.num_users());
    for k in 0..inst.num_users() {
        let m = asg.station_of(k);
        let l = inst.demand().level_of(k);
        let h = inst.gains().get(m, k);
        let above: f64 = alloc.p[m][l + 1..levels].iter().sum();
        let s = h * alloc.p[m][l] / (inst.noise() + h * above);
        let g = inst.gamma()[m];
        snr.push(s);
        slack.push(if g > 0.0 { s / g - 1.0 } else { s - g });
    }
    let feasible = violations.is_empty() && slack.iter().all(|&s| s >= -FEASIBILITY_TOL);
    Feasibility { feasible, slack, snr, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn single_bs(inv: &[&[f64]], gamma: f64) -> Instance {
        let mut user_level = Vec::new();
        let mut gains = Vec::new();
        for (l, users) in inv.iter().enumerate() {
            for &w in users.iter() {
                user_level.push(l);
                gains.push(1.0 / w);
            }
        }
        let demand = LevelDemand::new(inv.len(), user_level).unwrap();
        let n = gains.len();
        Instance::from_parts(vec![None; n], demand, ChannelGainMatrix::new(vec![gains]).unwrap(), vec![gamma], 1.0)
            .unwrap()
    }

    #[test]
    fn threshold_values() {
        assert_relative_eq!(snr_threshold(2e6, 1e6).unwrap(), 3.0);
        assert_relative_eq!(snr_threshold(2e6, 2e6).unwrap(), 1.0);
        assert_eq!(snr_threshold(0.0, 5e5).unwrap(), 0.0);
        assert!(matches!(snr_threshold(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(snr_threshold(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn f_step_cases() {
        assert_eq!(f_step(5.0, std::iter::empty(), 3.0, 1.0), 5.0);
        assert_eq!(f_step(0.0, [1.0], 3.0, 1.0), 3.0);
        assert_eq!(f_step(3.0, [1.0], 3.0, 1.0), 15.0);
        assert_eq!(f_step(0.0, [0.5, 2.0, 1.0], 1.0, 1.0), 2.0);
    }

    #[test]
    fn two_level_hand_example() {
        let inst = single_bs(&[&[1.0], &[1.0]], 3.0);
        let asg = LevelAssignment::all_to(&inst, 0).unwrap();
        let alloc = total_power(&inst, &asg);
        assert_eq!(alloc.q[0], vec![15.0, 3.0, 0.0]);
        assert_eq!(alloc.p[0], vec![12.0, 3.0]);
        assert_eq!(alloc.total, 15.0);
        assert_relative_eq!(folded_sum(&inst, &asg)[0], 15.0);
        let f = verify_feasible(&inst, &asg, &alloc);
        assert!(f.feasible);
        for s in f.snr {
            assert_relative_eq!(s, 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduced_power_is_infeasible() {
        let inst = single_bs(&[&[1.0, 0.4], &[2.0], &[0.7]], 3.0);
        let asg = LevelAssignment::all_to(&inst, 0).unwrap();
        let alloc = total_power(&inst, &asg);
        assert!(verify_feasible(&inst, &asg, &alloc).feasible);
        for l in 0..3 {
            let mut cut = alloc.clone();
            cut.p[0][l] *= 0.99;
            assert!(!verify_feasible(&inst, &asg, &cut).feasible, "level {l}");
        }
    }

    #[test]
    fn idle_station_and_empty_instance() {
        let demand = LevelDemand::new(2, vec![0, 1]).unwrap();
        let gains = ChannelGainMatrix::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let inst = Instance::from_parts(vec![Some(1), Some(1)], demand, gains, vec![3.0, 3.0], 1.0).unwrap();
        let asg = LevelAssignment::all_to(&inst, 1).unwrap();
        let alloc = total_power(&inst, &asg);
        assert!(alloc.q[0].iter().all(|&q| q == 0.0));

        let demand = LevelDemand::new(3, vec![]).unwrap();
        let inst = Instance::from_parts(vec![], demand, ChannelGainMatrix::new(vec![vec![]]).unwrap(), vec![3.0], 1.0)
            .unwrap();
        let asg = LevelAssignment::all_to(&inst, 0).unwrap();
        let alloc = total_power(&inst, &asg);
        assert_eq!(alloc.total, 0.0);
        assert!(verify_feasible(&inst, &asg, &alloc).feasible);
    }

    #[test]
    fn exponents_skip_empty_levels() {
        let demand = LevelDemand::new(4, vec![0, 2, 3]).unwrap();
        let inst = Instance::from_parts(
            vec![None; 3],
            demand,
            ChannelGainMatrix::new(vec![vec![1.0; 3]]).unwrap(),
            vec![1.0],
            1.0,
        )
        .unwrap();
        let asg = LevelAssignment::all_to(&inst, 0).unwrap();
        let c: Vec<u32> = (0..4).map(|l| asg.exponent(0, l)).collect();
        assert_eq!(c, vec![0, 1, 1, 2]);
        let alloc = total_power(&inst, &asg);
        assert_relative_eq!(folded_sum(&inst, &asg)[0], alloc.total, max_relative = 1e-12);
    }

    #[test]
    fn ineligible_station_is_rejected() {
        let demand = LevelDemand::new(1, vec![0, 0]).unwrap();
        let gains = ChannelGainMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let inst = Instance::from_parts(vec![Some(1), None], demand, gains, vec![1.0; 3], 1.0).unwrap();
        assert!(LevelAssignment::from_stations(&inst, vec![1, 0]).is_ok());
        assert!(matches!(LevelAssignment::from_stations(&inst, vec![2, 0]), Err(Error::Contract(_))));
        assert!(matches!(LevelAssignment::from_stations(&inst, vec![0, 1]), Err(Error::Contract(_))));
    }

    #[test]
    fn random_demand_fills_every_level() {
        let mut rng = crate::rng::stream(1, crate::rng::Purpose::Demand, &[]);
        for _ in 0..50 {
            let d = LevelDemand::random(8, 5, &mut rng).unwrap();
            assert!((0..5).all(|l| !d.users_at(l).is_empty()));
        }
        assert!(LevelDemand::random(2, 3, &mut rng).is_err());
    }
}
