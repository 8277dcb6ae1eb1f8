//! Per-slot scheduling of scalable video over a femtocell CR network.
//!
//! Each CR user `j` either listens to the MBS on the common channel (`p_j = 1`)
//! or to its own FBS on the licensed channels allocated to that FBS
//! (`p_j = 0`). The slot problem maximizes
//!
//! ```text
//! Σ_j [ p_j·P̄0_j·ln(W_j + ρ0_j·R0_j) + (1−p_j)·P̄i_j·ln(W_j + ρi_j·G_i·Ri_j) ]
//! ```
//!
//! subject to every transmitter splitting at most one slot among its users.

mod dual;
mod graph;
mod greedy;
mod heuristics;

pub use dual::{solve_noninterfering, solve_single_fbs, DualConfig, TraceRow};
pub use graph::InterferenceGraph;
pub use greedy::{
    brute_force_alloc, greedy_alloc, omega_partition, optbound_upper, ChannelAllocation, GreedyConfig, GreedyStep,
    ALLOC_BRUTE_FORCE_LIMIT,
};
pub use heuristics::{heuristic_diversity, heuristic_equal};

use crate::error::{Error, Result};

/// Time-share tolerance on `Σρ ≤ 1`.
pub const SHARE_TOL: f64 = 1e-6;

/// Per-user inputs for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSlot {
    /// FBS the user is associated with (0-based among FBSs).
    pub fbs: usize,
    /// `P̄_{0,j}`
    pub success_mbs: f64,
    /// `P̄_{i,j}`
    pub success_fbs: f64,
    /// `W_j^-`, dB
    pub psnr: f64,
    /// `R_{0,j}`
    pub rate_mbs: f64,
    /// `R_{i,j}` per unit of expected channel count
    pub rate_fbs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotProblem {
    users: Vec<UserSlot>,
    channels: Vec<f64>,
}

impl SlotProblem {
    /// `channels[i]` is `G_i`, the expected number of idle channels FBS `i` may use.
    pub fn new(users: Vec<UserSlot>, channels: Vec<f64>) -> Result<Self> {
        for (j, u) in users.iter().enumerate() {
            if u.fbs >= channels.len() {
                return Err(Error::contract(format!("user {j} belongs to missing FBS {}", u.fbs)));
            }
            for (name, p) in [("MBS", u.success_mbs), ("FBS", u.success_fbs)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::contract(format!("user {j}: {name} success probability {p}")));
                }
            }
            if !(u.psnr > 0.0 && u.psnr.is_finite()) {
                return Err(Error::contract(format!("user {j}: entering PSNR {} must be positive", u.psnr)));
            }
            if !(u.rate_mbs >= 0.0 && u.rate_fbs >= 0.0) {
                return Err(Error::contract(format!("user {j}: negative rate constant")));
            }
        }
        if let Some(g) = channels.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::contract(format!("channel count {g} is not a finite non-negative number")));
        }
        Ok(Self { users, channels })
    }

    /// The same users with a different per-FBS channel count.
    pub fn with_channels(&self, channels: Vec<f64>) -> Result<Self> {
        if channels.len() != self.channels.len() {
            return Err(Error::contract("channel vector length must match the FBS count"));
        }
        Self::new(self.users.clone(), channels)
    }

    pub fn users(&self) -> &[UserSlot] {
        &self.users
    }

    pub fn channels(&self) -> &[f64] {
        &self.channels
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_fbs(&self) -> usize {
        self.channels.len()
    }

    /// MBS plus every FBS.
    pub fn num_transmitters(&self) -> usize {
        1 + self.channels.len()
    }

    /// `(P̄, W, R)` of user `j` on a branch, with `R = G_i·R_{i,j}` for the FBS.
    pub fn branch(&self, j: usize, mbs: bool) -> (f64, f64, f64) {
        let u = &self.users[j];
        if mbs {
            (u.success_mbs, u.psnr, u.rate_mbs)
        } else {
            (u.success_fbs, u.psnr, self.channels[u.fbs] * u.rate_fbs)
        }
    }

    /// Transmitter index (0 = MBS, `1 + i` = FBS `i`) serving `j` on a branch.
    pub fn transmitter(&self, j: usize, mbs: bool) -> usize {
        if mbs {
            0
        } else {
            1 + self.users[j].fbs
        }
    }
}

/// A primal point: branch and time share per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSolution {
    /// `p_j = 1` (MBS) when true.
    pub mbs: Vec<bool>,
    /// `ρ` on the chosen branch; the other branch's share is zero.
    pub share: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(dual − primal)/|dual|` with the smallest dual value seen.
    pub duality_gap: f64,
    /// Final dual prices `λ` (MBS first).
    pub duals: Vec<f64>,
    /// Solver-internal iterate, usable as a warm start.
    pub state: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

impl ScheduleSolution {
    /// Builds a solution for a fixed primal point.
    pub fn from_point(problem: &SlotProblem, mbs: Vec<bool>, share: Vec<f64>) -> Result<Self> {
        let objective = branch_objective(problem, &mbs, &share)?;
        Ok(Self {
            mbs,
            share,
            objective,
            iterations: 0,
            converged: true,
            duality_gap: f64::NAN,
            duals: Vec::new(),
            state: Vec::new(),
            trace: Vec::new(),
        })
    }

    /// `ρ_{0,j}`.
    pub fn share_mbs(&self, j: usize) -> f64 {
        if self.mbs[j] {
            self.share[j]
        } else {
            0.0
        }
    }

    /// `ρ_{i,j}` on the user's FBS.
    pub fn share_fbs(&self, j: usize) -> f64 {
        if self.mbs[j] {
            0.0
        } else {
            self.share[j]
        }
    }

    /// Total share used on every transmitter.
    pub fn load(&self, problem: &SlotProblem) -> Vec<f64> {
        let mut load = vec![0.0; problem.num_transmitters()];
        for j in 0..self.mbs.len() {
            load[problem.transmitter(j, self.mbs[j])] += self.share[j];
        }
        load
    }

    pub fn is_feasible(&self, problem: &SlotProblem) -> bool {
        self.share.iter().all(|&s| s >= 0.0) && self.load(problem).iter().all(|&l| l <= 1.0 + SHARE_TOL)
    }
}

/// The slot objective for general `p ∈ [0,1]` and both shares, natural log.
pub fn objective_value(problem: &SlotProblem, p: &[f64], rho_mbs: &[f64], rho_fbs: &[f64]) -> Result<f64> {
    let k = problem.num_users();
    if p.len() != k || rho_mbs.len() != k || rho_fbs.len() != k {
        return Err(Error::contract("objective inputs must have one entry per user"));
    }
    let mut total = 0.0;
    for j in 0..k {
        for (weight, mbs, rho) in [(p[j], true, rho_mbs[j]), (1.0 - p[j], false, rho_fbs[j])] {
            let (succ, w, r) = problem.branch(j, mbs);
            let arg = w + rho * r;
            if !(arg > 0.0) {
                return Err(Error::contract(format!("log argument {arg} for user {j} is not positive")));
            }
            total += weight * succ * arg.ln();
        }
    }
    Ok(total)
}

fn branch_objective(problem: &SlotProblem, mbs: &[bool], share: &[f64]) -> Result<f64> {
    let p: Vec<f64> = mbs.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let r0: Vec<f64> = (0..mbs.len()).map(|j| if mbs[j] { share[j] } else { 0.0 }).collect();
    let r1: Vec<f64> = (0..mbs.len()).map(|j| if mbs[j] { 0.0 } else { share[j] }).collect();
    objective_value(problem, &p, &r0, &r1)
}

/// One user's best response to prices `λ` (index 0 = MBS, `1 + i` = FBS `i`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserChoice {
    pub mbs: bool,
    pub share: f64,
    /// Lagrangian contribution `P̄·ln(W + ρR) − λρ` of the chosen branch.
    pub value: f64,
}

fn branch_response(succ: f64, w: f64, r: f64, lambda: f64) -> (f64, f64) {
    let rho = if r <= 0.0 || succ <= 0.0 {
        0.0
    } else if lambda <= 0.0 {
        1.0
    } else {
        (succ / lambda - w / r).max(0.0)
    };
    (rho, succ * (w + rho * r).ln() - lambda * rho)
}

/// Maximizes user `j`'s Lagrangian term over both branches; ties go to the MBS.
pub fn user_subproblem(problem: &SlotProblem, j: usize, lambda: &[f64]) -> UserChoice {
    let (s0, w, r0) = problem.branch(j, true);
    let (s1, _, r1) = problem.branch(j, false);
    let (rho0, l0) = branch_response(s0, w, r0, lambda[0]);
    let (rho1, l1) = branch_response(s1, w, r1, lambda[problem.transmitter(j, false)]);
    if l0 >= l1 {
        UserChoice { mbs: true, share: rho0, value: l0 }
    } else {
        UserChoice { mbs: false, share: rho1, value: l1 }
    }
}

/// Projected subgradient step `λ' = [λ − s·(1 − Σρ)]^+` per transmitter.
pub fn dual_update(lambda: &[f64], load: &[f64], step: f64) -> Vec<f64> {
    lambda.iter().zip(load).map(|(&l, &u)| (l - step * (1.0 - u)).max(0.0)).collect()
}

/// Maximizes `Σ a_j·ln(w_j + r_j·x_j)` subject to `Σx ≤ 1`, `x ≥ 0`.
///
/// Users with `a·r = 0` get nothing. The active set is found by sorting the
/// thresholds `a_j·r_j/w_j` at which a user starts receiving time.
pub fn water_fill(a: &[f64], w: &[f64], r: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).filter(|&j| a[j] > 0.0 && r[j] > 0.0).collect();
    let mut x = vec![0.0; n];
    if idx.is_empty() {
        return x;
    }
    let thresh = |j: usize| a[j] * r[j] / w[j];
    idx.sort_by(|&p, &q| thresh(q).total_cmp(&thresh(p)).then(p.cmp(&q)));
    let (mut sum_a, mut sum_c) = (0.0, 0.0);
    let mut mu = 0.0;
    let mut active = 0;
    for (k, &j) in idx.iter().enumerate() {
        sum_a += a[j];
        sum_c += w[j] / r[j];
        let m = sum_a / (1.0 + sum_c);
        active = k + 1;
        mu = m;
        let next = idx.get(k + 1).map_or(0.0, |&q| thresh(q));
        if m >= next {
            break;
        }
    }
    for &j in &idx[..active] {
        x[j] = (a[j] / mu - w[j] / r[j]).max(0.0);
    }
    // absorb rounding so the row sums to exactly one
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    x
}

/// Optimal shares for fixed branches: each transmitter water-fills its users.
pub fn shares_for_branches(problem: &SlotProblem, mbs: &[bool]) -> Vec<f64> {
    let mut share = vec![0.0; problem.num_users()];
    for t in 0..problem.num_transmitters() {
        let members: Vec<usize> = (0..problem.num_users()).filter(|&j| problem.transmitter(j, mbs[j]) == t).collect();
        let (mut a, mut w, mut r) = (Vec::new(), Vec::new(), Vec::new());
        for &j in &members {
            let (s, wj, rj) = problem.branch(j, mbs[j]);
            a.push(s);
            w.push(wj);
            r.push(rj);
        }
        for (x, &j) in water_fill(&a, &w, &r).into_iter().zip(&members) {
            share[j] = x;
        }
    }
    share
}
