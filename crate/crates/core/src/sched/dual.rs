use super::{branch_objective, shares_for_branches, user_subproblem, ScheduleSolution, SlotProblem};
use crate::error::{Error, Result};

/// Settings of the dual (sub)gradient loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DualConfig {
    /// Step size `s`.
    pub step: f64,
    /// Stopping threshold `φ` on the squared dual change.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Iterate on prices normalized per transmitter (see [`solve_noninterfering`]).
    pub precondition: bool,
    /// Improve the recovered primal point by single-user branch flips.
    pub polish: bool,
    pub record_trace: bool,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self { step: 0.01, tolerance: 1e-6, max_iters: 10_000, precondition: true, polish: true, record_trace: false }
    }
}

impl DualConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!("step size must be positive, got {}", self.step)));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::config("convergence threshold must be non-negative"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("at least one dual iteration is required"));
        }
        Ok(())
    }
}

/// One dual iteration, for convergence plots.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// `λ` per transmitter, MBS first.
    pub duals: Vec<f64>,
    /// Objective of the best primal point for this iteration's branch choice.
    pub primal: f64,
}

/// Per transmitter, the price at which its users would exactly fill the slot
/// if all of them chose it, and the slope of the load at that price.
fn price_scales(problem: &SlotProblem) -> (Vec<f64>, Vec<f64>) {
    let t = problem.num_transmitters();
    let mut succ = vec![0.0; t];
    let mut fill = vec![1.0; t];
    for j in 0..problem.num_users() {
        for mbs in [true, false] {
            let (s, w, r) = problem.branch(j, mbs);
            if s > 0.0 && r > 0.0 {
                let i = problem.transmitter(j, mbs);
                succ[i] += s;
                fill[i] += w / r;
            }
        }
    }
    let scale = succ.iter().zip(&fill).map(|(&s, &a)| if s > 0.0 { s / a } else { 1.0 }).collect();
    (scale, fill)
}

/// Dual decomposition over the MBS and every FBS, with `G_i` fixed.
///
/// Each iteration lets every user answer the current prices, then moves each
/// price against its transmitter's unused share. With `precondition` the
/// iterate is `ν_i = λ_i/λ̂_i` where `λ̂_i` fills transmitter `i` exactly if all
/// eligible users pick it, and the step is divided by the load slope at `λ̂_i`;
/// the stopping rule then applies `φ` to `Σ(Δν/s)²`. Without it the update is
/// the plain projected step on `λ` and `φ` applies to `Σ(Δλ)²`.
///
/// The returned primal point is the best one seen: for every distinct branch
/// choice along the way each transmitter's slot is water-filled optimally.
/// With `polish` that point is then improved by one- and two-user branch flips.
/// `warm` is a previous solution's [`ScheduleSolution::state`].
pub fn solve_noninterfering(problem: &SlotProblem, cfg: &DualConfig, warm: Option<&[f64]>) -> Result<ScheduleSolution> {
    cfg.validate()?;
    let t = problem.num_transmitters();
    let k = problem.num_users();
    let (scale, slope) = if cfg.precondition { price_scales(problem) } else { (vec![1.0; t], vec![1.0; t]) };
    let mut state = match warm {
        Some(w) if w.len() == t && w.iter().all(|v| *v >= 0.0 && v.is_finite()) => w.to_vec(),
        _ => vec![1.0; t],
    };
    let threshold = if cfg.precondition { cfg.tolerance * cfg.step * cfg.step } else { cfg.tolerance };

    let mut best: Option<(f64, Vec<bool>, Vec<f64>)> = None;
    let mut last_branches: Option<Vec<bool>> = None;
    let mut last_primal = f64::NAN;
    let mut dual_min = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut lambda: Vec<f64> = Vec::new();

    for it in 1..=cfg.max_iters {
        iterations = it;
        lambda = state.iter().zip(&scale).map(|(v, s)| v * s).collect();
        let choices: Vec<_> = (0..k).map(|j| user_subproblem(problem, j, &lambda)).collect();
        let dual = choices.iter().map(|c| c.value).sum::<f64>() + lambda.iter().sum::<f64>();
        dual_min = dual_min.min(dual);

        let branches: Vec<bool> = choices.iter().map(|c| c.mbs).collect();
        if last_branches.as_ref() != Some(&branches) {
            let share = shares_for_branches(problem, &branches);
            last_primal = branch_objective(problem, &branches, &share)?;
            if best.as_ref().is_none_or(|(b, _, _)| last_primal > *b) {
                best = Some((last_primal, branches.clone(), share));
            }
            last_branches = Some(branches);
        }

        let mut load = vec![0.0; t];
        for (j, c) in choices.iter().enumerate() {
            load[problem.transmitter(j, c.mbs)] += c.share;
        }
        let next: Vec<f64> = (0..t).map(|i| (state[i] - cfg.step * (1.0 - load[i]) / slope[i]).max(0.0)).collect();
        let moved: f64 = next.iter().zip(&state).map(|(a, b)| (a - b).powi(2)).sum();
        if cfg.record_trace {
            trace.push(TraceRow { iteration: it, duals: lambda.clone(), primal: last_primal });
        }
        state = next;
        if moved <= threshold {
            converged = true;
            break;
        }
    }

    let (mut objective, mut mbs, mut share) = best.unwrap_or_default();
    if cfg.polish {
        (objective, mbs, share) = polish(problem, objective, mbs, share)?;
    }
    let duality_gap = if k == 0 { 0.0 } else { (dual_min - objective) / dual_min.abs() };
    Ok(ScheduleSolution { mbs, share, objective, iterations, converged, duality_gap, duals: lambda, state, trace })
}

/// Flips one user's branch, or two users' branches together, water-filling
/// after each flip, and keeps every strict improvement until none is left.
fn polish(
    problem: &SlotProblem,
    mut objective: f64,
    mut mbs: Vec<bool>,
    mut share: Vec<f64>,
) -> Result<(f64, Vec<bool>, Vec<f64>)> {
    let k = mbs.len();
    let moves: Vec<(usize, usize)> = (0..k).flat_map(|a| (a..k).map(move |b| (a, b))).collect();
    loop {
        let mut improved = false;
        for &(a, b) in &moves {
            mbs[a] = !mbs[a];
            if b != a {
                mbs[b] = !mbs[b];
            }
            let trial = shares_for_branches(problem, &mbs);
            let value = branch_objective(problem, &mbs, &trial)?;
            if value > objective + 1e-12 * objective.abs() {
                objective = value;
                share = trial;
                improved = true;
            } else {
                mbs[a] = !mbs[a];
                if b != a {
                    mbs[b] = !mbs[b];
                }
            }
        }
        if !improved {
            return Ok((objective, mbs, share));
        }
    }
}

/// The single-FBS case: requires exactly one FBS.
pub fn solve_single_fbs(problem: &SlotProblem, cfg: &DualConfig, warm: Option<&[f64]>) -> Result<ScheduleSolution> {
    if problem.num_fbs() != 1 {
        return Err(Error::contract(format!("single-FBS solver got {} FBSs", problem.num_fbs())));
    }
    solve_noninterfering(problem, cfg, warm)
}
