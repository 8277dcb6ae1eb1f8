//! Video streaming over the femtocell CR network, slot by slot.

use femtonet::rng::{stream, Purpose};
use femtonet::sched::{
    greedy_alloc, heuristic_diversity, heuristic_equal, optbound_upper, solve_noninterfering, solve_single_fbs,
    DualConfig, GreedyConfig, InterferenceGraph, ScheduleSolution, SlotProblem, UserSlot,
};
use femtonet::spectrum::{access_probability, channel_beliefs, decide_access, gather_reports};
use femtonet::video::{loss_probability, mean_sinr_for_loss, SlotDelivery, StreamState, VideoSequence};
use femtonet::Exec;
use rand::Rng;

use crate::config::{ExperimentConfig, Point, Scenario, StreamParams};
use crate::error::Result;
use crate::output::{ResultRow, TraceRecord};

pub const ALGORITHMS: [&str; 3] = ["proposed", "heuristic-equal", "heuristic-diversity"];

/// Relative slack before a heuristic counts as beating the solver.
const DOMINANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct StreamRun {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<TraceRecord>,
}

/// Per-link success probabilities `P̄` for every user, MBS then FBS.
pub fn link_success(p: &StreamParams, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = stream(seed, Purpose::LinkQuality, &[]);
    let [lo, hi] = p.loss_range;
    let success = |loss: f64| -> Result<f64> {
        let mu = mean_sinr_for_loss(p.threshold, loss)?;
        Ok(1.0 - loss_probability(p.threshold, mu))
    };
    (0..p.num_users())
        .map(|_| {
            let l0 = lo + rng.random::<f64>() * (hi - lo);
            let l1 = lo + rng.random::<f64>() * (hi - lo);
            Ok((success(l0)?, success(l1)?))
        })
        .collect()
}

/// The sequence streamed to each user.
pub fn user_sequences(p: &StreamParams) -> Vec<VideoSequence> {
    (0..p.num_users()).map(|j| p.sequences[(j % p.users_per_fbs) % p.sequences.len()].clone()).collect()
}

struct Arm {
    state: StreamState,
    warm: Option<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Bits per user in the open window, kept apart from `state`.
    bits: Vec<f64>,
    finals: Vec<Vec<f64>>,
    objective: f64,
    telescoping: f64,
}

impl Arm {
    fn new(seqs: &[VideoSequence], window: u32) -> Result<Self> {
        Ok(Self {
            state: StreamState::new(seqs, window)?,
            warm: None,
            alpha: seqs.iter().map(|s| s.alpha).collect(),
            beta: seqs.iter().map(|s| s.beta).collect(),
            bits: vec![0.0; seqs.len()],
            finals: vec![Vec::new(); seqs.len()],
            objective: 0.0,
            telescoping: 0.0,
        })
    }

    fn problem(&self, p: &StreamParams, success: &[(f64, f64)], channels: Vec<f64>) -> Result<SlotProblem> {
        let users = (0..p.num_users())
            .map(|j| UserSlot {
                fbs: j / p.users_per_fbs,
                success_mbs: success[j].0,
                success_fbs: success[j].1,
                psnr: self.state.psnr()[j],
                rate_mbs: self.state.rate_constant(j, p.common_bandwidth),
                rate_fbs: self.state.rate_constant(j, p.licensed_bandwidth),
            })
            .collect();
        Ok(SlotProblem::new(users, channels)?)
    }

    fn play(&mut self, sol: &ScheduleSolution, deliveries: Vec<SlotDelivery>) -> Result<()> {
        self.objective += sol.objective;
        for (j, d) in deliveries.iter().enumerate() {
            if d.received {
                self.bits[j] += d.share * d.capacity;
            }
        }
        if let Some(done) = self.state.update(&deliveries)? {
            let t = self.state.window() as f64;
            for (j, w) in done.into_iter().enumerate() {
                let expected = self.alpha[j] + self.beta[j] * self.bits[j] / t;
                self.telescoping = self.telescoping.max((w - expected).abs());
                self.finals[j].push(w);
                self.bits[j] = 0.0;
            }
        }
        Ok(())
    }
}

/// What each user gets from a schedule given the slot's realizations.
fn deliveries(
    p: &StreamParams,
    sol: &ScheduleSolution,
    received: &[(bool, bool)],
    idle_per_fbs: &[usize],
) -> Vec<SlotDelivery> {
    (0..p.num_users())
        .map(|j| {
            if sol.mbs[j] {
                SlotDelivery { share: sol.share[j], received: received[j].0, capacity: p.common_bandwidth }
            } else {
                let i = j / p.users_per_fbs;
                SlotDelivery {
                    share: sol.share[j],
                    received: received[j].1,
                    capacity: idle_per_fbs[i] as f64 * p.licensed_bandwidth,
                }
            }
        })
        .collect()
}

/// Simulates one seed at one sweep point.
pub fn run_point(cfg: &ExperimentConfig, point: &Point, seed: u64, exec: Exec) -> Result<StreamRun> {
    let p = cfg.stream.at(point);
    let scenario = cfg.scenario;
    let (n, k, m_total) = (p.femtocells, p.num_users(), p.channels);
    let primary = p.primary()?;
    let eta = primary.utilization();
    let profile = p.profile()?;
    let success = link_success(&p, seed)?;
    let seqs = user_sequences(&p);
    let edges: Vec<(usize, usize)> = p.edges.iter().map(|e| (e[0], e[1])).collect();
    let graph = InterferenceGraph::new(n, &edges)?;
    let dual = p.dual_config();
    let greedy_cfg = GreedyConfig { dual: dual.clone(), inner_iters: Some(p.inner_iters.min(p.max_iters)), exec };

    let mut channel_rngs: Vec<_> = (0..m_total).map(|m| stream(seed, Purpose::ChannelState, &[m as u64])).collect();
    let mut states: Vec<bool> = channel_rngs.iter_mut().map(|r| primary.initial(r)).collect();
    let mut collided = vec![0u64; m_total];
    let mut accessed_total = 0usize;
    let mut expected_idle_total = 0.0;

    let mut arms = ALGORITHMS.iter().map(|_| Arm::new(&seqs, p.window)).collect::<Result<Vec<_>>>()?;
    let mut iterations = 0usize;
    let mut converged = 0usize;
    let mut gap_sum = 0.0;
    let mut gap_count = 0usize;
    let mut violations = 0usize;
    let mut bound_sum = 0.0;
    let mut traces = Vec::new();

    let slots = (p.window * p.windows) as usize;
    for t in 0..slots {
        if t > 0 {
            for (s, r) in states.iter_mut().zip(channel_rngs.iter_mut()) {
                *s = primary.step(*s, r);
            }
        }
        let sensors = if p.fbs_sensing { n } else { 0 };
        let reports =
            gather_reports(&states, t as u64, k, sensors, &profile, &mut stream(seed, Purpose::Sensing, &[t as u64]));
        let beliefs = channel_beliefs(&vec![eta; m_total], &reports, &profile)?;
        let access: Vec<f64> = beliefs.iter().map(|&pa| access_probability(pa, p.gamma)).collect();
        let decision = decide_access(&beliefs, &access, &mut stream(seed, Purpose::Access, &[t as u64]));
        for &m in &decision.channels {
            if states[m] {
                collided[m] += 1;
            }
        }
        accessed_total += decision.channels.len();
        expected_idle_total += decision.expected_idle;
        let avail: Vec<f64> = decision.channels.iter().map(|&m| beliefs[m]).collect();

        let mut loss_rng = stream(seed, Purpose::Loss, &[t as u64]);
        let received: Vec<(bool, bool)> =
            success.iter().map(|&(s0, s1)| (loss_rng.random::<f64>() < s0, loss_rng.random::<f64>() < s1)).collect();

        // channel allocation, decided on the proposed scheme's state
        let assign: Vec<Vec<bool>> = if scenario == Scenario::StreamInterfering {
            let blank = arms[0].problem(&p, &success, vec![0.0; n])?;
            let alloc = greedy_alloc(&blank, &avail, &graph, &greedy_cfg)?;
            bound_sum += alloc.baseline + optbound_upper(&alloc);
            alloc.assign
        } else {
            vec![vec![true; avail.len()]; n]
        };
        let g: Vec<f64> =
            assign.iter().map(|row| row.iter().zip(&avail).filter(|(c, _)| **c).map(|(_, pa)| pa).sum()).collect();
        let idle: Vec<usize> = assign
            .iter()
            .map(|row| row.iter().zip(&decision.channels).filter(|(c, &m)| **c && !states[m]).count())
            .collect();

        for (a, arm) in arms.iter_mut().enumerate() {
            let problem = arm.problem(&p, &success, g.clone())?;
            let sol = match a {
                0 => {
                    let cfg = DualConfig { record_trace: t < p.trace_slots, ..dual.clone() };
                    let sol = if scenario == Scenario::StreamSingle {
                        solve_single_fbs(&problem, &cfg, arm.warm.as_deref())?
                    } else {
                        solve_noninterfering(&problem, &cfg, arm.warm.as_deref())?
                    };
                    arm.warm = Some(sol.state.clone());
                    iterations += sol.iterations;
                    converged += sol.converged as usize;
                    if sol.duality_gap.is_finite() {
                        gap_sum += sol.duality_gap;
                        gap_count += 1;
                    }
                    let floor = sol.objective + DOMINANCE_TOL * sol.objective.abs();
                    for h in [heuristic_equal(&problem)?, heuristic_diversity(&problem)?] {
                        if h.objective > floor {
                            violations += 1;
                        }
                    }
                    traces.extend(sol.trace.iter().map(|row| TraceRecord {
                        scenario: scenario.name().to_string(),
                        seed,
                        sweep: point.label(),
                        slot: t,
                        iteration: row.iteration,
                        primal: row.primal,
                        duals: row.duals.clone(),
                    }));
                    sol
                }
                1 => heuristic_equal(&problem)?,
                _ => heuristic_diversity(&problem)?,
            };
            let d = deliveries(&p, &sol, &received, &idle);
            arm.play(&sol, d)?;
        }
    }

    let mut rows = Vec::new();
    let mut push = |algorithm: &str, metric: String, value: f64| {
        rows.push(ResultRow {
            scenario: scenario.name().to_string(),
            seed,
            sweep: point.label(),
            algorithm: algorithm.to_string(),
            metric,
            value,
        })
    };
    let slots_f = slots as f64;
    for (name, arm) in ALGORITHMS.iter().zip(&arms) {
        let all: Vec<f64> = arm.finals.iter().flatten().copied().collect();
        push(name, "psnr".into(), all.iter().sum::<f64>() / all.len() as f64);
        for (j, f) in arm.finals.iter().enumerate() {
            push(name, format!("psnr-user-{j}"), f.iter().sum::<f64>() / f.len() as f64);
        }
        push(name, "objective".into(), arm.objective / slots_f);
        push(name, "telescoping-error".into(), arm.telescoping);
    }
    push("proposed", "iterations".into(), iterations as f64 / slots_f);
    push("proposed", "converged".into(), converged as f64 / slots_f);
    if gap_count > 0 {
        push("proposed", "duality-gap".into(), gap_sum / gap_count as f64);
    }
    push("proposed", "dominance-violations".into(), violations as f64);
    if scenario == Scenario::StreamInterfering {
        push("upper-bound", "objective".into(), bound_sum / slots_f);
    }
    let rates: Vec<f64> = collided.iter().map(|&c| c as f64 / slots_f).collect();
    push("spectrum", "collision-rate-max".into(), rates.iter().copied().fold(0.0, f64::max));
    push(
        "spectrum",
        "collision-rate-mean".into(),
        if m_total == 0 { 0.0 } else { rates.iter().sum::<f64>() / m_total as f64 },
    );
    push("spectrum", "accessed-channels".into(), accessed_total as f64 / slots_f);
    push("spectrum", "expected-idle".into(), expected_idle_total / slots_f);
    Ok(StreamRun { rows, traces })
}
