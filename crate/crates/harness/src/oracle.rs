//! Self-checks behind the `oracle-check` subcommand.
//!
//! Each check compares a solver against an exhaustive or closed-form oracle on
//! instances drawn from the config, at every sweep point and seed.

use femtonet::multicast::{
    bounds, brute_force_multicast, folded_sum, solve_case1, solve_case2, solve_case3, verify_feasible,
    BRUTE_FORCE_LIMIT,
};
use femtonet::rng::{stream, Purpose};
use femtonet::sched::{
    brute_force_alloc, greedy_alloc, optbound_upper, shares_for_branches, solve_noninterfering, GreedyConfig,
    InterferenceGraph, ScheduleSolution, SlotProblem, UserSlot, ALLOC_BRUTE_FORCE_LIMIT,
};
use femtonet::video::StreamState;
use femtonet::Exec;
use rand::Rng;

use crate::config::{ExperimentConfig, Point, Scenario};
use crate::error::Result;
use crate::{multicast, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn multicast_checks(cfg: &ExperimentConfig, point: &Point, seed: u64, exec: Exec, out: &mut Vec<Check>) -> Result<()> {
    let p = cfg.multicast.at(point);
    let tag = format!("{} seed={seed}", point.label());
    let inst = multicast::draw(cfg.scenario, &p, seed)?.instance;
    if cfg.scenario == Scenario::MulticastCase1 {
        let closed = solve_case1(&inst, 0)?.total;
        let (g, n0) = (inst.gamma()[0], inst.noise());
        let mut q = 0.0;
        for l in (0..inst.levels()).rev() {
            let users = inst.demand().users_at(l);
            if let Some(w) = users.iter().map(|&k| 1.0 / inst.gains().get(0, k)).reduce(f64::max) {
                q = n0 * g * w + (1.0 + g) * q;
            }
        }
        let asg = femtonet::multicast::LevelAssignment::all_to(&inst, 0)?;
        let folded = folded_sum(&inst, &asg)[0];
        out.push(Check::new(
            format!("case1 closed form [{tag}]"),
            rel(closed, q) <= 1e-9 && rel(folded, q) <= 1e-9,
            format!("closed={closed:e} recursion={q:e} folded={folded:e}"),
        ));
        return Ok(());
    }
    let free = inst.coverage().iter().filter(|c| c.is_some()).count();
    let (asg, alloc) = if cfg.scenario == Scenario::MulticastCase2 { solve_case2(&inst)? } else { solve_case3(&inst)? };
    let feasible = verify_feasible(&inst, &asg, &alloc).feasible;
    out.push(Check::new(format!("proposed feasible [{tag}]"), feasible, ""));
    if free > BRUTE_FORCE_LIMIT {
        return Ok(());
    }
    let (_, best) = brute_force_multicast(&inst, exec)?;
    let b = bounds(&inst, None);
    let opt = best.total;
    let slack = 1e-9 * opt;
    out.push(Check::new(
        format!("bounds sandwich optimum [{tag}]"),
        b.lower_tight <= opt + slack && opt <= b.upper_tight + slack,
        format!("lower={:e} opt={opt:e} upper={:e}", b.lower_tight, b.upper_tight),
    ));
    out.push(Check::new(
        format!("proposed no better than optimum [{tag}]"),
        alloc.total >= opt - slack,
        format!("proposed={:e} opt={opt:e}", alloc.total),
    ));
    Ok(())
}

/// Best objective over all `2^K` branch choices, each water-filled.
fn enumerate_branches(problem: &SlotProblem) -> Result<f64> {
    let k = problem.num_users();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1usize << k {
        let mbs: Vec<bool> = (0..k).map(|j| mask >> j & 1 == 0).collect();
        let share = shares_for_branches(problem, &mbs);
        best = best.max(ScheduleSolution::from_point(problem, mbs, share)?.objective);
    }
    Ok(best)
}

fn stream_checks(cfg: &ExperimentConfig, point: &Point, seed: u64, exec: Exec, out: &mut Vec<Check>) -> Result<()> {
    let mut short = cfg.clone();
    short.stream.windows = short.stream.windows.min(2);
    let p = short.stream.at(point);
    let tag = format!("{} seed={seed}", point.label());
    let run = stream::run_point(&short, point, seed, exec)?;
    let metric = |alg: &str, name: &str| {
        run.rows.iter().find(|r| r.algorithm == alg && r.metric == name).map_or(f64::NAN, |r| r.value)
    };
    for alg in stream::ALGORITHMS {
        let e = metric(alg, "telescoping-error");
        out.push(Check::new(format!("psnr telescoping {alg} [{tag}]"), e <= 1e-9, format!("max error {e:e}")));
    }
    let v = metric("proposed", "dominance-violations");
    out.push(Check::new(format!("solver dominates heuristics [{tag}]"), v == 0.0, format!("{v} violations")));
    let slots = (p.window * p.windows) as f64;
    let c = metric("spectrum", "collision-rate-max");
    let limit = p.gamma + 3.0 * (p.gamma * (1.0 - p.gamma) / slots).sqrt();
    out.push(Check::new(format!("collision rate [{tag}]"), c <= limit, format!("{c} vs {limit}")));

    // dual solver against enumeration on a drawn slot problem
    let success = stream::link_success(&p, seed)?;
    let state = StreamState::new(&stream::user_sequences(&p), p.window)?;
    let mut rng = stream(seed, Purpose::Instance, &[]);
    let users: Vec<UserSlot> = (0..p.num_users())
        .map(|j| UserSlot {
            fbs: j / p.users_per_fbs,
            success_mbs: success[j].0,
            success_fbs: success[j].1,
            psnr: state.psnr()[j] + rng.random::<f64>() * 5.0,
            rate_mbs: state.rate_constant(j, p.common_bandwidth),
            rate_fbs: state.rate_constant(j, p.licensed_bandwidth),
        })
        .collect();
    let g: Vec<f64> = (0..p.femtocells).map(|_| rng.random::<f64>() * p.channels as f64 / 2.0).collect();
    let problem = SlotProblem::new(users, g)?;
    let dual = p.dual_config();
    if problem.num_users() <= 12 {
        let exact = enumerate_branches(&problem)?;
        let sol = solve_noninterfering(&problem, &dual, None)?;
        out.push(Check::new(
            format!("dual matches enumeration [{tag}]"),
            rel(sol.objective, exact) <= 1e-4 && sol.is_feasible(&problem),
            format!("solver={} exact={exact}", sol.objective),
        ));
    }

    if cfg.scenario == Scenario::StreamInterfering {
        let edges: Vec<(usize, usize)> = p.edges.iter().map(|e| (e[0], e[1])).collect();
        let graph = InterferenceGraph::new(p.femtocells, &edges)?;
        let m = (ALLOC_BRUTE_FORCE_LIMIT.min(12) / p.femtocells).clamp(1, 3);
        let beliefs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let gcfg = GreedyConfig { dual: dual.clone(), inner_iters: None, exec };
        let blank = problem.with_channels(vec![0.0; p.femtocells])?;
        let greedy = greedy_alloc(&blank, &beliefs, &graph, &gcfg)?;
        let best = brute_force_alloc(&blank, &beliefs, &graph, &gcfg)?;
        let d = graph.max_degree() as f64;
        let tol = 1e-9 * best.value.abs().max(1.0);
        out.push(Check::new(
            format!("greedy within 1/(1+D) of optimum [{tag}]"),
            greedy.value >= best.value / (1.0 + d) - tol && best.value <= optbound_upper(&greedy) + tol,
            format!("greedy={} optimum={} bound={}", greedy.value, best.value, optbound_upper(&greedy)),
        ));
    }
    Ok(())
}

/// Runs every check; the caller decides what a failure means.
pub fn oracle_check(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<Check>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for point in cfg.points() {
        for &seed in &cfg.seeds {
            if cfg.scenario.is_multicast() {
                multicast_checks(cfg, &point, seed, exec, &mut out)?;
            } else {
                stream_checks(cfg, &point, seed, exec, &mut out)?;
            }
        }
    }
    Ok(out)
}
