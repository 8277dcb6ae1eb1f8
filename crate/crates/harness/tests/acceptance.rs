//! End-to-end acceptance run. Prints one `[PASS]`/`[FAIL]` line per criterion
//! and exits non-zero if any criterion fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use femtonet::multicast::{
    bounds, brute_force_multicast, folded_sum, solve_case1, solve_case2, solve_case3, verify_feasible, Instance,
    LevelAssignment, LevelDemand,
};
use femtonet::net::ChannelGainMatrix;
use femtonet::rng::{stream, Purpose};
use femtonet::sched::{
    brute_force_alloc, greedy_alloc, optbound_upper, solve_single_fbs, DualConfig, GreedyConfig, InterferenceGraph,
    SlotProblem, UserSlot,
};
use femtonet::spectrum::{
    access_probability, channel_beliefs, decide_access, fuse_beliefs, fuse_beliefs_batch, gather_reports,
    PrimaryChannel, SensorProfile,
};
use femtonet::Exec;
use femtonet_harness::config::ExperimentConfig;
use femtonet_harness::output::{summary_mean, ResultRow, SummaryRow};
use femtonet_harness::run;
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn rng(tag: u64) -> impl Rng {
    stream(tag, Purpose::Instance, &[0xacce])
}

fn random_instance(r: &mut impl Rng, users: usize, levels: usize, fbs: usize, all_covered: bool) -> Instance {
    let demand = LevelDemand::random(users, levels, r).unwrap();
    let uncovered = if all_covered || fbs == 0 { 0 } else { r.random_range(0..=users / 2) };
    let coverage: Vec<Option<usize>> =
        (0..users).map(|k| (fbs > 0 && k < users - uncovered).then(|| 1 + k % fbs.max(1))).collect();
    let gains: Vec<Vec<f64>> = (0..=fbs)
        .map(|m| {
            let scale = if m == 0 { 1.0 } else { r.random_range(1.0..10.0) };
            (0..users).map(|_| scale * r.random_range(0.05..2.0)).collect()
        })
        .collect();
    let gamma = (0..=fbs).map(|_| r.random_range(0.2..4.0)).collect();
    Instance::from_parts(coverage, demand, ChannelGainMatrix::new(gains).unwrap(), gamma, r.random_range(0.1..2.0))
        .unwrap()
}

fn oracle_sandwich() -> Verdict {
    let mut r = rng(1);
    let (mut n, mut bad) = (0, 0);
    let mut gaps = Vec::new();
    while n < 600 {
        let users = r.random_range(1..=8);
        let levels = r.random_range(1..=users.min(4));
        let fbs = r.random_range(1..=2);
        let case2 = fbs == 1 && r.random_bool(0.5);
        let inst = random_instance(&mut r, users, levels, fbs, case2);
        let (_, best) = brute_force_multicast(&inst, Exec::default()).unwrap();
        let b = bounds(&inst, None);
        let (asg, alloc) = if case2 { solve_case2(&inst) } else { solve_case3(&inst) }.unwrap();
        let tol = 1e-9 * best.total;
        let ok = b.lower_tight <= best.total + tol
            && best.total <= b.upper_tight + tol
            && verify_feasible(&inst, &asg, &alloc).feasible
            && alloc.total >= best.total - tol;
        bad += usize::from(!ok);
        gaps.push(10.0 * (alloc.total / best.total).log10());
        n += 1;
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    verdict(bad == 0, format!("{n} instances, {bad} violations, mean optimality gap {mean:.3} dB"))
}

/// `Q_l = Q_{l+1} + Γ(N0·max 1/H + Q_{l+1})` over nonempty levels, top down.
fn recursion(inst: &Instance) -> f64 {
    let g = inst.gamma()[0];
    let mut q = 0.0;
    for l in (0..inst.levels()).rev() {
        let worst = inst.demand().users_at(l).iter().map(|&k| 1.0 / inst.gains().get(0, k)).fold(0.0, f64::max);
        if worst > 0.0 {
            q += g * (inst.noise() * worst + q);
        }
    }
    q
}

fn case1_closed_form() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let users = r.random_range(1..=12);
        let levels = r.random_range(1..=users.min(6));
        let inst = random_instance(&mut r, users, levels, 0, false);
        let closed = solve_case1(&inst, 0).unwrap().total;
        let rec = recursion(&inst);
        let folded = folded_sum(&inst, &LevelAssignment::all_to(&inst, 0).unwrap())[0];
        worst = worst.max((closed - rec).abs() / rec).max((folded - rec).abs() / rec);
    }
    let hand = Instance::from_parts(
        vec![None, None],
        LevelDemand::new(2, vec![0, 1]).unwrap(),
        ChannelGainMatrix::new(vec![vec![1.0, 1.0]]).unwrap(),
        vec![3.0],
        1.0,
    )
    .unwrap();
    let alloc = solve_case1(&hand, 0).unwrap();
    let snr = verify_feasible(&hand, &LevelAssignment::all_to(&hand, 0).unwrap(), &alloc).snr;
    let hand_ok = (alloc.total - 15.0).abs() < 1e-12 && snr.iter().all(|s| (s - 3.0).abs() < 1e-12);
    verdict(
        worst <= 1e-9 && hand_ok,
        format!("max relative error {worst:.2e} over 1000 instances; hand total {} SNRs {snr:?}", alloc.total),
    )
}

fn load(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&scenario(name)).unwrap();
    cfg.seeds = (0..10).collect();
    cfg
}

fn power_savings() -> Verdict {
    let c2 = run(&load("fig3-case1-vs-case2.json"), Exec::default()).unwrap().summary;
    let save2 = summary_mean(&c2, "base", "case1", "total-power-dbm").unwrap()
        - summary_mean(&c2, "base", "proposed", "total-power-dbm").unwrap();
    let c3 = run(&load("fig4-case3-levels.json"), Exec::default()).unwrap().summary;
    let save3: Vec<f64> = ["4", "5", "6"]
        .iter()
        .map(|l| {
            summary_mean(&c3, l, "heuristic", "total-power-dbm").unwrap()
                - summary_mean(&c3, l, "proposed", "total-power-dbm").unwrap()
        })
        .collect();
    verdict(
        save2 >= 5.0 && save3.iter().all(|&s| s >= 2.0),
        format!("case II vs I {save2:.2} dB; case III vs heuristic at L=4,5,6 {save3:.2?} dB"),
    )
}

fn fusion() -> Verdict {
    let eps = [0.3, 0.1, 0.25, 0.4, 0.05, 0.2];
    let del = [0.3, 0.2, 0.15, 0.1, 0.35, 0.3];
    let profiles: Vec<SensorProfile> = eps.iter().zip(&del).map(|(&e, &d)| SensorProfile::new(e, d).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for eta in [0.2, 0.5, 0.7] {
        for mask in 0..64u32 {
            let obs: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
            let (mut idle, mut busy) = (1.0 - eta, eta);
            for i in 0..6 {
                idle *= if obs[i] { eps[i] } else { 1.0 - eps[i] };
                busy *= if obs[i] { 1.0 - del[i] } else { del[i] };
            }
            let exact = idle / (idle + busy);
            let it = fuse_beliefs(eta, &obs, &profiles).unwrap();
            let batch = fuse_beliefs_batch(eta, &obs, &profiles).unwrap();
            worst = worst.max((it - exact).abs()).max((it - batch).abs());
        }
    }
    let p = SensorProfile::new(0.3, 0.3).unwrap();
    let hand = fuse_beliefs(0.5, &[false], &[p]).unwrap();
    verdict(
        worst <= 1e-12 && (hand - 0.7).abs() < 1e-12,
        format!("max deviation {worst:.2e} over 3 x 64 sequences; single idle report {hand}"),
    )
}

fn collisions() -> Verdict {
    let (channels, users, slots, gamma) = (8usize, 3usize, 100_000u64, 0.2);
    let chan = PrimaryChannel::new(0.4, 0.3).unwrap();
    let profile = SensorProfile::new(0.3, 0.3).unwrap();
    let mut states: Vec<bool> =
        (0..channels).map(|m| chan.initial(&mut stream(5, Purpose::ChannelState, &[m as u64]))).collect();
    let mut evolve: Vec<_> = (0..channels).map(|m| stream(5, Purpose::ChannelState, &[m as u64, 1])).collect();
    let mut sensing = stream(5, Purpose::Sensing, &[]);
    let mut access = stream(5, Purpose::Access, &[]);
    let etas = vec![chan.utilization(); channels];
    let mut collided = vec![0u64; channels];
    for t in 0..slots {
        for (s, r) in states.iter_mut().zip(evolve.iter_mut()) {
            *s = chan.step(*s, r);
        }
        let reports = gather_reports(&states, t, users, 1, &profile, &mut sensing);
        let beliefs = channel_beliefs(&etas, &reports, &profile).unwrap();
        let pd: Vec<f64> = beliefs.iter().map(|&pa| access_probability(pa, gamma)).collect();
        for m in decide_access(&beliefs, &pd, &mut access).channels {
            collided[m] += u64::from(states[m]);
        }
    }
    let rates: Vec<f64> = collided.iter().map(|&c| c as f64 / slots as f64).collect();
    let limit = gamma + 3.0 * (gamma * (1.0 - gamma) / slots as f64).sqrt();
    let max = rates.iter().copied().fold(0.0, f64::max);
    verdict(max <= limit, format!("max per-channel collision rate {max:.4} (limit {limit:.4}) over {slots} slots"))
}

/// `max Σ a·ln(w + r·x)` over `Σx = 1` by bisection on the multiplier.
fn fill_value(a: &[f64], w: &[f64], r: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let load = |nu: f64| (0..a.len()).map(|j| (a[j] / nu - w[j] / r[j]).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (1e-12f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if load(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0..a.len()).map(|j| a[j] * (w[j] + r[j] * (a[j] / hi - w[j] / r[j]).max(0.0)).ln()).sum()
}

fn enumerate_single(users: &[UserSlot], g: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1usize << users.len() {
        let mut sides = [(Vec::new(), Vec::new(), Vec::new()), (Vec::new(), Vec::new(), Vec::new())];
        for (j, u) in users.iter().enumerate() {
            let (s, rate, side) =
                if mask >> j & 1 == 1 { (u.success_mbs, u.rate_mbs, 0) } else { (u.success_fbs, g * u.rate_fbs, 1) };
            sides[side].0.push(s);
            sides[side].1.push(u.psnr);
            sides[side].2.push(rate);
        }
        best = best.max(sides.iter().map(|(a, w, r)| fill_value(a, w, r)).sum());
    }
    best
}

fn dual_decomposition() -> Verdict {
    let mut r = rng(6);
    let cfg = DualConfig::default();
    let (mut bad_obj, mut bad_gap, mut not_binary, mut unconverged) = (0, 0, 0, 0);
    let mut iters = Vec::new();
    let n = 500;
    for _ in 0..n {
        let k = r.random_range(1..=3);
        let users: Vec<UserSlot> = (0..k)
            .map(|_| {
                let beta = r.random_range(2.0e-5..2.4e-5);
                UserSlot {
                    fbs: 0,
                    success_mbs: r.random_range(0.972..0.996),
                    success_fbs: r.random_range(0.972..0.996),
                    psnr: r.random_range(23.0..36.0),
                    rate_mbs: beta * 3e5 / 10.0,
                    rate_fbs: beta * 3e5 / 10.0,
                }
            })
            .collect();
        let g = r.random_range(0.0..8.0);
        let p = SlotProblem::new(users.clone(), vec![g]).unwrap();
        let s = solve_single_fbs(&p, &cfg, None).unwrap();
        let exact = enumerate_single(&users, g);
        bad_obj += usize::from((s.objective - exact).abs() > 1e-4 * exact.abs());
        bad_gap += usize::from(!(s.duality_gap <= 1e-3));
        not_binary += usize::from(!(0..k).all(|j| s.share_mbs(j) == 0.0 || s.share_fbs(j) == 0.0));
        unconverged += usize::from(!s.converged);
        iters.push(s.iterations);
    }
    iters.sort_unstable();
    verdict(
        bad_obj + bad_gap + not_binary + unconverged == 0,
        format!(
            "{n} instances: {bad_obj} off the enumeration, {bad_gap} with gap > 1e-3, {not_binary} non-binary, \
             {unconverged} unconverged; median {} and max {} iterations",
            iters[n / 2],
            iters[n - 1]
        ),
    )
}

fn theorem2() -> Verdict {
    let mut r = rng(7);
    let cfg = GreedyConfig::default();
    let (mut violations, mut ratio_min) = (0, f64::INFINITY);
    for _ in 0..200 {
        let n = r.random_range(1..=3);
        let m = r.random_range(1..=3);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|_| r.random_bool(0.6))
            .collect();
        let graph = InterferenceGraph::new(n, &edges).unwrap();
        let per = r.random_range(1..=3);
        let users: Vec<UserSlot> = (0..n * per)
            .map(|j| UserSlot {
                fbs: j / per,
                success_mbs: r.random_range(0.972..0.996),
                success_fbs: r.random_range(0.972..0.996),
                psnr: r.random_range(23.0..36.0),
                rate_mbs: r.random_range(0.3..1.0),
                rate_fbs: r.random_range(0.3..1.0),
            })
            .collect();
        let beliefs: Vec<f64> = (0..m).map(|_| r.random_range(0.05..1.0)).collect();
        let p = SlotProblem::new(users, vec![0.0; n]).unwrap();
        let greedy = greedy_alloc(&p, &beliefs, &graph, &cfg).unwrap();
        let best = brute_force_alloc(&p, &beliefs, &graph, &cfg).unwrap();
        let d = graph.max_degree() as f64;
        let tol = 1e-9 * best.value.abs().max(1e-12);
        let ok = greedy.value >= best.value / (1.0 + d) - tol
            && best.value <= optbound_upper(&greedy) + tol
            && (d > 0.0 || (greedy.value - best.value).abs() <= tol);
        violations += usize::from(!ok);
        if best.value > 0.0 {
            ratio_min = ratio_min.min(greedy.value / best.value);
        }
    }
    verdict(violations == 0, format!("200 instances, {violations} violations, worst Q(greedy)/Q(opt) {ratio_min:.4}"))
}

fn rows_where<'a>(rows: &'a [ResultRow], alg: &'a str, metric: &'a str) -> impl Iterator<Item = &'a ResultRow> {
    rows.iter().filter(move |r| r.algorithm == alg && r.metric == metric)
}

fn trend(summary: &[SummaryRow], alg: &str) -> Vec<f64> {
    summary.iter().filter(|r| r.algorithm == alg && r.metric == "psnr").map(|r| r.mean).collect()
}

fn dominance_and_trends(runs: &[(&str, femtonet_harness::Outcome)]) -> Verdict {
    let violations: f64 =
        runs.iter().flat_map(|(_, o)| rows_where(&o.rows, "proposed", "dominance-violations")).map(|r| r.value).sum();
    let get = |name: &str| &runs.iter().find(|(n, _)| *n == name).unwrap().1.summary;
    let m = trend(get("fig9-single-channels.json"), "proposed");
    let eta = trend(get("fig10-utilization.json"), "proposed");
    let b0 = trend(get("fig12-common-bandwidth.json"), "proposed");
    let monotone_m = m.windows(2).all(|w| w[1] >= w[0]);
    let anti_eta = eta.windows(2).all(|w| w[1] <= w[0]);
    let (first, last) = (b0[1] - b0[0], b0[4] - b0[3]);
    let concave = last < first;
    verdict(
        violations == 0.0 && monotone_m && anti_eta && concave,
        format!(
            "{violations} dominance violations over {} sweeps; PSNR vs M {m:.2?} (monotone {monotone_m}); \
             vs utilization {eta:.2?} (non-increasing {anti_eta}); vs B0 {b0:.3?}, \
             gain 0.1->0.2 {first:.3} vs 0.4->0.5 {last:.3} (saturating {concave})",
            runs.len()
        ),
    )
}

fn telescoping(runs: &[(&str, femtonet_harness::Outcome)]) -> Verdict {
    let errs: Vec<f64> = runs
        .iter()
        .flat_map(|(_, o)| o.rows.iter().filter(|r| r.metric == "telescoping-error").map(|r| r.value))
        .collect();
    let max = errs.iter().copied().fold(0.0, f64::max);
    verdict(
        !errs.is_empty() && max <= 1e-9,
        format!("{} streaming runs, max |W - (alpha + beta*bits/T)| {max:.2e}", errs.len()),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for (cmd, name) in [
        ("multicast", "fig4-case3-levels.json"),
        ("stream", "fig9-interfering-channels.json"),
        ("stream", "fig8-convergence.json"),
    ] {
        let cfg = scenario(name);
        let outs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|t| dir.path().join(format!("{name}-{t}"))).collect();
        for (i, out) in outs.iter().enumerate() {
            let mut c = Command::new(env!("CARGO_BIN_EXE_femtonet"));
            c.args([cmd, "--config"]).arg(&cfg).args(["--seeds", "0..3", "--out"]).arg(out);
            if i == 2 {
                c.arg("--sequential");
            }
            let status = c.output().unwrap().status;
            if !status.success() {
                mismatched.push(format!("{name}: exit {status}"));
            }
        }
        for f in std::fs::read_dir(&outs[0]).unwrap() {
            let f = f.unwrap().file_name();
            let a = std::fs::read(outs[0].join(&f)).unwrap();
            for other in &outs[1..] {
                compared += 1;
                if std::fs::read(other.join(&f)).ok().as_ref() != Some(&a) {
                    mismatched.push(format!("{name}/{}", f.to_string_lossy()));
                }
            }
        }
    }
    verdict(
        mismatched.is_empty() && compared > 0,
        format!("{compared} file comparisons across repeated and sequential runs; mismatches {mismatched:?}"),
    )
}

fn report(n: usize, name: &str, started: Instant, limit: Option<Duration>, v: Verdict, failed: &mut usize) {
    let took = started.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let passed = v.passed && in_time;
    *failed += usize::from(!passed);
    let tag = if passed { "PASS" } else { "FAIL" };
    let budget = limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
    println!("[{tag}] criterion {n} ({name}): {} [{:.1}s{budget}]", v.detail, took.as_secs_f64());
}

fn main() -> ExitCode {
    let mut failed = 0;
    let secs = |s| Some(Duration::from_secs(s));
    let t = Instant::now();
    report(1, "oracle sandwich", t, secs(120), oracle_sandwich(), &mut failed);
    let t = Instant::now();
    report(2, "case I closed form", t, None, case1_closed_form(), &mut failed);
    let t = Instant::now();
    report(3, "power savings", t, secs(60), power_savings(), &mut failed);
    let t = Instant::now();
    report(4, "sensing fusion", t, secs(1), fusion(), &mut failed);
    let t = Instant::now();
    report(5, "collision guarantee", t, secs(60), collisions(), &mut failed);
    let t = Instant::now();
    report(6, "dual decomposition", t, secs(120), dual_decomposition(), &mut failed);
    let t = Instant::now();
    report(7, "greedy approximation", t, secs(300), theorem2(), &mut failed);

    let t = Instant::now();
    let runs: Vec<(&str, femtonet_harness::Outcome)> = [
        "fig9-single-channels.json",
        "fig9-interfering-channels.json",
        "fig10-utilization.json",
        "fig11-sensing-errors.json",
        "fig12-common-bandwidth.json",
        "noninterfering.json",
    ]
    .into_iter()
    .map(|name| (name, run(&load(name), Exec::default()).unwrap()))
    .collect();
    report(8, "scheduler dominance and trends", t, secs(600), dominance_and_trends(&runs), &mut failed);
    let t = Instant::now();
    report(9, "PSNR telescoping", t, None, telescoping(&runs), &mut failed);
    let t = Instant::now();
    report(10, "determinism", t, None, determinism(), &mut failed);

    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
