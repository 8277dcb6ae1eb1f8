//! Multicast power experiments.

use femtonet::multicast::{
    bounds, brute_force_multicast, heuristic_assign, solve_case1, solve_case2, solve_case3, total_power,
    verify_feasible, Instance, LevelAssignment, LevelDemand, PowerAllocation, BRUTE_FORCE_LIMIT,
};
use femtonet::net::{footprint_volume, sample_gains, to_dbm, FadingSpec, Network};
use femtonet::rng::{stream, Purpose};
use femtonet::Exec;

use crate::config::{ExperimentConfig, MulticastParams, Point, Scenario};
use crate::error::{HarnessError, Result};
use crate::output::ResultRow;

/// One drawn instance plus the network it lives on.
#[derive(Debug, Clone)]
pub struct Drawn {
    pub network: Network,
    pub instance: Instance,
}

/// Coverage for the scenario: everyone in the single femtocell (Case II),
/// round-robin over FBSs with the tail uncovered (Case III), nobody (Case I).
fn coverage(scenario: Scenario, p: &MulticastParams) -> Vec<Option<usize>> {
    (0..p.users)
        .map(|k| match scenario {
            Scenario::MulticastCase2 => Some(1),
            Scenario::MulticastCase3 if k < p.users - p.uncovered_users => Some(1 + k % p.femtocells),
            _ => None,
        })
        .collect()
}

/// Draws gains and level demand for one seed. Every scenario shares the MBS
/// row of the gain matrix for a given seed.
pub fn draw(scenario: Scenario, p: &MulticastParams, seed: u64) -> Result<Drawn> {
    let fbs_bw: Vec<f64> = match scenario {
        Scenario::MulticastCase1 => Vec::new(),
        Scenario::MulticastCase2 => vec![p.fbs_bandwidth],
        _ => vec![p.fbs_bandwidth; p.femtocells],
    };
    let mbs_bw = if scenario == Scenario::MulticastCase1 { p.total_bandwidth } else { p.mbs_bandwidth };
    let network = Network::with_bandwidths(mbs_bw, &fbs_bw, coverage(scenario, p))?;
    let mut means = vec![vec![p.mbs_gain; p.users]];
    means.extend(fbs_bw.iter().map(|_| vec![p.fbs_gain; p.users]));
    let gains = sample_gains(&FadingSpec::new(means, seed)?, &network, 0)?;
    let demand = LevelDemand::random(p.users, p.levels, &mut stream(seed, Purpose::Demand, &[]))?;
    let instance = Instance::new(&network, demand, gains, p.rate, p.noise)?;
    Ok(Drawn { network, instance })
}

struct Recorder<'a> {
    rows: Vec<ResultRow>,
    scenario: &'a str,
    seed: u64,
    sweep: String,
}

impl Recorder<'_> {
    fn push(&mut self, algorithm: &str, metric: &str, value: f64) {
        self.rows.push(ResultRow {
            scenario: self.scenario.to_string(),
            seed: self.seed,
            sweep: self.sweep.clone(),
            algorithm: algorithm.to_string(),
            metric: metric.to_string(),
            value,
        });
    }

    fn power(&mut self, algorithm: &str, net: &Network, alloc: &PowerAllocation, kappa: f64) -> Result<()> {
        self.push(algorithm, "total-power-dbm", to_dbm(alloc.total)?);
        let powers: Vec<f64> = (0..alloc.q.len()).map(|m| alloc.station_total(m)).collect();
        self.push(algorithm, "footprint", footprint_volume(&powers, &net.bandwidths(), kappa));
        Ok(())
    }
}

fn check_feasible(inst: &Instance, asg: &LevelAssignment, alloc: &PowerAllocation, who: &str) -> Result<()> {
    let f = verify_feasible(inst, asg, alloc);
    if f.feasible {
        Ok(())
    } else {
        Err(HarnessError::Model(femtonet::Error::Contract(format!(
            "{who} produced an infeasible allocation: {}",
            f.violations.join("; ")
        ))))
    }
}

/// All rows for one seed at one sweep point.
pub fn run_point(cfg: &ExperimentConfig, point: &Point, seed: u64, exec: Exec) -> Result<Vec<ResultRow>> {
    let p = cfg.multicast.at(point);
    let scenario = cfg.scenario;
    let drawn = draw(scenario, &p, seed)?;
    let (net, inst) = (&drawn.network, &drawn.instance);
    let mut rec = Recorder { rows: Vec::new(), scenario: scenario.name(), seed, sweep: point.label() };
    let kappa = p.radius_per_watt;

    if scenario == Scenario::MulticastCase1 {
        let alloc = solve_case1(inst, 0)?;
        rec.power("case1", net, &alloc, kappa)?;
        return Ok(rec.rows);
    }

    let (asg, alloc) = if scenario == Scenario::MulticastCase2 { solve_case2(inst)? } else { solve_case3(inst)? };
    check_feasible(inst, &asg, &alloc, "proposed")?;
    rec.power("proposed", net, &alloc, kappa)?;

    let h = heuristic_assign(inst);
    let h_alloc = total_power(inst, &h);
    rec.power("heuristic", net, &h_alloc, kappa)?;

    if scenario == Scenario::MulticastCase2 {
        let single = draw(Scenario::MulticastCase1, &p, seed)?;
        let c1 = solve_case1(&single.instance, 0)?;
        rec.power("case1", &single.network, &c1, kappa)?;
    }

    let free = inst.coverage().iter().filter(|c| c.is_some()).count();
    if p.oracle && free <= BRUTE_FORCE_LIMIT {
        let (_, best) = brute_force_multicast(inst, exec)?;
        rec.power("optimal", net, &best, kappa)?;
        rec.push("proposed", "gap-db", to_dbm(alloc.total)? - to_dbm(best.total)?);
    }

    let b = bounds(inst, None);
    for (metric, v) in [
        ("lower-tight-dbm", b.lower_tight),
        ("lower-loose-dbm", b.lower_loose),
        ("upper-tight-dbm", b.upper_tight),
        ("upper-loose-dbm", b.upper_loose),
    ] {
        // a zero lower bound has no dBm value
        if v > 0.0 {
            rec.push("bound", metric, to_dbm(v)?);
        }
    }
    Ok(rec.rows)
}
