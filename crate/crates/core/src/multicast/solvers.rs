use super::{total_power, Instance, LevelAssignment, PowerAllocation};
use crate::error::{Error, Result};

/// Each user connects to the eligible station with the largest gain; ties go
/// to the MBS.
pub fn heuristic_assign(inst: &Instance) -> LevelAssignment {
    let gains = inst.gains();
    let station = (0..inst.num_users())
        .map(|k| match inst.coverage()[k] {
            Some(f) if gains.get(f, k) > gains.get(0, k) => f,
            _ => 0,
        })
        .collect();
    LevelAssignment::from_stations(inst, station).expect("heuristic picks eligible stations")
}

/// Closed form for the case where every user connects to station `m`.
///
/// `Q_l = N0·Γ·Σ_{i≥l} (1+Γ)^{e(l,i)}·W(U_i)` where `e(l,i)` counts the
/// nonempty levels in `l..i`; with every level nonempty this is `i − l`.
pub fn solve_case1(inst: &Instance, m: usize) -> Result<PowerAllocation> {
    if m >= inst.num_stations() {
        return Err(Error::contract(format!("station {m} does not exist")));
    }
    if let Some(k) = (0..inst.num_users()).find(|&k| !inst.is_eligible(k, m)) {
        return Err(Error::contract(format!("user {k} is not covered by station {m}")));
    }
    let levels = inst.levels();
    let g = inst.gamma()[m];
    let w: Vec<f64> = (0..levels).map(|l| inst.worst_inverse_gain(m, &inst.demand().users_at(l))).collect();
    let nonempty: Vec<bool> = (0..levels).map(|l| !inst.demand().users_at(l).is_empty()).collect();
    let mut q = vec![vec![0.0; levels + 1]; inst.num_stations()];
    for (l, slot) in q[m].iter_mut().take(levels).enumerate() {
        let mut e = 0;
        let mut s = 0.0;
        for i in l..levels {
            s += (1.0 + g).powi(e) * w[i];
            if nonempty[i] {
                e += 1;
            }
        }
        *slot = inst.noise() * g * s;
    }
    Ok(super::PowerAllocation::from_cumulative(q, inst.noise()))
}

/// One MBS and one FBS covering every user: each level goes wholesale to the
/// station with the smaller expected power increment, MBS on ties.
pub fn solve_case2(inst: &Instance) -> Result<(LevelAssignment, PowerAllocation)> {
    if inst.num_stations() != 2 {
        return Err(Error::contract(format!(
            "the two-station solver needs exactly one FBS, got {}",
            inst.num_stations() - 1
        )));
    }
    if let Some(k) = inst.coverage().iter().position(|c| *c != Some(1)) {
        return Err(Error::contract(format!("user {k} is outside the femtocell")));
    }
    let gamma = inst.gamma();
    let mut c = [0i32; 2];
    let mut station = vec![0; inst.num_users()];
    for l in 0..inst.levels() {
        let users = inst.demand().users_at(l);
        if users.is_empty() {
            continue;
        }
        let inc = |m: usize| gamma[m] * (1.0 + gamma[m]).powi(c[m]) * inst.worst_inverse_gain(m, &users);
        let m = if inc(0) <= inc(1) { 0 } else { 1 };
        c[m] += 1;
        for k in users {
            station[k] = m;
        }
    }
    let asg = LevelAssignment::from_stations(inst, station)?;
    let alloc = total_power(inst, &asg);
    Ok((asg, alloc))
}

/// MBS plus any number of FBSs with disjoint coverage.
///
/// Per level, FBSs are tried in ascending order of their own increment and
/// kept only if serving their cell (with the MBS covering every remaining
/// user) lowers the level's total increment. Users outside every femtocell
/// always stay on the MBS.
pub fn solve_case3(inst: &Instance) -> Result<(LevelAssignment, PowerAllocation)> {
    let stations = inst.num_stations();
    if stations < 2 {
        return Err(Error::contract("the multi-FBS solver needs at least one FBS"));
    }
    let gamma = inst.gamma();
    let mut c = vec![0i32; stations];
    let mut station = vec![0; inst.num_users()];
    for l in 0..inst.levels() {
        let all = inst.demand().users_at(l);
        if all.is_empty() {
            continue;
        }
        let cells: Vec<Vec<usize>> =
            (0..stations).map(|m| if m == 0 { all.clone() } else { inst.eligible(l, m) }).collect();
        let delta: Vec<f64> = (0..stations)
            .map(|m| gamma[m] * (1.0 + gamma[m]).powi(c[m]) * inst.worst_inverse_gain(m, &cells[m]))
            .collect();
        let mbs_rest = |chosen: &[usize]| {
            let rest: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&k| !matches!(inst.coverage()[k], Some(f) if chosen.contains(&f)))
                .collect();
            gamma[0] * (1.0 + gamma[0]).powi(c[0]) * inst.worst_inverse_gain(0, &rest)
        };
        let mut order: Vec<usize> = (1..stations).collect();
        order.sort_by(|&a, &b| delta[a].total_cmp(&delta[b]).then(a.cmp(&b)));

        let mut best = delta[0];
        let mut psi: Vec<usize> = Vec::new();
        for m in order {
            let mut trial = psi.clone();
            trial.push(m);
            let cand = trial.iter().map(|&i| delta[i]).sum::<f64>() + mbs_rest(&trial);
            if cand < best {
                psi = trial;
                best = cand;
            }
        }

        let mut mbs_used = false;
        for &k in &all {
            match inst.coverage()[k] {
                Some(f) if psi.contains(&f) => station[k] = f,
                _ => {
                    station[k] = 0;
                    mbs_used = true;
                }
            }
        }
        if mbs_used {
            c[0] += 1;
        }
        for &m in &psi {
            if !cells[m].is_empty() {
                c[m] += 1;
            }
        }
    }
    let asg = LevelAssignment::from_stations(inst, station)?;
    let alloc = total_power(inst, &asg);
    Ok((asg, alloc))
}
