use super::{ScheduleSolution, SlotProblem};
use crate::error::Result;

/// `P̄·R` of a branch: the expected rate the user would see there.
fn quality(problem: &SlotProblem, j: usize, mbs: bool) -> f64 {
    let (s, _, r) = problem.branch(j, mbs);
    s * r
}

fn better_branch(problem: &SlotProblem, j: usize) -> bool {
    quality(problem, j, true) >= quality(problem, j, false)
}

/// Every user takes its better branch; each transmitter splits the slot
/// equally among the users on it.
pub fn heuristic_equal(problem: &SlotProblem) -> Result<ScheduleSolution> {
    let k = problem.num_users();
    let mbs: Vec<bool> = (0..k).map(|j| better_branch(problem, j)).collect();
    let mut count = vec![0usize; problem.num_transmitters()];
    for j in 0..k {
        count[problem.transmitter(j, mbs[j])] += 1;
    }
    let share = (0..k).map(|j| 1.0 / count[problem.transmitter(j, mbs[j])] as f64).collect();
    ScheduleSolution::from_point(problem, mbs, share)
}

/// Every FBS with channels gives its whole slot to its best user; the MBS
/// gives its slot to the best of the users left over. Unserved users sit on
/// their better branch with no time.
pub fn heuristic_diversity(problem: &SlotProblem) -> Result<ScheduleSolution> {
    let k = problem.num_users();
    let mut mbs: Vec<bool> = (0..k).map(|j| better_branch(problem, j)).collect();
    let mut share = vec![0.0; k];
    let mut taken = vec![false; k];
    let argmax = |cands: &mut dyn Iterator<Item = usize>, on_mbs: bool| {
        cands.fold(None, |best: Option<usize>, j| match best {
            Some(b) if quality(problem, b, on_mbs) >= quality(problem, j, on_mbs) => Some(b),
            _ => Some(j),
        })
    };
    for i in 0..problem.num_fbs() {
        let mut members = (0..k).filter(|&j| problem.users()[j].fbs == i && quality(problem, j, false) > 0.0);
        if let Some(j) = argmax(&mut members, false) {
            mbs[j] = false;
            share[j] = 1.0;
            taken[j] = true;
        }
    }
    let mut rest = (0..k).filter(|&j| !taken[j] && quality(problem, j, true) > 0.0);
    if let Some(j) = argmax(&mut rest, true) {
        mbs[j] = true;
        share[j] = 1.0;
    }
    ScheduleSolution::from_point(problem, mbs, share)
}
