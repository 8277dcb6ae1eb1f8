use super::{total_power, Instance, LevelAssignment, PowerAllocation};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Most users with a real choice (inside some femtocell) the oracle enumerates.
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Exact minimum over every assignment of each user to the MBS or its
/// covering FBS. Ties keep the assignment with more users on the MBS first in
/// enumeration order.
pub fn brute_force_multicast(inst: &Instance, exec: Exec) -> Result<(LevelAssignment, PowerAllocation)> {
    let free: Vec<usize> = (0..inst.num_users()).filter(|&k| inst.coverage()[k].is_some()).collect();
    if free.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { what: "users inside femtocells", size: free.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let build = |mask: usize| {
        let mut station = vec![0; inst.num_users()];
        for (b, &k) in free.iter().enumerate() {
            if mask >> b & 1 == 1 {
                station[k] = inst.coverage()[k].expect("free users are covered");
            }
        }
        LevelAssignment::from_stations(inst, station).expect("enumerated stations are eligible")
    };
    let (mask, _) = exec
        .argmin_range(1 << free.len(), |mask| total_power(inst, &build(mask)).total)
        .expect("at least one assignment");
    let asg = build(mask);
    let alloc = total_power(inst, &asg);
    Ok((asg, alloc))
}
