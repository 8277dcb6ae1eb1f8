use super::{Instance, LevelAssignment};

/// Closed-form bounds on the total power, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub upper_tight: f64,
    pub upper_loose: f64,
    pub lower_tight: f64,
    pub lower_loose: f64,
}

/// `Σ_{i<n} (1+g)^i`, i.e. `((1+g)^n − 1)/g`, equal to `n` at `g = 0`.
fn geometric(g: f64, n: usize) -> f64 {
    if g == 0.0 {
        n as f64
    } else if g < 1e-4 {
        (n as f64 * g.ln_1p()).exp_m1() / g
    } else {
        ((1.0 + g).powi(n as i32) - 1.0) / g
    }
}

/// Performance bounds.
///
/// With an assignment, all four bounds bracket the power of *that*
/// assignment (pass the optimal assignment to bracket the optimum). Without
/// one, the upper bounds come from the all-to-MBS assignment and the lower
/// bounds from an assignment-free relaxation: each nonempty level pays at
/// least its hardest user's cheapest `Γ/H`, and at most `M+1` levels can share
/// any given exponent.
pub fn bounds(inst: &Instance, asg: Option<&LevelAssignment>) -> Bounds {
    let n0 = inst.noise();
    let stations = inst.num_stations();
    let levels = inst.levels();
    let gamma = inst.gamma();
    let gamma_max = gamma.iter().copied().fold(0.0, f64::max);
    let gamma_min = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    let nonempty: Vec<usize> = (0..levels).filter(|&l| !inst.demand().users_at(l).is_empty()).collect();

    let fallback;
    let (asg_ref, assignment_free) = match asg {
        Some(a) => (a, false),
        None => {
            fallback = LevelAssignment::all_to(inst, 0).expect("MBS covers everyone");
            (&fallback, true)
        }
    };

    let g_bar: Vec<f64> = (0..stations)
        .map(|m| (0..levels).map(|l| gamma[m] * inst.worst_inverse_gain(m, asg_ref.users(m, l))).fold(0.0, f64::max))
        .collect();
    let upper_tight = n0 * (0..stations).map(|m| g_bar[m] * geometric(gamma[m], levels)).sum::<f64>();
    let g_max = g_bar.iter().copied().fold(0.0, f64::max);
    let upper_loose = n0 * g_max * stations as f64 * geometric(gamma_max, levels);

    let (lower_tight, lower_loose) = if assignment_free {
        let mut g: Vec<f64> = nonempty
            .iter()
            .map(|&l| {
                inst.demand()
                    .users_at(l)
                    .into_iter()
                    .map(|k| {
                        (0..stations)
                            .filter(|&m| inst.is_eligible(k, m))
                            .map(|m| gamma[m] / inst.gains().get(m, k))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        g.sort_by(|a, b| b.total_cmp(a));
        let weight = |i: usize| (1.0 + gamma_min).powi((i / stations) as i32);
        let tight = n0 * g.iter().enumerate().map(|(i, gi)| gi * weight(i)).sum::<f64>();
        let g_min = g.iter().copied().fold(f64::INFINITY, f64::min);
        let loose = if g.is_empty() { 0.0 } else { n0 * g_min * (0..g.len()).map(weight).sum::<f64>() };
        (tight, loose)
    } else {
        let g_low: Vec<f64> = nonempty
            .iter()
            .map(|&l| {
                (0..stations)
                    .map(|m| gamma[m] * inst.worst_inverse_gain(m, asg_ref.users(m, l)))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let r = (1.0 + gamma_min).powf(1.0 / stations as f64);
        let tight = n0 * stations as f64 * g_low.iter().enumerate().map(|(i, g)| g * r.powi(i as i32)).sum::<f64>();
        let g_min = g_low.iter().copied().fold(f64::INFINITY, f64::min);
        let loose = if g_low.is_empty() { 0.0 } else { n0 * g_min * stations as f64 * geometric(r - 1.0, g_low.len()) };
        (tight, loose)
    };

    Bounds { upper_tight, upper_loose, lower_tight, lower_loose }
}

#[cfg(test)]
mod tests {
    use super::super::{total_power, LevelDemand};
    use super::*;
    use crate::net::ChannelGainMatrix;
    use approx::assert_relative_eq;

    #[test]
    fn single_station_bounds_coincide_with_optimum() {
        let inst = Instance::from_parts(
            vec![None, None],
            LevelDemand::new(2, vec![0, 1]).unwrap(),
            ChannelGainMatrix::new(vec![vec![1.0, 1.0]]).unwrap(),
            vec![3.0],
            1.0,
        )
        .unwrap();
        let asg = LevelAssignment::all_to(&inst, 0).unwrap();
        let b = bounds(&inst, Some(&asg));
        assert_relative_eq!(b.upper_tight, 15.0);
        assert_relative_eq!(b.lower_tight, 15.0);
        assert_relative_eq!(total_power(&inst, &asg).total, 15.0);
        let free = bounds(&inst, None);
        assert_relative_eq!(free.upper_tight, 15.0);
        assert_relative_eq!(free.lower_tight, 15.0);
        assert!(free.lower_loose <= free.lower_tight + 1e-12);
        assert!(b.lower_loose <= b.lower_tight + 1e-12);
    }

    #[test]
    fn one_level_upper_is_sum_of_worst() {
        let inst = Instance::from_parts(
            vec![Some(1), Some(1), None],
            LevelDemand::new(1, vec![0, 0, 0]).unwrap(),
            ChannelGainMatrix::new(vec![vec![0.5, 2.0, 1.0], vec![4.0, 0.25, 1.0]]).unwrap(),
            vec![1.0, 3.0],
            2.0,
        )
        .unwrap();
        let asg = LevelAssignment::from_stations(&inst, vec![1, 0, 0]).unwrap();
        let b = bounds(&inst, Some(&asg));
        // Ḡ_0 = 1/1, Ḡ_1 = 3/4
        assert_relative_eq!(b.upper_tight, 2.0 * (1.0 + 0.75));
        assert!(b.lower_tight <= b.upper_tight);
    }

    #[test]
    fn zero_threshold_limits() {
        assert_eq!(geometric(0.0, 4), 4.0);
        assert_relative_eq!(geometric(1e-12, 4), 4.0, max_relative = 1e-6);
        let inst = Instance::from_parts(
            vec![None],
            LevelDemand::new(3, vec![1]).unwrap(),
            ChannelGainMatrix::new(vec![vec![1.0]]).unwrap(),
            vec![0.0],
            1.0,
        )
        .unwrap();
        let b = bounds(&inst, None);
        assert_eq!(b.upper_tight, 0.0);
        assert_eq!(b.lower_tight, 0.0);
        assert!(b.upper_loose.is_finite() && b.lower_loose.is_finite());
    }
}
