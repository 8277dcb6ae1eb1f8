use super::{solve_noninterfering, DualConfig, InterferenceGraph, SlotProblem};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Most FBS-channel pairs [`brute_force_alloc`] enumerates.
pub const ALLOC_BRUTE_FORCE_LIMIT: usize = 16;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyConfig {
    pub dual: DualConfig,
    /// Iteration cap for candidate evaluations (`None` = `dual.max_iters`).
    pub inner_iters: Option<usize>,
    pub exec: Exec,
}

impl GreedyConfig {
    fn inner(&self) -> DualConfig {
        DualConfig {
            max_iters: self.inner_iters.unwrap_or(self.dual.max_iters).max(1),
            record_trace: false,
            ..self.dual.clone()
        }
    }
}

/// One greedy pick.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub fbs: usize,
    /// Position in the available-channel list.
    pub channel: usize,
    /// `Δ_l = Q(π_l) − Q(π_{l−1})`
    pub delta: f64,
    /// `D(l)`: degree of the chosen FBS.
    pub degree: usize,
}

/// `c[i][m]` over FBSs × available channels, with the greedy trace if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAllocation {
    pub assign: Vec<Vec<bool>>,
    /// `Q` of this allocation, relative to the empty allocation.
    pub value: f64,
    /// Objective with no licensed channels at all.
    pub baseline: f64,
    pub steps: Vec<GreedyStep>,
}

impl ChannelAllocation {
    /// `G_i = Σ_m c[i][m]·P^A_m`.
    pub fn expected_channels(&self, beliefs: &[f64]) -> Vec<f64> {
        self.assign.iter().map(|row| row.iter().zip(beliefs).filter(|(c, _)| **c).map(|(_, p)| p).sum()).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.assign.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                if c {
                    out.push((i, m));
                }
            }
        }
        out
    }
}

fn check(problem: &SlotProblem, beliefs: &[f64], graph: &InterferenceGraph) -> Result<()> {
    if graph.num_vertices() != problem.num_fbs() {
        return Err(Error::contract(format!(
            "interference graph has {} vertices for {} FBSs",
            graph.num_vertices(),
            problem.num_fbs()
        )));
    }
    if let Some(p) = beliefs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::contract(format!("availability {p} is not a probability")));
    }
    Ok(())
}

fn objective_for(problem: &SlotProblem, assign: &[Vec<bool>], beliefs: &[f64], cfg: &DualConfig) -> Result<f64> {
    let g = assign.iter().map(|row| row.iter().zip(beliefs).filter(|(c, _)| **c).map(|(_, p)| p).sum()).collect();
    Ok(solve_noninterfering(&problem.with_channels(g)?, cfg, None)?.objective)
}

/// Repeatedly grants the FBS-channel pair with the largest gain in `Q`,
/// then drops that pair and the same channel at every neighbor, until no
/// candidate is left. `beliefs[m]` is `P^A` of the `m`-th available channel.
pub fn greedy_alloc(
    problem: &SlotProblem,
    beliefs: &[f64],
    graph: &InterferenceGraph,
    cfg: &GreedyConfig,
) -> Result<ChannelAllocation> {
    check(problem, beliefs, graph)?;
    let inner = cfg.inner();
    let n = problem.num_fbs();
    let channels = beliefs.len();
    let mut assign = vec![vec![false; channels]; n];
    let baseline = objective_for(problem, &assign, beliefs, &inner)?;
    let mut candidates: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..channels).map(move |m| (i, m))).collect();
    let mut current = 0.0;
    let mut steps = Vec::new();
    while !candidates.is_empty() {
        let values = cfg.exec.map(&candidates, |&(i, m)| {
            let mut trial = assign.clone();
            trial[i][m] = true;
            objective_for(problem, &trial, beliefs, &inner).map(|v| v - baseline)
        });
        let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
        let mut pick = 0;
        for (c, &v) in values.iter().enumerate() {
            if v > values[pick] {
                pick = c;
            }
        }
        let (i, m) = candidates[pick];
        assign[i][m] = true;
        steps.push(GreedyStep { fbs: i, channel: m, delta: values[pick] - current, degree: graph.degree(i) });
        current = values[pick];
        candidates.retain(|&(a, b)| !(b == m && (a == i || graph.adjacent(a, i))));
    }
    Ok(ChannelAllocation { assign, value: current, baseline, steps })
}

/// Exact best conflict-free allocation, `Q(Ω)`.
pub fn brute_force_alloc(
    problem: &SlotProblem,
    beliefs: &[f64],
    graph: &InterferenceGraph,
    cfg: &GreedyConfig,
) -> Result<ChannelAllocation> {
    check(problem, beliefs, graph)?;
    let n = problem.num_fbs();
    let channels = beliefs.len();
    let pairs = n * channels;
    if pairs > ALLOC_BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { what: "FBS-channel pairs", size: pairs, limit: ALLOC_BRUTE_FORCE_LIMIT });
    }
    let inner = cfg.inner();
    let decode = |mask: usize| -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..channels).map(|m| mask >> (i * channels + m) & 1 == 1).collect()).collect()
    };
    let masks: Vec<usize> = (0..1usize << pairs).filter(|&mask| graph.admits(&decode(mask))).collect();
    let values = cfg
        .exec
        .map(&masks, |&mask| objective_for(problem, &decode(mask), beliefs, &inner))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let baseline = values[0];
    let mut best = 0;
    for (c, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = c;
        }
    }
    Ok(ChannelAllocation { assign: decode(masks[best]), value: values[best] - baseline, baseline, steps: Vec::new() })
}

/// `Q(π_L) + Σ_l D(l)·Δ_l`.
pub fn optbound_upper(alloc: &ChannelAllocation) -> f64 {
    alloc.value + alloc.steps.iter().map(|s| s.degree as f64 * s.delta).sum::<f64>()
}

/// FBS-channel pair.
pub type Pair = (usize, usize);

/// Splits the pairs of `optimal` that the greedy run did not pick into the
/// sets `ω_l` of pairs first blocked by step `l` (same channel, adjacent
/// FBS). The second value lists pairs no step blocked; it is empty whenever
/// the greedy run exhausted its candidates.
pub fn omega_partition(
    greedy: &ChannelAllocation,
    optimal: &[Vec<bool>],
    graph: &InterferenceGraph,
) -> (Vec<Vec<Pair>>, Vec<Pair>) {
    let mut sets = vec![Vec::new(); greedy.steps.len()];
    let mut rest = Vec::new();
    for (i, row) in optimal.iter().enumerate() {
        for (m, &c) in row.iter().enumerate() {
            if !c || greedy.assign[i][m] {
                continue;
            }
            match greedy.steps.iter().position(|s| s.channel == m && graph.adjacent(s.fbs, i)) {
                Some(l) => sets[l].push((i, m)),
                None => rest.push((i, m)),
            }
        }
    }
    (sets, rest)
}

#[cfg(test)]
mod tests {
    use super::super::tests::user;
    use super::super::UserSlot;
    use super::*;
    use approx::assert_relative_eq;

    fn cells(n: usize) -> SlotProblem {
        let users: Vec<UserSlot> = (0..n)
            .flat_map(|i| {
                [user(i, 0.99, 0.98, 25.0 + i as f64, 0.6, 0.9 + 0.1 * i as f64), user(i, 0.985, 0.995, 27.0, 0.5, 1.0)]
            })
            .collect();
        SlotProblem::new(users, vec![0.0; n]).unwrap()
    }

    #[test]
    fn lone_fbs_gets_every_channel() {
        let p = cells(1);
        let a = greedy_alloc(&p, &[0.7, 0.4, 0.9], &InterferenceGraph::empty(1), &GreedyConfig::default()).unwrap();
        assert_eq!(a.assign, vec![vec![true; 3]]);
        assert_relative_eq!(a.steps.iter().map(|s| s.delta).sum::<f64>(), a.value, max_relative = 1e-12);
        assert_relative_eq!(optbound_upper(&a), a.value);
    }

    #[test]
    fn single_contested_channel_matches_enumeration() {
        let p = cells(2);
        let g = InterferenceGraph::new(2, &[(0, 1)]).unwrap();
        let cfg = GreedyConfig::default();
        let a = greedy_alloc(&p, &[0.8], &g, &cfg).unwrap();
        let b = brute_force_alloc(&p, &[0.8], &g, &cfg).unwrap();
        assert_eq!(a.pairs().len(), 1);
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
        assert!(b.value <= optbound_upper(&a) + 1e-12);
    }

    #[test]
    fn clique_gives_channel_to_one() {
        let p = cells(3);
        let g = InterferenceGraph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let b = brute_force_alloc(&p, &[0.6], &g, &GreedyConfig::default()).unwrap();
        assert_eq!(b.pairs().len(), 1);
    }

    #[test]
    fn allocations_respect_the_graph_and_partition_holds() {
        let p = cells(3);
        let g = InterferenceGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = GreedyConfig::default();
        let beliefs = [0.5, 0.9];
        let a = greedy_alloc(&p, &beliefs, &g, &cfg).unwrap();
        let b = brute_force_alloc(&p, &beliefs, &g, &cfg).unwrap();
        assert!(g.admits(&a.assign) && g.admits(&b.assign));
        assert!(a.value >= b.value / (1.0 + g.max_degree() as f64) - 1e-12);
        assert!(a.value <= b.value + 1e-9);
        let (sets, rest) = omega_partition(&a, &b.assign, &g);
        assert!(rest.is_empty());
        for (l, s) in sets.iter().enumerate() {
            assert!(s.len() <= a.steps[l].degree);
        }
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let p = cells(3);
        let g = InterferenceGraph::empty(3);
        let r = brute_force_alloc(&p, &[0.5; 6], &g, &GreedyConfig::default());
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }
}
