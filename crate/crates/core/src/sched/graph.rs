use crate::error::{Error, Result};

/// FBS conflict graph: an edge forbids two FBSs from sharing a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceGraph {
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl InterferenceGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); vertices];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(Error::config(format!("edge ({a},{b}) refers to a missing FBS")));
            }
            if a == b {
                return Err(Error::config(format!("self-loop on FBS {a}")));
            }
            let e = (a.min(b), a.max(b));
            if list.contains(&e) {
                return Err(Error::config(format!("duplicate edge ({a},{b})")));
            }
            list.push(e);
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        Ok(Self { neighbors, edges: list })
    }

    /// No edges.
    pub fn empty(vertices: usize) -> Self {
        Self { neighbors: vec![Vec::new(); vertices], edges: Vec::new() }
    }

    pub fn num_vertices(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `R(i)`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// `d_i^k`: whether FBS `i` is an endpoint of edge `k`.
    pub fn incidence(&self, i: usize, k: usize) -> bool {
        let (a, b) = self.edges[k];
        a == i || b == i
    }

    /// `Σ_i d_i^k·c[i][m] ≤ 1` for every edge `k` and channel `m`.
    pub fn admits(&self, alloc: &[Vec<bool>]) -> bool {
        let channels = alloc.first().map_or(0, Vec::len);
        (0..self.edges.len()).all(|k| {
            (0..channels).all(|m| (0..alloc.len()).filter(|&i| self.incidence(i, k) && alloc[i][m]).count() <= 1)
        })
    }
}
