//! Undirected social layer: Barabási–Albert growth, edge edits and hub ranking.

use rand::Rng;

use super::AgentId;
use crate::error::{Error, Result};

/// Simple undirected graph stored as sorted adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SocialNetwork {
    adjacency: Vec<Vec<AgentId>>,
    edge_count: usize,
}

impl SocialNetwork {
    pub fn empty(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(AgentId, AgentId)]) -> Result<Self> {
        let mut net = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidPopulation(format!("social edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidPopulation(format!("social self-loop at {a}")));
            }
            if !net.add_edge(a, b) {
                return Err(Error::InvalidPopulation(format!("duplicate social edge ({a}, {b})")));
            }
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbours(&self, i: AgentId) -> &[AgentId] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: AgentId) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, i: AgentId, j: AgentId) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Adds `{i, j}`. Returns false (and leaves the graph alone) for self-loops
    /// and edges that already exist.
    pub fn add_edge(&mut self, i: AgentId, j: AgentId) -> bool {
        if i == j {
            return false;
        }
        match self.adjacency[i].binary_search(&j) {
            Ok(_) => false,
            Err(pos) => {
                self.adjacency[i].insert(pos, j);
                let back = self.adjacency[j].binary_search(&i).unwrap_err();
                self.adjacency[j].insert(back, i);
                self.edge_count += 1;
                true
            }
        }
    }

    pub fn remove_edge(&mut self, i: AgentId, j: AgentId) -> bool {
        match self.adjacency[i].binary_search(&j) {
            Ok(pos) => {
                self.adjacency[i].remove(pos);
                let back = self.adjacency[j].binary_search(&i).expect("adjacency is symmetric");
                self.adjacency[j].remove(back);
                self.edge_count -= 1;
                true
            }
            Err(_) => false,
        }
    }

    /// Drops every edge incident to `i`; returns how many were removed.
    pub fn isolate(&mut self, i: AgentId) -> usize {
        let nbrs = std::mem::take(&mut self.adjacency[i]);
        for &j in &nbrs {
            let back = self.adjacency[j].binary_search(&i).expect("adjacency is symmetric");
            self.adjacency[j].remove(back);
        }
        self.edge_count -= nbrs.len();
        nbrs.len()
    }

    /// Edges as `(i, j)` with `i < j`, in ascending order.
    pub fn edges(&self) -> Vec<(AgentId, AgentId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, row) in self.adjacency.iter().enumerate() {
            out.extend(row.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Checks symmetry, absence of self-loops/duplicates and the cached edge count.
    pub fn check_invariants(&self) -> Result<()> {
        let mut count = 0;
        for (i, row) in self.adjacency.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidPopulation(format!("adjacency of {i} unsorted or duplicated")));
            }
            for &j in row {
                if j == i {
                    return Err(Error::InvalidPopulation(format!("self-loop at {i}")));
                }
                if j >= self.adjacency.len() || self.adjacency[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidPopulation(format!("asymmetric edge ({i}, {j})")));
                }
            }
            count += row.len();
        }
        if count != 2 * self.edge_count {
            return Err(Error::InvalidPopulation("edge count out of sync".into()));
        }
        Ok(())
    }
}

/// Unordered pairs `(i, k)`, `i < k`, joined by a path `i - j - k` but not by
/// an edge, for which `admit(i, j, k)` holds for at least one middle `j`.
///
/// Pairs come out in discovery order: ascending `i`, then `j`, then `k`.
/// `admit` must be symmetric in `i` and `k`.
pub fn two_hop_candidates(
    social: &SocialNetwork,
    mut admit: impl FnMut(AgentId, AgentId, AgentId) -> bool,
) -> Vec<(AgentId, AgentId)> {
    let n = social.len();
    let mut seen_for = vec![usize::MAX; n];
    let mut out = Vec::new();
    for i in 0..n {
        for &j in social.neighbours(i) {
            for &k in social.neighbours(j) {
                if k <= i || seen_for[k] == i || social.contains(i, k) {
                    continue;
                }
                if admit(i, j, k) {
                    seen_for[k] = i;
                    out.push((i, k));
                }
            }
        }
    }
    out
}

/// Barabási–Albert growth: a complete seed graph on `m + 1` nodes, then every
/// further node links to `m` distinct existing nodes chosen proportionally to
/// their current degree.
pub fn generate_ba_network<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<SocialNetwork> {
    if m == 0 || m >= n {
        return Err(Error::param("ba_m", format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    let mut net = SocialNetwork::empty(n);
    // Every edge endpoint once; a uniform pick from here is degree-proportional.
    let mut endpoints: Vec<AgentId> = Vec::with_capacity(2 * m * n);
    for i in 0..=m {
        for j in i + 1..=m {
            net.add_edge(i, j);
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            net.add_edge(v, t);
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(net)
}

/// Hub score of every agent: its social degree.
pub fn hub_scores(social: &SocialNetwork) -> Vec<usize> {
    (0..social.len()).map(|i| social.degree(i)).collect()
}

/// Agents sorted by descending hub score, ties by ascending id.
pub fn hub_ranking(social: &SocialNetwork) -> Vec<AgentId> {
    let scores = hub_scores(social);
    let mut order: Vec<AgentId> = (0..social.len()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    order
}
