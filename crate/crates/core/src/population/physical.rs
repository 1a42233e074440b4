//! Radius graph over agent positions.

use std::collections::HashMap;

use super::{euclidean_distance, AgentId, Position};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Undirected physical-proximity network with cached pair distances.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalNetwork<T> {
    /// Sorted by neighbour id.
    adjacency: Vec<Vec<(AgentId, T)>>,
    /// `(i, j, d)` with `i < j`, sorted.
    edges: Vec<(AgentId, AgentId, T)>,
}

impl<T: Real> PhysicalNetwork<T> {
    /// Builds from an explicit edge list, computing distances from `positions`.
    pub fn from_edges(positions: &[Position<T>], edges: &[(AgentId, AgentId)]) -> Result<Self> {
        let n = positions.len();
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidPopulation(format!("physical edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidPopulation(format!("physical self-loop at {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            list.push((i, j, euclidean_distance(positions[i], positions[j])));
        }
        list.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if list.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidPopulation("duplicate physical edge".into()));
        }
        Ok(Self::from_sorted(n, list))
    }

    fn from_sorted(n: usize, edges: Vec<(AgentId, AgentId, T)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, d) in &edges {
            adjacency[i].push((j, d));
            adjacency[j].push((i, d));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(k, _)| k);
        }
        Self { adjacency, edges }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbours(&self, i: AgentId) -> &[(AgentId, T)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: AgentId) -> usize {
        self.adjacency[i].len()
    }

    pub fn edges(&self) -> &[(AgentId, AgentId, T)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, i: AgentId, j: AgentId) -> bool {
        self.adjacency[i].binary_search_by_key(&j, |&(k, _)| k).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.adjacency.len() as f64
        }
    }
}

/// Connects every pair of agents at distance `<= radius`.
///
/// Uses a uniform grid with cell side `radius`, so only the 3x3 block of cells
/// around an agent is scanned.
pub fn build_physical_network<T: Real>(positions: &[Position<T>], radius: T) -> PhysicalNetwork<T> {
    let n = positions.len();
    let cell_of = |p: &Position<T>| -> (i64, i64) {
        let cx = (p.latitude / radius).floor().to_i64().unwrap_or(0);
        let cy = (p.longitude / radius).floor().to_i64().unwrap_or(0);
        (cx, cy)
    };
    let mut grid: HashMap<(i64, i64), Vec<AgentId>> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        grid.entry(cell_of(p)).or_default().push(i);
    }
    let mut edges = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else { continue };
                for &j in bucket {
                    if j <= i {
                        continue;
                    }
                    let d = euclidean_distance(*p, positions[j]);
                    if d <= radius {
                        edges.push((i, j, d));
                    }
                }
            }
        }
    }
    edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    PhysicalNetwork::from_sorted(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scalar::Real;

    fn pos(a: f64, b: f64) -> Position<f64> {
        Position::new(a, b)
    }

    #[test]
    fn inclusion_and_exclusion() {
        let near = build_physical_network(&[pos(0.0, 0.0), pos(0.3, 0.0)], 0.5);
        assert_eq!(near.edge_count(), 1);
        let far = build_physical_network(&[pos(0.0, 0.0), pos(0.6, 0.0)], 0.5);
        assert_eq!(far.edge_count(), 0);
    }

    #[test]
    fn matches_all_pairs_oracle() {
        let mut rng = seeded(99);
        for &(n, r) in &[(100usize, 0.1f64), (100, 0.35), (1000, 0.05), (1000, 0.1)] {
            let positions: Vec<_> = (0..n)
                .map(|_| pos(f64::sample_unit(&mut rng), f64::sample_unit(&mut rng)))
                .collect();
            let net = build_physical_network(&positions, r);
            let mut expected = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let dx = positions[i].latitude - positions[j].latitude;
                    let dy = positions[i].longitude - positions[j].longitude;
                    if (dx * dx + dy * dy).sqrt() <= r {
                        expected.push((i, j));
                    }
                }
            }
            let got: Vec<_> = net.edges().iter().map(|&(i, j, _)| (i, j)).collect();
            assert_eq!(got, expected, "n={n} r={r}");
            for &(i, j, d) in net.edges() {
                assert_eq!(d, euclidean_distance(positions[i], positions[j]));
                assert!(net.contains(j, i) && net.contains(i, j));
            }
        }
    }

    #[test]
    fn from_edges_rejects_garbage() {
        let ps = [pos(0.0, 0.0), pos(1.0, 0.0)];
        assert!(PhysicalNetwork::from_edges(&ps, &[(0, 0)]).is_err());
        assert!(PhysicalNetwork::from_edges(&ps, &[(0, 2)]).is_err());
        assert!(PhysicalNetwork::from_edges(&ps, &[(0, 1), (1, 0)]).is_err());
        let ok = PhysicalNetwork::from_edges(&ps, &[(1, 0)]).unwrap();
        assert_eq!(ok.edges(), &[(0, 1, 1.0)]);
    }
}
