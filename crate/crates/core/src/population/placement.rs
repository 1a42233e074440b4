//! Clustered spatial placement of agents on the unit square.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Position;
use crate::error::{Error, Result};
use crate::scalar::{clamp_unit, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: Real")]
pub struct PlacementParams<T> {
    pub n_clusters: usize,
    pub cluster_sigma: T,
}

impl<T: Real> Default for PlacementParams<T> {
    fn default() -> Self {
        Self { n_clusters: 5, cluster_sigma: T::lit(0.05) }
    }
}

impl<T: Real> PlacementParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::param("n_clusters", "must be at least 1"));
        }
        if !(self.cluster_sigma > T::zero()) || !self.cluster_sigma.is_finite() {
            return Err(Error::param("cluster_sigma", "must be a positive finite number"));
        }
        Ok(())
    }
}

/// Result of [`place_agents_clustered`]: positions plus the mixture that produced them.
#[derive(Clone, Debug)]
pub struct ClusteredPlacement<T> {
    pub centers: Vec<Position<T>>,
    pub cluster_of: Vec<usize>,
    pub positions: Vec<Position<T>>,
}

/// Gaussian mixture placement. Centers are uniform on the unit square, each
/// agent picks a cluster uniformly and lands at `center + sigma * N(0, I)`,
/// clamped to the square.
pub fn place_agents_clustered<T: Real, R: Rng + ?Sized>(
    n: usize,
    params: &PlacementParams<T>,
    rng: &mut R,
) -> ClusteredPlacement<T> {
    let k = params.n_clusters.max(1);
    let centers: Vec<Position<T>> = (0..k)
        .map(|_| Position::new(T::sample_unit(rng), T::sample_unit(rng)))
        .collect();
    let mut cluster_of = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..k);
        let center = centers[c];
        let dlat = params.cluster_sigma * T::sample_standard_normal(rng);
        let dlon = params.cluster_sigma * T::sample_standard_normal(rng);
        cluster_of.push(c);
        positions.push(Position::new(
            clamp_unit(center.latitude + dlat),
            clamp_unit(center.longitude + dlon),
        ));
    }
    ClusteredPlacement { centers, cluster_of, positions }
}
