//! Agents, their placement and the two network layers they live in.

mod document;
mod physical;
mod placement;
mod social;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use document::{PopulationDocument, POPULATION_DOCUMENT_VERSION};
pub use physical::{build_physical_network, PhysicalNetwork};
pub use placement::{place_agents_clustered, ClusteredPlacement, PlacementParams};
pub use social::{generate_ba_network, hub_ranking, hub_scores, two_hop_candidates, SocialNetwork};

use crate::error::{Error, Result};
use crate::rng::{streams, substream};
use crate::scalar::{is_probability, Real};

/// Dense agent index in `0..n`.
pub type AgentId = usize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Position<T> {
    pub latitude: T,
    pub longitude: T,
}

impl<T> Position<T> {
    pub const fn new(latitude: T, longitude: T) -> Self {
        Self { latitude, longitude }
    }
}

pub fn euclidean_distance<T: Real>(p: Position<T>, q: Position<T>) -> T {
    let dlat = p.latitude - q.latitude;
    let dlon = p.longitude - q.longitude;
    (dlat * dlat + dlon * dlon).sqrt()
}

/// Trust profile derived from the probability of choosing to cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Profile {
    HighlyDistrusting,
    Distrusting,
    Trusting,
    HighlyTrusting,
}

impl Profile {
    pub const ALL: [Profile; 4] =
        [Profile::HighlyDistrusting, Profile::Distrusting, Profile::Trusting, Profile::HighlyTrusting];
}

/// Buckets are `[0, .25) [.25, .5) [.5, .75) [.75, 1]`.
pub fn profile_of<T: Real>(s: T) -> Result<Profile> {
    if !is_probability(s) {
        return Err(Error::StrategyOutOfRange(s.as_f64()));
    }
    Ok(if s < T::lit(0.25) {
        Profile::HighlyDistrusting
    } else if s < T::lit(0.5) {
        Profile::Distrusting
    } else if s < T::lit(0.75) {
        Profile::Trusting
    } else {
        Profile::HighlyTrusting
    })
}

/// Counts per profile, in [`Profile::ALL`] order.
pub fn profile_counts<T: Real>(strategies: &[T]) -> [usize; 4] {
    let mut counts = [0; 4];
    for &s in strategies {
        if let Ok(p) = profile_of(s) {
            counts[p as usize] += 1;
        }
    }
    counts
}

/// I.i.d. uniform strategies.
pub fn assign_initial_strategies<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| T::sample_unit(rng)).collect()
}

/// Generation parameters for a population (the influence radius lives in the
/// model parameters).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: Real")]
pub struct PopulationParams<T> {
    pub n: usize,
    pub ba_m: usize,
    pub placement: PlacementParams<T>,
}

impl<T: Real> Default for PopulationParams<T> {
    fn default() -> Self {
        Self { n: 500, ba_m: 1, placement: PlacementParams::default() }
    }
}

impl<T: Real> PopulationParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", "need at least 2 agents"));
        }
        if self.ba_m == 0 || self.ba_m >= self.n {
            return Err(Error::param("ba_m", format!("need 1 <= ba_m < n ({})", self.n)));
        }
        self.placement.validate()
    }
}

/// How a population was generated; carried into saved documents for replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Origin<T> {
    pub seed: u64,
    pub radius: T,
    pub params: PopulationParams<T>,
}

/// Agents with positions, strategies, and both network layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Population<T> {
    positions: Vec<Position<T>>,
    physical: PhysicalNetwork<T>,
    social: SocialNetwork,
    strategies: Vec<T>,
    origin: Option<Origin<T>>,
}

impl<T: Real> Population<T> {
    /// Builds a fresh population. Placement, social growth and strategy
    /// assignment each draw from their own stream of `seed`.
    pub fn generate(params: &PopulationParams<T>, radius: T, seed: u64) -> Result<Self> {
        params.validate()?;
        if !(radius > T::zero()) {
            return Err(Error::param("radius", "must be positive"));
        }
        let placement =
            place_agents_clustered(params.n, &params.placement, &mut substream(seed, streams::PLACEMENT));
        let physical = build_physical_network(&placement.positions, radius);
        let social = generate_ba_network(params.n, params.ba_m, &mut substream(seed, streams::SOCIAL))?;
        let strategies = assign_initial_strategies(params.n, &mut substream(seed, streams::STRATEGIES));
        Ok(Self {
            positions: placement.positions,
            physical,
            social,
            strategies,
            origin: Some(Origin { seed, radius, params: params.clone() }),
        })
    }

    pub fn from_parts(
        positions: Vec<Position<T>>,
        physical: PhysicalNetwork<T>,
        social: SocialNetwork,
        strategies: Vec<T>,
    ) -> Result<Self> {
        let n = positions.len();
        if physical.len() != n || social.len() != n || strategies.len() != n {
            return Err(Error::InvalidPopulation(format!(
                "layer sizes disagree: positions {n}, physical {}, social {}, strategies {}",
                physical.len(),
                social.len(),
                strategies.len()
            )));
        }
        if let Some(&bad) = strategies.iter().find(|&&s| !is_probability(s)) {
            return Err(Error::StrategyOutOfRange(bad.as_f64()));
        }
        if positions.iter().any(|p| !p.latitude.is_finite() || !p.longitude.is_finite()) {
            return Err(Error::InvalidPopulation("non-finite position".into()));
        }
        social.check_invariants()?;
        Ok(Self { positions, physical, social, strategies, origin: None })
    }

    /// Convenience for small hand-built instances: physical layer by radius.
    pub fn with_radius(
        positions: Vec<Position<T>>,
        radius: T,
        social: SocialNetwork,
        strategies: Vec<T>,
    ) -> Result<Self> {
        let physical = build_physical_network(&positions, radius);
        Self::from_parts(positions, physical, social, strategies)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position<T>] {
        &self.positions
    }

    pub fn physical(&self) -> &PhysicalNetwork<T> {
        &self.physical
    }

    pub fn social(&self) -> &SocialNetwork {
        &self.social
    }

    pub fn social_mut(&mut self) -> &mut SocialNetwork {
        &mut self.social
    }

    pub fn strategies(&self) -> &[T] {
        &self.strategies
    }

    pub fn origin(&self) -> Option<&Origin<T>> {
        self.origin.as_ref()
    }

    pub fn set_origin(&mut self, origin: Option<Origin<T>>) {
        self.origin = origin;
    }

    pub fn set_strategy(&mut self, i: AgentId, s: T) -> Result<()> {
        if !is_probability(s) {
            return Err(Error::StrategyOutOfRange(s.as_f64()));
        }
        self.strategies[i] = s;
        Ok(())
    }

    pub fn replace_strategies(&mut self, strategies: Vec<T>) -> Result<()> {
        if strategies.len() != self.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: strategies.len() });
        }
        if let Some(&bad) = strategies.iter().find(|&&s| !is_probability(s)) {
            return Err(Error::StrategyOutOfRange(bad.as_f64()));
        }
        self.strategies = strategies;
        Ok(())
    }

    /// Sum and count over the multiset union of physical and social neighbours
    /// of `i`, reading strategies from `strategies`.
    pub fn neighbour_sum(&self, i: AgentId, strategies: &[T]) -> (T, usize) {
        let mut sum = T::zero();
        for &(j, _) in self.physical.neighbours(i) {
            sum += strategies[j];
        }
        for &k in self.social.neighbours(i) {
            sum += strategies[k];
        }
        (sum, self.physical.degree(i) + self.social.degree(i))
    }

    /// Number of agents with `s > 0.5`.
    pub fn cyclist_count(&self) -> usize {
        cyclist_count(&self.strategies)
    }

    /// Verifies every structural invariant; used by tests and document loading.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        if self.physical.len() != n || self.social.len() != n || self.strategies.len() != n {
            return Err(Error::InvalidPopulation("layer sizes disagree".into()));
        }
        if let Some(&bad) = self.strategies.iter().find(|&&s| !is_probability(s)) {
            return Err(Error::StrategyOutOfRange(bad.as_f64()));
        }
        for i in 0..n {
            for &(j, d) in self.physical.neighbours(i) {
                if j == i || !self.physical.contains(j, i) {
                    return Err(Error::InvalidPopulation(format!("bad physical edge ({i}, {j})")));
                }
                if d != euclidean_distance(self.positions[i], self.positions[j]) {
                    return Err(Error::InvalidPopulation(format!("stale distance on ({i}, {j})")));
                }
            }
        }
        self.social.check_invariants()
    }
}

/// Agents strictly above 0.5 count as cyclists.
pub fn cyclist_count<T: Real>(strategies: &[T]) -> usize {
    let half = T::lit(0.5);
    strategies.iter().filter(|&&s| s > half).count()
}
