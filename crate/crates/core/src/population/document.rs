//! Versioned JSON document for saving and replaying a population.
//!
//! The field layout is described by `schemas/population.schema.json` at the
//! repository root.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Origin, PhysicalNetwork, Population, Position, SocialNetwork};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const POPULATION_DOCUMENT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PopulationDocument<T> {
    pub version: u32,
    /// Present when the population came from [`Population::generate`].
    pub origin: Option<Origin<T>>,
    /// `[latitude, longitude]` per agent.
    pub positions: Vec<[T; 2]>,
    pub physical_edges: Vec<[usize; 2]>,
    pub social_edges: Vec<[usize; 2]>,
    pub strategies: Vec<T>,
}

impl<T: Real> PopulationDocument<T> {
    pub fn capture(population: &Population<T>) -> Self {
        Self {
            version: POPULATION_DOCUMENT_VERSION,
            origin: population.origin().cloned(),
            positions: population.positions().iter().map(|p| [p.latitude, p.longitude]).collect(),
            physical_edges: population.physical().edges().iter().map(|&(i, j, _)| [i, j]).collect(),
            social_edges: population.social().edges().into_iter().map(|(i, j)| [i, j]).collect(),
            strategies: population.strategies().to_vec(),
        }
    }

    pub fn into_population(self) -> Result<Population<T>> {
        if self.version != POPULATION_DOCUMENT_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        let positions: Vec<Position<T>> = self.positions.iter().map(|p| Position::new(p[0], p[1])).collect();
        let n = positions.len();
        let physical_edges: Vec<_> = self.physical_edges.iter().map(|e| (e[0], e[1])).collect();
        let social_edges: Vec<_> = self.social_edges.iter().map(|e| (e[0], e[1])).collect();
        let physical = PhysicalNetwork::from_edges(&positions, &physical_edges)?;
        let social = SocialNetwork::from_edges(n, &social_edges)?;
        let mut population = Population::from_parts(positions, physical, social, self.strategies)?;
        population.set_origin(self.origin);
        Ok(population)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl<T: Real> Population<T> {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, PopulationDocument::capture(self).to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        PopulationDocument::from_json(&std::fs::read_to_string(path)?)?.into_population()
    }
}
