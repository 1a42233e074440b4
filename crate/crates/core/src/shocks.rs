//! Targeted attacks and random perturbations, and the resilience protocol
//! that measures how far a converged state is displaced by one of them.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, RunStatus, SimulationState, SimulationTrace};
use crate::error::{Error, Result};
use crate::metrics::{resilience_score, StateSnapshot};
use crate::population::{hub_ranking, two_hop_candidates, Population};
use crate::scalar::{is_probability, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShockSpec<T> {
    /// T1: force the top hubs of the social network to a new strategy.
    AttackHubs { attack_magnitude: usize, new_strategy: T },
    /// T2: propose social ties between car users two hops apart.
    ConnectDefectors { acceptance_probability: T },
    /// R1: drop each social tie independently.
    ConnectionBreaks { perturbation_magnitude: T },
    /// R2: cut each agent out of the social layer independently.
    AgentsDropOut { perturbation_magnitude: T },
}

impl<T: Real> ShockSpec<T> {
    pub fn hub_attack() -> Self {
        ShockSpec::AttackHubs { attack_magnitude: 30, new_strategy: T::lit(0.3) }
    }

    pub fn defector_links() -> Self {
        ShockSpec::ConnectDefectors { acceptance_probability: T::lit(0.15) }
    }

    pub fn connection_breaks() -> Self {
        ShockSpec::ConnectionBreaks { perturbation_magnitude: T::lit(0.1) }
    }

    pub fn agent_dropout() -> Self {
        ShockSpec::AgentsDropOut { perturbation_magnitude: T::lit(0.1) }
    }

    /// T1, T2, R1, R2 with default magnitudes.
    pub fn standard_set() -> Vec<Self> {
        vec![Self::hub_attack(), Self::defector_links(), Self::connection_breaks(), Self::agent_dropout()]
    }

    pub fn label(&self) -> &'static str {
        match self {
            ShockSpec::AttackHubs { .. } => "T1",
            ShockSpec::ConnectDefectors { .. } => "T2",
            ShockSpec::ConnectionBreaks { .. } => "R1",
            ShockSpec::AgentsDropOut { .. } => "R2",
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ShockSpec::AttackHubs { .. } => "attack_hubs",
            ShockSpec::ConnectDefectors { .. } => "connect_defectors",
            ShockSpec::ConnectionBreaks { .. } => "connection_breaks",
            ShockSpec::AgentsDropOut { .. } => "agents_drop_out",
        }
    }

    /// `n` is the population size when known.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        match *self {
            ShockSpec::AttackHubs { attack_magnitude, new_strategy } => {
                if !is_probability(new_strategy) {
                    return Err(Error::param("new_strategy", "must lie in [0, 1]"));
                }
                if let Some(n) = n {
                    if attack_magnitude > n {
                        return Err(Error::param("attack_magnitude", format!("exceeds population size {n}")));
                    }
                }
            }
            ShockSpec::ConnectDefectors { acceptance_probability: p } => {
                if !is_probability(p) {
                    return Err(Error::param("acceptance_probability", "must lie in [0, 1]"));
                }
            }
            ShockSpec::ConnectionBreaks { perturbation_magnitude: p }
            | ShockSpec::AgentsDropOut { perturbation_magnitude: p } => {
                if !is_probability(p) {
                    return Err(Error::param("perturbation_magnitude", "must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Applies the shock in place; returns the number of agents or edges touched.
    pub fn apply<R: Rng + ?Sized>(&self, population: &mut Population<T>, rng: &mut R) -> Result<usize> {
        self.validate(Some(population.len()))?;
        Ok(match *self {
            ShockSpec::AttackHubs { attack_magnitude, new_strategy } => {
                attack_hubs(population, attack_magnitude, new_strategy)?
            }
            ShockSpec::ConnectDefectors { acceptance_probability } => {
                connect_defectors(population, acceptance_probability, rng)
            }
            ShockSpec::ConnectionBreaks { perturbation_magnitude } => {
                break_connections(population, perturbation_magnitude, rng)
            }
            ShockSpec::AgentsDropOut { perturbation_magnitude } => {
                drop_agents(population, perturbation_magnitude, rng)
            }
        })
    }

    /// Parameters as `key=value` pairs joined by `;` for log rows.
    pub fn params_string(&self) -> String {
        match self {
            ShockSpec::AttackHubs { attack_magnitude, new_strategy } => {
                format!("attack_magnitude={attack_magnitude};new_strategy={new_strategy}")
            }
            ShockSpec::ConnectDefectors { acceptance_probability } => {
                format!("acceptance_probability={acceptance_probability}")
            }
            ShockSpec::ConnectionBreaks { perturbation_magnitude }
            | ShockSpec::AgentsDropOut { perturbation_magnitude } => {
                format!("perturbation_magnitude={perturbation_magnitude}")
            }
        }
    }
}

impl<T: Real> fmt::Display for ShockSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.params_string())
    }
}

/// Sets the `magnitude` highest-degree agents of the social layer to
/// `new_strategy`. Returns how many agents were set.
pub fn attack_hubs<T: Real>(population: &mut Population<T>, magnitude: usize, new_strategy: T) -> Result<usize> {
    if magnitude > population.len() {
        return Err(Error::param("attack_magnitude", format!("exceeds population size {}", population.len())));
    }
    let ranking = hub_ranking(population.social());
    for &agent in &ranking[..magnitude] {
        population.set_strategy(agent, new_strategy)?;
    }
    Ok(magnitude)
}

/// Links car users (`s < 0.5`) that share a social neighbour, each candidate
/// pair accepted with `acceptance_probability`. Returns edges added.
pub fn connect_defectors<T: Real, R: Rng + ?Sized>(
    population: &mut Population<T>,
    acceptance_probability: T,
    rng: &mut R,
) -> usize {
    let half = T::lit(0.5);
    let s = population.strategies();
    let candidates = two_hop_candidates(population.social(), |i, _, k| s[i] < half && s[k] < half);
    let mut added = 0;
    for (i, k) in candidates {
        if T::sample_unit(rng) < acceptance_probability && population.social_mut().add_edge(i, k) {
            added += 1;
        }
    }
    added
}

/// Removes each social edge with probability `perturbation_magnitude`.
/// Returns edges removed.
pub fn break_connections<T: Real, R: Rng + ?Sized>(
    population: &mut Population<T>,
    perturbation_magnitude: T,
    rng: &mut R,
) -> usize {
    let mut removed = 0;
    for (i, j) in population.social().edges() {
        if T::sample_unit(rng) < perturbation_magnitude {
            population.social_mut().remove_edge(i, j);
            removed += 1;
        }
    }
    removed
}

/// Each agent leaves the social layer with probability
/// `perturbation_magnitude`; it keeps its physical ties and strategy.
/// Returns agents dropped.
pub fn drop_agents<T: Real, R: Rng + ?Sized>(
    population: &mut Population<T>,
    perturbation_magnitude: T,
    rng: &mut R,
) -> usize {
    let mut dropped = 0;
    for i in 0..population.len() {
        if T::sample_unit(rng) < perturbation_magnitude {
            population.social_mut().isolate(i);
            dropped += 1;
        }
    }
    dropped
}

#[derive(Clone, Debug)]
pub struct ResilienceOutcome<T> {
    pub shock: ShockSpec<T>,
    pub resilience: T,
    pub cyclists_before: usize,
    pub cyclists_after: usize,
    /// Agents or edges touched by the shock itself.
    pub touched: usize,
    pub post_state: SimulationState<T>,
    pub trace: SimulationTrace<T>,
}

/// Shocks a copy of `converged`, lets it re-equilibrate and scores the
/// displacement between the two equilibria.
pub fn measure_resilience<T: Real, R: Rng + ?Sized>(
    converged: &SimulationState<T>,
    shock: &ShockSpec<T>,
    params: &ModelParams<T>,
    rng: &mut R,
) -> Result<ResilienceOutcome<T>> {
    let before = StateSnapshot::capture(&converged.population);
    let mut post = converged.clone();
    let touched = shock.apply(&mut post.population, rng)?;
    // A shock that touched nothing leaves the equilibrium as it was.
    let trace = if touched > 0 {
        post.run(params, rng)
    } else {
        SimulationTrace { records: Vec::new(), converged: converged.status == RunStatus::Converged, final_epoch: 0 }
    };
    let after = StateSnapshot::capture(&post.population);
    Ok(ResilienceOutcome {
        shock: *shock,
        resilience: resilience_score(&before, &after)?,
        cyclists_before: before.cyclists(),
        cyclists_after: after.cyclists(),
        touched,
        post_state: post,
        trace,
    })
}
