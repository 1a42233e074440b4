//! Connect-people interventions: recommending social ties between cyclists
//! two hops apart, optionally gated on the tie lowering the endpoints'
//! deviation from their optimal strategies.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, RunStatus, SimulationState};
use crate::error::{Error, Result};
use crate::metrics::{impact_score, stability, system_energy, DissonanceNorm, StateSnapshot};
use crate::population::{two_hop_candidates, AgentId, Population};
use crate::rng::{streams, substream};
use crate::scalar::{is_probability, Real};
use crate::shocks::{measure_resilience, ResilienceOutcome, ShockSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    VanillaCpi,
    StableCpi,
}

impl InterventionKind {
    pub fn label(self) -> &'static str {
        match self {
            InterventionKind::VanillaCpi => "vanilla_cpi",
            InterventionKind::StableCpi => "stable_cpi",
        }
    }
}

impl fmt::Display for InterventionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionSpec<T> {
    pub kind: InterventionKind,
    pub acceptance_probability: T,
}

impl<T: Real> InterventionSpec<T> {
    pub fn vanilla() -> Self {
        Self { kind: InterventionKind::VanillaCpi, acceptance_probability: T::lit(0.15) }
    }

    pub fn stable() -> Self {
        Self { kind: InterventionKind::StableCpi, acceptance_probability: T::lit(0.15) }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_probability(self.acceptance_probability) {
            return Err(Error::param("acceptance_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Applies the intervention in place and returns the number of ties added.
    pub fn apply<R: Rng + ?Sized>(&self, population: &mut Population<T>, norm: DissonanceNorm, rng: &mut R) -> Result<usize> {
        self.validate()?;
        Ok(match self.kind {
            InterventionKind::VanillaCpi => vanilla_cpi(population, self.acceptance_probability, rng),
            InterventionKind::StableCpi => stable_cpi(population, self.acceptance_probability, norm, rng),
        })
    }
}

fn cyclist_candidates<T: Real>(population: &Population<T>) -> Vec<(AgentId, AgentId)> {
    let half = T::lit(0.5);
    let s = population.strategies();
    two_hop_candidates(population.social(), |i, j, k| s[i] > half && s[j] > half && s[k] > half)
}

/// Links cyclist pairs that share a cyclist friend, each with probability
/// `acceptance_probability`. One draw per candidate pair, in candidate order.
pub fn vanilla_cpi<T: Real, R: Rng + ?Sized>(population: &mut Population<T>, acceptance_probability: T, rng: &mut R) -> usize {
    let mut added = 0;
    for (i, k) in cyclist_candidates(population) {
        if T::sample_unit(rng) < acceptance_probability && population.social_mut().add_edge(i, k) {
            added += 1;
        }
    }
    added
}

/// Reduction in the summed deviation of `i` and `k` from their optimal
/// strategies if the tie `{i, k}` were added. Positive means the tie helps.
pub fn stability_delta<T: Real>(population: &Population<T>, i: AgentId, k: AgentId, norm: DissonanceNorm) -> Result<T> {
    if i == k || population.social().contains(i, k) {
        return Err(Error::EdgeExists(i, k));
    }
    let s = population.strategies();
    let (sum_i, n_i) = population.neighbour_sum(i, s);
    let (sum_k, n_k) = population.neighbour_sum(k, s);
    let mean = |sum: T, n: usize, own: T| if n == 0 { own } else { sum / T::lit(n as f64) };
    let before = norm.apply(s[i] - mean(sum_i, n_i, s[i])) + norm.apply(s[k] - mean(sum_k, n_k, s[k]));
    let opt_i = (sum_i + s[k]) / T::lit((n_i + 1) as f64);
    let opt_k = (sum_k + s[i]) / T::lit((n_k + 1) as f64);
    let after = norm.apply(s[i] - opt_i) + norm.apply(s[k] - opt_k);
    Ok(before - after)
}

/// Same candidates and draws as [`vanilla_cpi`], but a tie is only added when
/// it also has a positive [`stability_delta`], evaluated against the network
/// including ties accepted earlier in the pass.
pub fn stable_cpi<T: Real, R: Rng + ?Sized>(
    population: &mut Population<T>,
    acceptance_probability: T,
    norm: DissonanceNorm,
    rng: &mut R,
) -> usize {
    let mut added = 0;
    for (i, k) in cyclist_candidates(population) {
        // Draw first so the random stream lines up with the vanilla variant.
        let accepted = T::sample_unit(rng) < acceptance_probability;
        if !accepted {
            continue;
        }
        let gain = stability_delta(population, i, k, norm).expect("candidates are non-adjacent pairs");
        if gain > T::zero() && population.social_mut().add_edge(i, k) {
            added += 1;
        }
    }
    added
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionReport<T> {
    pub kind: InterventionKind,
    /// Fractions of agents with `s > 0.5`.
    pub cyclists_before: T,
    pub cyclists_after: T,
    /// `None` when there were no cyclists to begin with.
    pub impact: Option<T>,
    pub edges_added: usize,
    pub stability_before: T,
    pub stability_after: T,
    pub energy_after: T,
}

#[derive(Clone, Debug)]
pub struct InterventionEvaluation<T> {
    pub report: InterventionReport<T>,
    pub post_state: SimulationState<T>,
    /// One per requested shock, each measured from `post_state`.
    pub shocks: Vec<ResilienceOutcome<T>>,
}

/// Converge (if the state was never run), intervene, re-converge, score the
/// impact, then measure resilience of the result to every shock.
///
/// Every stage draws from its own substream of `seed`, so two calls that
/// differ only in `spec` see the same acceptance draws and shock draws.
pub fn evaluate_intervention<T: Real>(
    initial: SimulationState<T>,
    spec: &InterventionSpec<T>,
    params: &ModelParams<T>,
    shocks: &[ShockSpec<T>],
    seed: u64,
) -> Result<InterventionEvaluation<T>> {
    spec.validate()?;
    params.validate()?;
    let mut state = initial;
    if state.status == RunStatus::Fresh {
        state.run(params, &mut substream(seed, streams::DYNAMICS));
    }
    let before = StateSnapshot::capture(&state.population);
    let stability_before = stability(&before, &state.population, params.norm);
    let edges_added = spec.apply(&mut state.population, params.norm, &mut substream(seed, streams::INTERVENTION))?;
    // A pass that added nothing leaves the equilibrium as it was.
    if edges_added > 0 {
        state.run(params, &mut substream(seed, streams::RECONVERGE));
    }
    let after = StateSnapshot::capture(&state.population);
    let impact = match impact_score(&before, &after) {
        Ok(v) => Some(v),
        Err(Error::NoCyclistsBefore) => None,
        Err(e) => return Err(e),
    };
    let n = T::lit(state.population.len() as f64);
    let report = InterventionReport {
        kind: spec.kind,
        cyclists_before: T::lit(before.cyclists() as f64) / n,
        cyclists_after: T::lit(after.cyclists() as f64) / n,
        impact,
        edges_added,
        stability_before,
        stability_after: stability(&after, &state.population, params.norm),
        energy_after: system_energy(&after, &state.population, params.norm),
    };
    let shocks = shocks
        .iter()
        .enumerate()
        .map(|(k, shock)| {
            measure_resilience(&state, shock, params, &mut substream(seed, streams::SHOCK_BASE + k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterventionEvaluation { report, post_state: state, shocks })
}
