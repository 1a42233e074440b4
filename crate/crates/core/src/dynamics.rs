//! Epoch loop: distance-attenuated stag-hunt games on the physical layer
//! followed by synchronous belief revision.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{stability, system_energy, DissonanceNorm, StateSnapshot};
use crate::population::{AgentId, Population};
use crate::scalar::{clamp_unit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Cycle.
    Cooperate,
    /// Drive.
    Defect,
}

/// Two-player payoff table, each cell `[row, column]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffMatrix<T> {
    pub cc: [T; 2],
    pub cd: [T; 2],
    pub dc: [T; 2],
    pub dd: [T; 2],
}

impl<T: Real> Default for PayoffMatrix<T> {
    fn default() -> Self {
        let l = T::lit;
        Self { cc: [l(3.0), l(3.0)], cd: [l(0.0), l(2.0)], dc: [l(2.0), l(0.0)], dd: [l(2.0), l(2.0)] }
    }
}

impl<T: Real> PayoffMatrix<T> {
    pub fn payoffs(&self, row: Action, col: Action) -> [T; 2] {
        match (row, col) {
            (Action::Cooperate, Action::Cooperate) => self.cc,
            (Action::Cooperate, Action::Defect) => self.cd,
            (Action::Defect, Action::Cooperate) => self.dc,
            (Action::Defect, Action::Defect) => self.dd,
        }
    }

    /// Expected payoffs when row cooperates w.p. `p` and column w.p. `q`.
    pub fn expected(&self, p: T, q: T) -> [T; 2] {
        let one = T::one();
        let w = [p * q, p * (one - q), (one - p) * q, (one - p) * (one - q)];
        let cells = [self.cc, self.cd, self.dc, self.dd];
        let mut out = [T::zero(); 2];
        for (wk, cell) in w.iter().zip(cells.iter()) {
            out[0] += *wk * cell[0];
            out[1] += *wk * cell[1];
        }
        out
    }

    /// Both pure profiles (C,C) and (D,D) are strict equilibria.
    pub fn is_stag_hunt(&self) -> bool {
        self.cc[0] > self.dc[0] && self.dd[0] > self.cd[0] && self.cc[1] > self.cd[1] && self.dd[1] > self.dc[1]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffMode {
    /// One realised game per pair per epoch.
    #[default]
    Sampled,
    /// Expected payoffs; no action draws. For variance-free debugging.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: Real")]
pub struct ModelParams<T> {
    /// Probability that a revision is conformity-driven.
    pub alpha: T,
    /// Payoff attenuation base; a game at distance `d` is worth `gamma^d`.
    pub gamma: T,
    /// Learning rate of both update rules.
    pub delta: T,
    /// Influence radius of the physical layer. The default keeps the layer
    /// sparse enough for random starts to settle into mixed states.
    pub radius: T,
    pub payoff: PayoffMatrix<T>,
    pub max_epochs: usize,
    pub quiet_epochs: usize,
    /// A strategy change larger than this counts as a revision.
    pub revision_epsilon: T,
    pub payoff_mode: PayoffMode,
    pub norm: DissonanceNorm,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(0.7),
            gamma: T::lit(0.8),
            delta: T::lit(0.01),
            radius: T::lit(0.015),
            payoff: PayoffMatrix::default(),
            max_epochs: 1500,
            quiet_epochs: 20,
            revision_epsilon: T::lit(0.002),
            payoff_mode: PayoffMode::Sampled,
            norm: DissonanceNorm::Squared,
        }
    }
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        if !(self.alpha > T::lit(0.5) && self.alpha <= one) {
            return Err(Error::param("alpha", "conforming populations need 0.5 < alpha <= 1"));
        }
        if !(self.gamma >= zero && self.gamma <= one) {
            return Err(Error::param("gamma", "must lie in [0, 1]"));
        }
        if !(self.delta > zero && self.delta <= one) {
            return Err(Error::param("delta", "must lie in (0, 1]"));
        }
        if !(self.radius > zero) || !self.radius.is_finite() {
            return Err(Error::param("radius", "must be positive and finite"));
        }
        if self.max_epochs == 0 {
            return Err(Error::param("max_epochs", "must be at least 1"));
        }
        if self.quiet_epochs == 0 {
            return Err(Error::param("quiet_epochs", "must be at least 1"));
        }
        if !(self.revision_epsilon >= zero) {
            return Err(Error::param("revision_epsilon", "must be non-negative"));
        }
        if !self.payoff.is_stag_hunt() {
            return Err(Error::param("payoff", "matrix must have the stag-hunt ordering"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Never run.
    Fresh,
    /// Stopped after `quiet_epochs` epochs without a revision.
    Converged,
    /// Stopped at `max_epochs`.
    EpochCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState<T> {
    pub population: Population<T>,
    /// Epochs elapsed in the latest run.
    pub epoch: usize,
    pub epoch_payoff: Vec<T>,
    pub quiet_streak: usize,
    pub status: RunStatus,
}

impl<T: Real> SimulationState<T> {
    pub fn new(population: Population<T>) -> Self {
        let n = population.len();
        Self { population, epoch: 0, epoch_payoff: vec![T::zero(); n], quiet_streak: 0, status: RunStatus::Fresh }
    }

    pub fn snapshot(&self) -> StateSnapshot<T> {
        StateSnapshot::capture(&self.population)
    }

    /// Runs epochs from the current strategies until `quiet_epochs`
    /// consecutive epochs pass without a revision, or `max_epochs` elapse.
    pub fn run<R: Rng + ?Sized>(&mut self, params: &ModelParams<T>, rng: &mut R) -> SimulationTrace<T> {
        let factors = attenuation_factors(&self.population, params.gamma);
        self.epoch = 0;
        self.quiet_streak = 0;
        let mut records = Vec::new();
        let converged = loop {
            if self.epoch >= params.max_epochs {
                break false;
            }
            play_epoch_with(self, params, &factors, rng);
            let revision = revise_beliefs(self, params, rng);
            self.population
                .replace_strategies(revision.strategies)
                .expect("updates stay inside [0, 1]");
            self.epoch += 1;
            if revision.revised == 0 {
                self.quiet_streak += 1;
            } else {
                self.quiet_streak = 0;
            }
            let snap = self.snapshot();
            records.push(EpochRecord {
                epoch: self.epoch,
                cyclists: snap.cyclists(),
                energy: system_energy(&snap, &self.population, params.norm),
                stability: stability(&snap, &self.population, params.norm),
                revised: revision.revised,
            });
            if self.quiet_streak >= params.quiet_epochs {
                break true;
            }
        };
        self.status = if converged { RunStatus::Converged } else { RunStatus::EpochCap };
        SimulationTrace { records, converged, final_epoch: self.epoch }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub cyclists: usize,
    pub energy: T,
    pub stability: T,
    pub revised: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace<T> {
    pub records: Vec<EpochRecord<T>>,
    pub converged: bool,
    pub final_epoch: usize,
}

impl<T: Real> SimulationTrace<T> {
    pub const CSV_HEADER: [&'static str; 5] = ["epoch", "cyclists", "energy", "stability", "revised"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                r.cyclists.to_string(),
                r.energy.to_string(),
                r.stability.to_string(),
                r.revised.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Converges a fresh state built from `population`.
pub fn run_to_convergence<T: Real, R: Rng + ?Sized>(
    population: Population<T>,
    params: &ModelParams<T>,
    rng: &mut R,
) -> (SimulationState<T>, SimulationTrace<T>) {
    let mut state = SimulationState::new(population);
    let trace = state.run(params, rng);
    (state, trace)
}

#[inline]
pub fn sample_action<T: Real, R: Rng + ?Sized>(s: T, rng: &mut R) -> Action {
    if T::sample_unit(rng) < s {
        Action::Cooperate
    } else {
        Action::Defect
    }
}

#[inline]
pub fn attenuated_payoff<T: Real>(raw: T, d: T, gamma: T) -> T {
    raw * gamma.powf(d)
}

fn attenuation_factors<T: Real>(population: &Population<T>, gamma: T) -> Vec<T> {
    population.physical().edges().iter().map(|&(_, _, d)| gamma.powf(d)).collect()
}

/// Plays one game per physical pair and returns each agent's epoch total.
/// Accumulators are zeroed first.
pub fn play_epoch<'a, T: Real, R: Rng + ?Sized>(
    state: &'a mut SimulationState<T>,
    params: &ModelParams<T>,
    rng: &mut R,
) -> &'a [T] {
    let factors = attenuation_factors(&state.population, params.gamma);
    play_epoch_with(state, params, &factors, rng);
    &state.epoch_payoff
}

fn play_epoch_with<T: Real, R: Rng + ?Sized>(
    state: &mut SimulationState<T>,
    params: &ModelParams<T>,
    factors: &[T],
    rng: &mut R,
) {
    let SimulationState { population, epoch_payoff, .. } = state;
    epoch_payoff.iter_mut().for_each(|p| *p = T::zero());
    let s = population.strategies();
    for (&(i, j, _), &w) in population.physical().edges().iter().zip(factors) {
        let [pi, pj] = match params.payoff_mode {
            PayoffMode::Sampled => {
                let ai = sample_action(s[i], rng);
                let aj = sample_action(s[j], rng);
                params.payoff.payoffs(ai, aj)
            }
            PayoffMode::Expected => params.payoff.expected(s[i], s[j]),
        };
        epoch_payoff[i] += pi * w;
        epoch_payoff[j] += pj * w;
    }
}

/// Mean strategy over the multiset union of `i`'s physical and social
/// neighbours; an agent without neighbours is its own optimum.
pub fn optimal_strategy_in<T: Real>(population: &Population<T>, strategies: &[T], i: AgentId) -> T {
    let (sum, count) = population.neighbour_sum(i, strategies);
    if count == 0 {
        strategies[i]
    } else {
        sum / T::lit(count as f64)
    }
}

pub fn optimal_strategy<T: Real>(i: AgentId, state: &SimulationState<T>) -> T {
    optimal_strategy_in(&state.population, state.population.strategies(), i)
}

#[inline]
pub fn conformity_update<T: Real>(s: T, s_opt: T, delta: T) -> T {
    clamp_unit(s + delta * (s_opt - s))
}

/// Physical neighbour with the highest epoch payoff (lowest id on ties).
pub fn best_performing_neighbour<T: Real>(i: AgentId, population: &Population<T>, payoffs: &[T]) -> Option<AgentId> {
    let mut best: Option<(AgentId, T)> = None;
    for &(j, _) in population.physical().neighbours(i) {
        match best {
            Some((_, p)) if payoffs[j] <= p => {}
            _ => best = Some((j, payoffs[j])),
        }
    }
    best.map(|(j, _)| j)
}

/// Moves towards the best-performing physical neighbour of this epoch.
pub fn utility_update<T: Real>(i: AgentId, state: &SimulationState<T>, delta: T) -> T {
    let s = state.population.strategies();
    match best_performing_neighbour(i, &state.population, &state.epoch_payoff) {
        Some(k) => clamp_unit(s[i] + delta * (s[k] - s[i])),
        None => s[i],
    }
}

/// New strategy of agent `i` given its mixing draw `u` on `[0, 1)`. Reads
/// only the current epoch's strategies and payoffs.
pub fn revised_strategy<T: Real>(i: AgentId, state: &SimulationState<T>, params: &ModelParams<T>, u: T) -> T {
    if u < params.alpha {
        let s = state.population.strategies()[i];
        conformity_update(s, optimal_strategy(i, state), params.delta)
    } else {
        utility_update(i, state, params.delta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Revision<T> {
    pub strategies: Vec<T>,
    pub revised: usize,
}

/// Synchronous revision with pre-drawn mixing variates, one per agent.
pub fn revise_with_draws<T: Real>(state: &SimulationState<T>, params: &ModelParams<T>, draws: &[T]) -> Revision<T> {
    let old = state.population.strategies();
    let strategies: Vec<T> =
        draws.iter().enumerate().map(|(i, &u)| revised_strategy(i, state, params, u)).collect();
    let revised = strategies.iter().zip(old).filter(|(n, o)| (**n - **o).abs() > params.revision_epsilon).count();
    Revision { strategies, revised }
}

/// Draws one mixing variate per agent (in id order) and revises every agent
/// against the epoch-t state. Does not modify `state`.
pub fn revise_beliefs<T: Real, R: Rng + ?Sized>(
    state: &SimulationState<T>,
    params: &ModelParams<T>,
    rng: &mut R,
) -> Revision<T> {
    let draws: Vec<T> = (0..state.population.len()).map(|_| T::sample_unit(rng)).collect();
    revise_with_draws(state, params, &draws)
}
