//! Energy, stability, impact and resilience of system states, plus the
//! least-squares fit used to relate them.

use serde::{Deserialize, Serialize};

use crate::dynamics::optimal_strategy_in;
use crate::error::{Error, Result};
use crate::population::{cyclist_count, AgentId, Population};
use crate::scalar::{is_probability, Real};

/// How a strategy disagreement is turned into dissonance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissonanceNorm {
    /// `(a - b)^2`. The neighbour mean minimises the summed stress only under this norm.
    #[default]
    Squared,
    /// `|a - b|`, kept for sensitivity runs.
    Absolute,
}

impl DissonanceNorm {
    #[inline]
    pub fn apply<T: Real>(self, diff: T) -> T {
        match self {
            DissonanceNorm::Squared => diff * diff,
            DissonanceNorm::Absolute => diff.abs(),
        }
    }
}

/// Immutable copy of the strategy vector at some point of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot<T> {
    strategies: Vec<T>,
}

impl<T: Real> StateSnapshot<T> {
    pub fn capture(population: &Population<T>) -> Self {
        Self { strategies: population.strategies().to_vec() }
    }

    pub fn from_strategies(strategies: Vec<T>) -> Result<Self> {
        if let Some(&bad) = strategies.iter().find(|&&s| !is_probability(s)) {
            return Err(Error::StrategyOutOfRange(bad.as_f64()));
        }
        Ok(Self { strategies })
    }

    pub fn strategies(&self) -> &[T] {
        &self.strategies
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn cyclists(&self) -> usize {
        cyclist_count(&self.strategies)
    }

    /// `s_opt` for every agent under the population's topology.
    pub fn optima(&self, population: &Population<T>) -> Vec<T> {
        (0..self.len()).map(|i| optimal_strategy_in(population, &self.strategies, i)).collect()
    }
}

/// Dissonance of agent `i` with its physical and social neighbours. A peer
/// present in both layers contributes twice.
pub fn agent_stress<T: Real>(
    i: AgentId,
    snapshot: &StateSnapshot<T>,
    population: &Population<T>,
    norm: DissonanceNorm,
) -> T {
    let s = snapshot.strategies();
    let si = s[i];
    let mut stress = T::zero();
    for &(j, _) in population.physical().neighbours(i) {
        stress += norm.apply(s[j] - si);
    }
    for &k in population.social().neighbours(i) {
        stress += norm.apply(s[k] - si);
    }
    stress
}

/// Total stress over all agents.
pub fn system_energy<T: Real>(snapshot: &StateSnapshot<T>, population: &Population<T>, norm: DissonanceNorm) -> T {
    (0..snapshot.len()).fold(T::zero(), |acc, i| acc + agent_stress(i, snapshot, population, norm))
}

/// `1 - mean_i norm(s_opt_i - s_i)`.
pub fn stability<T: Real>(snapshot: &StateSnapshot<T>, population: &Population<T>, norm: DissonanceNorm) -> T {
    let n = snapshot.len();
    if n == 0 {
        return T::one();
    }
    let s = snapshot.strategies();
    let deviation = (0..n).fold(T::zero(), |acc, i| {
        acc + norm.apply(optimal_strategy_in(population, s, i) - s[i])
    });
    T::one() - deviation / T::lit(n as f64)
}

/// Relative change in the number of cyclists (`s > 0.5`).
pub fn impact_score<T: Real>(before: &StateSnapshot<T>, after: &StateSnapshot<T>) -> Result<T> {
    let b = before.cyclists();
    if b == 0 {
        return Err(Error::NoCyclistsBefore);
    }
    let a = after.cyclists();
    Ok((T::lit(a as f64) - T::lit(b as f64)) / T::lit(b as f64))
}

/// `exp(-||S - S'||_2)`.
pub fn resilience_score<T: Real>(before: &StateSnapshot<T>, after: &StateSnapshot<T>) -> Result<T> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch { left: before.len(), right: after.len() });
    }
    Ok((-strategy_displacement(before.strategies(), after.strategies())).exp())
}

pub fn strategy_displacement<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

impl<T: Real> FitResult<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares line through `(xs, ys)`; `r_squared` is the
/// squared Pearson correlation (0 when `ys` has no variance).
pub fn fit_least_squares<T: Real>(xs: &[T], ys: &[T]) -> Result<FitResult<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input"));
    }
    let n = T::lit(xs.len() as f64);
    let mean_x = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let mean_y = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateFit("all x values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > T::zero() {
        (sxy * sxy / (sxx * syy)).min(T::one()).max(T::zero())
    } else {
        T::zero()
    };
    Ok(FitResult { slope, intercept, r_squared })
}
