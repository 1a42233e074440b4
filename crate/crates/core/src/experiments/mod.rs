//! Config-driven experiment harness.
//!
//! H1 asks whether more stable equilibria are more resilient: it converges a
//! batch of independently seeded populations, hits each with every configured
//! shock and fits resilience against stability per shock. H2 compares the
//! plain and the stability-gated connect-people intervention on one converged
//! population, with paired random streams so that the gate is the only
//! difference between the two arms.

mod output;
mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, SimulationState};
use crate::error::{Error, Result};
use crate::interventions::{evaluate_intervention, InterventionKind, InterventionReport, InterventionSpec};
use crate::metrics::{fit_least_squares, stability, system_energy, FitResult};
use crate::population::{Population, PopulationParams};
use crate::rng::{streams, substream};
use crate::scalar::Real;
use crate::shocks::{measure_resilience, ShockSpec};

pub use output::{write_h1, write_h2, H1_FITS_HEADER, H1_RECORDS_HEADER, H2_TABLE3_HEADER, H2_TABLE4_HEADER};
pub use svg::{emit_scatter_svg, PlotLabels};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: Real")]
pub struct ExperimentConfig<T> {
    pub model: ModelParams<T>,
    pub population: PopulationParams<T>,
    /// Number of independently seeded populations in H1.
    pub n_configs: usize,
    /// Population `c` of H1 is seeded with `base_seed + c`; H2 uses `base_seed`.
    pub base_seed: u64,
    pub shocks: Vec<ShockSpec<T>>,
    pub interventions: Vec<InterventionSpec<T>>,
    /// How often H2 repeats each random perturbation.
    pub h2_replications: usize,
    pub output_dir: PathBuf,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            population: PopulationParams::default(),
            n_configs: 25,
            base_seed: 0,
            shocks: ShockSpec::standard_set(),
            interventions: vec![InterventionSpec::vanilla(), InterventionSpec::stable()],
            h2_replications: 5,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.population.validate()?;
        if self.n_configs < 2 {
            return Err(Error::param("n_configs", "a fit needs at least 2 configurations"));
        }
        if self.h2_replications == 0 {
            return Err(Error::param("h2_replications", "must be at least 1"));
        }
        for (k, shock) in self.shocks.iter().enumerate() {
            shock.validate(Some(self.population.n))?;
            if self.shocks[..k].iter().any(|s| s.label() == shock.label()) {
                return Err(Error::param("shocks", format!("{} listed twice", shock.label())));
            }
        }
        for (k, spec) in self.interventions.iter().enumerate() {
            spec.validate()?;
            if self.interventions[..k].iter().any(|s| s.kind == spec.kind) {
                return Err(Error::param("interventions", format!("{} listed twice", spec.kind)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Builds and converges the population seeded with `seed`.
    pub fn converged_state(&self, seed: u64) -> Result<SimulationState<T>> {
        let population = Population::generate(&self.population, self.model.radius, seed)?;
        let mut state = SimulationState::new(population);
        state.run(&self.model, &mut substream(seed, streams::DYNAMICS));
        Ok(state)
    }
}

/// One row per (configuration, shock).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Record<T> {
    pub config: usize,
    pub seed: u64,
    pub converged: bool,
    pub epochs: usize,
    pub cyclists: usize,
    pub stability: T,
    pub energy: T,
    pub shock: String,
    pub resilience: T,
    pub cyclists_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Fit<T> {
    pub shock: String,
    pub points: usize,
    /// `None` when the stabilities were all equal.
    pub fit: Option<FitResult<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Report<T> {
    pub records: Vec<H1Record<T>>,
    pub fits: Vec<H1Fit<T>>,
}

impl<T: Real> H1Report<T> {
    pub fn fit_for(&self, shock: &str) -> Option<&FitResult<T>> {
        self.fits.iter().find(|f| f.shock == shock).and_then(|f| f.fit.as_ref())
    }

    /// `(stability, resilience)` pairs for one shock, in configuration order.
    pub fn points(&self, shock: &str) -> Vec<(T, T)> {
        self.records.iter().filter(|r| r.shock == shock).map(|r| (r.stability, r.resilience)).collect()
    }
}

fn h1_config<T: Real>(config: &ExperimentConfig<T>, c: usize) -> Result<Vec<H1Record<T>>> {
    let seed = config.base_seed.wrapping_add(c as u64);
    let population = Population::generate(&config.population, config.model.radius, seed)?;
    let mut state = SimulationState::new(population);
    let trace = state.run(&config.model, &mut substream(seed, streams::DYNAMICS));
    let snap = state.snapshot();
    let stab = stability(&snap, &state.population, config.model.norm);
    let energy = system_energy(&snap, &state.population, config.model.norm);
    config
        .shocks
        .iter()
        .enumerate()
        .map(|(k, shock)| {
            let mut rng = substream(seed, streams::SHOCK_BASE + k as u64);
            let outcome = measure_resilience(&state, shock, &config.model, &mut rng)?;
            Ok(H1Record {
                config: c,
                seed,
                converged: trace.converged,
                epochs: trace.final_epoch,
                cyclists: snap.cyclists(),
                stability: stab,
                energy,
                shock: shock.label().to_string(),
                resilience: outcome.resilience,
                cyclists_after: outcome.cyclists_after,
            })
        })
        .collect()
}

/// Runs H1 on the current rayon pool. Results do not depend on the pool size.
pub fn run_h1<T: Real>(config: &ExperimentConfig<T>) -> Result<H1Report<T>> {
    config.validate()?;
    let per_config = (0..config.n_configs)
        .into_par_iter()
        .map(|c| h1_config(config, c))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<_> = per_config.into_iter().flatten().collect();
    let fits = config
        .shocks
        .iter()
        .map(|shock| {
            let label = shock.label();
            let (xs, ys): (Vec<T>, Vec<T>) =
                records.iter().filter(|r| r.shock == label).map(|r| (r.stability, r.resilience)).unzip();
            let fit = match fit_least_squares(&xs, &ys) {
                Ok(fit) => Some(fit),
                Err(Error::DegenerateFit(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(H1Fit { shock: label.to_string(), points: xs.len(), fit })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(H1Report { records, fits })
}

/// Table-3 style row: one intervention followed by one targeted attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2AttackRow<T> {
    pub intervention: InterventionKind,
    pub shock: String,
    pub report: InterventionReport<T>,
    /// Fraction of cyclists after the attack has settled.
    pub cyclists_after_shock: T,
    pub resilience: T,
}

/// Table-4 style row: one replication of a random perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2PerturbationRow<T> {
    pub intervention: InterventionKind,
    pub shock: String,
    pub replication: usize,
    pub resilience: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Report<T> {
    pub seed: u64,
    pub initial_cyclists: T,
    pub interventions: Vec<InterventionReport<T>>,
    pub attacks: Vec<H2AttackRow<T>>,
    pub perturbations: Vec<H2PerturbationRow<T>>,
}

impl<T: Real> H2Report<T> {
    pub fn intervention(&self, kind: InterventionKind) -> Option<&InterventionReport<T>> {
        self.interventions.iter().find(|r| r.kind == kind)
    }

    pub fn attack_resilience(&self, kind: InterventionKind, shock: &str) -> Option<T> {
        self.attacks.iter().find(|r| r.intervention == kind && r.shock == shock).map(|r| r.resilience)
    }

    /// Mean resilience over the replications of one perturbation.
    pub fn mean_perturbation_resilience(&self, kind: InterventionKind, shock: &str) -> Option<T> {
        let vals: Vec<T> = self
            .perturbations
            .iter()
            .filter(|r| r.intervention == kind && r.shock == shock)
            .map(|r| r.resilience)
            .collect();
        if vals.is_empty() {
            return None;
        }
        Some(vals.iter().fold(T::zero(), |a, &b| a + b) / T::lit(vals.len() as f64))
    }
}

fn is_targeted<T>(shock: &ShockSpec<T>) -> bool {
    matches!(shock, ShockSpec::AttackHubs { .. } | ShockSpec::ConnectDefectors { .. })
}

/// Runs H2 on the population seeded with `config.base_seed`.
pub fn run_h2<T: Real>(config: &ExperimentConfig<T>) -> Result<H2Report<T>> {
    let seed = config.base_seed;
    let initial = config.converged_state(seed)?;
    run_h2_from(config, &initial, seed)
}

/// Runs H2 from an already converged state. Both interventions use the same
/// substreams of `seed`.
pub fn run_h2_from<T: Real>(config: &ExperimentConfig<T>, initial: &SimulationState<T>, seed: u64) -> Result<H2Report<T>> {
    config.validate()?;
    let targeted: Vec<_> = config.shocks.iter().copied().filter(is_targeted).collect();
    let random: Vec<(usize, ShockSpec<T>)> =
        config.shocks.iter().copied().enumerate().filter(|(_, s)| !is_targeted(s)).collect();
    let arms = config
        .interventions
        .par_iter()
        .map(|spec| -> Result<_> {
            let eval = evaluate_intervention(initial.clone(), spec, &config.model, &targeted, seed)?;
            let n = T::lit(eval.post_state.population.len() as f64);
            let attacks: Vec<_> = eval
                .shocks
                .iter()
                .map(|o| H2AttackRow {
                    intervention: spec.kind,
                    shock: o.shock.label().to_string(),
                    report: eval.report.clone(),
                    cyclists_after_shock: T::lit(o.cyclists_after as f64) / n,
                    resilience: o.resilience,
                })
                .collect();
            let mut perturbations = Vec::new();
            for r in 0..config.h2_replications {
                for &(k, shock) in &random {
                    let stream = streams::REPLICATION_BASE + streams::REPLICATION_STRIDE * r as u64 + k as u64;
                    let o = measure_resilience(&eval.post_state, &shock, &config.model, &mut substream(seed, stream))?;
                    perturbations.push(H2PerturbationRow {
                        intervention: spec.kind,
                        shock: shock.label().to_string(),
                        replication: r,
                        resilience: o.resilience,
                    });
                }
            }
            Ok((eval.report, attacks, perturbations))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = T::lit(initial.population.len() as f64);
    let mut report = H2Report {
        seed,
        initial_cyclists: T::lit(initial.population.cyclist_count() as f64) / n,
        interventions: Vec::new(),
        attacks: Vec::new(),
        perturbations: Vec::new(),
    };
    for (summary, attacks, perturbations) in arms {
        report.interventions.push(summary);
        report.attacks.extend(attacks);
        report.perturbations.extend(perturbations);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig<f64> {
        let mut config = ExperimentConfig::default();
        config.population.n = 60;
        config.population.placement.n_clusters = 2;
        config.n_configs = 3;
        config.model.max_epochs = 150;
        config.h2_replications = 2;
        for shock in &mut config.shocks {
            if let ShockSpec::AttackHubs { attack_magnitude, .. } = shock {
                *attack_magnitude = 5;
            }
        }
        config
    }

    #[test]
    fn default_config_round_trips() {
        let config = ExperimentConfig::<f64>::default();
        config.validate().unwrap();
        let back = ExperimentConfig::<f64>::from_json(&config.to_json().unwrap()).unwrap();
        assert_eq!(back, config);
        let partial = ExperimentConfig::<f64>::from_json(r#"{"n_configs": 4}"#).unwrap();
        assert_eq!(partial.n_configs, 4);
        assert_eq!(partial.model, ModelParams::default());
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(ExperimentConfig::<f64>::from_json(r#"{"n_configz": 4}"#).is_err());
        assert!(ExperimentConfig::<f64>::from_json(r#"{"n_configs": 1}"#).is_err());
        let twice = r#"{"shocks": [{"kind": "connection_breaks", "perturbation_magnitude": 0.1},
                                   {"kind": "connection_breaks", "perturbation_magnitude": 0.2}]}"#;
        assert!(ExperimentConfig::<f64>::from_json(twice).is_err());
        let big = r#"{"population": {"n": 10}, "shocks": [{"kind": "attack_hubs", "attack_magnitude": 11, "new_strategy": 0.3}]}"#;
        assert!(ExperimentConfig::<f64>::from_json(big).is_err());
    }

    #[test]
    fn h1_shape() {
        let config = small_config();
        let report = run_h1(&config).unwrap();
        assert_eq!(report.records.len(), 3 * 4);
        assert_eq!(report.fits.len(), 4);
        for r in &report.records {
            assert!(r.resilience > 0.0 && r.resilience <= 1.0);
            assert_eq!(r.seed, r.config as u64);
        }
        // Every shock of a configuration starts from the same equilibrium.
        for c in 0..3 {
            let rows: Vec<_> = report.records.iter().filter(|r| r.config == c).collect();
            assert!(rows.iter().all(|r| r.stability == rows[0].stability));
        }
        assert_eq!(run_h1(&config).unwrap(), report);
    }

    #[test]
    fn h2_shape_and_pairing() {
        let mut config = small_config();
        let report = run_h2(&config).unwrap();
        assert_eq!(report.interventions.len(), 2);
        assert_eq!(report.attacks.len(), 2 * 2);
        assert_eq!(report.perturbations.len(), 2 * 2 * 2);
        let vanilla = report.intervention(InterventionKind::VanillaCpi).unwrap();
        let stable = report.intervention(InterventionKind::StableCpi).unwrap();
        assert!(stable.edges_added <= vanilla.edges_added);

        // Without acceptance both arms are the same computation.
        for spec in &mut config.interventions {
            spec.acceptance_probability = 0.0;
        }
        let report = run_h2(&config).unwrap();
        let vanilla = report.intervention(InterventionKind::VanillaCpi).unwrap();
        let stable = report.intervention(InterventionKind::StableCpi).unwrap();
        assert_eq!(vanilla.edges_added, 0);
        assert_eq!(vanilla.cyclists_after, stable.cyclists_after);
        if let (Some(a), Some(b)) = (vanilla.impact, stable.impact) {
            assert_eq!(a, 0.0);
            assert_eq!(b, 0.0);
        }
        for shock in ["T1", "T2"] {
            assert_eq!(
                report.attack_resilience(InterventionKind::VanillaCpi, shock),
                report.attack_resilience(InterventionKind::StableCpi, shock)
            );
        }
    }
}
