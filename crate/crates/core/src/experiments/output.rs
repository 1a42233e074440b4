use std::fs;
use std::path::{Path, PathBuf};

use super::svg::{emit_scatter_svg, PlotLabels};
use super::{H1Report, H2Report};
use crate::error::Result;
use crate::metrics::FitResult;
use crate::scalar::Real;

pub const H1_RECORDS_HEADER: [&str; 10] =
    ["config", "seed", "converged", "epochs", "cyclists", "stability", "energy", "shock", "resilience", "cyclists_after"];
pub const H1_FITS_HEADER: [&str; 5] = ["shock", "points", "slope", "intercept", "r_squared"];
pub const H2_TABLE3_HEADER: [&str; 10] = [
    "intervention",
    "cyclists_before",
    "cyclists_after_intervention",
    "impact",
    "edges_added",
    "stability_before",
    "stability_after",
    "shock",
    "cyclists_after_shock",
    "resilience",
];
pub const H2_TABLE4_HEADER: [&str; 4] = ["intervention", "shock", "replication", "resilience"];
const RUN_REPORT_HEADER: [&str; 9] =
    ["run", "seed", "stability", "energy", "impact", "resilience_T1", "resilience_T2", "resilience_R1", "resilience_R2"];
const SHOCK_COLUMNS: [&str; 4] = ["T1", "T2", "R1", "R2"];

/// Marker written where a value is undefined, such as the impact of an
/// intervention on a population without cyclists.
const UNDEFINED: &str = "undefined";

fn num<T: Real>(x: T) -> String {
    x.to_string()
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), num)
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Writes `h1_records.csv`, `h1_fits.csv`, `h1_run_report.csv` and one
/// `h1_<shock>.svg` per shock into `dir`. Returns the paths written.
pub fn write_h1<T: Real>(report: &H1Report<T>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("h1_records.csv");
    let mut w = writer(&path)?;
    w.write_record(H1_RECORDS_HEADER)?;
    for r in &report.records {
        w.write_record([
            r.config.to_string(),
            r.seed.to_string(),
            r.converged.to_string(),
            r.epochs.to_string(),
            r.cyclists.to_string(),
            num(r.stability),
            num(r.energy),
            r.shock.clone(),
            num(r.resilience),
            r.cyclists_after.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("h1_fits.csv");
    let mut w = writer(&path)?;
    w.write_record(H1_FITS_HEADER)?;
    for f in &report.fits {
        let (slope, intercept, r2) = match &f.fit {
            Some(fit) => (num(fit.slope), num(fit.intercept), num(fit.r_squared)),
            None => (UNDEFINED.into(), UNDEFINED.into(), UNDEFINED.into()),
        };
        w.write_record([f.shock.clone(), f.points.to_string(), slope, intercept, r2])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("h1_run_report.csv");
    let mut w = writer(&path)?;
    w.write_record(RUN_REPORT_HEADER)?;
    let mut configs: Vec<usize> = report.records.iter().map(|r| r.config).collect();
    configs.dedup();
    for c in configs {
        let rows: Vec<_> = report.records.iter().filter(|r| r.config == c).collect();
        let mut record =
            vec![format!("config_{c}"), rows[0].seed.to_string(), num(rows[0].stability), num(rows[0].energy), String::new()];
        for label in SHOCK_COLUMNS {
            record.push(rows.iter().find(|r| r.shock == label).map_or_else(String::new, |r| num(r.resilience)));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    written.push(path);

    for f in &report.fits {
        let points: Vec<(f64, f64)> =
            report.points(&f.shock).into_iter().map(|(x, y)| (x.as_f64(), y.as_f64())).collect();
        let fit = f.fit.as_ref().map(|fit| FitResult {
            slope: fit.slope.as_f64(),
            intercept: fit.intercept.as_f64(),
            r_squared: fit.r_squared.as_f64(),
        });
        let labels = PlotLabels {
            title: format!("Resilience to {} against stability", f.shock),
            x_label: "stability".into(),
            y_label: format!("resilience ({})", f.shock),
        };
        let path = dir.join(format!("h1_{}.svg", f.shock));
        fs::write(&path, emit_scatter_svg(&points, fit.as_ref(), &labels))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `h2_table3.csv`, `h2_table4.csv` and `h2_run_report.csv` into `dir`.
pub fn write_h2<T: Real>(report: &H2Report<T>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("h2_table3.csv");
    let mut w = writer(&path)?;
    w.write_record(H2_TABLE3_HEADER)?;
    for a in &report.attacks {
        let r = &a.report;
        w.write_record([
            a.intervention.label().to_string(),
            num(r.cyclists_before),
            num(r.cyclists_after),
            opt(r.impact),
            r.edges_added.to_string(),
            num(r.stability_before),
            num(r.stability_after),
            a.shock.clone(),
            num(a.cyclists_after_shock),
            num(a.resilience),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("h2_table4.csv");
    let mut w = writer(&path)?;
    w.write_record(H2_TABLE4_HEADER)?;
    for p in &report.perturbations {
        w.write_record([
            p.intervention.label().to_string(),
            p.shock.clone(),
            p.replication.to_string(),
            num(p.resilience),
        ])?;
    }
    for r in &report.interventions {
        let mut shocks: Vec<&str> =
            report.perturbations.iter().filter(|p| p.intervention == r.kind).map(|p| p.shock.as_str()).collect();
        shocks.sort_unstable();
        shocks.dedup();
        for shock in shocks {
            let mean = report.mean_perturbation_resilience(r.kind, shock);
            w.write_record([r.kind.label().to_string(), shock.to_string(), "average".to_string(), opt(mean)])?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("h2_run_report.csv");
    let mut w = writer(&path)?;
    w.write_record(RUN_REPORT_HEADER)?;
    for r in &report.interventions {
        let mut record = vec![
            r.kind.label().to_string(),
            report.seed.to_string(),
            num(r.stability_after),
            num(r.energy_after),
            opt(r.impact),
        ];
        for label in SHOCK_COLUMNS {
            let value = report
                .attack_resilience(r.kind, label)
                .or_else(|| report.mean_perturbation_resilience(r.kind, label));
            record.push(value.map_or_else(String::new, num));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}
