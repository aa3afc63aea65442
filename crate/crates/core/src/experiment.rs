//! Configuration-driven experiment runner: sweeps the eigenvalue threshold,
//! aggregates nodal trials, fits the scaling law and persists CSV/JSON plus
//! plot-ready data.
//!
//! Configurations are flat JSON documents with a schema version, so runs are
//! diffable and reproducible: a fixed config and seed produce byte-identical
//! trial CSVs up to the wall-clock column, for any worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::{asymptotic_constant, EnsembleFamily};
use crate::ensembles::{Manifold, SpectralWindow};
use crate::error::{Error, Result};
use crate::nodal::{mean_stderr_of, run_trials, EnsembleConfig, NodalSummary, TrialBatch};
use crate::randmat::{expected_det_index, DetIndexEstimate, TraceCoupledGaussian};
use crate::symbols::{annulus_moments, ball_moments, sphere_limit_moments, sym2_inner};

pub const SCHEMA_VERSION: u32 = 1;

/// Flat, versioned experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub manifold: Manifold,
    /// One of "full", "window", "pure".
    pub family: String,
    /// Window fraction in [0, 1); required exactly when family is "window".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    pub l_values: Vec<f64>,
    pub trials_per_l: usize,
    pub seed: u64,
    pub cells_per_wavelength: f64,
    /// Rayon worker threads; omitted or 0 uses the global default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(manifold: Manifold, l_values: Vec<f64>, trials_per_l: usize, seed: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            manifold,
            family: "full".into(),
            window_fraction: None,
            l_values,
            trials_per_l,
            seed,
            cells_per_wavelength: 12.0,
            workers: None,
        }
    }

    /// Field-by-field validation; all violations are reported at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.l_values.is_empty() {
            problems.push("l_values: must not be empty".into());
        }
        if self.l_values.windows(2).any(|w| w[0] >= w[1]) {
            problems.push("l_values: must be strictly increasing".into());
        }
        if self.trials_per_l == 0 {
            problems.push("trials_per_l: must be at least 1".into());
        }
        match self.family.as_str() {
            "full" | "pure" => {
                if self.window_fraction.is_some() {
                    problems.push("window_fraction: only valid with family = \"window\"".into());
                }
            }
            "window" => match self.window_fraction {
                Some(a) if (0.0..1.0).contains(&a) => {}
                Some(a) => problems.push(format!("window_fraction: {a} outside [0, 1)")),
                None => problems.push("window_fraction: required for family = \"window\"".into()),
            },
            other => problems.push(format!("family: unknown value '{other}'")),
        }
        if self.cells_per_wavelength < crate::nodal::MIN_CELLS_PER_WAVELENGTH {
            problems.push(format!(
                "cells_per_wavelength: {} below the minimum {}",
                self.cells_per_wavelength,
                crate::nodal::MIN_CELLS_PER_WAVELENGTH
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn window(&self) -> SpectralWindow {
        match self.family.as_str() {
            "pure" => SpectralWindow::Pure,
            "window" => SpectralWindow::Window(self.window_fraction.unwrap_or(0.0)),
            _ => SpectralWindow::Full,
        }
    }

    pub fn family_tag(&self) -> EnsembleFamily {
        match self.family.as_str() {
            "pure" => EnsembleFamily::Pure,
            "window" => EnsembleFamily::Window(self.window_fraction.unwrap_or(0.0)),
            _ => EnsembleFamily::Full,
        }
    }

    /// Hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}

/// Per-threshold aggregate statistics over clean trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerLStats {
    pub l: f64,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub degenerate_fraction: f64,
}

/// Power-law fit of the mean count against the threshold.
///
/// The exponent comes from the free log-log regression; the constant is
/// evaluated at the largest threshold with the theoretical exponent pinned,
/// since a free intercept soaks up the `O(L^{-1/2})` finite-size drift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub exponent_ci: [f64; 2],
    pub constant: f64,
    pub constant_ci: [f64; 2],
    pub theory_exponent: f64,
    /// Limiting prefactor of the total count, `constant * Vol`.
    pub theory_constant: f64,
    /// Limiting density per unit Riemannian volume.
    pub theory_constant_per_volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config_hash: String,
    #[serde(rename = "per_L")]
    pub per_l: Vec<PerLStats>,
    pub fit: FitResult,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub trials_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plot_data: PathBuf,
    pub summary: ExperimentSummary,
}

fn per_l_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn stats_of(batch: &TrialBatch) -> PerLStats {
    let (mean, stderr) = batch.mean_stderr(|s| s.primary_count());
    PerLStats {
        l: batch.config.l,
        trials: batch.summaries.len(),
        mean,
        stderr,
        degenerate_fraction: batch.degenerate_fraction(),
    }
}

/// The limiting per-volume constant for the configured family and manifold,
/// and the matching total-count prefactor.
fn theory_constants(config: &ExperimentConfig) -> Result<(f64, f64)> {
    let n = config.manifold.dim();
    let family = config.family_tag();
    let moments = match family {
        EnsembleFamily::Full => ball_moments(n)?,
        EnsembleFamily::Window(a) => annulus_moments(n, a, 2.0)?,
        EnsembleFamily::Pure => sphere_limit_moments(n)?,
    };
    let det = if n == 1 {
        DetIndexEstimate::exact(1.0)
    } else {
        match family {
            EnsembleFamily::Full => DetIndexEstimate::exact(
                6.0f64.sqrt() / (4.0 * std::f64::consts::PI.sqrt()),
            ),
            EnsembleFamily::Pure => DetIndexEstimate::exact(
                1.0 / (2.0 * std::f64::consts::PI.sqrt()),
            ),
            EnsembleFamily::Window(_) => {
                // No closed form along the window family: estimate the
                // expected determinant under the induced coupling.
                let gamma = sym2_inner(&moments).trace_coupled_gamma();
                let spec = TraceCoupledGaussian::new(n - 1, gamma)?;
                expected_det_index(&spec, 0, 200_000, 0x5eed)?
            }
        }
    };
    let constant = asymptotic_constant(n, 0, family, &moments, &det)?;
    Ok((constant.value, constant.value * config.manifold.volume()))
}

fn fit(per_l: &[PerLStats], theory_exponent: f64, per_volume: f64, total: f64) -> FitResult {
    let points: Vec<(f64, f64)> = per_l
        .iter()
        .filter(|s| s.mean > 0.0)
        .map(|s| (s.l.ln(), s.mean.ln()))
        .collect();
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 {
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };

    let last = per_l.last().expect("validated non-empty");
    let scale = last.l.powf(theory_exponent);
    let constant = last.mean / scale;
    let constant_se = last.stderr / scale;
    FitResult {
        exponent: slope,
        exponent_ci: [slope - 1.96 * se, slope + 1.96 * se],
        constant,
        constant_ci: [
            constant - 1.96 * constant_se,
            constant + 1.96 * constant_se,
        ],
        theory_exponent,
        theory_constant: total,
        theory_constant_per_volume: per_volume,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Runs the configured sweep and persists `trials.csv`, `summary.json` and
/// the two-column `scaled_counts.dat` under `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let run_all = || -> Result<Vec<TrialBatch>> {
        config
            .l_values
            .iter()
            .enumerate()
            .map(|(idx, &l)| {
                let trial_config = EnsembleConfig::new(config.manifold, l)
                    .with_window(config.window())
                    .with_grid(config.cells_per_wavelength);
                run_trials(
                    &trial_config,
                    None,
                    config.trials_per_l,
                    per_l_seed(config.seed, idx),
                )
            })
            .collect()
    };
    let batches = match config.workers {
        Some(workers) if workers > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run_all),
        _ => run_all(),
    }?;

    let mut csv = String::new();
    csv.push_str(NodalSummary::csv_header(config.manifold.dim()));
    csv.push('\n');
    for batch in &batches {
        for summary in &batch.summaries {
            csv.push_str(&summary.csv_row());
            csv.push('\n');
        }
    }
    let trials_csv = out_dir.join("trials.csv");
    write_file(&trials_csv, &csv)?;

    let per_l: Vec<PerLStats> = batches.iter().map(stats_of).collect();
    let (per_volume, total) = theory_constants(config)?;
    let theory_exponent = config.manifold.dim() as f64 / 2.0;
    let fit = fit(&per_l, theory_exponent, per_volume, total);

    let mut plot = String::new();
    for s in &per_l {
        let _ = writeln!(plot, "{} {}", s.l, s.mean / s.l.powf(theory_exponent));
    }
    let plot_data = out_dir.join("scaled_counts.dat");
    write_file(&plot_data, &plot)?;

    let summary = ExperimentSummary {
        config_hash: config.hash(),
        per_l,
        fit,
    };
    let summary_json = out_dir.join("summary.json");
    write_file(&summary_json, &serde_json::to_string_pretty(&summary)?)?;

    Ok(ExperimentOutput {
        trials_csv,
        summary_json,
        plot_data,
        summary,
    })
}

/// A parsed trial CSV: per-threshold statistics recomputed from rows.
#[derive(Debug, Clone, Serialize)]
pub struct CsvSummary {
    pub per_l: Vec<PerLStats>,
    /// `(L, mean / L^{n/m})` rows, plot-ready.
    pub scaled: Vec<(f64, f64)>,
}

/// Recomputes per-threshold statistics from a trials CSV in the documented
/// schema. Malformed rows are reported with their line number.
pub fn summarize_csv(path: &Path) -> Result<CsvSummary> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Csv {
        line: 1,
        reason: "empty file".into(),
    })?;
    let dim = match header.trim() {
        h if h == NodalSummary::csv_header(1) => 1usize,
        h if h == NodalSummary::csv_header(2) => 2usize,
        other => {
            return Err(Error::Csv {
                line: 1,
                reason: format!("unrecognized header '{other}'"),
            })
        }
    };
    let expected_fields = if dim == 1 { 5 } else { 7 };

    // (L, count, degenerate) triples in file order.
    let mut rows: Vec<(f64, f64, bool)> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let fail = |reason: String| Error::Csv {
            line: idx + 1,
            reason,
        };
        if fields.len() != expected_fields {
            return Err(fail(format!(
                "expected {expected_fields} fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Csv {
                line: idx + 1,
                reason: format!("{what}: {e}"),
            })
        };
        let l = parse(fields[1], "L")?;
        let count = parse(fields[2], "count")?;
        let degenerate = match fields[expected_fields - 2].trim() {
            "0" => false,
            "1" => true,
            other => return Err(fail(format!("degenerate flag '{other}' not 0/1"))),
        };
        rows.push((l, count, degenerate));
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            line: 2,
            reason: "no data rows".into(),
        });
    }

    let mut per_l: Vec<PerLStats> = Vec::new();
    let mut order: Vec<f64> = Vec::new();
    for &(l, _, _) in &rows {
        if !order.contains(&l) {
            order.push(l);
        }
    }
    for &l in &order {
        let group: Vec<&(f64, f64, bool)> = rows.iter().filter(|r| r.0 == l).collect();
        let clean: Vec<f64> = group
            .iter()
            .filter(|r| !r.2)
            .map(|r| r.1)
            .collect();
        let (mean, stderr) = mean_stderr_of(&clean);
        per_l.push(PerLStats {
            l,
            trials: group.len(),
            mean,
            stderr,
            degenerate_fraction: group.iter().filter(|r| r.2).count() as f64
                / group.len() as f64,
        });
    }
    let exponent = dim as f64 / 2.0;
    let scaled = per_l
        .iter()
        .map(|s| (s.l, s.mean / s.l.powf(exponent)))
        .collect();
    Ok(CsvSummary { per_l, scaled })
}
