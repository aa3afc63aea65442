//! Command-line front end over the library; each subcommand exposes one
//! module surface. The runnable examples under `examples/` are the richer
//! entry point for exploration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use randnodal::density::{asymptotic_constant, finite_l_density, EnsembleFamily};
use randnodal::ensembles::{verify_kernel_asymptotics, Manifold, SpectralWindow};
use randnodal::error::Result;
use randnodal::experiment::{run_experiment, summarize_csv, ExperimentConfig};
use randnodal::nodal::{run_trials, EnsembleConfig, MorseFunctionSpec, NodalSummary};
use randnodal::randmat::{expected_det_index, DetIndexEstimate, TraceCoupledGaussian};
use randnodal::symbols::{annulus_moments, mc_moments, SymbolSpec};

#[derive(Parser)]
#[command(
    name = "randnodal",
    about = "Random nodal sets of spectral ensembles: moments, random matrices, kernels, nodal counts and densities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment constants of the symbol body (closed form or Monte Carlo).
    Moments {
        #[arg(long)]
        dim: usize,
        /// Annulus inner fraction in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Symbol order m.
        #[arg(long, default_value_t = 2.0)]
        order: f64,
        /// Estimate by rejection sampling with this many samples.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Signature-restricted expected |det| of trace-coupled symmetric
    /// matrices.
    Randmat {
        #[arg(long)]
        size: usize,
        #[arg(long = "trace-coupling")]
        trace_coupling: f64,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spectral-kernel diagonal against its leading-term prediction.
    Kernel {
        #[arg(long)]
        manifold: Manifold,
        #[arg(long = "L")]
        l: f64,
        /// Derivative pair, e.g. "id,id" or "dt,dt" (dt/dp up to second
        /// order: id, dt, dp, dtt, dtp, dpp).
        #[arg(long, default_value = "id,id")]
        derivs: String,
        /// Extra thresholds completing the sweep (the main L is appended).
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
    },
    /// Nodal trials: zero counts (circle) or components and tangencies
    /// (surfaces), one CSV row per trial.
    Nodal {
        #[arg(long)]
        manifold: Manifold,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid resolution in cells per smallest wavelength.
        #[arg(long, default_value_t = 12.0)]
        grid: f64,
        /// Window fraction a: spectrum restricted to [aL, L].
        #[arg(long, conflicts_with = "pure")]
        window: Option<f64>,
        /// Use the pure eigenspace at exactly L.
        #[arg(long)]
        pure: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-L Kac-Rice density at a point, with the asymptotic constant.
    Density {
        #[arg(long)]
        manifold: Manifold,
        /// Chart point "theta,phi" (the circle uses theta only).
        #[arg(long, default_value = "1.0,2.0")]
        point: String,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print only the asymptotic constant.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Run a configured threshold sweep and persist CSV/JSON outputs.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute per-threshold statistics from a trials CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn parse_deriv(token: &str) -> Result<(usize, usize)> {
    match token.trim() {
        "id" => Ok((0, 0)),
        "dt" => Ok((1, 0)),
        "dp" => Ok((0, 1)),
        "dtt" => Ok((2, 0)),
        "dtp" => Ok((1, 1)),
        "dpp" => Ok((0, 2)),
        other => Err(randnodal::Error::Config(format!(
            "unknown derivative '{other}' (expected id, dt, dp, dtt, dtp, dpp)"
        ))),
    }
}

fn parse_point(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|e| randnodal::Error::Config(format!("point coordinate '{s}': {e}")))
    };
    match parts.as_slice() {
        [a] => Ok([parse(a)?, 0.0]),
        [a, b] => Ok([parse(a)?, parse(b)?]),
        _ => Err(randnodal::Error::Config(format!(
            "point '{text}' is not 'theta,phi'"
        ))),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moments {
            dim,
            gamma,
            order,
            mc,
            seed,
        } => {
            let moments = match mc {
                Some(samples) => {
                    let symbol = SymbolSpec::euclidean_ball(dim, order)?;
                    mc_moments(&symbol, samples, seed)?
                }
                None => annulus_moments(dim, gamma, order)?,
            };
            println!("{}", serde_json::to_string_pretty(&moments)?);
        }
        Command::Randmat {
            size,
            trace_coupling,
            index,
            samples,
            seed,
        } => {
            let spec = TraceCoupledGaussian::new(size, trace_coupling)?;
            let estimate = expected_det_index(&spec, index, samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&estimate)?);
        }
        Command::Kernel {
            manifold,
            l,
            derivs,
            sweep,
        } => {
            let (d1, d2) = match derivs.split_once(',') {
                Some((a, b)) => (parse_deriv(a)?, parse_deriv(b)?),
                None => {
                    let d = parse_deriv(&derivs)?;
                    (d, d)
                }
            };
            let mut thresholds = sweep;
            thresholds.push(l);
            thresholds.sort_by(f64::total_cmp);
            thresholds.dedup();
            let point = match manifold {
                Manifold::Sphere2 => [std::f64::consts::FRAC_PI_2, 0.0],
                _ => [0.4, 1.1],
            };
            let table = verify_kernel_asymptotics(
                manifold,
                SpectralWindow::Full,
                &thresholds,
                d1,
                d2,
                point,
            )?;
            println!("L,exact,predicted,rel_error");
            for row in &table.rows {
                println!(
                    "{},{},{},{}",
                    row.l, row.exact, row.predicted, row.rel_error
                );
            }
        }
        Command::Nodal {
            manifold,
            l,
            trials,
            seed,
            grid,
            window,
            pure,
            out,
        } => {
            let window = match (window, pure) {
                (Some(a), false) => SpectralWindow::Window(a),
                (None, true) => SpectralWindow::Pure,
                _ => SpectralWindow::Full,
            };
            let config = EnsembleConfig::new(manifold, l)
                .with_window(window)
                .with_grid(grid);
            let batch = run_trials(&config, None, trials, seed)?;
            let mut csv = String::new();
            csv.push_str(NodalSummary::csv_header(manifold.dim()));
            csv.push('\n');
            for summary in &batch.summaries {
                csv.push_str(&summary.csv_row());
                csv.push('\n');
            }
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| randnodal::Error::io(path.display().to_string(), e))?,
                None => print!("{csv}"),
            }
        }
        Command::Density {
            manifold,
            point,
            l,
            index,
            samples,
            seed,
            asymptotic,
        } => {
            let point = parse_point(&point)?;
            let n = manifold.dim();
            let moments = randnodal::symbols::ball_moments(n)?;
            let det = if n == 1 {
                DetIndexEstimate::exact(1.0)
            } else {
                let spec = TraceCoupledGaussian::new(n - 1, 1.0 / 6.0)?;
                expected_det_index(&spec, index, samples.max(100_000), seed ^ 0xa5a5)?
            };
            let constant = asymptotic_constant(n, index, EnsembleFamily::Full, &moments, &det)?;
            if asymptotic {
                println!("{}", serde_json::to_string_pretty(&constant)?);
                return Ok(());
            }
            let basis = randnodal::ensembles::build_basis(manifold, l, SpectralWindow::Full)?;
            let morse = match manifold {
                Manifold::Circle => None,
                m => Some(MorseFunctionSpec::default_for(m)?),
            };
            let density = finite_l_density(&basis, point, morse.as_ref(), index, samples, seed)?;
            let predicted = constant.value * l.powf(constant.scaling_exponent);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "density": density.per_metric,
                    "stderr": density.stderr,
                    "per_chart": density.per_chart,
                    "asymptotic_constant": constant.value,
                    "ratio": density.per_metric / predicted,
                }))?
            );
        }
        Command::Experiment { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| randnodal::Error::io(config.display().to_string(), e))?;
            let config: ExperimentConfig = serde_json::from_str(&text)?;
            let output = run_experiment(&config, &out)?;
            eprintln!(
                "wrote {}, {}, {}",
                output.trials_csv.display(),
                output.summary_json.display(),
                output.plot_data.display()
            );
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
        }
        Command::Summarize { input } => {
            let summary = summarize_csv(&input)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
