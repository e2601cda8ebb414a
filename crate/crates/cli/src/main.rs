use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use edgealloc_core::{
    brute_force, build_envelope, grid_resolution_bound, solve, synth, validate_instance,
    write_envelope_csv, Baseline, Error, FixedStrategyBaseline, GridSpec, OracleCandidate,
    OracleOptions, ProblemInstance, SweepSpec, SweptParam, ValidatedInstance,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

/// Uplink/downlink bandwidth allocation for end-edge model updates.
#[derive(Parser, Debug)]
#[command(name = "edgealloc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file and report every problem found
    Validate { instance: PathBuf },

    /// Compute the optimal allocation
    Solve {
        instance: PathBuf,
        /// Write the result JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Sample the upper boundary L_M(M) of reachable edge performance
    Envelope {
        instance: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Also emit a row at every knot
        #[arg(long)]
        with_knots: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Exhaustive grid search over (M, rho, q)
    Oracle {
        instance: PathBuf,
        /// Grid size as nM,nRho
        #[arg(long, value_parser = parse_grid)]
        grid: GridSpec,
        /// Maximum number of grid tuples
        #[arg(long, default_value_t = edgealloc_core::oracle::DEFAULT_BUDGET)]
        budget: u128,
        /// Write every feasible grid point as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Re-solve across a range of one parameter
    Sweep {
        instance: PathBuf,
        /// B, N, T_total or M_max
        #[arg(long)]
        param: SweptParam,
        #[arg(long, required_unless_present = "values")]
        from: Option<f64>,
        #[arg(long, required_unless_present = "values")]
        to: Option<f64>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Space the points geometrically instead of linearly
        #[arg(long)]
        log: bool,
        /// Explicit comma-separated values instead of a range
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
        values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        baselines: Vec<BaselineName>,
        /// Upload proportion of the fixed baseline
        #[arg(long, default_value_t = 0.5)]
        fixed_rho: f64,
        /// Quantization level of the fixed baseline [default: highest level]
        #[arg(long)]
        fixed_q: Option<f64>,
        /// Model size of the fixed baseline [default: M_max / 2]
        #[arg(long)]
        fixed_m: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Print the built-in reference instance
    Example,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BaselineName {
    None,
    NoneUpdate,
    #[value(alias = "fixed-strategy")]
    Fixed,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected nM,nRho, got '{s}'"))?;
    let n_m = a.trim().parse::<usize>().map_err(|e| format!("nM: {e}"))?;
    let n_rho = b
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("nRho: {e}"))?;
    GridSpec::new(n_m, n_rho).map_err(|e| e.to_string())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Schema(_) | Error::Json(_) | Error::Sweep(_) => EXIT_INVALID,
        Error::DegenerateDomain { .. } => EXIT_DEGENERATE,
        _ => EXIT_FAILURE,
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Error> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load(path: &Path) -> Result<ValidatedInstance, Error> {
    let instance = validate_instance(ProblemInstance::load(path)?)?;
    for w in instance.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(instance)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Validate { instance } => {
            let v = load(&instance)?;
            let m_hi = v.params.m_hi();
            println!("ok: {} level(s), M_hi = {m_hi}", v.levels.len());
            for (level, rho) in v.levels.iter().zip(v.rho_best()) {
                println!(
                    "  q = {}: rho_best = {rho}, plateau = {}",
                    level.q,
                    level.g.eval(*rho)
                );
            }
            if m_hi > 0.0 {
                Ok(0)
            } else {
                eprintln!("degenerate domain: the downlink cannot carry any parameter");
                Ok(EXIT_DEGENERATE)
            }
        }
        Command::Solve { instance, out } => {
            let v = load(&instance)?;
            let result = solve(&v)?;
            write_json(&result, out.as_deref())?;
            if result.diagnostics.no_downlink {
                eprintln!("degenerate domain: no model update fits, reporting mAP_pre");
                return Ok(EXIT_DEGENERATE);
            }
            Ok(0)
        }
        Command::Envelope {
            instance,
            samples,
            with_knots,
            out,
        } => {
            if samples < 2 {
                return Err(Error::Schema("--samples must be at least 2".into()));
            }
            let v = load(&instance)?;
            let env = build_envelope(&v)?;
            let mut w = output(out.as_deref())?;
            write_envelope_csv(&env, samples, with_knots, &mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Oracle {
            instance,
            grid,
            budget,
            trace,
            out,
        } => {
            let v = load(&instance)?;
            let opts = OracleOptions {
                budget,
                trace: trace.is_some(),
            };
            let result = brute_force(&v, grid, &opts)?;
            if let (Some(path), Some(rows)) = (&trace, &result.trace) {
                write_trace(path, rows)?;
            }
            let grid_bound = build_envelope(&v)
                .ok()
                .map(|env| grid_resolution_bound(&env, grid));
            write_json(
                &OracleSummary {
                    n_m: grid.n_m,
                    n_rho: grid.n_rho,
                    best: result.best,
                    evaluated: result.evaluated,
                    feasible: result.feasible,
                    grid_bound,
                },
                out.as_deref(),
            )?;
            Ok(if grid_bound.is_some() {
                0
            } else {
                EXIT_DEGENERATE
            })
        }
        Command::Sweep {
            instance,
            param,
            from,
            to,
            steps,
            log,
            values,
            baselines,
            fixed_rho,
            fixed_q,
            fixed_m,
            out,
        } => {
            let v = load(&instance)?;
            let fixed = FixedStrategyBaseline {
                rho_fix: fixed_rho,
                q_fix: fixed_q.unwrap_or_else(|| v.levels.iter().map(|l| l.q).fold(0.0, f64::max)),
                m_fix: fixed_m.unwrap_or(0.5 * v.params.max_params),
            };
            let mut chosen = Vec::new();
            for b in baselines {
                let b = match b {
                    BaselineName::None => continue,
                    BaselineName::NoneUpdate => Baseline::NoneUpdate,
                    BaselineName::Fixed => {
                        fixed.check(&v)?;
                        Baseline::Fixed(fixed)
                    }
                };
                if !chosen.contains(&b) {
                    chosen.push(b);
                }
            }
            let spec = match values {
                Some(vals) => SweepSpec::new(param, vals, chosen)?,
                None => SweepSpec::range(param, from.unwrap(), to.unwrap(), steps, log, chosen)?,
            };
            let table = edgealloc_core::run_sweep(&v, &spec)?;
            let mut w = output(out.as_deref())?;
            table.write_csv(&mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Example => {
            println!("{}", synth::reference_instance().to_json()?);
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct OracleSummary {
    #[serde(rename = "n_M")]
    n_m: usize,
    n_rho: usize,
    best: OracleCandidate,
    evaluated: u64,
    feasible: u64,
    /// Resolution bound of the grid, absent when the domain is degenerate.
    grid_bound: Option<f64>,
}

fn write_trace(path: &Path, rows: &[OracleCandidate]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
