use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use octa_sh::io::{read_coeffs, write_coeffs, write_sample_csv, write_trace_csv};
use octa_sh::{
    deviation, reduce_to_fundamental_zone, reference_harmonic, residuals, rotate_coeffs,
    sample_sphere, symmetrize, symmetrize_tracked, DescentConfig, EulerAngles, OrbitSearch,
    Sh4Coeffs, UnitQuaternion,
};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Degree-4 spherical harmonics with octahedral symmetry.
#[derive(Parser)]
#[command(name = "octa-sh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Angles {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
}

impl Angles {
    fn euler(&self) -> EulerAngles {
        EulerAngles::new(self.alpha, self.beta, self.gamma)
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Seed for the orbit sample of the nearest-harmonic search.
    #[arg(long, default_value_t = OrbitSearch::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = OrbitSearch::DEFAULT_SIZE)]
    samples: usize,
    #[arg(long, default_value_t = 50)]
    refine_iters: usize,
}

impl SearchArgs {
    fn search(&self) -> OrbitSearch {
        OrbitSearch::new(self.samples, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rotate the reference harmonic by Euler angles.
    Make {
        #[command(flatten)]
        angles: Angles,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rotate a harmonic by Euler angles.
    Rotate {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        angles: Angles,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm and quadric residuals as JSON.
    Residuals {
        #[arg(long = "in")]
        input: PathBuf,
        /// Threshold for the on-manifold verdict.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Rotation-invariant deviation from octahedral symmetry.
    Deviation {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Penalty-driven gradient descent onto the octahedral manifold.
    Symmetrize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        w1: Option<f64>,
        #[arg(long)]
        w2: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Penalty tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Fill the trace's distance column with the nearest-harmonic distance.
        #[arg(long)]
        track_distance: bool,
        #[command(flatten)]
        search: SearchArgs,
        /// Final coefficients (JSON); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Distance to the nearest symmetric harmonic.
    Distance {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Reduce a rotation quaternion to the fundamental zone.
    ReduceRotation {
        #[arg(long, allow_negative_numbers = true)]
        qw: f64,
        #[arg(long, allow_negative_numbers = true)]
        qx: f64,
        #[arg(long, allow_negative_numbers = true)]
        qy: f64,
        #[arg(long, allow_negative_numbers = true)]
        qz: f64,
    },
    /// Sample a harmonic on a (theta, phi) grid as CSV.
    Sample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
        #[arg(long, default_value_t = 128)]
        nphi: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<octa_sh::Error> for Failure {
    fn from(e: octa_sh::Error) -> Self {
        match e {
            octa_sh::Error::Io(e) => Failure::Io(e),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<Sh4Coeffs, Failure> {
    let file = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    read_coeffs(file).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finite(name: &str, values: &[f64]) -> Result<(), Failure> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{name} must be finite")))
    }
}

fn emit_coeffs(path: Option<&Path>, a: &Sh4Coeffs) -> Result<(), Failure> {
    let mut w = output(path)?;
    write_coeffs(&mut w, a)?;
    w.flush()?;
    Ok(())
}

fn print_json(value: serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json value"))?;
    Ok(())
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Make { angles, out } => {
            finite("angles", &[angles.alpha, angles.beta, angles.gamma])?;
            emit_coeffs(out.as_deref(), &rotate_coeffs(&reference_harmonic(), &angles.euler()))?;
        }
        Command::Rotate { input, angles, out } => {
            finite("angles", &[angles.alpha, angles.beta, angles.gamma])?;
            let a = load(&input)?;
            emit_coeffs(out.as_deref(), &rotate_coeffs(&a, &angles.euler()))?;
        }
        Command::Residuals { input, tol } => {
            let r = residuals(&load(&input)?);
            print_json(json!({
                "residuals": r.as_array(),
                "max_abs": r.max_abs(),
                "on_manifold": r.max_abs() <= tol,
            }))?;
        }
        Command::Deviation { input } => {
            println!("{:e}", deviation(&load(&input)?));
        }
        Command::Symmetrize {
            input,
            w1,
            w2,
            max_iter,
            tol,
            step,
            track_distance,
            search,
            out,
            trace,
        } => {
            let a0 = load(&input)?;
            let defaults = DescentConfig::default();
            let cfg = DescentConfig {
                w1: w1.unwrap_or(defaults.w1),
                w2: w2.unwrap_or(defaults.w2),
                max_iterations: max_iter.unwrap_or(defaults.max_iterations),
                penalty_tolerance: tol.unwrap_or(defaults.penalty_tolerance),
                initial_step: step.unwrap_or(defaults.initial_step),
                ..defaults
            };
            cfg.validate()?;
            let result = if track_distance {
                let orbit = search.search();
                symmetrize_tracked(&a0, &cfg, |a| orbit.nearest(a, search.refine_iters).distance)?
            } else {
                symmetrize(&a0, &cfg)?
            };
            emit_coeffs(out.as_deref(), &result.final_coeffs())?;
            if let Some(path) = trace {
                let mut w = BufWriter::new(File::create(path)?);
                write_trace_csv(&mut w, &result)?;
                w.flush()?;
            }
            let last = result.last();
            eprintln!(
                "{} after {} iterations: penalty {:e}",
                result.status,
                result.iterations(),
                last.penalty
            );
            if !result.converged() {
                return Ok(EXIT_NOT_CONVERGED);
            }
        }
        Command::Distance { input, search } => {
            let a = load(&input)?;
            let res = search.search().nearest(&a, search.refine_iters);
            print_json(json!({
                "euclidean_distance_r9": res.distance,
                "quaternion": res.rotation.to_array(),
                "sign": res.sign,
            }))?;
        }
        Command::ReduceRotation { qw, qx, qy, qz } => {
            finite("quaternion", &[qw, qx, qy, qz])?;
            let q = UnitQuaternion::new(qw, qx, qy, qz)?;
            let (reduced, index) = reduce_to_fundamental_zone(&q);
            print_json(json!({
                "quaternion": reduced.to_array(),
                "symmetry_index": index,
                "rodrigues": reduced.rodrigues().map(|r| r.r),
                "angle_deg": reduced.angle().to_degrees(),
            }))?;
        }
        Command::Sample {
            input,
            ntheta,
            nphi,
            out,
        } => {
            let a = load(&input)?;
            let grid = sample_sphere(&a, ntheta, nphi)?;
            let mut w = output(out.as_deref())?;
            write_sample_csv(&mut w, &grid)?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
