use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perispec::checks::{ktz_check, require_unimodular, ScanConfig};
use perispec::corpus::{write_corpus, DEFAULT_CORPUS_SIZE};
use perispec::dynamics::{simulate_delay, simulate_forced, theorem7_probe, SystemSpec, Trajectory};
use perispec::eigen::{cayley_hamilton_residual, eigenvalues, gelfand_radius_estimate};
use perispec::io::{read_json, to_json, write_text};
use perispec::linalg::operator_norm;
use perispec::resolvent::{
    cauchy_coefficient, circle_grid, pole_order_probe, rect_grid, resolvent_norm_scan, scan_to_csv,
};
use perispec::scan::{spectrum_scan, DEFAULT_GRID_SIZE};
use perispec::sequence::{extract_modes, unimodular, BoundedSeq, SequenceSpec, UNIMODULAR_TOL};
use perispec::{CMatrix, CVector, Complex, Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const DEFAULT_HORIZON: usize = 16_384;
const DEFAULT_PERIPHERAL_TOL: f64 = 1e-8;

/// Peripheral spectrum, sequence spectra and linear difference equations.
///
/// Every subcommand reads JSON inputs and writes a JSON report (CSV for grid
/// scans). With `--output` the report goes to that file and a one-line
/// summary is printed; otherwise the report is printed. No environment
/// variables are consulted.
#[derive(Parser, Debug)]
#[command(name = "perispec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Out {
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a sequence for points of its spectrum.
    SpectrumScan {
        /// Sequence JSON (materialized or modes_plus_decay).
        input: PathBuf,
        /// Coarse grid size K.
        #[arg(short = 'k', long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        /// Detection threshold; default max(1e-6, 0.01·sup‖xₙ‖).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Override the horizon of a generated sequence.
        #[arg(short = 'n', long)]
        horizon: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Extract mode vectors at given points of the unit circle.
    Modes {
        /// Sequence JSON.
        input: PathBuf,
        /// Unimodular point as `re,im`; repeatable. Default: the scan detections.
        #[arg(long = "theta", allow_hyphen_values = true)]
        thetas: Vec<String>,
        /// Point given by its angle in radians; repeatable.
        #[arg(long = "angle", allow_hyphen_values = true)]
        angles: Vec<f64>,
        /// Number of terms used for the means; default the whole horizon.
        #[arg(long)]
        n_used: Option<usize>,
        /// Override the horizon of a generated sequence.
        #[arg(short = 'n', long)]
        horizon: Option<usize>,
        #[arg(short = 'k', long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Simulate x_{n+1} = Bxₙ + yₙ from a system JSON with p = 1.
    Simulate {
        /// System JSON.
        input: PathBuf,
        /// Override the horizon stored in the system.
        #[arg(short = 'n', long)]
        horizon: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Simulate x_{n+p} = Bxₙ + yₙ and attach the delay-equation probe.
    DelaySimulate {
        /// System JSON.
        input: PathBuf,
        #[arg(short = 'n', long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PERIPHERAL_TOL)]
        peripheral_tol: f64,
        #[arg(short = 'k', long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Spectral radius from the growth of ‖Aⁿ‖.
    Gelfand {
        /// Matrix JSON.
        input: PathBuf,
        #[arg(long, default_value_t = 512)]
        n_max: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Check that Tⁿ(T − θI) tends to zero for a power-bounded T.
    Ktz {
        /// Matrix JSON.
        input: PathBuf,
        /// Unimodular θ as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 400)]
        n_max: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Resolvent norms over a rectangular or circular grid.
    ResolventScan {
        /// Matrix JSON.
        input: PathBuf,
        /// Rectangle `re_min,re_max,im_min,im_max,nx,ny`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "circle")]
        rect: Option<String>,
        /// Circle `center_re,center_im,radius,points`.
        #[arg(long, allow_hyphen_values = true)]
        circle: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Fit the pole order of the resolvent of a unitary at an eigenvalue.
    PoleProbe {
        /// Matrix JSON of a unitary.
        input: PathBuf,
        /// Eigenvalue as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Strictly decreasing radii in [1e-8, 0.1], comma separated.
        #[arg(long)]
        radii: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Residual ‖χ_A(A)‖ of the characteristic polynomial.
    Cayley {
        /// Matrix JSON.
        input: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Taylor coefficient k from a contour-sample or coefficient table.
    CauchyRecover {
        /// Series table JSON.
        input: PathBuf,
        #[arg(short, long)]
        k: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Write the seeded test corpus to a directory.
    Corpus {
        #[arg(long)]
        seed: u64,
        /// Target directory.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CORPUS_SIZE)]
        size: usize,
        #[arg(short = 'n', long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Either samples of f at `r·e^{2πim/M}`, m = 0..M, or Taylor coefficients
/// evaluated on that contour.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeriesTable {
    Samples { radius: f64, samples: Vec<CVector> },
    Coefficients {
        radius: f64,
        nodes: usize,
        coefficients: Vec<CVector>,
    },
}

#[derive(Serialize)]
struct CauchyReport {
    k: usize,
    radius: f64,
    nodes: usize,
    coefficient: CVector,
}

struct Emitted {
    body: String,
    summary: String,
}

fn emit<T: Serialize>(value: &T, summary: String) -> Result<Emitted> {
    Ok(Emitted {
        body: to_json(value)?,
        summary,
    })
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("{what}: '{t}' is not a finite number")))
        })
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex> {
    match parse_list(s, "complex")?.as_slice() {
        [re] => Ok(Complex::new(*re, 0.0)),
        [re, im] => Ok(Complex::new(*re, *im)),
        _ => Err(Error::Parse(format!("expected 're,im', got '{s}'"))),
    }
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Parse(format!("{what} must be a positive integer")))
    }
}

fn load_sequence(path: &Path, horizon: Option<usize>) -> Result<BoundedSeq> {
    let mut spec: SequenceSpec = read_json(path)?;
    if let (SequenceSpec::ModesPlusDecay { horizon: h, .. }, Some(n)) = (&mut spec, horizon) {
        *h = n;
    }
    BoundedSeq::from_spec(&spec)
}

fn load_system(path: &Path, horizon: Option<usize>) -> Result<SystemSpec> {
    let mut spec: SystemSpec = read_json(path)?;
    if let Some(n) = horizon {
        spec.horizon = n;
    }
    Ok(spec)
}

/// Trajectory as a materialized sequence with the report alongside, so the
/// file is valid sequence input.
fn trajectory_json(t: &Trajectory) -> Result<Value> {
    let mut v = serde_json::to_value(t.seq.to_materialized_spec()).map_err(|e| Error::Parse(e.to_string()))?;
    v["report"] = serde_json::to_value(t.report).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(v)
}

fn fmt_thetas(ts: &[Complex]) -> String {
    let parts: Vec<String> = ts.iter().map(|t| format!("{:.6}", t.arg())).collect();
    format!("[{}]", parts.join(", "))
}

fn run(cmd: Command) -> Result<(Emitted, Option<PathBuf>)> {
    match cmd {
        Command::SpectrumScan {
            input,
            grid_size,
            epsilon,
            horizon,
            out,
        } => {
            let x = load_sequence(&input, horizon)?;
            let cfg = ScanConfig {
                grid_size,
                epsilon,
                tol_vanish: None,
            };
            let rep = spectrum_scan(&x, grid_size, cfg.epsilon_for(&x))?;
            let summary = format!(
                "spectrum-scan: N = {}, K = {}, {} point(s) at angles {}",
                rep.horizon,
                rep.grid_size,
                rep.detected.len(),
                fmt_thetas(&rep.thetas())
            );
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::Modes {
            input,
            thetas,
            angles,
            n_used,
            horizon,
            grid_size,
            out,
        } => {
            let x = load_sequence(&input, horizon)?;
            let mut ts = thetas.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
            ts.extend(angles.iter().map(|&a| Complex::from_polar(1.0, a)));
            if ts.is_empty() {
                let cfg = ScanConfig {
                    grid_size,
                    ..ScanConfig::default()
                };
                ts = spectrum_scan(&x, grid_size, cfg.epsilon_for(&x))?.thetas();
            }
            let ts = ts
                .into_iter()
                .map(|t| unimodular(t, UNIMODULAR_TOL))
                .collect::<Result<Vec<_>>>()?;
            let rep = extract_modes(&x, &ts, n_used.unwrap_or(x.horizon()))?;
            let norms: Vec<String> = rep.modes.iter().map(|m| format!("{:.3e}", m.v.norm())).collect();
            let summary = format!(
                "modes: {} mode(s) at angles {}, norms [{}]",
                rep.modes.len(),
                fmt_thetas(&ts),
                norms.join(", ")
            );
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::Simulate { input, horizon, out } => {
            let spec = load_system(&input, horizon)?;
            if spec.p != 1 || spec.initial.len() != 1 {
                return Err(Error::Precondition(
                    "simulate needs p = 1 and one initial vector; use delay-simulate".into(),
                ));
            }
            let t = simulate_forced(&spec.b, &spec.initial[0], &spec.forcing, spec.horizon)?;
            let summary = format!(
                "simulate: N = {}, sup norm {:.6e}, growth {:?}",
                t.report.horizon, t.report.sup_norm, t.report.growth_class
            );
            Ok((emit(&trajectory_json(&t)?, summary)?, out.output))
        }
        Command::DelaySimulate {
            input,
            horizon,
            peripheral_tol,
            grid_size,
            out,
        } => {
            let spec = load_system(&input, horizon)?;
            let system = spec.system()?;
            let t = simulate_delay(&system, spec.horizon)?;
            let cfg = ScanConfig {
                grid_size,
                ..ScanConfig::default()
            };
            let probe = theorem7_probe(&system, spec.horizon, peripheral_tol, &cfg)?;
            let mut v = trajectory_json(&t)?;
            v["probe"] = serde_json::to_value(&probe).map_err(|e| Error::Parse(e.to_string()))?;
            let stat = |s: &Option<perispec::sequence::TailStats>| {
                s.as_ref().map_or("n/a".to_string(), |t| format!("{:.6e}", t.tail_sup))
            };
            let summary = format!(
                "delay-simulate: N = {}, p = {}, statistic (i) {}, statistic (ii) {}",
                spec.horizon,
                system.p,
                stat(&probe.stated_tail),
                stat(&probe.p_step_tail)
            );
            Ok((emit(&v, summary)?, out.output))
        }
        Command::Gelfand { input, n_max, out } => {
            let a: CMatrix = read_json(&input)?;
            let rep = gelfand_radius_estimate(&a, n_max)?;
            let summary = format!(
                "gelfand: estimate {:.6}, eigenvalue radius {:.6}",
                rep.estimate, rep.eig_radius
            );
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::Ktz {
            input,
            theta,
            n_max,
            out,
        } => {
            let t: CMatrix = read_json(&input)?;
            let theta = require_unimodular(parse_complex(&theta)?)?;
            let rep = ktz_check(&t, theta, n_max)?;
            let summary = format!(
                "ktz: hypotheses met {}, final difference norm {}, limit attained {}",
                rep.hypotheses_met,
                rep.final_difference_norm.map_or("n/a".into(), |v| format!("{v:.3e}")),
                rep.limit_attained
            );
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::ResolventScan {
            input,
            rect,
            circle,
            format,
            out,
        } => {
            let a: CMatrix = read_json(&input)?;
            let grid = match (rect, circle) {
                (Some(r), _) => match parse_list(&r, "rect")?.as_slice() {
                    [r0, r1, i0, i1, nx, ny] => rect_grid((*r0, *r1), (*i0, *i1), count(*nx, "nx")?, count(*ny, "ny")?),
                    _ => return Err(Error::Parse("rect needs re_min,re_max,im_min,im_max,nx,ny".into())),
                },
                (None, Some(c)) => match parse_list(&c, "circle")?.as_slice() {
                    [cr, ci, r, m] => circle_grid(Complex::new(*cr, *ci), *r, count(*m, "points")?),
                    _ => return Err(Error::Parse("circle needs center_re,center_im,radius,points".into())),
                },
                (None, None) => {
                    let r = 1.5 * operator_norm(&a)?.max(1.0);
                    rect_grid((-r, r), (-r, r), 64, 64)
                }
            };
            let samples = resolvent_norm_scan(&a, &grid);
            let flagged = samples.iter().filter(|s| s.singular_flag).count();
            let peak = samples.iter().map(|s| s.resolvent_norm).fold(0.0, f64::max);
            let summary = format!(
                "resolvent-scan: {} points, {} flagged singular, largest norm {:.6e}",
                samples.len(),
                flagged,
                peak
            );
            let body = match format {
                Format::Csv => scan_to_csv(&samples),
                Format::Json => to_json(&samples)?,
            };
            Ok((Emitted { body, summary }, out.output))
        }
        Command::PoleProbe {
            input,
            theta,
            radii,
            out,
        } => {
            let u: CMatrix = read_json(&input)?;
            let theta = parse_complex(&theta)?;
            let radii = match radii {
                Some(r) => parse_list(&r, "radii")?,
                None => {
                    let gap = eigenvalues(&u)?
                        .iter()
                        .map(|e| (e - theta).norm())
                        .filter(|&d| d > 1e-6)
                        .fold(f64::INFINITY, f64::min);
                    let r_max = (0.25 * gap).min(0.1);
                    (0..8).map(|k| r_max * 10f64.powf(-0.5 * k as f64)).collect()
                }
            };
            let rep = pole_order_probe(&u, theta, &radii)?;
            let summary = format!("pole-probe: fitted order {:.6} at {}", rep.fitted_order, rep.center);
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::Cayley { input, out } => {
            let a: CMatrix = read_json(&input)?;
            let residual = cayley_hamilton_residual(&a)?;
            let bound = 1e-8 * (1.0 + operator_norm(&a)?).powi(a.dim() as i32);
            let summary = format!("cayley: d = {}, residual {residual:.3e}, bound {bound:.3e}", a.dim());
            let rep = json!({"d": a.dim(), "residual": residual, "bound": bound, "within_bound": residual <= bound});
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::CauchyRecover { input, k, out } => {
            let table: SeriesTable = read_json(&input)?;
            let (radius, nodes, coefficient) = match &table {
                SeriesTable::Samples { radius, samples } => {
                    let m = samples.len();
                    let lookup = |z: Complex| {
                        let t = (z.arg() / (2.0 * PI)).rem_euclid(1.0);
                        samples[(t * m as f64).round() as usize % m].clone()
                    };
                    (*radius, m, cauchy_coefficient(lookup, k, *radius, m)?)
                }
                SeriesTable::Coefficients {
                    radius,
                    nodes,
                    coefficients,
                } => {
                    let d = coefficients.first().map_or(1, |v| v.dim());
                    if coefficients.iter().any(|v| v.dim() != d) {
                        return Err(Error::Parse("coefficient vectors differ in dimension".into()));
                    }
                    let f = |z: Complex| {
                        let mut acc = CVector::zeros(d);
                        for v in coefficients.iter().rev() {
                            acc = acc.scale(z);
                            acc.axpy(Complex::new(1.0, 0.0), v);
                        }
                        acc
                    };
                    (*radius, *nodes, cauchy_coefficient(f, k, *radius, *nodes)?)
                }
            };
            let summary = format!("cauchy-recover: k = {k}, coefficient norm {:.6e}", coefficient.norm());
            let rep = CauchyReport {
                k,
                radius,
                nodes,
                coefficient,
            };
            Ok((emit(&rep, summary)?, out.output))
        }
        Command::Corpus {
            seed,
            output,
            size,
            horizon,
        } => {
            let m = write_corpus(&output, seed, size, horizon)?;
            let summary = format!(
                "corpus: {} files under {} (seed {seed}, N = {horizon})",
                m.entries.len() + 1,
                output.display()
            );
            Ok((
                Emitted {
                    body: String::new(),
                    summary,
                },
                None,
            ))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) => 3,
        e if e.is_numerical() => 2,
        _ => 1,
    }
}

fn report_error(kind: &str, message: &str, code: u8) -> ExitCode {
    let obj = json!({"error": {"kind": kind, "message": message, "exit_code": code}});
    eprintln!("{obj}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error("usage", e.to_string().trim(), 1),
    };
    let is_corpus = matches!(cli.command, Command::Corpus { .. });
    let result = run(cli.command).and_then(|(emitted, output)| {
        match output {
            Some(path) => {
                write_text(&path, &emitted.body)?;
                println!("{} -> {}", emitted.summary, path.display());
            }
            None if is_corpus => println!("{}", emitted.summary),
            None => print!("{}", emitted.body),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(e.kind(), &e.to_string(), exit_code(&e)),
    }
}
