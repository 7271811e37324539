//! `ellrad` — pipeline driver for the elliptical Radon toolkit.
//!
//! Every run is described by a JSON configuration (all fields defaulted)
//! plus optional flag overrides; each output file carries a sidecar with
//! the model, the grids, the tool version, and the hash of the resolved
//! configuration.  Exit codes: 0 success, 2 invalid input or configuration,
//! 3 a numerical tolerance failed, 4 I/O trouble.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::{MethodKind, RunConfig};
use ellrad::analysis::{nullspace_probe, stability_ratio, ProbeReport, SobolevReport};
use ellrad::chirp::{compute_g, invert_chirp, ChirpInversion};
use ellrad::error::{Error, Result};
use ellrad::io;
use ellrad::model::{EccentricityModel, LocalDataSets};
use ellrad::phantom::sample_phantom;
use ellrad::selftest;
use ellrad::spectral::fft::fourier_nd;
use ellrad::spectral::inversion::invert_fourier;
use ellrad::transform::{backproject, derive_numeric, derived_exact, forward, DataKind, Sinogram};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "ellrad",
    version,
    about = "Volume integrals over confocal ellipsoids: forward data, two inversion routes, stability and visibility analysis"
)]
struct Cli {
    /// JSON run configuration; every field is optional and flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Eccentricity parameter λ > 1 (overrides the configuration)
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Ambient dimension (overrides the configuration)
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Quadrature order for forward and derived data
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Seed for randomized steps
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the configured phantom on the field grid
    Phantom {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Volume data of the phantom over the data grid
    Forward {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Derived data: scaled focal derivative of a volume file, or exact
    /// surface quadrature of the phantom when no input is given
    Derive {
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Adjoint of a derived-data file onto the field grid
    Backproject {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Reconstruct the field from derived data (from file or phantom)
    Invert {
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Inversion route (overrides the configuration)
        #[arg(long, value_enum)]
        method: Option<MethodKind>,
        /// Spectral padding factor (overrides the configuration)
        #[arg(long)]
        pad: Option<usize>,
        /// Also write the spectrum of the reconstruction
        #[arg(long, value_name = "FILE")]
        dump_spectrum: Option<PathBuf>,
        /// Also write the quadratic-phase data panel (chirp route)
        #[arg(long, value_name = "FILE")]
        dump_chirp: Option<PathBuf>,
        /// Drop chirp scale rows below this edge
        #[arg(long)]
        gamma_min: Option<f64>,
        /// Upper edge of the chirp spectral box
        #[arg(long)]
        gamma_max: Option<f64>,
        /// Truncate each scale row to |u| ≤ trunc_box·λ/2γ
        #[arg(long)]
        trunc_box: Option<f64>,
        /// Richardson-extrapolate the chirp scale integral
        #[arg(long)]
        richardson: bool,
    },
    /// Sobolev stability report for the configured phantom
    Analyze {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Sobolev order γ of the field norm (overrides the configuration)
        #[arg(long)]
        sobolev_order: Option<f64>,
    },
    /// Singular spectrum of the local visibility probe
    ProbeLocal {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also export the spectrum as CSV
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Run the built-in certification checks
    Selftest {
        /// Write the outcomes as a JSON report
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Singular values of a probe report as CSV
    ExportCsv {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    ellrad::exec::init_from_env();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ellrad: {e}");
            match e {
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(lambda) = cli.lambda {
        cfg.model.lambda = lambda;
    }
    if let Some(n) = cli.n {
        cfg.model.n = n;
    }
    if let Some(order) = cli.order {
        cfg.method.order = order;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Read a sinogram and insist it matches the configured model and the
/// expected kind; nothing is written when this fails.
fn read_checked_sinogram(
    path: &Path,
    model: &EccentricityModel,
    kind: DataKind,
) -> Result<Sinogram> {
    let s = io::read_sinogram(path)?;
    io::ensure_model_match(model, &s.model)?;
    if s.kind != kind {
        return Err(Error::MetadataMismatch(format!(
            "{} holds {:?} data, this command needs {:?}",
            path.display(),
            s.kind,
            kind
        )));
    }
    Ok(s)
}

/// Reports carry their provenance inline instead of a sidecar file.
#[derive(Serialize)]
struct Report<T: Serialize> {
    provenance: io::Provenance,
    model: EccentricityModel,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct StabilityBody {
    sobolev: SobolevReport,
}

#[derive(Serialize)]
struct ProbeBody {
    report: ProbeReport,
}

#[derive(Serialize)]
struct SelftestBody {
    outcomes: Vec<selftest::CriterionOutcome>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    match cli.cmd {
        Cmd::Phantom { out } => {
            let model = cfg.model()?;
            let set = cfg.phantom_set()?;
            let field = sample_phantom(&set, cfg.field_grid()?);
            io::write_scalar_field(&out, &field, Some(&model), true, Some(cfg.sha256()))?;
        }
        Cmd::Forward { out } => {
            let model = cfg.model()?;
            let set = cfg.phantom_set()?;
            let data = forward(&model, &set, &cfg.data_grid()?, &cfg.volume_rule()?)?;
            io::write_sinogram(&out, &data, Some(cfg.sha256()))?;
        }
        Cmd::Derive { input, out } => {
            let model = cfg.model()?;
            let derived = match input {
                Some(path) => {
                    let volume = read_checked_sinogram(&path, &model, DataKind::Volume)?;
                    derive_numeric(&volume)?
                }
                None => {
                    let set = cfg.phantom_set()?;
                    derived_exact(&model, &set, &cfg.data_grid()?, cfg.method.order)?
                }
            };
            io::write_sinogram(&out, &derived, Some(cfg.sha256()))?;
        }
        Cmd::Backproject { input, out } => {
            let model = cfg.model()?;
            let data = read_checked_sinogram(&input, &model, DataKind::Derived)?;
            let field = backproject(&data, &cfg.field_grid()?)?;
            io::write_scalar_field(&out, &field, Some(&model), true, Some(cfg.sha256()))?;
        }
        Cmd::Invert {
            input,
            out,
            method,
            pad,
            dump_spectrum,
            dump_chirp,
            gamma_min,
            gamma_max,
            trunc_box,
            richardson,
        } => {
            if let Some(kind) = method {
                cfg.method.kind = kind;
            }
            if let Some(pad) = pad {
                cfg.method.pad = pad;
            }
            if gamma_min.is_some() {
                cfg.method.gamma_min = gamma_min;
            }
            if gamma_max.is_some() {
                cfg.method.gamma_max = gamma_max;
            }
            if trunc_box.is_some() {
                cfg.method.trunc_box = trunc_box;
            }
            if richardson {
                cfg.method.richardson = true;
            }
            let model = cfg.model()?;
            let sha = cfg.sha256();
            let data = match input {
                Some(path) => read_checked_sinogram(&path, &model, DataKind::Derived)?,
                None => {
                    let set = cfg.phantom_set()?;
                    derived_exact(&model, &set, &cfg.data_grid()?, cfg.method.order)?
                }
            };
            let field_grid = cfg.field_grid()?;
            let rec = match cfg.method.kind {
                MethodKind::Spectral => invert_fourier(&data, &field_grid, cfg.method.pad)?,
                MethodKind::Chirp => {
                    let panel = compute_g(&data, &cfg.scales())?;
                    if let Some(path) = &dump_chirp {
                        io::write_chirp_data(path, &panel, Some(sha.clone()))?;
                    }
                    let opts = ChirpInversion {
                        gamma_min: cfg.method.gamma_min,
                        gamma_max: cfg.method.gamma_max,
                        alpha_max: cfg.method.trunc_box,
                        tail: true,
                        richardson: cfg.method.richardson,
                    };
                    invert_chirp(&panel, &field_grid, &opts)?
                }
            };
            if let Some(path) = &dump_spectrum {
                io::write_spectral_field(path, &fourier_nd(&rec), Some(&model), Some(sha.clone()))?;
            }
            io::write_scalar_field(&out, &rec, Some(&model), true, Some(sha))?;
        }
        Cmd::Analyze { out, sobolev_order } => {
            if let Some(gamma) = sobolev_order {
                cfg.sobolev_order = gamma;
            }
            let model = cfg.model()?;
            let set = cfg.phantom_set()?;
            let sobolev = stability_ratio(&set, &model, cfg.sobolev_order)?;
            io::write_json(
                &out,
                &Report {
                    provenance: io::Provenance::here(Some(cfg.sha256())),
                    model,
                    body: StabilityBody { sobolev },
                },
            )?;
        }
        Cmd::ProbeLocal { out, csv } => {
            let model = cfg.model()?;
            let sets = LocalDataSets::new(
                model,
                cfg.probe.u0.clone(),
                cfg.probe.epsilon,
                cfg.probe.t_cap,
            )?;
            let report = nullspace_probe(&sets, cfg.probe.field_res, cfg.probe.data_res)?;
            if let Some(path) = &csv {
                io::write_singular_values_csv(path, &report.singular_values)?;
            }
            io::write_json(
                &out,
                &Report {
                    provenance: io::Provenance::here(Some(cfg.sha256())),
                    model,
                    body: ProbeBody { report },
                },
            )?;
        }
        Cmd::Selftest { out } => {
            let outcomes = selftest::run_all();
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failures = outcomes.iter().filter(|o| !o.pass).count();
            if let Some(path) = &out {
                io::write_json(
                    path,
                    &Report {
                        provenance: io::Provenance::here(Some(cfg.sha256())),
                        model: cfg.model()?,
                        body: SelftestBody { outcomes },
                    },
                )?;
            }
            if failures > 0 {
                eprintln!("ellrad: {failures} certification check(s) failed");
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::ExportCsv { input, out } => {
            let doc: serde_json::Value = io::read_json(&input)?;
            let values = doc
                .get("singular_values")
                .or_else(|| doc.get("report").and_then(|r| r.get("singular_values")))
                .and_then(|v| v.as_array())
                .ok_or_else(|| {
                    Error::MetadataMismatch(format!(
                        "{} holds no singular-value spectrum",
                        input.display()
                    ))
                })?
                .iter()
                .map(|v| {
                    v.as_f64().ok_or_else(|| {
                        Error::MetadataMismatch("non-numeric singular value".into())
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            io::write_singular_values_csv(&out, &values)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
