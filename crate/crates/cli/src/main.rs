use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use entropy_lab::flow::{evolve_with, write_trajectory, FlowOptions, FlowScheme};
use entropy_lab::functionals::{entropy, local_entropy, EntropyOptions, ScaleWindow, SpatialDomain};
use entropy_lab::geometry::fixtures::{angenent_torus, concentric_spheres, ellipsoid, icosphere, neck_shell};
use entropy_lab::geometry::io::{read_measure, read_obj, write_atomic, write_manifest, write_obj};
use entropy_lab::geometry::WeightedSurfaceMeasure;
use entropy_lab::pipeline::run_pipeline;
use entropy_lab::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "entropy-lab", version, about = "Gaussian entropy and mean curvature flow experiments on triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy (or local entropy over a scale window) of a mesh or manifest.
    Entropy {
        path: PathBuf,
        /// Scale window A B; B may be `inf`.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        window: Option<Vec<String>>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evolve a mesh by mean curvature flow and write the trajectory.
    Flow {
        mesh: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::Explicit)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
    },
    /// Perturb an m-sheet slice over a shrinker and certify the entropy barrier.
    Pipeline {
        reference: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a test mesh.
    Fixture {
        #[arg(value_enum)]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        subdivisions: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        /// Comma-separated radii (concentric) or semi-axes (ellipsoid).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<f64>,
        /// Write a manifest with this multiplicity instead of a bare mesh.
        #[arg(long)]
        multiplicity: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Explicit,
    SemiImplicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    Sphere,
    Ellipsoid,
    Concentric,
    Neck,
    Angenent,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Io(_) => 2,
        Error::Timestep { .. } | Error::EigenConvergence(_) => 4,
        Error::Stage { .. } => 5,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn parse_window(v: &[String]) -> Result<ScaleWindow, Error> {
    let num = |s: &str| {
        s.parse::<f64>().map_err(|_| Error::Parse {
            line: 0,
            message: format!("window bound '{s}' is not a number"),
        })
    };
    let b = if v[1] == "inf" { None } else { Some(num(&v[1])?) };
    ScaleWindow::new(num(&v[0])?, b)
}

fn print_json(value: &impl serde::Serialize) -> Result<String, Error> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(text)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Entropy { path, window, config } => {
            let opts: EntropyOptions = load_config(config.as_deref())?.entropy_options();
            let window = window.as_deref().map(parse_window).transpose()?;
            let measure = read_measure(&path)?;
            let witness = match window {
                Some(w) => local_entropy(&measure, &w, &SpatialDomain::All, &opts)?,
                None => entropy(&measure, &opts)?,
            };
            print_json(&witness)?;
        }
        Command::Flow {
            mesh,
            dt,
            steps,
            out,
            scheme,
            record_every,
        } => {
            let surface = read_obj(&mesh)?;
            let opts = FlowOptions {
                scheme: match scheme {
                    SchemeArg::Explicit => FlowScheme::Explicit,
                    SchemeArg::SemiImplicit => FlowScheme::SemiImplicit,
                },
                record_every,
                ..FlowOptions::default()
            };
            let traj = evolve_with(&surface, dt, steps, &opts)?;
            write_trajectory(&out, &traj)?;
            print_json(&serde_json::json!({
                "out": out,
                "snapshots": traj.snapshots.len(),
                "final_time": traj.last().t,
                "stopped": traj.stopped,
            }))?;
        }
        Command::Pipeline { reference, m, config, out } => {
            let config = load_config(config.as_deref())?;
            let surface = read_obj(&reference)?;
            let (report, error) = match run_pipeline(&surface, m, &config) {
                Ok(r) => (r, None),
                Err(f) => (f.partial, Some(f.error)),
            };
            let text = print_json(&report)?;
            if let Some(path) = out {
                write_atomic(&path, text.as_bytes())?;
            }
            if let Some(e) = error {
                return Err(e);
            }
        }
        Command::Fixture {
            kind,
            out,
            subdivisions,
            radius,
            sizes,
            multiplicity,
        } => {
            let size = |k: usize, default: f64| sizes.get(k).copied().unwrap_or(default);
            let surface = match kind {
                FixtureKind::Sphere => icosphere(subdivisions, radius),
                FixtureKind::Ellipsoid => ellipsoid(subdivisions, [size(0, 2.0), size(1, 1.6), size(2, 1.2)]),
                FixtureKind::Concentric => {
                    let radii = if sizes.is_empty() { vec![2.0, 2.05] } else { sizes.clone() };
                    concentric_spheres(subdivisions, &radii)
                }
                FixtureKind::Neck => neck_shell(size(0, 2.0), size(1, 2.08), size(2, 0.15), 48, 64),
                FixtureKind::Angenent => angenent_torus(64, 64),
            };
            match multiplicity {
                Some(m) => write_manifest(&out, &WeightedSurfaceMeasure::single(surface, m)?)?,
                None => write_obj(&out, &surface)?,
            }
        }
    }
    Ok(())
}
