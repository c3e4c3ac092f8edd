use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ortho3r::error::Error;
use ortho3r::geometry::ManipulatorGeometry;
use ortho3r::report::{cross_section_svg, AnalysisReport};
use ortho3r::sweep::{parse_fixed, sweep, SweepAxis, SweepMode, SweepSpec};
use ortho3r::topology::TopologyConfig;
use ortho3r::validate::{validate, ValidateConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "ortho3r", version, about = "Workspace topology of 3R orthogonal manipulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type label from the parameter inequalities, without curve tracing.
    Classify {
        geometry: PathBuf,
    },
    /// Full workspace analysis and classification.
    Analyze {
        geometry: PathBuf,
        #[command(flatten)]
        resolution: Resolution,
        /// Write the half cross-section plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the JSON report here as well as to stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Label or node-count map over two parameters.
    Sweep {
        /// Horizontal axis as `param:lo:hi:n`.
        #[arg(long)]
        x: SweepAxis,
        /// Vertical axis as `param:lo:hi:n`.
        #[arg(long)]
        y: SweepAxis,
        /// Remaining parameters as `key=value`.
        #[arg(long, num_args = 1.., value_parser = parse_fixed_arg)]
        fixed: Vec<(String, f64)>,
        #[arg(long, default_value = "label")]
        mode: SweepMode,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Property suites for one geometry; exit code 1 if any fails.
    Validate {
        geometry: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        resolution: Resolution,
    },
}

#[derive(Args)]
struct Resolution {
    /// Torus grid per axis for curve tracing.
    #[arg(long)]
    grid: Option<usize>,
    /// Raster cells across the cross-section.
    #[arg(long)]
    raster: Option<usize>,
}

impl Resolution {
    fn config(&self) -> TopologyConfig {
        let mut cfg = TopologyConfig::default();
        if let Some(n) = self.grid {
            cfg.singularity.grid_n = n;
        }
        if let Some(n) = self.raster {
            cfg.raster_n = n;
        }
        cfg
    }
}

fn parse_fixed_arg(s: &str) -> Result<(String, f64), String> {
    parse_fixed(s).map_err(|e| e.to_string())
}

/// Failure carrying its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnresolvedRegion(_) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        };
        Failure(code, e.to_string())
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ManipulatorGeometry, Failure> {
    Ok(ManipulatorGeometry::from_json_file(path)?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Classify { geometry } => {
            let geom = load(&geometry)?;
            let report = AnalysisReport::label_only(&geom, &TopologyConfig::default());
            println!("{}", report.to_json());
            Ok(0)
        }
        Command::Analyze {
            geometry,
            resolution,
            svg,
            json,
        } => {
            let geom = load(&geometry)?;
            let (report, analysis) = AnalysisReport::analyze(&geom, &resolution.config())?;
            let text = report.to_json();
            if let Some(path) = json {
                write(&path, &format!("{text}\n"))?;
            }
            if let Some(path) = svg {
                write(&path, &cross_section_svg(&geom, &analysis))?;
            }
            println!("{text}");
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(if report.consistent == Some(false) { EXIT_FAILURE } else { 0 })
        }
        Command::Sweep {
            x,
            y,
            fixed,
            mode,
            csv,
            svg,
        } => {
            let spec = SweepSpec {
                x,
                y,
                fixed: fixed.into_iter().collect(),
                mode,
            };
            let map = sweep(&spec)?;
            match csv {
                Some(path) => write(&path, &map.to_csv())?,
                None => print!("{}", map.to_csv()),
            }
            if let Some(path) = svg {
                write(&path, &map.to_svg())?;
            }
            let domains = map.domains();
            eprintln!("{} cells, {} domains", map.cells.len(), domains.len());
            for d in &domains {
                eprintln!("  {}: {} cells", d.label, d.cells.len());
            }
            Ok(0)
        }
        Command::Validate {
            geometry,
            samples,
            seed,
            resolution,
        } => {
            let geom = load(&geometry)?;
            let cfg = ValidateConfig {
                samples,
                seed,
                topology: resolution.config(),
                ..ValidateConfig::default()
            };
            let report = validate(&geom, &cfg)?;
            print!("{}", report.to_text());
            Ok(if report.all_passed() { 0 } else { EXIT_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
