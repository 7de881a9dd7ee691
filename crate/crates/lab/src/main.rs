use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twoweight_core::{hilbert_as_shift, random_shift, sparse_from_stopping, sparse_validate, DyadicGrid, RandomShiftOptions};
use twoweight_lab::config::{ExperimentConfig, MaximalChoice, OutputFormat};
use twoweight_lab::formats::{self, Document};
use twoweight_lab::random::{random_coefficients, random_step, stream, trial_rng};
use twoweight_lab::{run, Case, Report};

/// Exact dyadic experiments on two-weight inequalities.
#[derive(Parser)]
#[command(name = "twoweight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one reproduction case with its default settings.
    Repro {
        #[arg(value_parser = Case::NAMES)]
        case: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write a shift, sparse family, coefficient map or step function.
    Export {
        #[arg(value_enum)]
        what: ExportKind,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read and validate a file written by `export`.
    Import {
        path: PathBuf,
        /// Grid of a CSV step function (JSON documents carry their own).
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Midpoint samples per finest cell and axis in the testing integrals.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximal operator inside the Sawyer testing integrals.
    #[arg(long, value_enum)]
    maximal: Option<MaximalArg>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
    top: i32,
    #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
    bottom: i32,
}

impl GridArgs {
    fn grid(&self) -> Result<DyadicGrid, twoweight_core::Error> {
        DyadicGrid::standard(self.dim, self.top, self.bottom)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaximalArg {
    HardyLittlewood,
    Dyadic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportKind {
    HilbertShift,
    RandomShift,
    StoppingFamily,
    Coefficients,
    Function,
}

type Failure = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => ExperimentConfig::load(&config).map_err(Failure::from).and_then(|c| execute(c, overrides)),
        Command::Repro { case, overrides } => {
            case.parse::<Case>().map_err(Failure::from).and_then(|c| execute(ExperimentConfig::for_case(c), overrides))
        }
        Command::Export { what, grid, seed, m, k, out } => export(what, &grid, seed, m, k, out.as_deref()),
        Command::Import { path, grid } => import(&path, &grid),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(mut config: ExperimentConfig, o: Overrides) -> Result<u8, Failure> {
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    if o.trials.is_some() {
        config.trials = o.trials;
    }
    if o.resolution.is_some() {
        config.resolution = o.resolution;
    }
    if let Some(f) = o.format {
        config.output.format = match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        };
    }
    if o.out.is_some() {
        config.output.path = o.out;
    }
    if let Some(m) = o.maximal {
        config.maximal = match m {
            MaximalArg::HardyLittlewood => MaximalChoice::HardyLittlewood,
            MaximalArg::Dyadic => MaximalChoice::Dyadic,
        };
    }
    if o.serial {
        config.parallel = false;
    }
    let settings = config.settings()?;
    let report = run(&settings)?;
    match &config.output.path {
        Some(path) => {
            write_report(&report, config.output.format, BufWriter::new(File::create(path)?))?;
            print!("{}", report.summary());
        }
        None => {
            write_report(&report, config.output.format, std::io::stdout().lock())?;
            eprint!("{}", report.summary());
        }
    }
    Ok(report.exit_code() as u8)
}

fn write_report(report: &Report, format: OutputFormat, mut out: impl Write) -> Result<(), Failure> {
    match format {
        OutputFormat::Json => report.write_json(&mut out)?,
        OutputFormat::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn export(what: ExportKind, grid: &GridArgs, seed: u64, m: u32, k: u32, out: Option<&Path>) -> Result<u8, Failure> {
    let grid = grid.grid()?;
    let mut w = open_out(out)?;
    match what {
        ExportKind::HilbertShift => {
            let (spec, gamma) = hilbert_as_shift(&grid)?;
            formats::write_document(&formats::shift_document(&spec, gamma), &mut w)?;
        }
        ExportKind::RandomShift => {
            let spec = random_shift(&grid, m, k, seed, RandomShiftOptions { mean_zero: true })?;
            formats::write_document(&formats::shift_document(&spec, 1.0), &mut w)?;
        }
        ExportKind::StoppingFamily => {
            let f = random_step(&grid, false, &mut trial_rng(seed, stream::FUNCTION, 0));
            let family = sparse_from_stopping(&f, &grid.top_cube(), 2.0)?;
            formats::write_document(&formats::sparse_document(&family), &mut w)?;
        }
        ExportKind::Coefficients => {
            let alpha = random_coefficients(&grid, 0.3, &mut trial_rng(seed, stream::COEFFICIENTS, 0));
            formats::write_document(&formats::coefficients_document(&grid, &alpha), &mut w)?;
        }
        ExportKind::Function => {
            let f = random_step(&grid, true, &mut trial_rng(seed, stream::FUNCTION, 0));
            formats::write_step_csv(&f, &mut w)?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn import(path: &Path, grid: &GridArgs) -> Result<u8, Failure> {
    let input = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        let f = formats::read_step_csv(grid.grid()?, input)?;
        println!("step function: {} cells, integral {}, sup {}", f.values().len(), f.integral(), f.max_abs());
        return Ok(0);
    }
    match formats::read_document(input)? {
        Document::HaarShift(doc) => {
            let (spec, gamma) = formats::shift_from_doc(&doc)?;
            println!(
                "haar-shift: type ({}, {}), complexity {}, {} terms, scale {}, gamma {}",
                spec.m(),
                spec.k(),
                spec.complexity(),
                spec.terms().len(),
                spec.scale(),
                gamma
            );
            Ok(0)
        }
        Document::SparseFamily(doc) => {
            let family = formats::sparse_from_doc(&doc)?;
            let report = sparse_validate(&family);
            println!("sparse-family: {} generations, {} cubes", family.generations().len(), family.cube_count());
            for v in &report.violations {
                println!("  violation: {v}");
            }
            Ok(if report.is_valid() { 0 } else { 1 })
        }
        Document::Coefficients(doc) => {
            let (_, alpha) = formats::coefficients_from_doc(&doc)?;
            println!("coefficients: {} entries", alpha.len());
            Ok(0)
        }
    }
}
