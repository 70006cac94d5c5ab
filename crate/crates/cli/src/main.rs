//! `barstat` command-line interface.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit codes:
//! 0 on success, 1 on a domain error or a failed bound check, 2 on a usage
//! error.

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use barstat::barcode::{read_diagram, read_point_cloud, write_diagram, write_point_cloud};
use barstat::harness::{run_experiment, write_curve_csv, ExperimentConfig, ExperimentKind};
use barstat::rips::rips_persistence;
use barstat::synth::{self, GbmParams, RngSeed};
use barstat::{Barcode64, Diagram64, Error, InfinitePolicy, SummaryReport64};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "barstat", version, about = "Scalar summaries of persistence barcodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics of a diagram file, per homology degree.
    Stats(StatsArgs),
    /// Vietoris-Rips persistence of a point cloud.
    Ph(PhArgs),
    /// Generate synthetic point clouds and time series.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Check the stability bounds and update formulas.
    Verify(verify::VerifyArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct StatsArgs {
    /// Diagram CSV (`degree,birth,death`); `-` reads stdin.
    diagram: PathBuf,
    /// Homology degree to summarize (repeatable). Defaults to every degree
    /// in the file, or 1 for an empty file.
    #[arg(short, long)]
    degree: Vec<usize>,
    /// Report moments M_1..M_K.
    #[arg(short, long, default_value_t = 4)]
    moments: u32,
    #[arg(short, long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    bits: bool,
    /// Replace infinite deaths by this value instead of dropping the bars.
    #[arg(long, value_name = "CAP")]
    truncate: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PhArgs {
    /// Point-cloud CSV (`x0,x1,...`); `-` reads stdin.
    points: PathBuf,
    /// Highest homology degree (0 or 1).
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Filtration cap; defaults to the enclosing radius.
    #[arg(long)]
    max_radius: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Seeded {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index selecting the random stream.
    #[arg(long, default_value_t = 0)]
    trial: u32,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Points on one circle, equidistant unless `--uniform`.
    Circle {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        center_x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        center_y: f64,
        #[arg(long)]
        uniform: bool,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
    /// Equidistant circles of radii 1 and 1/4 with a 4:1 point ratio.
    Disjoint {
        /// Points on the large circle.
        #[arg(long, default_value_t = 24)]
        points: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Two intersecting unit circles centered at (±0.75, 0).
    Intertwined {
        /// Points per circle when equidistant, total points when uniform.
        #[arg(long, default_value_t = 48)]
        points: usize,
        #[arg(long)]
        uniform: bool,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
    /// Add N(0, sigma²) noise to every coordinate of a point cloud.
    GaussianNoise {
        points: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
    /// Append round(base_n · intensity) uniform outliers on [-1.75, 1.75] × [-1, 1].
    Outliers {
        points: PathBuf,
        #[arg(long)]
        intensity: f64,
        #[arg(long, default_value_t = 100)]
        base_n: usize,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
    /// Geometric Brownian motion path as a `value` series.
    Gbm {
        #[arg(long, default_value_t = GbmParams::default().mu, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = GbmParams::default().sigma)]
        sigma: f64,
        #[arg(long, default_value_t = GbmParams::default().s0)]
        s0: f64,
        #[arg(long, default_value_t = GbmParams::default().dt)]
        dt: f64,
        #[arg(long, default_value_t = GbmParams::default().steps)]
        steps: usize,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
    /// Delay embedding of a `value` series.
    Takens {
        series: PathBuf,
        #[arg(long, default_value_t = synth::TAKENS_DIM)]
        dim: usize,
        #[arg(long, default_value_t = synth::TAKENS_TAU)]
        tau: usize,
        #[command(flatten)]
        out: Output,
    },
    /// The point cloud one experiment trial feeds to the Rips engine.
    Trial {
        #[arg(long)]
        experiment: String,
        #[arg(long, allow_negative_numbers = true)]
        parameter: f64,
        #[command(flatten)]
        seeded: Seeded,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; `-` reads stdin.
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: Output,
}

/// A failure with its exit code.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    /// Nonzero exit without a message.
    pub fn silent() -> Self {
        Failure { code: 1, message: String::new() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => e.into(),
            Error::CardinalityMismatch { .. } => Failure::usage(e.to_string()),
            _ => Failure::domain(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // the reader went away (`| head`); nothing left to report
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure { code: 0, message: String::new() };
        }
        Failure::domain(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn open_input(path: &PathBuf) -> CliResult<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    File::open(path)
        .map(|f| Box::new(io::BufReader::new(f)) as Box<dyn Read>)
        .map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn open_output(out: &Output) -> CliResult<Box<dyn Write>> {
    match &out.output {
        Some(path) => File::create(path)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::domain(format!("{}: {e}", path.display()))),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn load_diagram(path: &PathBuf, policy: InfinitePolicy<f64>) -> CliResult<Diagram64> {
    read_diagram(open_input(path)?, policy).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

/// Barcodes of the requested degrees; an empty file yields empty barcodes.
pub fn select_degrees(diagram: &Diagram64, degrees: &[usize]) -> CliResult<Vec<Barcode64>> {
    if diagram.is_empty() {
        let degrees = if degrees.is_empty() { vec![1] } else { degrees.to_vec() };
        return Ok(degrees.into_iter().map(Barcode64::empty).collect());
    }
    if degrees.is_empty() {
        return Ok(diagram.values().cloned().collect());
    }
    degrees
        .iter()
        .map(|d| {
            diagram.get(d).cloned().ok_or_else(|| {
                let present: Vec<String> = diagram.keys().map(usize::to_string).collect();
                Failure::domain(format!("no bars of degree {d} in the diagram (present: {})", present.join(", ")))
            })
        })
        .collect()
}

fn policy(truncate: Option<f64>) -> CliResult<InfinitePolicy<f64>> {
    match truncate {
        None => Ok(InfinitePolicy::Exclude),
        Some(cap) if cap.is_finite() => Ok(InfinitePolicy::Truncate(cap)),
        Some(cap) => Err(Failure::usage(format!("truncation cap must be finite, got {cap}"))),
    }
}

fn stats(args: StatsArgs) -> CliResult {
    let diagram = load_diagram(&args.diagram, policy(args.truncate)?)?;
    let barcodes = select_degrees(&diagram, &args.degree)?;
    let mut out = open_output(&args.out)?;
    let reports = barcodes.iter().map(|b| {
        let r = SummaryReport64::compute(b, args.moments);
        if args.bits {
            r.in_bits()
        } else {
            r
        }
    });
    match args.format {
        Format::Json => {
            for r in reports {
                writeln!(out, "{}", r.to_json())?;
            }
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(&mut out);
            wtr.write_record(SummaryReport64::csv_header(args.moments)).map_err(Error::from)?;
            for r in reports {
                wtr.write_record(r.csv_row()).map_err(Error::from)?;
            }
            wtr.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

fn ph(args: PhArgs) -> CliResult {
    let pc = read_point_cloud::<f64, _>(open_input(&args.points)?)
        .map_err(|e| Failure::domain(format!("{}: {e}", args.points.display())))?;
    if args.max_dim > 1 {
        return Err(Failure::usage(format!("--max-dim must be 0 or 1, got {}", args.max_dim)));
    }
    let diagram = rips_persistence(&pc, args.max_dim, args.max_radius)?;
    write_diagram(open_output(&args.out)?, &diagram)?;
    Ok(())
}

fn gen(cmd: GenCommand) -> CliResult {
    let load = |path: &PathBuf| -> CliResult<barstat::PointCloud64> {
        read_point_cloud(open_input(path)?).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
    };
    let rng = |s: &Seeded| RngSeed(s.seed).trial(u32::MAX, s.trial);
    let (cloud, out) = match cmd {
        GenCommand::Circle { radius, points, center_x, center_y, uniform, seeded, out } => {
            let center = [center_x, center_y];
            let pc = if uniform {
                synth::circle_uniform(radius, points, center, &mut rng(&seeded))?
            } else {
                synth::circle_equidistant(radius, points, center)?
            };
            (pc, out)
        }
        GenCommand::Disjoint { points, out } => (synth::disjoint_circles(points)?, out),
        GenCommand::Intertwined { points, uniform, seeded, out } => {
            let pc = if uniform {
                synth::intertwined_circles_uniform(points, &mut rng(&seeded))?
            } else {
                synth::intertwined_circles(points)?
            };
            (pc, out)
        }
        GenCommand::GaussianNoise { points, sigma, seeded, out } => {
            (synth::add_gaussian_noise(&load(&points)?, sigma, &mut rng(&seeded))?, out)
        }
        GenCommand::Outliers { points, intensity, base_n, seeded, out } => {
            (synth::add_uniform_outliers(&load(&points)?, intensity, base_n, &mut rng(&seeded))?, out)
        }
        GenCommand::Gbm { mu, sigma, s0, dt, steps, seeded, out } => {
            let path = synth::gbm_path(&GbmParams { mu, sigma, s0, dt, steps }, &mut rng(&seeded))?;
            synth::write_series(open_output(&out)?, &path)?;
            return Ok(());
        }
        GenCommand::Takens { series, dim, tau, out } => {
            let s = synth::read_series(open_input(&series)?)
                .map_err(|e| Failure::domain(format!("{}: {e}", series.display())))?;
            (synth::takens_embed(&s, dim, tau)?, out)
        }
        GenCommand::Trial { experiment, parameter, seeded, out } => {
            let kind: ExperimentKind = experiment.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
            let mut r = RngSeed(seeded.seed).trial(kind.id(), seeded.trial);
            (kind.generate(parameter, &mut r)?, out)
        }
    };
    write_point_cloud(open_output(&out)?, &cloud)?;
    Ok(())
}

fn experiment(args: ExperimentArgs) -> CliResult {
    let mut text = String::new();
    open_input(&args.config)?.read_to_string(&mut text)?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let points = run_experiment(&cfg)?;
    let skipped: usize = points.iter().map(|p| p.skipped).sum();
    if skipped > 0 {
        eprintln!("note: {skipped} undefined trial values were skipped");
    }
    write_curve_csv(open_output(&args.out)?, cfg.name, &points)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(a) => stats(a),
        Command::Ph(a) => ph(a),
        Command::Gen(c) => gen(c),
        Command::Experiment(a) => experiment(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("barstat: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
