use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leafdens_cli::{
    resolve_run, resolve_synth, CliError, ConfigFile, Report, RunOverrides, SynthOverrides,
};

/// Leaf shape clustering from centroid contour distance traces.
#[derive(Parser)]
#[command(name = "leafdens", version)]
struct Cli {
    /// Optional `key = value` config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize every trace and write densities.json.
    Densify(RunArgs),
    /// Write distance matrices.
    Distmat(RunArgs),
    /// Cluster a matrix file into a dendrogram (and flat clusters with --cut).
    Cluster(RunArgs),
    /// Draw density and leaf-outline figures.
    Plot(RunArgs),
    /// Run every stage.
    Pipeline(RunArgs),
    /// Generate a synthetic dataset with known groups.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, value_parser = ["l1", "sup", "hellinger", "moments", "all"])]
    distance: Option<String>,
    /// Highest trigonometric moment order for the moments distance.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_parser = ["complete", "single", "average"])]
    linkage: Option<String>,
    /// Number of flat clusters to cut the dendrogram into.
    #[arg(long)]
    cut: Option<usize>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    per_group: Option<usize>,
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Standard deviation of the multiplicative noise.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep every trace's starting point at the template's origin.
    #[arg(long)]
    no_rotate: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        // Values were restricted by clap, so parsing cannot fail.
        RunOverrides {
            input: self.input.clone(),
            format: self.format.as_deref().map(|f| f.parse().unwrap()),
            distance: self.distance.as_deref().map(|d| d.parse().unwrap()),
            r: self.r,
            linkage: self.linkage.as_deref().map(|l| l.parse().unwrap()),
            cut: self.cut,
            outdir: self.outdir.clone(),
            no_plots: self.no_plots,
        }
    }
}

impl SynthArgs {
    fn overrides(&self) -> SynthOverrides {
        SynthOverrides {
            groups: self.groups,
            per_group: self.per_group,
            min_len: self.min_len,
            max_len: self.max_len,
            noise: self.noise,
            seed: self.seed,
            no_rotate: self.no_rotate,
            output: self.output.clone(),
            format: self.format.as_deref().map(|f| f.parse().unwrap()),
        }
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Synth(args) => {
            let (cfg, output, format) = resolve_synth(&args.overrides(), &file)?;
            leafdens_cli::synth(&cfg, &output, format)
        }
        Command::Densify(args) => leafdens_cli::densify(&resolve_run(&args.overrides(), &file)?),
        Command::Distmat(args) => leafdens_cli::distmat(&resolve_run(&args.overrides(), &file)?),
        Command::Cluster(args) => leafdens_cli::cluster(&resolve_run(&args.overrides(), &file)?),
        Command::Plot(args) => leafdens_cli::plot(&resolve_run(&args.overrides(), &file)?),
        Command::Pipeline(args) => leafdens_cli::pipeline(&resolve_run(&args.overrides(), &file)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are input errors; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(report) => {
            for path in &report.written {
                println!("wrote {}", path.display());
            }
            for (tag, ari) in &report.agreement {
                println!("adjusted Rand index ({tag}): {ari:.4}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("leafdens: error in stage {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
