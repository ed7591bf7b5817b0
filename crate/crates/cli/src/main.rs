mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use permwalk::dynamics::{closed_form_walk, evolve_oracle, marked_p11, marked_p22};
use permwalk::spectral::{analytic_spectrum, numeric_spectrum};
use permwalk::verify::{self, Level};
use permwalk::{Error, Family, ModelSpec, TimeGrid, WalkResult, Wave};

use config::{parse_sites, Format, OutputSpec, RunConfig, Targets};

#[derive(Parser)]
#[command(name = "permwalk", version, about = "Permutation-symmetric fermionic quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and multiplicities of one sector, as JSON.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// RunConfig JSON; only its model is used.
        #[arg(long, conflicts_with = "n")]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Probability series of a walk from a basis ket.
    Walk(WalkArgs),
    /// Return probabilities of sites 1 and 2 in the marked model, one pair of columns per beta.
    Marked {
        #[arg(long)]
        n: usize,
        /// Comma-separated couplings.
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,1")]
        beta: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the invariant suites; exit 3 if any fails.
    Verify {
        #[arg(long, default_value = "quick", value_parser = ["quick", "full"])]
        level: String,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "hopping")]
    family: String,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    /// Particle number.
    #[arg(long, conflicts_with = "down")]
    k: Option<usize>,
    /// Down-spin count, for xxx_spin.
    #[arg(long)]
    down: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Cycle length for class_sum.
    #[arg(long, conflicts_with = "cycle_type")]
    p: Option<usize>,
    /// Cycle lengths for class_sum, e.g. "3,2".
    #[arg(long)]
    cycle_type: Option<String>,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec, Error> {
        let family: Family = self.family.parse()?;
        let n = self.n.ok_or_else(|| Error::InvalidArgument("--n is required without --config".into()))?;
        let k = self
            .k
            .or(self.down)
            .ok_or_else(|| Error::InvalidArgument("--k (or --down) is required without --config".into()))?;
        let cycle_type = self.cycle_type.as_deref().map(|s| parse_sites(s, ',')).transpose()?;
        let spec = ModelSpec { family, n, k, beta: self.beta, p: self.p, cycle_type };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

impl GridArgs {
    fn apply(&self, base: TimeGrid) -> Result<TimeGrid, Error> {
        TimeGrid::new(
            self.t_start.unwrap_or(base.t_start),
            self.t_end.unwrap_or(base.t_end),
            self.points.unwrap_or(base.n_points),
        )
    }
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Occupied sites of the start ket, e.g. "10,15".
    #[arg(long)]
    initial: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    /// all, shared-support, or labels like "1|2,1|3".
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Evaluate the closed form instead of the oracle and report the deviation.
    #[arg(long)]
    closed_form: bool,
    #[arg(long, conflicts_with = "n")]
    config: Option<PathBuf>,
}

/// Failure classes, each with its own exit code.
enum Failure {
    /// Bad flags, bad spec or bad initial tuple.
    Usage(String),
    Verification,
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionOverflow { .. } | Error::ClassTooLarge { .. } | Error::TooManySites { .. } => {
                Failure::Other(e.into())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Spectrum { model, config, output } => cmd_spectrum(&model, config.as_deref(), output.as_deref()),
        Command::Walk(args) => cmd_walk(&args),
        Command::Marked { n, beta, grid, output, format } => cmd_marked(n, &beta, &grid, output.as_deref(), format),
        Command::Verify { level } => cmd_verify(&level),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout")?,
    }
    Ok(())
}

fn cmd_spectrum(args: &ModelArgs, config: Option<&Path>, output: Option<&Path>) -> Result<(), Failure> {
    let spec = match config {
        Some(path) => read_config(path)?.model,
        None => args.spec()?,
    };
    let h = spec.build::<f64>()?;
    let summary = numeric_spectrum(&h, spec.k)?;
    let mut text = serde_json::to_string(&summary).context("serializing spectrum")?;
    text.push('\n');
    if spec.family == Family::Hopping && (1..spec.n).contains(&spec.k) {
        let analytic = analytic_spectrum(spec.n, spec.k)?;
        text.push_str(&format!("# analytic {}\n", serde_json::to_string(&analytic).context("serializing spectrum")?));
    }
    emit(output, &text)
}

fn walk_config(args: &WalkArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => read_config(path)?,
        None => {
            let initial = args
                .initial
                .as_deref()
                .ok_or_else(|| Failure::Usage("--initial is required without --config".into()))?;
            let sep = if initial.contains('|') { '|' } else { ',' };
            RunConfig {
                model: args.model.spec()?,
                initial: parse_sites(initial, sep)?,
                grid: TimeGrid::default(),
                output: OutputSpec { path: None, format: Format::Csv },
                targets: Targets::All,
            }
        }
    };
    cfg.grid = args.grid.apply(cfg.grid)?;
    if let Some(t) = &args.targets {
        cfg.targets = t.parse()?;
    }
    if let Some(path) = &args.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    cfg.model.validate()?;
    Ok(cfg)
}

fn cmd_walk(args: &WalkArgs) -> Result<(), Failure> {
    let cfg = walk_config(args)?;
    let initial = cfg.initial_state()?;
    let basis = Arc::new(cfg.model.basis()?);
    let columns = cfg.targets.resolve(&basis, &initial)?;
    let h = cfg.model.build::<f64>()?;
    let psi0 = Wave::basis_ket(Arc::clone(&basis), &cfg.initial)?;
    let oracle = evolve_oracle(&h, &psi0, &cfg.grid)?.select(&columns);
    let (result, deviation) = if args.closed_form {
        if cfg.model.family != Family::Hopping {
            return Err(Failure::Usage(format!("no closed form for family {}; only hopping has one", cfg.model.family)));
        }
        let targets: Vec<_> = columns.iter().map(|&c| basis.state(c)).collect();
        let closed = closed_form_walk(&initial, &targets, &cfg.grid)?;
        let dev = closed.max_abs_diff(&oracle);
        (closed, Some(dev))
    } else {
        (oracle, None)
    };
    let text = match cfg.output.format {
        Format::Csv => {
            let mut csv = result.to_csv();
            if let Some(dev) = deviation {
                csv.push_str(&format!("# closed-form max deviation from oracle: {dev:.3e}\n"));
            }
            csv
        }
        Format::Json => {
            let mut value = serde_json::to_value(&result).context("serializing walk")?;
            if let Some(dev) = deviation {
                value["closed_form_deviation"] = serde_json::json!(dev);
            }
            format!("{value}\n")
        }
    };
    emit(cfg.output.path.as_deref(), &text)
}

fn cmd_marked(n: usize, betas: &[f64], grid_args: &GridArgs, output: Option<&Path>, format: Format) -> Result<(), Failure> {
    let grid = grid_args.apply(TimeGrid::default())?;
    if betas.is_empty() {
        return Err(Failure::Usage("--beta needs at least one value".into()));
    }
    let times = grid.times();
    let mut labels = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut worst: f64 = 0.0;
    for &beta in betas {
        if !beta.is_finite() {
            return Err(Failure::Usage(format!("beta must be finite, got {beta}")));
        }
        let p11 = times.iter().map(|&t| marked_p11::<f64>(n, beta, t)).collect::<Result<Vec<_>, _>>()?;
        let p22 = marked_p22::<f64>(n, beta, &grid)?;
        // the full 1-fermion sector is the cross-check for both series
        let h = ModelSpec::new(Family::Marked, n, 1).with_beta(beta).build::<f64>()?;
        let basis = Arc::new(permwalk::SectorBasis::new(n, 1)?);
        let from1 = evolve_oracle(&h, &Wave::basis_ket(Arc::clone(&basis), &[1])?, &grid)?;
        let from2 = evolve_oracle(&h, &Wave::basis_ket(basis, &[2])?, &grid)?;
        for i in 0..times.len() {
            worst = worst.max((p11[i] - from1.rows[i][0]).abs()).max((p22[i] - from2.rows[i][1]).abs());
        }
        labels.push(format!("p11[beta={beta}]"));
        labels.push(format!("p22[beta={beta}]"));
        columns.push(p11);
        columns.push(p22);
    }
    let rows = (0..times.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let result = WalkResult { grid, labels, rows };
    let text = match format {
        Format::Csv => format!("{}# max deviation from full-sector oracle: {worst:.3e}\n", result.to_csv()),
        Format::Json => {
            let mut value = serde_json::to_value(&result).context("serializing series")?;
            value["oracle_deviation"] = serde_json::json!(worst);
            format!("{value}\n")
        }
    };
    emit(output, &text)
}

fn cmd_verify(level: &str) -> Result<(), Failure> {
    let level: Level = level.parse()?;
    let checks = verify::run_suite(level)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} checks, {failed} failed", checks.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
