use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lblab_core::harness::{self, CommandReport, ExperimentConfig, HarnessError, VerifyOptions};

/// Lower-bound laboratory: hard quadratic instances, approximation bounds
/// and oblivious optimizers.
#[derive(Debug, Parser)]
#[command(name = "lblab", version)]
struct Cli {
    /// TOML experiment file. Defaults are used for anything it leaves out.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/SVG/JSON artifacts (overrides `experiment.output_dir`).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form iteration lower bounds per family.
    Bounds(Overrides),
    /// Brute-force best approximations against their lower bounds.
    ApproxCheck(Overrides),
    /// Exact polynomial iterates of oblivious schedules.
    Trace(Overrides),
    /// GD/AGD iterate polynomials against 1/eta.
    Fig2(Overrides),
    /// GD, AGD, heavy ball and L-BFGS on the chain quadratic.
    Fig1(Overrides),
    /// Monte-Carlo worst-case error curves.
    Run(Overrides),
    /// Checks empirical worst-case error against the family's envelope.
    Envelope(Overrides),
    /// With- against without-replacement sampling.
    SamplingCompare(Overrides),
    /// Every built-in invariant check, with timings.
    VerifyAll {
        /// Multiplies the uniform-norm lower bound, to confirm the sandwich
        /// check catches a wrong constant.
        #[arg(long, default_value_t = 1.0)]
        corrupt_maxnorm: f64,
    },
}

#[derive(Debug, Args, Default)]
struct Overrides {
    /// Optimizer name; repeat or comma-separate for several.
    #[arg(long = "opt", value_delimiter = ',')]
    opt: Vec<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Number of points in the instance-parameter grid.
    #[arg(long = "eta-grid")]
    eta_grid: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if !self.opt.is_empty() {
            cfg.experiment.optimizers = self.opt.clone();
        }
        if let Some(f) = &self.family {
            cfg.experiment.family = f.clone();
        }
        if let Some(n) = self.n {
            cfg.problem.n = n;
        }
        if let Some(d) = self.d {
            cfg.problem.d = d;
        }
        if let Some(k) = self.kappa {
            cfg.problem.kappa = Some(k);
            cfg.problem.l = None;
        }
        if let Some(i) = self.iters {
            cfg.experiment.iterations = i;
        }
        if let Some(s) = self.seeds {
            cfg.experiment.seeds = s;
        }
        if let Some(g) = self.eta_grid {
            cfg.grid.points = g;
        }
    }
}

fn load(cli: &Cli, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let src = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::from_toml(&src).map_err(|e| match (&cli.config, e) {
        (Some(p), HarnessError::Config(m)) => HarnessError::Config(format!("{}: {m}", p.display())),
        (_, e) => e,
    })?;
    overrides.apply(&mut cfg);
    // Flags carry no line numbers, so validate them without source text.
    cfg.validate("")?;
    Ok(cfg)
}

type CommandFn = fn(&ExperimentConfig) -> Result<CommandReport, HarnessError>;

fn execute(cli: &Cli) -> Result<(CommandReport, PathBuf), HarnessError> {
    harness::configure_threads()?;
    if let Command::VerifyAll { corrupt_maxnorm } = &cli.command {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        let rep = harness::cmd_verify_all(VerifyOptions {
            maxnorm_scale: *corrupt_maxnorm,
        })?;
        return Ok((rep, out));
    }
    let (overrides, cmd): (&Overrides, CommandFn) = match &cli.command {
        Command::Bounds(o) => (o, harness::cmd_bounds),
        Command::ApproxCheck(o) => (o, harness::cmd_approx_check),
        Command::Trace(o) => (o, harness::cmd_trace),
        Command::Fig2(o) => (o, harness::cmd_fig2),
        Command::Fig1(o) => (o, harness::cmd_fig1),
        Command::Run(o) => (o, harness::cmd_run),
        Command::Envelope(o) => (o, harness::cmd_envelope),
        Command::SamplingCompare(o) => (o, harness::cmd_sampling_compare),
        Command::VerifyAll { .. } => unreachable!(),
    };
    let cfg = load(cli, overrides)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.experiment.output_dir));
    Ok((cmd(&cfg)?, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((rep, out)) => {
            print!("{}", rep.summary);
            if let Err(e) = rep.write_to(&out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            for a in &rep.artifacts {
                eprintln!("wrote {}", out.join(&a.name).display());
            }
            ExitCode::from(rep.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
