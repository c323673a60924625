use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisydk_cli::config::{Command, Fig2Panel, Fig3Panel};
use noisydk_cli::{run, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "noisydk",
    version,
    about = "Survival probabilities of the noisy Demkov-Kunike model"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Telegraph-noise tables: (A, B) and survival vs switch time or chirp.
    Fig2 { panel: Panel2 },
    /// Rotated-coupling tables: switch-time and coupling averages vs chirp.
    Fig3 { panel: Panel3 },
    /// Closed forms against the integrator, plus the discrepancy ledger.
    Verify,
    /// Any survival operation along one parameter axis.
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Panel2 {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum Panel3 {
    A,
    B,
}

/// Flags take strings so that every value goes through the same parser as
/// the config file.
#[derive(Args)]
struct Flags {
    /// Static detuning.
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta0: Option<String>,
    /// Chirp amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta1: Option<String>,
    /// Coupling amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    j: Option<String>,
    /// Pulse duration T.
    #[arg(long, global = true)]
    t_cap: Option<String>,
    /// Noise correlation time.
    #[arg(long, global = true)]
    tau_c: Option<String>,
    /// Noise amplitude.
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Switch time; accepts inf and -inf.
    #[arg(long, global = true, allow_hyphen_values = true)]
    t0: Option<String>,
    /// Integration window [-t_max, t_max].
    #[arg(long, global = true)]
    t_max: Option<String>,
    /// Integrator tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Sweep points, endpoints included.
    #[arg(long, global = true)]
    points: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output file; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// validated or as-printed.
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Sweep axis: delta0, delta1, j, t0, tau-c or sigma.
    #[arg(long, global = true)]
    axis: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lo: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    hi: Option<String>,
    /// Survival operation for `sweep`.
    #[arg(long, global = true)]
    operation: Option<String>,
    /// telegraph or gaussian-ou (alias ou).
    #[arg(long, global = true)]
    noise: Option<String>,
    /// Plain-text `key=value` file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

impl Flags {
    fn pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        if let Some(path) = &self.config {
            out.extend(RunConfig::parse_kv(&fs::read_to_string(path)?)?);
        }
        for s in &self.set {
            out.extend(RunConfig::parse_kv(s)?);
        }
        let named = [
            ("delta0", &self.delta0),
            ("delta1", &self.delta1),
            ("j", &self.j),
            ("t-cap", &self.t_cap),
            ("tau-c", &self.tau_c),
            ("sigma", &self.sigma),
            ("t0", &self.t0),
            ("t-max", &self.t_max),
            ("tol", &self.tol),
            ("points", &self.points),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("variant", &self.variant),
            ("axis", &self.axis),
            ("lo", &self.lo),
            ("hi", &self.hi),
            ("operation", &self.operation),
            ("noise", &self.noise),
        ];
        out.extend(
            named
                .into_iter()
                .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))),
        );
        Ok(out)
    }
}

fn command(cmd: &Cmd) -> Command {
    match cmd {
        Cmd::Fig2 { panel } => Command::Fig2(match panel {
            Panel2::A => Fig2Panel::A,
            Panel2::B => Fig2Panel::B,
            Panel2::C => Fig2Panel::C,
            Panel2::D => Fig2Panel::D,
        }),
        Cmd::Fig3 { panel } => Command::Fig3(match panel {
            Panel3::A => Fig3Panel::A,
            Panel3::B => Fig3Panel::B,
        }),
        Cmd::Verify => Command::Verify,
        Cmd::Sweep => Command::Sweep,
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let pairs = cli.flags.pairs()?;
    let config = RunConfig::from_pairs(
        Some(command(&cli.command)),
        pairs
            .iter()
            .filter(|(k, _)| k != "command")
            .map(|(k, v)| (k.as_str(), v.as_str())),
    )?;
    if cli.flags.dump_config {
        print!("{}", config.to_kv());
        return Ok(());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.flags.workers {
        if n == 0 {
            return Err(CliError::InvalidValue {
                key: "workers".into(),
                msg: "must be at least 1".into(),
            });
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Compute(format!("worker pool: {e}")))?;
    let outcome = pool.install(|| run(&config))?;
    for (path, body) in outcome.artifact.render(&config) {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                fs::write(p, body)?;
            }
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
    }
    if outcome.passed {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
