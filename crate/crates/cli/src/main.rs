//! `thinfilm`: attractor evaluation, linear/nonlinear evolution and
//! convergence reports for the capillary thin film equation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use thinfilm::config::{parse_config_text, Command, Entry, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Sample the self-similar profile φ and its derivatives.
    Attractor,
    /// Evolve a profile under the linearised equation.
    Linear,
    /// Evolve a film height under the full nonlinear equation.
    Nonlinear,
    /// Report the distance to φ over a sequence of times.
    Converge,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Attractor => Command::Attractor,
            Cmd::Linear => Command::Linear,
            Cmd::Nonlinear => Command::Nonlinear,
            Cmd::Converge => Command::Converge,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "thinfilm", version, about)]
struct Cli {
    /// Command to run; may instead come from the config file.
    command: Option<Cmd>,
    /// Flat `key = value` config file. Flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Half the order of the dissipation operator.
    #[arg(long)]
    m: Option<String>,
    /// Initial profile, e.g. gate:1,0.1 or gaussian:0.1,0.5 or custom:file.csv.
    #[arg(long)]
    profile: Option<String>,
    /// Position of the profile's centre.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Comma-separated output times.
    #[arg(long)]
    times: Option<String>,
    /// xmin,dx,n. Auto-sized when omitted.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// volume, peak or moment1.
    #[arg(long)]
    norm: Option<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    dt_init: Option<String>,
    #[arg(long)]
    dt_min: Option<String>,
    #[arg(long)]
    dt_max: Option<String>,
    #[arg(long)]
    newton_tol: Option<String>,
    #[arg(long)]
    u_max: Option<String>,
    #[arg(long)]
    du: Option<String>,
    /// Comma-separated derivative orders for `attractor`.
    #[arg(long)]
    derivs: Option<String>,
    /// tmin,tmax window for the fitted convergence rate.
    #[arg(long)]
    rate_window: Option<String>,
}

impl Cli {
    fn flag_entries(&self) -> Vec<Entry> {
        let flags = [
            ("m", &self.m),
            ("profile", &self.profile),
            ("center", &self.center),
            ("times", &self.times),
            ("grid", &self.grid),
            ("norm", &self.norm),
            ("out", &self.out),
            ("dt_init", &self.dt_init),
            ("dt_min", &self.dt_min),
            ("dt_max", &self.dt_max),
            ("newton_tol", &self.newton_tol),
            ("u_max", &self.u_max),
            ("du", &self.du),
            ("derivs", &self.derivs),
            ("rate_window", &self.rate_window),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| Entry::flag(k, v.clone())))
            .collect()
    }
}

fn execute(cli: &Cli) -> thinfilm::Result<()> {
    let mut entries = match &cli.config {
        Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    entries.extend(cli.flag_entries());
    let cfg = RunConfig::from_entries(cli.command.map(Command::from), &entries)?;
    let summary = thinfilm::run::run(&cfg)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    for n in &summary.notes {
        println!("{n}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("THINFILM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        thinfilm::par::init_threads(n);
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thinfilm: error: {e}");
            ExitCode::FAILURE
        }
    }
}
