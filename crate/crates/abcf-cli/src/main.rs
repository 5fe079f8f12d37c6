use abcf_cli::config::{Format, Mode, Preset, Which};
use abcf_cli::{dispatch, Command, RunConfig};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "abcf", version, about = "(a,b)-continued fractions, reduction attractors and invariant measures")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Left end `a` (e.g. -4/5, -0.7, (1-sqrt(5))/2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<String>,
    /// Right end `b`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    #[arg(long, global = true, value_enum, default_value = "exact")]
    mode: Mode,
    /// Overridden by the ABCF_SEED environment variable.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// SVG window `x0,x1,y0,y1`.
    #[arg(long, global = true, default_value = "-3,3,-3,3", allow_hyphen_values = true)]
    window: String,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Digits of x.
    Expand {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 64)]
        max_digits: usize,
    },
    /// Cycle classification of one endpoint.
    Cycle {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Attractor domain.
    Attractor {
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Compares the domain with a sampled point cloud.
    Oracle {
        #[arg(long, default_value_t = 300)]
        burn_in: usize,
        #[arg(long, default_value_t = 100_000)]
        points: usize,
        #[arg(long, default_value_t = 0.999)]
        min_inside: f64,
        #[arg(long, default_value_t = 0.05)]
        max_gap: f64,
    },
    /// Exact tiling and connectivity checks, optionally a reduction scan.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        /// Lattice size of the reduction scan; 0 skips it.
        #[arg(long, default_value_t = 0)]
        scan_grid: usize,
        #[arg(long, default_value_t = 10_000)]
        scan_cap: usize,
    },
    /// Builds an exceptional parameter from a substitution plan.
    Exceptional {
        /// e.g. "m=3;2x1,1x2,1x3" (case x multiplicity).
        #[arg(long)]
        plan: String,
        #[arg(long, default_value_t = 1e-6)]
        target: f64,
        #[arg(long, default_value_t = 1000)]
        finiteness_cap: usize,
        /// Also checks every prefix triangle of the final block (slow).
        #[arg(long)]
        check_triangles: bool,
    },
    /// Invariant measure and entropy checks.
    Measures {
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 3e-3)]
        ks_max: f64,
    },
    /// SVG of the domain with a sampled cloud.
    Plot {
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        #[arg(long, default_value_t = 300)]
        burn_in: usize,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Re-runs a config echoed by an earlier run.
    Replay {
        /// JSON file holding the echoed config.
        config: String,
    },
}

fn parse_window(s: &str) -> Result<[f64; 4]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad window {s:?}"))?;
    v.try_into().map_err(|_| anyhow::anyhow!("window needs four numbers, got {s:?}"))
}

fn build_config(cli: Cli) -> Result<RunConfig> {
    let c = cli.common;
    let command = match cli.cmd {
        Cmd::Expand { x, max_digits } => Command::Expand { x, max_digits },
        Cmd::Cycle { which, cap } => Command::Cycle { which, cap },
        Cmd::Attractor { cap } => Command::Attractor { cap },
        Cmd::Oracle { burn_in, points, min_inside, max_gap } => Command::Oracle { burn_in, points, min_inside, max_gap },
        Cmd::Verify { cap, scan_grid, scan_cap } => Command::Verify { cap, scan_grid, scan_cap },
        Cmd::Exceptional { plan, target, finiteness_cap, check_triangles } => {
            Command::Exceptional { plan, target, finiteness_cap, check_triangles }
        }
        Cmd::Measures { points, tol, ks_max } => Command::Measures { points, tol, ks_max },
        Cmd::Plot { cap, burn_in, points } => Command::Plot { cap, burn_in, points },
        Cmd::Replay { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {config}"))?;
            return serde_json::from_str(text.trim()).with_context(|| format!("parsing {config}"));
        }
    };
    let seed = match std::env::var("ABCF_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("ABCF_SEED={v:?} is not an unsigned integer"))?,
        Err(_) => c.seed,
    };
    let default_format = if matches!(command, Command::Plot { .. }) { Format::Svg } else { Format::Json };
    Ok(RunConfig {
        command,
        a: c.a,
        b: c.b,
        preset: c.preset,
        mode: c.mode,
        seed,
        format: c.format.unwrap_or(default_format),
        window: parse_window(&c.window)?,
        out: c.out,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    eprintln!("config: {}", cfg.to_json());
    let outcome = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.artifact).with_context(|| format!("writing {path}")),
        None => {
            print!("{}", outcome.artifact);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if outcome.verified {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed ({})", cfg.command.name());
        ExitCode::from(2)
    }
}
