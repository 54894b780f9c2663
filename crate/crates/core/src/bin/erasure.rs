use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use erasure_core::harness::{
    emit_tables, parse_config_at, run_command, CommandKind, ExperimentConfig, Scale, DEFAULT_OUT_DIR, OUT_DIR_ENV,
    REPORT_FILE,
};

const COMMANDS: [&str; 8] = ["entropy", "convex-split", "protocol", "multiparty", "block", "rate", "converse", "suite"];

/// Catalytic erasure experiments: runs a configured command, writes a JSON-lines
/// report and CSV tables, and exits nonzero when any asserted check fails.
#[derive(Parser, Debug)]
#[command(name = "erasure", version)]
struct Cli {
    #[arg(value_parser = COMMANDS)]
    command: String,
    /// TOML experiment configuration (optional for `suite`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config `output`, then $ERASURE_OUT_DIR, then ./erasure-out].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "cap-dim")]
    cap_dim: Option<usize>,
    /// Suite size.
    #[arg(long, value_parser = ["quick", "full"])]
    scale: Option<String>,
}

fn load(cli: &Cli, command: CommandKind) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let cfg = parse_config_at(&text, base).map_err(|e| e.to_string())?;
            if cfg.command != command {
                return Err(format!(
                    "config {} is for command `{}`, not `{}`",
                    path.display(),
                    cfg.command.as_str(),
                    command.as_str()
                ));
            }
            cfg
        }
        None if command == CommandKind::Suite => ExperimentConfig::new(CommandKind::Suite),
        None => return Err(format!("command `{}` needs --config", command.as_str())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.caps.workers = w;
    }
    if let Some(d) = cli.cap_dim {
        cfg.caps.dim = d;
    }
    if let Some(s) = &cli.scale {
        cfg.suite.scale = if s == "full" { Scale::Full } else { Scale::Quick };
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    if let Some(o) = &cfg.output {
        return PathBuf::from(o);
    }
    match std::env::var(OUT_DIR_ENV) {
        Ok(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = CommandKind::parse(&cli.command).expect("clap restricts the command names");
    let cfg = match load(&cli, command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("erasure: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = out_dir(&cli, &cfg);
    let report = match run_command(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("erasure {}: {e}", command.as_str());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = report.write(&dir).and_then(|_| emit_tables(&report, &dir).map(|_| ())) {
        eprintln!("erasure: cannot write output to {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    for r in &report.runs {
        if let Some(e) = &r.error {
            eprintln!("FAIL {}: {e}", r.id);
        }
        for c in r.checks.iter().filter(|c| !c.ok) {
            eprintln!("FAIL {}: {} (lhs {:e}, rhs {:e})", r.id, c.name, c.lhs, c.rhs);
        }
    }
    let s = &report.summary;
    println!(
        "erasure {}: {} runs, {} passed, {} of {} checks failed, max violation {:e}; report {}",
        command.as_str(),
        s.runs,
        s.passed_runs,
        s.failed_checks,
        s.checks,
        s.max_violation,
        dir.join(REPORT_FILE).display()
    );
    ExitCode::from(report.exit_code() as u8)
}
