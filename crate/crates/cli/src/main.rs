use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use mhdrt_cli::{emit, parse_config, run, to_json_value, CliError, Format, Metadata, ResultBundle, Subcommand};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(
    name = "mhdrt",
    version,
    about = "Linear stability of a two-layer MHD Rayleigh-Taylor configuration"
)]
struct Cli {
    /// Analysis to run
    #[arg(value_enum)]
    command: Subcommand,

    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Worker threads (falls back to MHDRT_THREADS)
    #[arg(long)]
    threads: Option<usize>,

    /// Seed for sampled initial data and oracles (overrides ivp.seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MHDRT_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Config {
            path: "MHDRT_THREADS".into(),
            reason: format!("expected a positive integer, got {v:?}"),
        }),
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let started = now_ms();
    let text = std::fs::read_to_string(&cli.config).map_err(|source| CliError::Io {
        path: cli.config.display().to_string(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(CliError::Config {
                path: "threads".into(),
                reason: "must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Unsupported(format!("thread pool: {e}")))?;
    }
    let seed = cli.seed.or(cfg.ivp.as_ref().map(|i| i.seed)).unwrap_or(0);
    let payload = run(cli.command, &cfg, seed)?;
    let hash = Sha256::digest(to_json_value(&cfg)?.as_bytes());
    let bundle = ResultBundle {
        metadata: Metadata {
            subcommand: cli.command.as_str().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: format!("{hash:x}"),
            seed,
            n_upper: cfg.grid.n_upper,
            n_lower: cfg.grid.n_lower,
            threads: rayon::current_num_threads(),
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        },
        payload,
    };
    emit(&bundle, cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            });
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
