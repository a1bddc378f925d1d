use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mbm_cli::config::ExperimentConfig;
use mbm_cli::pipelines::run_experiment;
use mbm_cli::report::{CheckRow, ReportRecord};
use mbm_cli::suites::{registry, run_suite};
use std::path::PathBuf;

/// Simulation and verification laboratory for multifractional Brownian
/// motion: samplers, regularity and dimension estimators, and a registry of
/// quantitative verification suites.
#[derive(Parser)]
#[command(name = "mbm-lab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the configured one.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Directory for CSV and JSON report output.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads for ensemble tasks.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one path and write it as (t, x) rows.
    Simulate,
    /// Estimate pointwise and local regularity exponents at the probe times.
    Exponents,
    /// Estimate the 2-microlocal frontier at the first probe time.
    Frontier,
    /// Estimate local graph box dimensions at the probe times.
    Boxdim,
    /// Estimate local parabolic box dimensions at the probe times.
    Pboxdim,
    /// Estimate the level-set box dimension per seed.
    Levelset,
    /// Estimate conditional-variance decay slopes at the probe times.
    Gauss,
    /// Run one named verification suite, or all of them.
    Verify {
        /// Suite name from the registry; omit to run every suite.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
    },
}

impl Command {
    fn pipeline(&self) -> Option<&'static str> {
        match self {
            Command::Simulate => Some("simulate"),
            Command::Exponents => Some("exponents"),
            Command::Frontier => Some("frontier"),
            Command::Boxdim => Some("boxdim"),
            Command::Pboxdim => Some("pboxdim"),
            Command::Levelset => Some("levelset"),
            Command::Gauss => Some("gauss"),
            Command::Verify { .. } => None,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Verify { suite } => verify(suite.as_deref(), &cli.out),
        cmd => {
            let pipeline = cmd.pipeline().expect("non-verify commands name a pipeline");
            let mut cfg = load_config(cli.config.as_deref())?;
            cfg.pipeline = pipeline.to_string();
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = run_experiment(&cfg, &cli.out, cli.workers)?;
            for row in &out.record.rows {
                println!("{}", row_line(row));
            }
            println!(
                "wrote {} and {}",
                out.csv_path.display(),
                out.report_path.display()
            );
            Ok(if out.record.all_pass() { 0 } else { 1 })
        }
    }
}

fn load_config(path: Option<&std::path::Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            Ok(ExperimentConfig::from_json(&text)?)
        }
    }
}

fn verify(suite: Option<&str>, out_dir: &std::path::Path) -> Result<i32> {
    let records: Vec<ReportRecord> = match suite {
        Some(name) => vec![run_suite(name)?],
        None => registry()
            .iter()
            .map(|s| s.run())
            .collect::<Result<Vec<_>>>()?,
    };
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut all_pass = true;
    for rec in &records {
        for row in &rec.rows {
            println!("  {}", row_line(row));
        }
        let verdict = if rec.all_pass() { "PASS" } else { "FAIL" };
        println!("{verdict} {}", rec.name);
        all_pass &= rec.all_pass();
        let path = out_dir.join(format!("{}.json", rec.name));
        std::fs::write(&path, rec.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn row_line(row: &CheckRow) -> String {
    format!(
        "[{}] {}: predicted {:.6e}, estimated {:.6e}, tolerance {:.6e}",
        if row.pass { "pass" } else { "FAIL" },
        row.name,
        row.predicted,
        row.estimated,
        row.tolerance
    )
}
