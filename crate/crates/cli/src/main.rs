use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isoschatten_core::harness::{
    run_and_write, Experiment, ExperimentConfig, ExperimentReport, Exponent, HarnessError,
    Overrides,
};

/// Equal-measure spectral comparisons for convolution operators with
/// radially decreasing kernels.
#[derive(Debug, Parser)]
#[command(name = "isoschatten", version)]
struct Cli {
    /// rfk, schatten, triangle, steiner, bll, zeta or convergence
    experiment: String,
    /// JSON experiment config; without it, --kernel and --domain are required
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the CSV files
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated resolutions, ascending
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,
    /// Comma-separated Schatten exponents; `inf` for the operator norm
    #[arg(long = "p-list", value_delimiter = ',')]
    p_list: Option<Vec<String>>,
    /// Kernel, e.g. `gauss:s=1` or `peierls:b=1`
    #[arg(long)]
    kernel: Option<String>,
    /// Domain, e.g. `ball:d=2,r=1`; repeat for several
    #[arg(long = "domain")]
    domains: Vec<String>,
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, HarnessError> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let kernel = cli.kernel.clone().ok_or_else(|| {
                HarnessError::Config("--kernel is required without --config".into())
            })?;
            ExperimentConfig::new(experiment, kernel, vec![])
        }
    };
    let p_list = cli
        .p_list
        .map(|ps| {
            ps.iter()
                .map(|p| p.parse::<Exponent>())
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    config.apply(Overrides {
        experiment: Some(experiment),
        seed: cli.seed,
        resolutions: cli.resolution,
        p_list,
        kernel: cli.kernel,
        domains: (!cli.domains.is_empty()).then_some(cli.domains),
        output: cli.output,
    });
    Ok(config)
}

fn summarize(report: &ExperimentReport) {
    for v in &report.verdicts {
        println!(
            "{} {}  margin={:.6e} budget={:.6e}{}",
            if v.holds { "HOLDS" } else { "FAILS" },
            v.claim,
            v.margin,
            v.error_budget,
            if v.flags.is_empty() {
                String::new()
            } else {
                format!(" [{}]", v.flags.join(", "))
            }
        );
    }
    for c in &report.checks {
        println!(
            "{} {}  value={:.6e} limit={:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    println!("status: {:?}", report.status);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|config| {
        let outcome = run_and_write(&config)?;
        Ok((outcome, config.output))
    });
    match result {
        Ok((outcome, output)) => {
            summarize(&outcome.report);
            if let Some(dir) = output {
                println!("wrote {}", dir.join("report.json").display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
