use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use gwp_core::data::{parse_trial_tsv, Direction, EndpointSpec, Schema};
use gwp_core::inference::{Critical, Scale};
use gwp_core::oracle::{self, OracleOptions, DEFAULT_SEED};
use gwp_core::report::{analyze, AnalysisOptions, Provenance};
use gwp_core::sim::{run_scenario, ScenarioConfig, ScenarioMetrics};
use gwp_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_CONVERGENCE: u8 = 5;
const EXIT_ORACLE: u8 = 6;

#[derive(Parser)]
#[command(
    name = "gwp",
    version,
    about = "Global win probability analysis for cluster randomized trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the global win probability from a tab-delimited trial file.
    Analyze(AnalyzeArgs),
    /// Run replicated simulation scenarios.
    Simulate(SimulateArgs),
    /// Run the randomized equivalence self-checks.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleChoice {
    Identity,
    Logit,
    Both,
}

impl ScaleChoice {
    fn scales(self) -> Vec<Scale> {
        match self {
            ScaleChoice::Identity => vec![Scale::Identity],
            ScaleChoice::Logit => vec![Scale::Logit],
            ScaleChoice::Both => vec![Scale::Identity, Scale::Logit],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CritChoice {
    T,
    Z,
}

impl From<CritChoice> for Critical {
    fn from(c: CritChoice) -> Self {
        match c {
            CritChoice::T => Critical::StudentT,
            CritChoice::Z => Critical::NormalZ,
        }
    }
}

/// `name:column:direction[:weight]`
#[derive(Clone, Debug)]
struct EndpointArg {
    name: String,
    column: String,
    direction: Direction,
    weight: f64,
}

fn parse_endpoint(s: &str) -> Result<EndpointArg, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) || parts[..3].iter().any(|p| p.is_empty()) {
        return Err("expected name:column:direction[:weight]".into());
    }
    let direction = parts[2].parse::<Direction>().map_err(|e| e.to_string())?;
    let weight = match parts.get(3) {
        Some(w) => w.parse::<f64>().map_err(|_| format!("weight `{w}` is not a number"))?,
        None => 1.0,
    };
    Ok(EndpointArg {
        name: parts[0].into(),
        column: parts[1].into(),
        direction,
        weight,
    })
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "arm")]
    arm_col: String,
    #[arg(long, default_value = "cluster")]
    cluster_col: String,
    #[arg(long, default_value = "id")]
    id_col: String,
    /// Repeatable; priority order is the order given.
    #[arg(long = "endpoint", value_parser = parse_endpoint, required = true)]
    endpoints: Vec<EndpointArg>,
    #[arg(long, default_value = "0")]
    control_label: String,
    #[arg(long, default_value = "1")]
    treatment_label: String,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value = "both")]
    scale: ScaleChoice,
    #[arg(long, value_enum, default_value = "t")]
    crit: CritChoice,
    /// Critical values for the win difference and win odds intervals.
    #[arg(long, value_enum, default_value = "z")]
    transform_crit: CritChoice,
    /// Replace the C - 2 degrees of freedom.
    #[arg(long)]
    df_override: Option<i64>,
    /// Recorded in the provenance block; the analysis itself is deterministic.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append the full-precision `key = value` block.
    #[arg(long)]
    machine: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file of `key = value` lines; defaults apply otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override one configuration key (repeatable), e.g. `--set clusters=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Expand a factorial grid (repeatable), e.g. `--grid theta=0.5,0.6`.
    /// The last grid key varies fastest.
    #[arg(long = "grid", value_name = "KEY=V1,V2,...")]
    grids: Vec<String>,
    /// Write the metrics table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => EXIT_IO,
            Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidDf(_) => EXIT_CONFIG,
            Error::Unattainable { .. } | Error::NotPsd(_) => EXIT_CONFIG,
            Error::NonConvergence { .. } | Error::Degenerate(_) | Error::TooManyFailures { .. } => {
                EXIT_CONVERGENCE
            }
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let bytes = fs::read(&a.input).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", a.input.display()),
    })?;
    let digest: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    let columns: Vec<&str> = a.endpoints.iter().map(|e| e.column.as_str()).collect();
    let mut schema = Schema::new(&a.arm_col, &a.cluster_col, &a.id_col, &columns);
    schema.control_label = a.control_label.clone();
    schema.treatment_label = a.treatment_label.clone();
    let specs = a
        .endpoints
        .iter()
        .map(|e| EndpointSpec::new(e.name.clone(), e.direction, e.weight))
        .collect();
    let (data, validation) = parse_trial_tsv(&bytes, &schema, specs)?;
    if validation.dropped > 0 {
        eprintln!(
            "dropped {} of {} rows with missing cells",
            validation.dropped, validation.total
        );
        for issue in validation.issues.iter().take(10) {
            eprintln!("  line {}: {}", issue.line, issue.reason);
        }
    }

    let opts = AnalysisOptions {
        level: a.level,
        scales: a.scale.scales(),
        critical: a.crit.into(),
        df_override: a.df_override,
        transform_critical: a.transform_crit.into(),
        ..AnalysisOptions::default()
    };
    let provenance = Provenance {
        input: a.input.display().to_string(),
        digest: Some(digest),
        seed: Some(a.seed),
    };
    let report = analyze(&data, &opts, provenance)?;
    let mut text = report.to_text();
    if a.machine {
        text.push('\n');
        text.push_str(&report.to_machine());
    }
    print!("{text}");
    if let Some(path) = &a.out {
        write_output(path, &text)?;
    }
    Ok(())
}

/// Cartesian product of the grid axes, last axis fastest.
fn expand_grid(grids: &[String]) -> Result<Vec<Vec<(String, String)>>, Failure> {
    let mut cells: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for g in grids {
        let (key, values) = g
            .split_once('=')
            .ok_or_else(|| config_failure(format!("grid `{g}` is not KEY=V1,V2,...")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(config_failure(format!("grid `{key}` has no values")));
        }
        cells = cells
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |v| {
                    let mut next = cell.clone();
                    next.push((key.trim().to_string(), v.to_string()));
                    next
                })
            })
            .collect();
    }
    Ok(cells)
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let mut base = match &a.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| config_failure(format!("override `{o}` is not KEY=VALUE")))?;
        base.set(k.trim(), v.trim())?;
    }
    if let Some(r) = a.reps {
        base.reps = r;
    }
    if let Some(s) = a.seed {
        base.seed = s;
    }

    let scenarios = expand_grid(&a.grids)?
        .into_iter()
        .map(|cell| {
            let mut cfg = base.clone();
            for (k, v) in &cell {
                cfg.set(k, v)?;
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| config_failure(format!("cannot start thread pool: {e}")))?;

    let mut table = ScenarioMetrics::tsv_header(&base.scales);
    table.push('\n');
    for (i, cfg) in scenarios.iter().enumerate() {
        eprintln!(
            "scenario {}/{}: clusters {} theta {} omega12 {} reps {}",
            i + 1,
            scenarios.len(),
            cfg.clusters,
            cfg.true_theta(),
            cfg.correlations.omega12,
            cfg.reps
        );
        let metrics = pool.install(|| run_scenario(cfg))?;
        table.push_str(&metrics.tsv_row(cfg));
        table.push('\n');
    }
    match &a.out {
        Some(path) => write_output(path, &table)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(table.as_bytes()).map_err(|e| Failure {
                code: EXIT_IO,
                message: format!("cannot write to stdout: {e}"),
            })?;
        }
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<(), Failure> {
    let opts = OracleOptions {
        seed: a.seed,
        inject_fault: a.inject_fault,
        ..OracleOptions::default()
    };
    println!("seed = {}", opts.seed);
    let results = oracle::run_all(&opts)?;
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure {
            code: EXIT_ORACLE,
            message: format!("{failed} oracle suite(s) failed"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::OracleCheck(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
