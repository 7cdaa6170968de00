//! `cpnet` — command-line front-end for CP-net enrichment.
//!
//! Exit codes: 0 success/pass, 1 domain failure (validation violations,
//! constraint violations, rejected cycles, suite failures), 2 usage, I/O, or
//! parse errors. Net and report data goes to standard output; diagnostics and
//! the optional `--trace` stream go to standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cpnet::merge::{enrich, CyclePolicy};
use cpnet::model::CpNet;
use cpnet::oracle::{check_enrichment, property_suite, GeneratorParams};
use cpnet::trace::{parse_trace, render_trace};
use cpnet::unfold::{fold_net, unfold_net};

#[derive(Parser)]
#[command(
    name = "cpnet",
    version,
    about = "Enrich CP-nets by asymmetric merging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnCycle {
    Warn,
    Reject,
}

#[derive(Subcommand)]
enum Command {
    /// Enrich an initial net with every non-conflicting preference of a
    /// reference net
    Enrich {
        /// The initial net (its preferences are never overwritten)
        initial: PathBuf,
        /// The reference net to absorb
        reference: PathBuf,
        /// Write the enriched net here instead of standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// What to do when the enriched net turns out cyclic
        #[arg(long, value_enum, default_value = "warn")]
        on_cycle: OnCycle,
        /// Write the merge trace to standard error
        #[arg(long)]
        trace: bool,
        /// Write the merge trace to a file
        #[arg(long, value_name = "PATH")]
        trace_file: Option<PathBuf>,
    },
    /// Validate a net; prints one violation per line
    Validate { net: PathBuf },
    /// Expand independent relations into explicitly conditioned ones
    Unfold {
        net: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compress fully covered conditioned relations back to independent ones
    Fold {
        net: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the sanctioned facts of the unfolded net, one per line
    Facts {
        net: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify an enrichment result and its trace against both guarantees
    Check {
        initial: PathBuf,
        reference: PathBuf,
        result: PathBuf,
        /// Trace log written by `enrich --trace-file`
        #[arg(long, value_name = "PATH")]
        trace_file: PathBuf,
    },
    /// Run the randomized property suite
    Proptest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 4)]
        features: usize,
        #[arg(long, default_value_t = 2)]
        domain_min: usize,
        #[arg(long, default_value_t = 4)]
        domain_max: usize,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 0.15)]
        indifference: f64,
    },
}

/// A failed command: message for standard error plus the exit code class.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("cpnet: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Enrich {
            initial,
            reference,
            output,
            on_cycle,
            trace,
            trace_file,
        } => run_enrich(
            &initial,
            &reference,
            output.as_deref(),
            on_cycle,
            trace,
            trace_file.as_deref(),
        ),
        Command::Validate { net } => run_validate(&net),
        Command::Unfold { net, output } => {
            run_transform(&net, output.as_deref(), Transform::Unfold)
        }
        Command::Fold { net, output } => run_transform(&net, output.as_deref(), Transform::Fold),
        Command::Facts { net, output } => run_facts(&net, output.as_deref()),
        Command::Check {
            initial,
            reference,
            result,
            trace_file,
        } => run_check(&initial, &reference, &result, &trace_file),
        Command::Proptest {
            seed,
            trials,
            features,
            domain_min,
            domain_max,
            density,
            indifference,
        } => run_proptest(
            GeneratorParams {
                feature_count: features,
                domain_size: (domain_min, domain_max),
                relation_density: density,
                indifference_probability: indifference,
                seed,
            },
            trials,
        ),
    }
}

fn read_net(path: &Path) -> Result<CpNet, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    cpnet::parse(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Fully builds the payload first, then writes it, so a failure never leaves
/// a partial output file behind.
fn write_output(target: Option<&Path>, payload: &str) -> Result<(), Failure> {
    match target {
        Some(path) => {
            fs::write(path, payload).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn run_enrich(
    initial_path: &Path,
    reference_path: &Path,
    output: Option<&Path>,
    on_cycle: OnCycle,
    trace_to_stderr: bool,
    trace_file: Option<&Path>,
) -> Result<u8, Failure> {
    let initial = read_net(initial_path)?;
    let reference = read_net(reference_path)?;
    let policy = match on_cycle {
        OnCycle::Warn => CyclePolicy::Warn,
        OnCycle::Reject => CyclePolicy::Reject,
    };
    // validation failures and rejected cycles are all domain failures
    let (result, trace) =
        enrich(&initial, &reference, policy).map_err(|e| Failure::domain(e.to_string()))?;
    let payload = cpnet::serialize(&result)
        .map_err(|e| Failure::domain(format!("enriched net failed validation: {e}")))?;
    let trace_text = render_trace(&trace);
    if let Some(path) = trace_file {
        fs::write(path, &trace_text)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    }
    if trace_to_stderr {
        eprint!("{trace_text}");
    }
    write_output(output, &payload)?;
    Ok(0)
}

fn run_validate(path: &Path) -> Result<u8, Failure> {
    let net = read_net(path)?;
    let report = net.validate();
    if report.is_empty() {
        Ok(0)
    } else {
        println!("{report}");
        Ok(1)
    }
}

enum Transform {
    Unfold,
    Fold,
}

fn run_transform(path: &Path, output: Option<&Path>, kind: Transform) -> Result<u8, Failure> {
    let net = read_net(path)?;
    let transformed = match kind {
        Transform::Unfold => unfold_net(&net),
        Transform::Fold => fold_net(&net),
    }
    .map_err(|e| Failure::domain(e.to_string()))?;
    let payload = cpnet::serialize(&transformed).map_err(|e| Failure::domain(e.to_string()))?;
    write_output(output, &payload)?;
    Ok(0)
}

fn run_facts(path: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let net = read_net(path)?;
    let unfolded = unfold_net(&net).map_err(|e| Failure::domain(e.to_string()))?;
    let facts = unfolded
        .fact_set()
        .map_err(|e| Failure::domain(e.to_string()))?;
    let mut lines: Vec<String> = facts.iter().map(ToString::to_string).collect();
    lines.sort();
    let mut payload = lines.join("\n");
    if !payload.is_empty() {
        payload.push('\n');
    }
    write_output(output, &payload)?;
    Ok(0)
}

fn run_check(
    initial_path: &Path,
    reference_path: &Path,
    result_path: &Path,
    trace_path: &Path,
) -> Result<u8, Failure> {
    let initial = read_net(initial_path)?;
    let reference = read_net(reference_path)?;
    let result = read_net(result_path)?;
    let trace_text = fs::read_to_string(trace_path)
        .map_err(|e| Failure::io(format!("{}: {e}", trace_path.display())))?;
    let trace = parse_trace(&trace_text)
        .map_err(|e| Failure::io(format!("{}: {e}", trace_path.display())))?;
    let report = check_enrichment(&initial, &reference, &result, &trace)
        .map_err(|e| Failure::domain(e.to_string()))?;
    print!("{report}");
    if report.passed() {
        println!();
        Ok(0)
    } else {
        Ok(1)
    }
}

fn run_proptest(params: GeneratorParams, trials: u64) -> Result<u8, Failure> {
    let summary = property_suite(&params, trials).map_err(|e| Failure::io(e.to_string()))?;
    print!("{summary}");
    Ok(if summary.passed() { 0 } else { 1 })
}
