//! Command-line experiment runner.
//!
//! Exit codes: 0 when every checked bound is satisfied, 2 when a bound is
//! violated, 1 on configuration or scheme errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use qclab_cli::{list_experiments, run, validate, ExperimentConfig, ExperimentReport};

#[derive(Parser)]
#[command(name = "qclab", about = "Numerical experiments on combiners for quantum-cryptographic primitives", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random choice in the experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report destination: a file, or a directory for append-only JSON lines.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Numerical tolerance applied to the soft bound checks.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Print only the pass/fail summary line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment by registry name.
    Run {
        /// One of the names printed by `qclab list`.
        experiment: Option<String>,
        /// Extra parameters as key=value pairs (numbers parse as numbers).
        #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// List the registered experiments.
    List,
    /// Validate a config without running it.
    Validate,
    /// Commitment experiments.
    Commit {
        #[command(subcommand)]
        action: CommitAction,
    },
    /// One-way state generator experiments.
    Owsg {
        #[command(subcommand)]
        action: OwsgAction,
    },
    /// Quantum money experiments.
    Money {
        #[command(subcommand)]
        action: MoneyAction,
    },
    /// Unclonable encryption experiments.
    Unclone {
        #[command(subcommand)]
        action: UncloneAction,
    },
    /// Plaintext-expansion experiments.
    Expand {
        #[command(subcommand)]
        action: ExpandAction,
    },
}

#[derive(Args)]
struct SchemeArg {
    /// Scheme name or path to a scheme JSON file.
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Subcommand)]
enum CommitAction {
    /// Hiding/binding metrics of one commitment.
    Eval(SchemeArg),
    /// Flavor conversion metrics.
    Convert(SchemeArg),
    /// Binding amplification at a given lambda.
    Amplify {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        lambda: Option<u64>,
    },
    /// XOR combiner over a comma-separated scheme list.
    Combine {
        #[arg(long)]
        schemes: Option<String>,
        /// Amplify each component first when nonzero.
        #[arg(long)]
        lambda: Option<u64>,
    },
}

#[derive(Subcommand)]
enum OwsgAction {
    Eval(SchemeArg),
    /// Gentle transform over a randomized corpus.
    Transform {
        #[arg(long)]
        corpus: Option<u64>,
    },
    /// Parallel combiner factorization check.
    Combine {
        #[arg(long)]
        n: Option<u64>,
    },
    /// Registry-backed universal wrapper.
    Universal {
        #[arg(long)]
        lambda: Option<u64>,
    },
}

#[derive(Subcommand)]
enum MoneyAction {
    /// Mint-quality Check concentration.
    Check {
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Per-trial acceptance probability of the inner scheme.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Correctness transform Monte-Carlo floor.
    Transform {
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Parallel combiner over transformed candidates.
    Combine {
        #[arg(long)]
        schemes: Option<String>,
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Cloning game value for a scheme/attack pair.
    CloneGame {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        attack: Option<String>,
    },
}

#[derive(Subcommand)]
enum UncloneAction {
    Eval(SchemeArg),
    Transform {
        #[arg(long)]
        corpus: Option<u64>,
    },
    Normalize(SchemeArg),
    Combine {
        #[arg(long)]
        components: Option<String>,
    },
    Game {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        attack: Option<String>,
        #[arg(long)]
        m0: Option<u64>,
        #[arg(long)]
        m1: Option<u64>,
        #[arg(long)]
        iters: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ExpandAction {
    Roundtrip {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        keys: Option<u64>,
    },
    Hybrid {
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        m0: Option<String>,
        #[arg(long)]
        m1: Option<String>,
    },
}

fn parse_param_value(raw: &str) -> Value {
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return Value::from(f);
    }
    Value::from(raw)
}

fn set(params: &mut BTreeMap<String, Value>, key: &str, value: Option<impl Into<Value>>) {
    if let Some(v) = value {
        params.insert(key.to_string(), v.into());
    }
}

fn command_request(command: &Command) -> (Option<String>, BTreeMap<String, Value>) {
    let mut params = BTreeMap::new();
    let name = match command {
        Command::List | Command::Validate => None,
        Command::Run {
            experiment,
            params: raw,
        } => {
            for pair in raw {
                if let Some((k, v)) = pair.split_once('=') {
                    params.insert(k.to_string(), parse_param_value(v));
                }
            }
            experiment.clone()
        }
        Command::Commit { action } => Some(match action {
            CommitAction::Eval(s) => {
                set(&mut params, "scheme", s.scheme.clone());
                "commit-eval".to_string()
            }
            CommitAction::Convert(s) => {
                set(&mut params, "scheme", s.scheme.clone());
                "commit-convert".to_string()
            }
            CommitAction::Amplify { scheme, lambda } => {
                set(&mut params, "scheme", scheme.scheme.clone());
                set(&mut params, "lambda", *lambda);
                "commit-amplify".to_string()
            }
            CommitAction::Combine { schemes, lambda } => {
                set(&mut params, "schemes", schemes.clone());
                set(&mut params, "lambda", *lambda);
                "commit-combine".to_string()
            }
        }),
        Command::Owsg { action } => Some(match action {
            OwsgAction::Eval(s) => {
                set(&mut params, "scheme", s.scheme.clone());
                "owsg-eval".to_string()
            }
            OwsgAction::Transform { corpus } => {
                set(&mut params, "corpus", *corpus);
                "owsg-transform".to_string()
            }
            OwsgAction::Combine { n } => {
                set(&mut params, "n", *n);
                "owsg-combine".to_string()
            }
            OwsgAction::Universal { lambda } => {
                set(&mut params, "lambda", *lambda);
                "owsg-universal".to_string()
            }
        }),
        Command::Money { action } => Some(match action {
            MoneyAction::Check { lambda, trials, p } => {
                set(&mut params, "lambda", *lambda);
                set(&mut params, "trials", *trials);
                set(&mut params, "p", *p);
                "money-check".to_string()
            }
            MoneyAction::Transform { lambda, trials, p } => {
                set(&mut params, "lambda", *lambda);
                set(&mut params, "trials", *trials);
                set(&mut params, "p", *p);
                "money-transform".to_string()
            }
            MoneyAction::Combine {
                schemes,
                lambda,
                trials,
            } => {
                set(&mut params, "schemes", schemes.clone());
                set(&mut params, "lambda", *lambda);
                set(&mut params, "trials", *trials);
                "money-combine".to_string()
            }
            MoneyAction::CloneGame { scheme, attack } => {
                set(&mut params, "scheme", scheme.scheme.clone());
                set(&mut params, "attack", attack.clone());
                "money-clone".to_string()
            }
        }),
        Command::Unclone { action } => Some(match action {
            UncloneAction::Eval(s) => {
                set(&mut params, "scheme", s.scheme.clone());
                "unclone-eval".to_string()
            }
            UncloneAction::Transform { corpus } => {
                set(&mut params, "corpus", *corpus);
                "unclone-transform".to_string()
            }
            UncloneAction::Normalize(s) => {
                set(&mut params, "scheme", s.scheme.clone());
                "unclone-normalize".to_string()
            }
            UncloneAction::Combine { components } => {
                set(&mut params, "components", components.clone());
                "unclone-combine".to_string()
            }
            UncloneAction::Game {
                scheme,
                attack,
                m0,
                m1,
                iters,
            } => {
                set(&mut params, "scheme", scheme.scheme.clone());
                set(&mut params, "attack", attack.clone());
                set(&mut params, "m0", *m0);
                set(&mut params, "m1", *m1);
                set(&mut params, "iters", *iters);
                "unclone-game".to_string()
            }
        }),
        Command::Expand { action } => Some(match action {
            ExpandAction::Roundtrip { n, keys } => {
                set(&mut params, "n", *n);
                set(&mut params, "keys", *keys);
                "expand-roundtrip".to_string()
            }
            ExpandAction::Hybrid { trials, m0, m1 } => {
                set(&mut params, "trials", *trials);
                set(&mut params, "m0", m0.clone());
                set(&mut params, "m1", m1.clone());
                "expand-hybrid".to_string()
            }
        }),
    };
    (name, params)
}

fn write_report(report: &ExperimentReport, out: &Path) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    if out.is_dir() {
        // Append-only JSON lines inside a directory target.
        use std::io::Write;
        let path = out.join("reports.jsonl");
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let line = serde_json::to_string(report).expect("report serializes");
        writeln!(file, "{line}")?;
    } else {
        std::fs::write(out, json)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // Precedence: config file fields, overridden by command-line flags.
    let mut config = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str::<ExperimentConfig>(&t).map_err(|e| e.to_string()))
        {
            Ok(parsed) => config = parsed,
            Err(e) => {
                eprintln!("error: failed to read config {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
    }
    let (name, params) = command_request(&cli.command);
    if let Some(name) = name {
        config.experiment = name;
    }
    for (k, v) in params {
        config.params.insert(k, v);
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(tol) = cli.tol {
        config.params.insert("tol".to_string(), Value::from(tol));
    }
    let out = cli.out.clone().or_else(|| config.out.clone().map(PathBuf::from));

    match &cli.command {
        Command::List => {
            for name in list_experiments() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Validate => {
            let diags = validate(&config);
            if diags.is_empty() {
                println!("ok");
                return ExitCode::SUCCESS;
            }
            for d in &diags {
                println!("{d}");
            }
            return ExitCode::from(1);
        }
        _ => {}
    }

    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    if !cli.quiet {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    }
    let verdict = if report.all_satisfied() { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {} seed={} bounds={}/{}",
        report.experiment,
        report.seed,
        report.bounds.iter().filter(|b| b.satisfied).count(),
        report.bounds.len()
    );

    if let Some(out) = out {
        if let Err(e) = write_report(&report, &out) {
            eprintln!("error: failed to write report: {e}");
            return ExitCode::from(1);
        }
    }

    if report.all_satisfied() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
