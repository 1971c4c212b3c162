use clap::{Parser, Subcommand, ValueEnum};
use gdnn_cli::experiments::{self, ExperimentError, TableConfig};
use gdnn_cli::io::{self, IoError};
use gdnn_core::bdsep::{self, BdsepError, SeparationOutcome};
use gdnn_core::gcpp::{self, ExchangeParams, GcppError, MisocpInstance, RelaxationOptions, Variant};
use gdnn_core::gdnn::{self, Evidence, GdnnError, MembershipResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "gdnn", version, about = "Generalized doubly nonnegative cone oracles and relaxations")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Membership and separation tolerance.
    #[arg(long, global = true, default_value_t = gdnn::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveVariant {
    Misocp,
    Sdp,
    Zvp,
    Nn,
    Bd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Zvp,
    Nn,
    Bd,
    Kzvp0,
    Knn,
}

#[derive(Subcommand)]
enum Command {
    /// Random MISOCP instance as JSON.
    Gen {
        #[arg(long)]
        n: usize,
    },
    /// Solve an instance or one of its relaxations.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        variant: SolveVariant,
        /// JSON with optional `relaxation` and `exchange` objects.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Test a symmetric matrix against a GDNN cone (exit 1 when outside).
    Membership {
        /// `nonneg:1,soc:3` style list or a JSON cone file.
        #[arg(long)]
        cone: String,
        /// JSON array of rows.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Hierarchy level for `knn`.
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Separate a matrix from N(K) (exit 1 when a cut is found).
    Separate {
        #[arg(long)]
        cone: String,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// TRS values of lifted random moment vectors.
    Fig1 {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Print only the summary.
        #[arg(long)]
        summary: bool,
    },
    /// Relaxation value and time sweep as CSV (or JSON with `--json`).
    Tables {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        instances: usize,
        #[arg(long, value_delimiter = ',', value_enum, default_value = "nn,zvp,bd,sdp")]
        variants: Vec<Relaxation>,
        #[arg(long, default_value_t = 5)]
        nn_cap: usize,
        #[arg(long, default_value_t = 30)]
        cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// One tied random moment vector (exit 1 when rejected).
    M44 {
        /// Also count accepted draws among this many from one stream.
        #[arg(long)]
        rate: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Relaxation {
    Nn,
    Zvp,
    Bd,
    Sdp,
}

impl From<Relaxation> for Variant {
    fn from(r: Relaxation) -> Variant {
        match r {
            Relaxation::Nn => Variant::Nn,
            Relaxation::Zvp => Variant::Zvp,
            Relaxation::Bd => Variant::Bd,
            Relaxation::Sdp => Variant::Sdp,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Gcpp(#[from] GcppError),
    #[error(transparent)]
    Gdnn(#[from] GdnnError),
    #[error(transparent)]
    Separation(#[from] BdsepError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Gcpp(GcppError::Solver { .. } | GcppError::IterationCap(_)) | CliError::Gdnn(GdnnError::Solver(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct SolveParams {
    relaxation: RelaxationOptions,
    exchange: ExchangeParams,
}

fn evidence_json(e: &Evidence) -> Value {
    match e {
        Evidence::Checked { margin } => json!({ "kind": "checked", "margin": margin }),
        Evidence::Violation { condition, value } => json!({ "kind": "violation", "condition": condition, "value": value }),
        Evidence::Decomposition { p, t, n } => {
            json!({ "kind": "decomposition", "p": io::matrix_json(p), "t": t, "n": io::matrix_json(n) })
        }
        Evidence::Gram(g) => json!({ "kind": "gram", "gram": io::matrix_json(&g.gram), "residual": g.residual, "min_eigenvalue": g.min_eigenvalue }),
        Evidence::Moments(y) => json!({ "kind": "moments", "y": y }),
        Evidence::PhaseOne { margin } => json!({ "kind": "phase_one", "margin": margin }),
        Evidence::SosWitness { witness, value } => json!({ "kind": "sos_witness", "witness": witness, "value": value }),
        Evidence::Cut(c) => cut_json(c),
    }
}

fn cut_json(c: &bdsep::Cut) -> Value {
    json!({ "kind": "cut", "source": c.source, "violation": c.violation, "value": c.value, "witness": c.witness, "h": io::matrix_json(&c.h) })
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen { n } => {
            let inst = experiments::generate_instance(*n, cli.seed)?;
            io::emit(out, &pretty(&inst))?;
            Ok(0)
        }
        Command::Solve { instance, variant, params } => {
            let inst: MisocpInstance = io::read_json(instance)?;
            let params: SolveParams = match params {
                Some(p) => io::read_json(p)?,
                None => SolveParams::default(),
            };
            let t = Instant::now();
            let report = match variant {
                SolveVariant::Misocp => {
                    let s = gcpp::misocp_bruteforce(&inst, &params.relaxation.solver)?;
                    let status = if s.failed_branches > 0 { "partial" } else if s.x.is_some() { "optimal" } else { "infeasible" };
                    json!({ "value": s.value, "status": status, "time": t.elapsed().as_secs_f64(), "x": s.x, "branches": s.branches, "failed_branches": s.failed_branches })
                }
                SolveVariant::Bd => {
                    let g = gcpp::burer_reformulate(&inst)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let r = gcpp::solve_bd_exchange(&g, &params.exchange, &mut rng)?;
                    json!({ "value": r.value, "status": "optimal", "time": t.elapsed().as_secs_f64(), "kkt": r.kkt, "solves": r.solves, "trace": r.trace })
                }
                v => {
                    let variant = match v {
                        SolveVariant::Sdp => Variant::Sdp,
                        SolveVariant::Zvp => Variant::Zvp,
                        _ => Variant::Nn,
                    };
                    let g = gcpp::burer_reformulate(&inst)?;
                    let r = gcpp::solve_relaxation(&g, variant, &params.relaxation)?;
                    json!({ "value": r.value, "status": r.status, "time": t.elapsed().as_secs_f64(), "kkt": r.kkt, "iterations": r.iterations })
                }
            };
            io::emit(out, &pretty(&report))?;
            Ok(0)
        }
        Command::Membership { cone, matrix, kind, level } => {
            let spec = io::parse_cone(cone)?;
            let x = io::read_matrix(matrix)?;
            let r: MembershipResult = match kind {
                Kind::Zvp => gdnn::zvp_membership(&spec, &x, cli.tol)?,
                Kind::Nn => gdnn::nn_membership(&spec, &x, cli.tol)?,
                Kind::Bd => gdnn::bd_membership(&spec, &x, cli.tol)?,
                Kind::Kzvp0 => gdnn::kzvp0_membership(&spec, &x, cli.tol)?,
                Kind::Knn => gdnn::knn_membership(&spec, &x, *level, cli.tol)?,
            };
            io::emit(out, &pretty(&json!({ "member": r.member, "evidence": evidence_json(&r.evidence) })))?;
            Ok(if r.member { 0 } else { 1 })
        }
        Command::Separate { cone, matrix, gamma } => {
            let spec = io::parse_cone(cone)?;
            let x = io::read_matrix(matrix)?;
            match bdsep::separate(&spec, &x, *gamma)? {
                SeparationOutcome::Inside => {
                    io::emit(out, &pretty(&json!({ "inside": true })))?;
                    Ok(0)
                }
                SeparationOutcome::Cut(c) => {
                    io::emit(out, &pretty(&json!({ "inside": false, "cut": cut_json(&c) })))?;
                    Ok(1)
                }
            }
        }
        Command::Fig1 { count, summary } => {
            let report = experiments::run_fig1(*count, cli.seed)?;
            let text = if *summary { pretty(&report.summary) } else { pretty(&report) };
            io::emit(out, &text)?;
            Ok(0)
        }
        Command::Tables { n, instances, variants, nn_cap, cap, json } => {
            if n.is_empty() || *instances == 0 {
                return Err(CliError::Usage("need at least one size and one instance".into()));
            }
            let cfg = TableConfig {
                ns: n.clone(),
                instances: *instances,
                variants: variants.iter().map(|&v| v.into()).collect(),
                nn_cap: *nn_cap,
                cap: *cap,
                seed: cli.seed,
                workers: cli.workers,
                ..TableConfig::default()
            };
            let report = experiments::run_tables(&cfg);
            let text = if *json { pretty(&report) } else { experiments::tables_csv(&report.records)? };
            io::emit(out, &text)?;
            eprintln!("{}", pretty(&report.summary));
            Ok(0)
        }
        Command::M44 { rate } => {
            let rate = rate.map(|k| json!({ "draws": k, "accepted": experiments::m44_accepted(k, cli.seed) }));
            match experiments::generate_m44_vector(cli.seed) {
                Ok(y) => {
                    io::emit(out, &pretty(&json!({ "accepted": true, "y": y, "acceptance": rate })))?;
                    Ok(0)
                }
                Err(ExperimentError::Rejected { lambda_min }) => {
                    io::emit(out, &pretty(&json!({ "accepted": false, "lambda_min": lambda_min, "acceptance": rate })))?;
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
