//! `distnorm`: seeded, reproducible verification runs for measurement
//! distinguishability norms, emitting JSON or CSV.
//!
//! Exit codes: 0 success, 1 validation error, 2 audit violation (a bound
//! check failed), 64 usage error, 65 malformed input file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use distnorm::bipartite::{
    chain_report, diagram_bound_rhs, hiding_pair, local_bias_lower_bound,
    local_uniform_second_moment, mc_local_uniform_bias, mc_local_uniform_moments,
    ppt_norm_uu_invariant, rank_hiding_bound, sep_l2_lower_bound, UUInvariantOp,
};
use distnorm::designs::{
    design_defect, design_moments, mub_design, qubit_sic_tetrahedron, sic_validate,
    two_design_bound_check, uniform_moment_audit, WeightedDesign,
};
use distnorm::info::{
    design_certainty_check, l1_inner_gap, mc_accessible_info_lower, mub_certainty_check_with,
    sharpness_ratio, AccInfoMode, Ensemble,
};
use distnorm::io::DesignFile;
use distnorm::op::{haar_state, random_traceless_direction, HermitianOp, PureState};
use distnorm::perm::{
    aggregate_diagram_bound_audit, class_equality_audit, classwise_bound_audit,
    projector_consistency, r_conjugacy_classes,
};
use distnorm::report::{to_csv_bytes, to_json_bytes, Cell};
use distnorm::rng::RngStream;
use distnorm::uniform::{
    lambda_uniform, lambda_uniform_even_form, mc_uniform_bias, split_bias_closed_form, RankSplit,
};

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 1;
const EXIT_AUDIT: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_BAD_FILE: i32 = 65;

#[derive(Parser)]
#[command(
    name = "distnorm",
    about = "Distinguishability norms under restricted measurements: exact constants and seeded audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Random seed recorded in the output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Acceptance tolerance override (clamped to at least 1e-12).
    #[arg(long)]
    tol: Option<f64>,
}

impl OutputArgs {
    fn tolerance(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default).max(1e-12)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact lower domination constant of the uniform POVM.
    LambdaUniform {
        #[arg(long)]
        d: usize,
        /// Also sweep every dimension from 2 to this bound (CSV-friendly).
        #[arg(long)]
        sweep_to: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte-Carlo uniform-POVM bias of a rank-split or file operator.
    McBias {
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Positive rank of the split direction.
        #[arg(long)]
        a: Option<usize>,
        /// Negative rank of the split direction.
        #[arg(long)]
        b: Option<usize>,
        /// Operator file to use instead of a split direction.
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the complete MUB set for a prime dimension and audit it.
    Mub {
        #[arg(long)]
        d: usize,
        /// Write the constructed design file here.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Validate a design file (defect, weights, optional SIC symmetry).
    DesignCheck {
        #[arg(long)]
        file: PathBuf,
        /// Check the defect at this order instead of the file's.
        #[arg(long)]
        t: Option<usize>,
        /// Additionally require SIC overlap structure.
        #[arg(long, default_value_t = false)]
        sic: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Outcome-moment report for a design or the uniform POVM.
    Moments {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = DesignKind::Mub)]
        design: DesignKind,
        /// Positive rank of the probe direction (defaults to 1).
        #[arg(long)]
        a: Option<usize>,
        /// Probe operator file overriding the split direction.
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long, default_value_t = true)]
        fourth: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Audit the 2-design distance bound on random orthogonal pairs.
    TwoDesignAudit {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = DesignKind::Mub)]
        design: DesignKind,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Local-uniform moment formulas and bias floors on a bipartite shape.
    BipartiteReport {
        #[arg(long = "dA")]
        da: usize,
        #[arg(long = "dB")]
        db: usize,
        /// Probe operator file (random traceless direction otherwise).
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Data-hiding pair and its exact PPT value.
    Hiding {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Permutation-pair trace audits on random bipartite directions.
    PermAudit {
        #[arg(long = "dA")]
        da: usize,
        #[arg(long = "dB")]
        db: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certainty relations on Haar-random pure states.
    Certainty {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minima of the l1/inner-product gaps plus the sharpness-family ratio.
    L1Sweep {
        #[arg(long, default_value_t = 100_000)]
        classical: usize,
        #[arg(long, default_value_t = 10_000)]
        quantum: usize,
        #[arg(long, default_value_t = 10_000)]
        sharpness_n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Accessible-information lower-bound audit.
    Accinfo {
        /// Ensemble file; random ensembles are generated without it.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Single)]
        mode: Mode,
        /// Number of random ensembles when no file is given.
        #[arg(long, default_value_t = 5)]
        random: usize,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Locality chain of domination bounds on the hiding direction.
    Chain {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DesignKind {
    Mub,
    Sic,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Single,
    Bipartite,
}

enum CliError {
    /// Input file missing or malformed.
    File(String),
    /// Any other validation failure.
    Domain(distnorm::Error),
}

impl From<distnorm::Error> for CliError {
    fn from(e: distnorm::Error) -> Self {
        CliError::Domain(e)
    }
}

struct CommandOutput {
    json: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<Cell>>)>,
    audit_violation: bool,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let (out_path, format) = match &cli.command {
        Command::LambdaUniform { output, .. }
        | Command::McBias { output, .. }
        | Command::Mub { output, .. }
        | Command::DesignCheck { output, .. }
        | Command::Moments { output, .. }
        | Command::TwoDesignAudit { output, .. }
        | Command::BipartiteReport { output, .. }
        | Command::Hiding { output, .. }
        | Command::PermAudit { output, .. }
        | Command::Certainty { output, .. }
        | Command::L1Sweep { output, .. }
        | Command::Accinfo { output, .. }
        | Command::Chain { output, .. } => (output.out.clone(), output.format),
    };
    match run(cli.command) {
        Ok(output) => {
            let bytes = match format {
                Format::Json => to_json_bytes(&output.json),
                Format::Csv => match &output.csv {
                    Some((header, rows)) => to_csv_bytes(header, rows),
                    None => to_csv_bytes(&["key", "value"], &flatten_csv(&output.json)),
                },
            };
            let ok = match out_path {
                Some(path) => std::fs::write(path, &bytes).is_ok(),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes).is_ok()
                }
            };
            if !ok {
                eprintln!("error: cannot write output");
                return EXIT_VALIDATION;
            }
            if output.audit_violation {
                EXIT_AUDIT
            } else {
                EXIT_OK
            }
        }
        Err(CliError::File(msg)) => {
            eprintln!("error: {msg}");
            EXIT_BAD_FILE
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("DISTNORM_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn flatten_csv(value: &Value) -> Vec<Vec<Cell>> {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<Vec<Cell>>) {
        match v {
            Value::Object(map) => {
                for (k, vv) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, vv, rows);
                }
            }
            Value::Array(items) => {
                for (i, vv) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), vv, rows);
                }
            }
            Value::Null => rows.push(vec![Cell::from(prefix), Cell::from("null")]),
            Value::Bool(b) => {
                rows.push(vec![Cell::from(prefix), Cell::from(b.to_string().as_str())])
            }
            Value::Number(n) => {
                let cell = if let Some(i) = n.as_i64() {
                    Cell::from(i)
                } else {
                    Cell::from(n.as_f64().unwrap_or(f64::NAN))
                };
                rows.push(vec![Cell::from(prefix), cell]);
            }
            Value::String(s) => rows.push(vec![Cell::from(prefix), Cell::from(s.as_str())]),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    rows
}

fn load_operator_or_65(path: &Path) -> Result<HermitianOp, CliError> {
    distnorm::io::load_operator(path)
        .map_err(|e| CliError::File(format!("{}: {e}", path.display())))
}

fn sic_design() -> Result<WeightedDesign, CliError> {
    Ok(WeightedDesign::from_vectors(
        qubit_sic_tetrahedron()
            .into_iter()
            .map(|v| (0.25, v))
            .collect(),
        2,
    )?)
}

fn mc_value(v: &distnorm::uniform::McEstimate) -> Value {
    json!({"mean": v.mean, "std_error": v.std_error, "samples": v.samples})
}

fn run(command: Command) -> Result<CommandOutput, CliError> {
    match command {
        Command::LambdaUniform {
            d,
            sweep_to,
            output,
        } => {
            let (value, split) = lambda_uniform(d)?;
            let even = if d % 2 == 0 {
                Some(lambda_uniform_even_form(d)?)
            } else {
                None
            };
            let asymptote = value * (std::f64::consts::PI * d as f64 / 2.0).sqrt();
            let mut rows = Vec::new();
            let mut sweep = Vec::new();
            if let Some(limit) = sweep_to {
                for dd in 2..=limit {
                    let (v, s) = lambda_uniform(dd)?;
                    rows.push(vec![
                        Cell::from(dd as i64),
                        Cell::from(v),
                        Cell::from(s.a() as i64),
                        Cell::from(s.b() as i64),
                    ]);
                    sweep.push(json!({"d": dd, "lambda": v, "argmin_split": [s.a(), s.b()]}));
                }
            } else {
                rows.push(vec![
                    Cell::from(d as i64),
                    Cell::from(value),
                    Cell::from(split.a() as i64),
                    Cell::from(split.b() as i64),
                ]);
            }
            let json = json!({
                "command": "lambda-uniform",
                "d": d,
                "lambda": value,
                "argmin_split": [split.a(), split.b()],
                "even_form": even,
                "asymptote_ratio": asymptote,
                "sweep": if sweep.is_empty() { Value::Null } else { Value::Array(sweep) },
                "seed": output.seed,
                "samples": Value::Null,
                "tolerance": output.tolerance(1e-12),
            });
            Ok(CommandOutput {
                json,
                csv: Some((vec!["d", "lambda", "argmin_a", "argmin_b"], rows)),
                audit_violation: false,
            })
        }
        Command::McBias {
            d,
            a,
            b,
            op,
            samples,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let (xi, closed, label) = match (&op, a, b) {
                (Some(path), _, _) => (load_operator_or_65(path)?, None, "file".to_string()),
                (None, Some(a), Some(b)) => {
                    let split = RankSplit::new(a, b)?;
                    (
                        split.direction(),
                        Some(split_bias_closed_form(split)),
                        format!("split({},{})", split.a(), split.b()),
                    )
                }
                _ => {
                    // mu-direction embedded in dimension d
                    if d < 2 {
                        return Err(distnorm::Error::InvalidArgument("need d >= 2".into()).into());
                    }
                    let mut diag = vec![0.0; d];
                    diag[0] = 0.5;
                    diag[1] = -0.5;
                    (
                        HermitianOp::from_diagonal(&diag),
                        Some(0.5),
                        format!("pair-direction(d={d})"),
                    )
                }
            };
            let est = mc_uniform_bias(&xi, samples, &mut rng)?;
            let deviation = closed.map(|c| (est.mean - c).abs());
            let violation = match (closed, deviation) {
                (Some(_), Some(dev)) => dev > 5.0 * est.std_error,
                _ => false,
            };
            let json = json!({
                "command": "mc-bias",
                "direction": label,
                "estimate": mc_value(&est),
                "closed_form": closed,
                "within_5_std_errors": !violation,
                "seed": output.seed,
                "samples": samples,
                "tolerance": output.tolerance(1e-12),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violation,
            })
        }
        Command::Mub { d, dump, output } => {
            let design = mub_design(d)?;
            let defect2 = design_defect(&design, 2)?;
            if let Some(path) = dump {
                let file = DesignFile::from_design(&design);
                let text =
                    serde_json::to_string(&file).map_err(|e| CliError::File(e.to_string()))?;
                std::fs::write(path, text).map_err(distnorm::Error::from)?;
            }
            let tol = output.tolerance(1e-9);
            let json = json!({
                "command": "mub",
                "d": d,
                "items": design.len(),
                "bases": d + 1,
                "proper": design.proper(),
                "design_defect_t2": defect2,
                "pass": defect2 <= tol,
                "seed": output.seed,
                "samples": Value::Null,
                "tolerance": tol,
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: defect2 > tol,
            })
        }
        Command::DesignCheck {
            file,
            t,
            sic,
            output,
        } => {
            let design = distnorm::io::load_design(&file)
                .map_err(|e| CliError::File(format!("{}: {e}", file.display())))?;
            let order = t.unwrap_or(design.order());
            let defect = design_defect(&design, order)?;
            let tol = output.tolerance(1e-9);
            let mut pass = defect <= tol;
            let sic_report = if sic {
                let vectors: Vec<PureState> =
                    design.items().iter().map(|it| it.vector.clone()).collect();
                let report = sic_validate(&vectors)?;
                pass = pass && report.symmetric && report.is_two_design;
                json!({
                    "max_pair_deviation": report.max_pair_deviation,
                    "symmetric": report.symmetric,
                    "is_two_design": report.is_two_design,
                    "lambda_upper_exact": report.lambda_upper_exact,
                    "lambda_upper_quoted": report.lambda_upper_quoted,
                })
            } else {
                Value::Null
            };
            let json = json!({
                "command": "design-check",
                "items": design.len(),
                "dim": design.dim(),
                "order_checked": order,
                "design_defect": defect,
                "proper": design.proper(),
                "sic": sic_report,
                "pass": pass,
                "seed": output.seed,
                "samples": Value::Null,
                "tolerance": tol,
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: !pass,
            })
        }
        Command::Moments {
            d,
            design,
            a,
            op,
            fourth,
            samples,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let xi = match &op {
                Some(path) => load_operator_or_65(path)?,
                None => {
                    let a = a.unwrap_or(1);
                    if a == 0 || a >= d {
                        return Err(distnorm::Error::InvalidArgument(format!(
                            "split rank {a} invalid for dimension {d}"
                        ))
                        .into());
                    }
                    let mut diag = vec![0.0; d];
                    for item in diag.iter_mut().take(a) {
                        *item = 0.5 / a as f64;
                    }
                    for item in diag.iter_mut().skip(a) {
                        *item = -0.5 / (d - a) as f64;
                    }
                    HermitianOp::from_diagonal(&diag)
                }
            };
            let (json, violation) = match design {
                DesignKind::Uniform => {
                    let audit = uniform_moment_audit(&xi, samples, &mut rng)?;
                    let berger_ok = audit.berger_bound
                        <= audit.abs_first.mean + 3.0 * audit.abs_first.std_error;
                    let second_ok = (audit.second.mean - audit.closed_form_second).abs()
                        <= 5.0 * audit.second.std_error;
                    (
                        json!({
                            "command": "moments",
                            "design": "uniform",
                            "abs_first": mc_value(&audit.abs_first),
                            "second": mc_value(&audit.second),
                            "fourth": mc_value(&audit.fourth),
                            "closed_form_second": audit.closed_form_second,
                            "closed_form_fourth": audit.closed_form_fourth,
                            "berger_bound": audit.berger_bound,
                            "pass": berger_ok && second_ok,
                            "seed": output.seed,
                            "samples": samples,
                            "tolerance": output.tolerance(1e-9),
                        }),
                        !(berger_ok && second_ok),
                    )
                }
                kind => {
                    let dsg = match kind {
                        DesignKind::Mub => mub_design(d)?,
                        DesignKind::Sic => {
                            if d != 2 {
                                return Err(distnorm::Error::UnsupportedDimension {
                                    dim: d,
                                    reason: "the bundled SIC fixture is the qubit tetrahedron"
                                        .into(),
                                }
                                .into());
                            }
                            sic_design()?
                        }
                        DesignKind::Uniform => unreachable!(),
                    };
                    let report = design_moments(&dsg, &xi, fourth)?;
                    let tol = output.tolerance(1e-9);
                    let second_ok = (report.second_moment - report.closed_form_second).abs() <= tol;
                    (
                        json!({
                            "command": "moments",
                            "design": match kind { DesignKind::Mub => "mub", DesignKind::Sic => "sic", _ => unreachable!() },
                            "second_moment": report.second_moment,
                            "fourth_moment": report.fourth_moment,
                            "closed_form_second": report.closed_form_second,
                            "closed_form_fourth": report.closed_form_fourth,
                            "berger_bound": report.berger_bound,
                            "pass": second_ok,
                            "seed": output.seed,
                            "samples": Value::Null,
                            "tolerance": tol,
                        }),
                        !second_ok,
                    )
                }
            };
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violation,
            })
        }
        Command::TwoDesignAudit {
            d,
            design,
            trials,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let dsg = match design {
                DesignKind::Mub => mub_design(d)?,
                DesignKind::Sic => {
                    if d != 2 {
                        return Err(distnorm::Error::UnsupportedDimension {
                            dim: d,
                            reason: "the bundled SIC fixture is the qubit tetrahedron".into(),
                        }
                        .into());
                    }
                    sic_design()?
                }
                DesignKind::Uniform => {
                    return Err(distnorm::Error::InvalidArgument(
                        "the uniform POVM is not a finite design".into(),
                    )
                    .into())
                }
            };
            let audit = two_design_bound_check(&dsg, trials, &mut rng)?;
            let same_basis = match design {
                DesignKind::Mub => {
                    let a = PureState::basis_vector(d, 0);
                    let b = PureState::basis_vector(d, 1);
                    Some(distnorm::designs::measured_distance(&dsg, &a, &b))
                }
                _ => None,
            };
            let violation = audit.violations > 0;
            let json = json!({
                "command": "two-design-audit",
                "d": d,
                "bound": audit.bound,
                "trials": audit.trials,
                "min_distance": audit.min_distance,
                "violations": audit.violations,
                "same_basis_distance": same_basis,
                "lambda_upper_witness": same_basis.map(|v| v / 2.0),
                "theorem_lambda_lower": 0.5 / (d + 1) as f64,
                "pass": !violation,
                "seed": output.seed,
                "samples": trials,
                "tolerance": output.tolerance(1e-9),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violation,
            })
        }
        Command::BipartiteReport {
            da,
            db,
            op,
            samples,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let xi = match &op {
                Some(path) => load_operator_or_65(path)?,
                None => {
                    random_traceless_direction(da * db, &mut rng)?.with_shape(Some((da, db)))?
                }
            };
            let formula = local_uniform_second_moment(&xi)?;
            let moments = mc_local_uniform_moments(&xi, samples, &mut rng)?;
            let bias = mc_local_uniform_bias(&xi, samples, &mut rng)?;
            let floors = local_bias_lower_bound(&xi)?;
            let rhs = diagram_bound_rhs(&xi)?;
            let prefactor = (da * db) as f64 / ((da + 1) * (db + 1)) as f64;
            let fourth_bound = prefactor.powi(3) * rhs.envelope;
            let (sep_l2, sep_l1) = sep_l2_lower_bound(&xi, 2);
            let second_ok =
                (moments.second.mean - formula.value).abs() <= 5.0 * moments.second.std_error;
            let fourth_ok = moments.fourth.mean <= fourth_bound + 5.0 * moments.fourth.std_error;
            let floor_ok = bias.mean >= floors.l2_bound - 5.0 * bias.std_error;
            let pass = second_ok && fourth_ok && floor_ok;
            let json = json!({
                "command": "bipartite-report",
                "dA": da,
                "dB": db,
                "second_moment_formula": formula.value,
                "second_moment_mc": mc_value(&moments.second),
                "fourth_moment_mc": mc_value(&moments.fourth),
                "fourth_moment_bound": fourth_bound,
                "bias_mc": mc_value(&bias),
                "bias_floor_l2": floors.l2_bound,
                "bias_floor_l1": floors.l1_bound,
                "sep_floor_l2": sep_l2,
                "sep_floor_l1": sep_l1,
                "diagram_rhs_detailed": rhs.detailed,
                "diagram_rhs_envelope": rhs.envelope,
                "traces": {"t": rhs.t, "a": rhs.a, "b": rhs.b},
                "pass": pass,
                "seed": output.seed,
                "samples": samples,
                "tolerance": output.tolerance(1e-9),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: !pass,
            })
        }
        Command::Hiding { d, output } => {
            let pair = hiding_pair(d)?;
            let xi = pair.direction();
            let invariant = UUInvariantOp::from_operator(&xi)?;
            let lp = ppt_norm_uu_invariant(&invariant)?;
            let bound = 2.0 / (d + 1) as f64;
            let tol = output.tolerance(1e-9);
            let rank_report = rank_hiding_bound(&pair.anti, &pair.sym)?;
            let pass = (lp.value - bound).abs() <= tol;
            let json = json!({
                "command": "hiding",
                "d": d,
                "ppt_bias": lp.value,
                "bound_2_over_d_plus_1": bound,
                "witness_x": lp.witness.0,
                "witness_y": lp.witness.1,
                "sym_rank": d * (d + 1) / 2,
                "anti_rank": d * (d - 1) / 2,
                "rank_bound_l2_route": rank_report.l2_route,
                "rank_bound_quoted": rank_report.quoted,
                "pass": pass,
                "seed": output.seed,
                "samples": Value::Null,
                "tolerance": tol,
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: !pass,
            })
        }
        Command::PermAudit {
            da,
            db,
            trials,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let classes = r_conjugacy_classes();
            let total: usize = classes.iter().map(|c| c.size()).sum();
            let mut violations = 0usize;
            let mut worst_spread = 0.0_f64;
            let mut worst_relative = 0.0_f64;
            let mut class_rows = Vec::new();
            for trial in 0..trials {
                let xi =
                    random_traceless_direction(da * db, &mut rng)?.with_shape(Some((da, db)))?;
                let spread = class_equality_audit(&xi)?;
                if !spread.pass {
                    violations += 1;
                }
                worst_spread = worst_spread.max(spread.worst_spread);
                let proj = projector_consistency(&xi)?;
                if !proj.pass {
                    violations += 1;
                }
                worst_relative = worst_relative.max(proj.relative_error);
                let classwise = classwise_bound_audit(&xi)?;
                violations += classwise.violations;
                if trial + 1 == trials {
                    class_rows = classwise
                        .entries
                        .iter()
                        .map(|e| {
                            json!({
                                "class_id": e.class_id,
                                "representative": format!(
                                    "{:?}x{:?}",
                                    e.representative.0.images(),
                                    e.representative.1.images()
                                ),
                                "size": e.size,
                                "cycle_types": [e.cycle_types.0, e.cycle_types.1],
                                "value": e.value,
                                "bound": e.bound,
                                "margin": e.margin,
                            })
                        })
                        .collect();
                }
                let aggregate = aggregate_diagram_bound_audit(&xi)?;
                if !aggregate.pass {
                    violations += 1;
                }
            }
            let json = json!({
                "command": "perm-audit",
                "dA": da,
                "dB": db,
                "classes": classes.len(),
                "class_members": total,
                "trials": trials,
                "violations": violations,
                "worst_class_spread": worst_spread,
                "worst_projector_relative_error": worst_relative,
                "class_report": class_rows,
                "pass": violations == 0,
                "seed": output.seed,
                "samples": trials,
                "tolerance": output.tolerance(1e-8),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violations > 0,
            })
        }
        Command::Certainty { d, trials, output } => {
            let mut rng = RngStream::from_seed(output.seed);
            let design = mub_design(d)?;
            let mut min_sum = f64::INFINITY;
            let mut max_sum = f64::NEG_INFINITY;
            let mut mub_violations = 0usize;
            let mut chain_violations = 0usize;
            for _ in 0..trials {
                let psi = haar_state(d, &mut rng)?;
                let report = mub_certainty_check_with(&design, &psi)?;
                if !report.pass {
                    mub_violations += 1;
                }
                min_sum = min_sum.min(report.renyi_sum);
                max_sum = max_sum.max(report.renyi_sum);
                let chain = design_certainty_check(&design, &psi)?;
                if !chain.pass {
                    chain_violations += 1;
                }
            }
            let df = d as f64;
            let violation = mub_violations + chain_violations > 0;
            let json = json!({
                "command": "certainty",
                "d": d,
                "trials": trials,
                "renyi_sum_min": min_sum,
                "renyi_sum_max": max_sum,
                "lower": (df + 1.0) * ((df + 1.0) / 2.0).log2(),
                "upper": (df + 1.0) * df.log2() - (df - 1.0).log2(),
                "mub_violations": mub_violations,
                "chain_violations": chain_violations,
                "pass": !violation,
                "seed": output.seed,
                "samples": trials,
                "tolerance": output.tolerance(1e-9),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violation,
            })
        }
        Command::L1Sweep {
            classical,
            quantum,
            sharpness_n,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let mut min_classical = f64::INFINITY;
            let mut min_fidelity_step = f64::INFINITY;
            for _ in 0..classical {
                let n = 2 + rng.below(16);
                let p = random_distribution(n, &mut rng);
                let q = random_distribution(n, &mut rng);
                min_classical = min_classical.min(l1_inner_gap(&p, &q)?);
                let l1: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
                let bhatt: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a * b).sqrt()).sum();
                min_fidelity_step = min_fidelity_step.min(0.5 * l1 - (1.0 - bhatt));
            }
            let mut min_quantum = f64::INFINITY;
            for _ in 0..quantum {
                let dim = 2 + rng.below(5);
                let rho = random_density(dim, &mut rng)?;
                let sigma = random_density(dim, &mut rng)?;
                min_quantum = min_quantum.min(distnorm::info::quantum_l1_inner_gap(&rho, &sigma)?);
            }
            let ratio = (1..=40)
                .map(|i| sharpness_ratio(sharpness_n, 0.005 * i as f64).unwrap_or(0.0))
                .fold(0.0_f64, f64::max);
            let tol = output.tolerance(1e-12);
            let pass = min_classical >= -tol
                && min_quantum >= -tol
                && min_fidelity_step >= -tol
                && ratio >= 0.95;
            let rows = vec![
                vec![Cell::from("min_classical_gap"), Cell::from(min_classical)],
                vec![Cell::from("min_quantum_gap"), Cell::from(min_quantum)],
                vec![
                    Cell::from("min_fidelity_step"),
                    Cell::from(min_fidelity_step),
                ],
                vec![Cell::from("sharpness_ratio_sup"), Cell::from(ratio)],
            ];
            let json = json!({
                "command": "l1-sweep",
                "classical_pairs": classical,
                "quantum_pairs": quantum,
                "min_classical_gap": min_classical,
                "min_quantum_gap": min_quantum,
                "min_fidelity_step": min_fidelity_step,
                "sharpness_n": sharpness_n,
                "sharpness_ratio_sup": ratio,
                "pass": pass,
                "seed": output.seed,
                "samples": classical + quantum,
                "tolerance": tol,
            });
            Ok(CommandOutput {
                json,
                csv: Some((vec!["metric", "value"], rows)),
                audit_violation: !pass,
            })
        }
        Command::Accinfo {
            file,
            mode,
            random,
            samples,
            output,
        } => {
            let mut rng = RngStream::from_seed(output.seed);
            let mode = match mode {
                Mode::Single => AccInfoMode::Single,
                Mode::Bipartite => AccInfoMode::Bipartite,
            };
            let ensembles: Vec<Ensemble> = match &file {
                Some(path) => vec![distnorm::io::load_ensemble(path)
                    .map_err(|e| CliError::File(format!("{}: {e}", path.display())))?],
                None => (0..random.max(1))
                    .map(|_| random_ensemble(mode, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let mut reports = Vec::new();
            let mut violations = 0usize;
            for (i, ensemble) in ensembles.iter().enumerate() {
                let mut stream = rng.split(1000 + i as u64);
                let report = mc_accessible_info_lower(ensemble, mode, samples, &mut stream)?;
                if !report.pass {
                    violations += 1;
                }
                reports.push(json!({
                    "estimate": mc_value(&report.estimate),
                    "bound": report.bound,
                    "pass": report.pass,
                }));
            }
            let json = json!({
                "command": "accinfo",
                "mode": match mode { AccInfoMode::Single => "single", AccInfoMode::Bipartite => "bipartite" },
                "ensembles": reports.len(),
                "violations": violations,
                "reports": reports,
                "pass": violations == 0,
                "seed": output.seed,
                "samples": samples,
                "tolerance": output.tolerance(1e-12),
            });
            Ok(CommandOutput {
                json,
                csv: None,
                audit_violation: violations > 0,
            })
        }
        Command::Chain { d, samples, output } => {
            let mut rng = RngStream::from_seed(output.seed);
            let report = chain_report(d, samples, &mut rng)?;
            let rows: Vec<Vec<Cell>> = report
                .entries
                .iter()
                .map(|e| {
                    vec![
                        Cell::from(e.bound_name.as_str()),
                        Cell::from(e.value),
                        Cell::from(e.provenance.as_str()),
                        match e.std_error {
                            Some(se) => Cell::from(se),
                            None => Cell::from(""),
                        },
                    ]
                })
                .collect();
            let entries: Vec<Value> = report
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "bound_name": e.bound_name,
                        "value": e.value,
                        "provenance": e.provenance.as_str(),
                        "std_error": e.std_error,
                    })
                })
                .collect();
            let json = json!({
                "command": "chain",
                "d": d,
                "entries": entries,
                "monotone": report.monotone,
                "pass": report.monotone,
                "seed": output.seed,
                "samples": samples,
                "tolerance": output.tolerance(1e-9),
            });
            Ok(CommandOutput {
                json,
                csv: Some((vec!["bound_name", "value", "provenance", "std_error"], rows)),
                audit_violation: !report.monotone,
            })
        }
    }
}

fn random_distribution(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -rng.uniform().max(f64::MIN_POSITIVE).ln())
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn random_density(dim: usize, rng: &mut RngStream) -> Result<HermitianOp, distnorm::Error> {
    let pieces = 1 + rng.below(dim);
    let weights = random_distribution(pieces, rng);
    let mut acc = HermitianOp::zeros(dim, None)?;
    for w in weights {
        let psi = haar_state(dim, rng)?;
        acc = acc.add(&psi.projector().scale(w))?;
    }
    Ok(acc)
}

fn random_ensemble(mode: AccInfoMode, rng: &mut RngStream) -> Result<Ensemble, distnorm::Error> {
    let states = 2 + rng.below(3);
    let probs = random_distribution(states, rng);
    let items = probs
        .into_iter()
        .map(|p| {
            let rho = match mode {
                AccInfoMode::Single => random_density(3, rng)?,
                AccInfoMode::Bipartite => random_density(4, rng)?.with_shape(Some((2, 2)))?,
            };
            Ok((p, rho))
        })
        .collect::<Result<Vec<_>, distnorm::Error>>()?;
    Ensemble::new(items)
}
