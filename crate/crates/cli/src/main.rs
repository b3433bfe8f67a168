mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use endslab::cayley::{explore, sphere_counts, BallTable};
use endslab::classifiers::{
    linear_end_depth_check, sphere_bound_criterion, sphere_cover_demo, sphere_size_detector, DemoStatus, VerdictKind,
};
use endslab::ends::{
    check_obss_witness, default_schedule, end_count_estimate, end_depth_profile, EndDepthOptions, ObssWitness,
    Truncation,
};
use endslab::gl_partition::{build_gl_partition, verify_gl_partition, FiniteMetricSpace};
use endslab::scalar::Scalar;
use endslab::{Error, GroupOracle, GroupSpec, DEFAULT_NODE_BUDGET};

use report::{emit, Run};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "endslab", version, about = "Growth, ends and end depth of Cayley graphs, with reproducible reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Node budget for any exploration.
    #[arg(long, env = "ENDSLAB_BUDGET", default_value_t = DEFAULT_NODE_BUDGET, global = true)]
    budget: usize,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time in the manifest (makes reports run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Clone)]
struct GroupArg {
    /// Group spec as inline JSON or a path to a JSON file, e.g. '{"family":"z_pow","k":2}'.
    #[arg(long)]
    group: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Spheres,
    Criterion,
}

#[derive(Subcommand)]
enum Command {
    /// Sphere and ball sizes up to a radius.
    Growth {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        rmax: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// End-depth profile V0(r) and the V0(r) <= 4r check.
    EndDepth {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        rmax: u32,
        /// `auto` (4r+2) or a fixed truncation radius.
        #[arg(long, default_value = "auto")]
        truncation: String,
        /// Treat the group as one-ended instead of estimating it.
        #[arg(long)]
        assume_one_ended: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the number of ends from complement components.
    Ends {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        rmax: u32,
        /// Increasing truncation radii; default rmax+2,rmax+4.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
    /// gl-partition of a finite metric space read from JSON.
    Glpartition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        a: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Check a separating-set witness family.
    Obss {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Virtual-cyclicity detectors.
    Classify {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 3)]
        a: u32,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Largest radius for `--mode spheres`.
        #[arg(long, default_value_t = 30)]
        rmax: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Replay the sphere-covering argument at small parameters.
    DemoCover {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 3)]
        a: u32,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure that maps onto an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::TrivialPartition(_) => EXIT_CHECK_FAILED,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse_group(arg: &GroupArg) -> Result<GroupOracle, Failure> {
    let text =
        if arg.group.trim_start().starts_with('{') { arg.group.clone() } else { read_text(Path::new(&arg.group))? };
    let spec: GroupSpec = serde_json::from_str(&text).map_err(|e| invalid(format!("group spec: {e}")))?;
    Ok(GroupOracle::new(spec)?)
}

fn start(command: &'static str, oracle: Option<&GroupOracle>, parameters: Value, common: &Common) -> Run {
    Run {
        command,
        group: oracle.map(|o| o.spec().clone()),
        parameters,
        budget: common.budget,
        timing: common.timing,
        started: Instant::now(),
    }
}

fn write(text: &str, common: &Common) -> Result<(), Failure> {
    emit(text, common.out.as_deref()).map_err(|e| invalid(format!("writing output: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Growth { group, rmax, format, common } => {
            let oracle = parse_group(&group)?;
            let run = start("growth", Some(&oracle), json!({ "rmax": rmax }), &common);
            let counts = sphere_counts(&oracle, rmax, common.budget)?;
            let rows: Vec<(usize, usize, usize)> = counts
                .sizes
                .iter()
                .scan(0usize, |ball, &s| {
                    *ball += s;
                    Some((s, *ball))
                })
                .enumerate()
                .map(|(r, (s, b))| (r, s, b))
                .collect();
            let text = match format {
                Format::Csv => {
                    let mut body = String::from("r,sphere_size,ball_size\n");
                    for (r, s, b) in &rows {
                        body.push_str(&format!("{r},{s},{b}\n"));
                    }
                    run.csv(&body, Some(counts.visited))
                }
                Format::Json => {
                    let rows: Vec<Value> =
                        rows.iter().map(|(r, s, b)| json!({ "r": r, "sphere_size": s, "ball_size": b })).collect();
                    run.json(&json!({ "rows": rows, "exhausted": counts.exhausted }), Some(counts.visited))
                }
            };
            write(&text, &common)?;
            Ok(0)
        }

        Command::EndDepth { group, rmax, truncation, assume_one_ended, common } => {
            let oracle = parse_group(&group)?;
            let trunc = match truncation.as_str() {
                "auto" => Truncation::Auto,
                t => Truncation::Fixed(
                    t.parse().map_err(|_| invalid(format!("--truncation: expected auto or N, got {t}")))?,
                ),
            };
            let run = start(
                "end-depth",
                Some(&oracle),
                json!({ "rmax": rmax, "truncation": trunc, "assume_one_ended": assume_one_ended }),
                &common,
            );
            let opts = EndDepthOptions { truncation: trunc, assume_one_ended, budget: common.budget };
            let profile = end_depth_profile(&oracle, rmax, &opts)?;
            let check = linear_end_depth_check(&profile);
            let text = run.json(&json!({ "profile": profile, "linear_check": check }), Some(profile.explored));
            write(&text, &common)?;
            Ok(if check.pass { 0 } else { EXIT_CHECK_FAILED })
        }

        Command::Ends { group, rmax, schedule, common } => {
            let oracle = parse_group(&group)?;
            let schedule = schedule.unwrap_or_else(|| default_schedule(rmax));
            let run = start("ends", Some(&oracle), json!({ "rmax": rmax, "schedule": schedule }), &common);
            let est = end_count_estimate(&oracle, rmax, &schedule, common.budget)?;
            write(&run.json(&est, Some(est.explored)), &common)?;
            Ok(0)
        }

        Command::Glpartition { input, a, common } => {
            let text = read_text(&input)?;
            let run = start("glpartition", None, json!({ "input": input.display().to_string(), "a": a }), &common);
            // Integer distances stay exact; anything else goes through f64.
            let out = match serde_json::from_str::<FiniteMetricSpace<u64>>(&text) {
                Ok(space) => partition_report(&run, &space, a)?,
                Err(_) => {
                    let space = serde_json::from_str::<FiniteMetricSpace<f64>>(&text)
                        .map_err(|e| invalid(format!("metric space: {e}")))?;
                    partition_report(&run, &space, a)?
                }
            };
            write(&out.0, &common)?;
            Ok(out.1)
        }

        Command::Obss { group, witness, common } => {
            let oracle = parse_group(&group)?;
            let w: ObssWitness =
                serde_json::from_str(&read_text(&witness)?).map_err(|e| invalid(format!("witness: {e}")))?;
            let run = start("obss", Some(&oracle), json!({ "witness": witness.display().to_string() }), &common);
            let table = witness_table(&oracle, &w, common.budget)?;
            let rep = check_obss_witness(&oracle, &table, &w)?;
            write(&run.json(&rep, Some(table.len())), &common)?;
            Ok(if rep.passes { 0 } else { EXIT_CHECK_FAILED })
        }

        Command::Classify { group, mode, a, n, rmax, common } => {
            let oracle = parse_group(&group)?;
            let (verdict, params) = match mode {
                Mode::Spheres => {
                    (sphere_size_detector(&oracle, rmax, common.budget)?, json!({ "mode": "spheres", "rmax": rmax }))
                }
                Mode::Criterion => (
                    sphere_bound_criterion(&oracle, a, n, common.budget)?,
                    json!({ "mode": "criterion", "a": a, "n": n }),
                ),
            };
            let run = start("classify", Some(&oracle), params, &common);
            let used = verdict.payload.get("visited").and_then(Value::as_u64).map(|v| v as usize);
            write(&run.json(&verdict, used), &common)?;
            Ok(if verdict.kind == VerdictKind::Infeasible { EXIT_INFEASIBLE } else { 0 })
        }

        Command::DemoCover { group, a, n, common } => {
            let oracle = parse_group(&group)?;
            let run = start("demo-cover", Some(&oracle), json!({ "a": a, "n": n }), &common);
            let rep = sphere_cover_demo(&oracle, a, n, common.budget)?;
            write(&run.json(&rep, None), &common)?;
            let failed = rep.status == DemoStatus::Completed && !rep.all_checks_pass;
            Ok(if failed { EXIT_CHECK_FAILED } else { 0 })
        }
    }
}

fn partition_report<T: Scalar>(run: &Run, space: &FiniteMetricSpace<T>, a: u32) -> Result<(String, u8), Failure> {
    let partition = build_gl_partition(space, a)?;
    let verification = (!partition.trivial).then(|| verify_gl_partition(space, &partition, a));
    let failed = verification.as_ref().is_some_and(|v| !v.passes);
    let text = run.json(&json!({ "partition": partition, "verification": verification }), None);
    Ok((text, if failed { EXIT_CHECK_FAILED } else { 0 }))
}

/// Smallest ball holding every witness element and each `N(K_i, r_i)`.
fn witness_table(oracle: &GroupOracle, w: &ObssWitness, budget: usize) -> Result<BallTable, Failure> {
    let everything = w.items.iter().flat_map(|i| i.k.iter().chain(&i.a).chain(&i.b));
    let mut radius = 16u32;
    let table = loop {
        let table = explore(oracle, radius, budget)?;
        if everything.clone().all(|g| table.index_of(oracle, g).is_some()) {
            break table;
        }
        if table.is_complete_group() {
            return Err(invalid("witness contains elements outside the group"));
        }
        radius = radius.checked_mul(2).ok_or_else(|| invalid("witness elements are too far out"))?;
    };
    let dist = |g| table.index_of(oracle, g).map(|i| table.distance(i)).unwrap();
    let needed = w
        .items
        .iter()
        .map(|i| i.k.iter().map(dist).max().unwrap_or(0) + i.r)
        .chain(everything.map(dist))
        .max()
        .unwrap_or(0);
    if needed <= table.radius() {
        return Ok(table);
    }
    Ok(explore(oracle, needed, budget)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": f.message, "exit_code": f.code }));
            ExitCode::from(f.code)
        }
    }
}
