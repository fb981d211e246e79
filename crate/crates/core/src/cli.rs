//! Command-line front end. Every command prints one JSON `RunReport` on stdout.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::capacity::{
    check_convex, check_dense, check_null_additive, check_p_null_additive, Capacity, PropertyReport,
};
use crate::convergence::{converges_strong_ae, converges_weak_ae, monotone_convergence_experiment};
use crate::countable::{
    check_finite_atoms, continuity_from_below_countable, dyadic_partitions, increasing_information_run,
    monotone_convergence_countable, CountableMeasure, CountableModel, CountablePartition, CountableSequence,
    EventuallyConstantFunction,
};
use crate::error::{Error, Result};
use crate::generators::{self, random_capacity, Profile};
use crate::induced::check_weak_equi_equivalence;
use crate::integrals::{
    balanced_cover, choquet_integral, concave_integral, psa_integral, psp_integral, Decomposition, IntegralResult,
};
use crate::io;
use crate::rational::{self, Rational};
use crate::sets::generated_algebra;

#[derive(Debug, Parser)]
#[command(name = "nonadditive", version, about = "Exact capacities, nonadditive integrals and convergence experiments")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Exit with status 1 when the verdict is false.
    #[arg(long, global = true)]
    pub assert: bool,
    /// Show headline values as decimals with this many digits instead of exact fractions.
    #[arg(long, global = true, value_name = "K")]
    pub decimal: Option<usize>,
    /// Include wall-clock timing in the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an integral.
    Integrate {
        #[command(subcommand)]
        kind: IntegrateCmd,
    },
    /// Check a property and print a witness when it fails.
    Check {
        #[command(subcommand)]
        kind: CheckCmd,
    },
    /// Compute the totally balanced cover of a capacity.
    Cover {
        #[arg(long)]
        capacity: PathBuf,
        /// Write the cover as capacity JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a monotone convergence experiment.
    Converge(ConvergeArgs),
    /// Write a random capacity.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "general")]
        profile: Profile,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl clap::builder::ValueParserFactory for Profile {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Profile>().map_err(|e| e.to_string()))
    }
}

#[derive(Debug, Subcommand)]
pub enum IntegrateCmd {
    Choquet {
        #[arg(long)]
        capacity: PathBuf,
        #[arg(long)]
        function: PathBuf,
    },
    Cav {
        #[arg(long)]
        capacity: PathBuf,
        #[arg(long)]
        function: PathBuf,
    },
    Psa {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        function: PathBuf,
    },
    Psp {
        #[arg(long)]
        measure: PathBuf,
        /// `{"n", "functions": [[...], ...]}` or an array of function objects.
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        function: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CheckCmd {
    Convex {
        #[arg(long)]
        capacity: PathBuf,
    },
    NullAdditive {
        #[arg(long)]
        capacity: PathBuf,
    },
    PNullAdditive {
        #[arg(long)]
        capacity: PathBuf,
        #[arg(long)]
        measure: PathBuf,
    },
    Dense {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Density, Lebesgue coincidence, weak-a.e. monotone convergence and null-additivity of
    /// the capacity induced by a partition.
    WeakEqui {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Random functions and ramps sampled per condition.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// `1_{≤n} ↑ 1` under pairs `{1,2},{3,4},...` with `p_k = 1/(k(k+1))`.
    #[value(name = "exmp-conv")]
    PairsTruncation,
    /// The same sequence when only `∅` and `ℕ` are known.
    #[value(name = "exmp-conv-trivial")]
    TrivialTruncation,
    /// Dyadic refinement of `{1..2^m}` under the uniform measure.
    IncreasingInfo,
    /// The trivial partition repeated, which carries no new information.
    IncreasingInfoTrivial,
}

#[derive(Debug, clap::Args)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Number of terms traced on countable models.
    #[arg(long, default_value_t = 50)]
    pub depth: u64,
    /// Exponent for the dyadic presets.
    #[arg(long, default_value_t = 4)]
    pub m: u32,
    /// Countable model JSON; traces `1_{≤n} ↑ 1`. The literal `countable` just selects a preset.
    #[arg(long)]
    pub model: Option<String>,
    /// Experiment JSON with capacity, sequence and integral.
    #[arg(long, conflicts_with_all = ["capacity", "sequence"])]
    pub experiment: Option<PathBuf>,
    #[arg(long, requires = "sequence")]
    pub capacity: Option<PathBuf>,
    #[arg(long, requires = "capacity")]
    pub sequence: Option<PathBuf>,
    /// `choquet` or `cav`.
    #[arg(long)]
    pub integral: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

/// What a command produced: its results and, for yes/no questions, the verdict.
struct Outcome {
    results: Value,
    verdict: Option<bool>,
}

struct Ctx {
    decimal: Option<usize>,
    seed: u64,
    inputs: BTreeMap<String, Value>,
}

impl Ctx {
    fn num(&self, r: &Rational) -> Value {
        match self.decimal {
            Some(k) => Value::String(rational::format_decimal(r, k)),
            None => Value::String(rational::format(r)),
        }
    }

    fn nums(&self, rs: &[Rational]) -> Value {
        Value::Array(rs.iter().map(|r| self.num(r)).collect())
    }

    fn load(&mut self, name: &str, path: &Path) -> Result<Value> {
        io::read_json(path).map_err(|e| Error::Format(format!("{name} ({}): {e}", path.display())))
    }

    fn record(&mut self, name: &str, canonical: Value) {
        self.inputs.insert(name.to_string(), canonical);
    }

    fn capacity(&mut self, path: &Path) -> Result<Capacity> {
        let c = io::capacity_from_json(&self.load("capacity", path)?)?;
        self.record("capacity", io::capacity_to_json(&c));
        Ok(c)
    }
}

fn decomposition_json(ctx: &Ctx, d: &Decomposition) -> Value {
    let terms: Vec<Value> = d
        .terms
        .iter()
        .map(|t| json!({"weight": ctx.num(&t.weight), "set": t.set.states().collect::<Vec<_>>()}))
        .collect();
    json!({"kind": d.kind, "terms": terms})
}

fn integral_json(ctx: &Ctx, name: &str, r: &IntegralResult) -> Value {
    let mut out = json!({"integral": name, "value": ctx.num(&r.value)});
    if let Some(d) = &r.decomposition {
        out["decomposition"] = decomposition_json(ctx, d);
    }
    if let Some(y) = &r.dual {
        out["dual"] = ctx.nums(y);
    }
    if let Some(w) = &r.family_weights {
        out["family_weights"] = ctx.nums(w);
    }
    out
}

fn property(report: &PropertyReport) -> Outcome {
    Outcome { results: serde_json::to_value(report).expect("serializable"), verdict: Some(report.holds) }
}

fn integrate(ctx: &mut Ctx, cmd: &IntegrateCmd) -> Result<Outcome> {
    let (name, result) = match cmd {
        IntegrateCmd::Choquet { capacity, function } | IntegrateCmd::Cav { capacity, function } => {
            let v = ctx.capacity(capacity)?;
            let f = io::function_from_json(&ctx.load("function", function)?)?;
            ctx.record("function", io::function_to_json(&f));
            if matches!(cmd, IntegrateCmd::Choquet { .. }) {
                ("choquet", choquet_integral(&f, &v)?)
            } else {
                ("cav", concave_integral(&f, &v)?)
            }
        }
        IntegrateCmd::Psa { measure, partition, function } => {
            let p = io::measure_from_json(&ctx.load("measure", measure)?)?;
            let a = io::partition_from_json(&ctx.load("partition", partition)?)?;
            let f = io::function_from_json(&ctx.load("function", function)?)?;
            ctx.record("measure", io::measure_to_json(&p));
            ctx.record("partition", io::partition_to_json(&a));
            ctx.record("function", io::function_to_json(&f));
            ("psa", psa_integral(&f, &p, &a)?)
        }
        IntegrateCmd::Psp { measure, family, function } => {
            let p = io::measure_from_json(&ctx.load("measure", measure)?)?;
            let g = io::family_from_json(&ctx.load("family", family)?)?;
            let f = io::function_from_json(&ctx.load("function", function)?)?;
            ctx.record("measure", io::measure_to_json(&p));
            ctx.record("family", Value::Array(g.iter().map(io::function_to_json).collect()));
            ctx.record("function", io::function_to_json(&f));
            ("psp", psp_integral(&f, &p, &g)?)
        }
    };
    Ok(Outcome { results: integral_json(ctx, name, &result), verdict: None })
}

fn check(ctx: &mut Ctx, cmd: &CheckCmd) -> Result<Outcome> {
    Ok(match cmd {
        CheckCmd::Convex { capacity } => property(&check_convex(&ctx.capacity(capacity)?)),
        CheckCmd::NullAdditive { capacity } => property(&check_null_additive(&ctx.capacity(capacity)?)),
        CheckCmd::PNullAdditive { capacity, measure } => {
            let v = ctx.capacity(capacity)?;
            let p = io::measure_from_json(&ctx.load("measure", measure)?)?;
            ctx.record("measure", io::measure_to_json(&p));
            property(&check_p_null_additive(&v, &p)?)
        }
        CheckCmd::Dense { measure, partition } => {
            let p = io::measure_from_json(&ctx.load("measure", measure)?)?;
            let a = io::partition_from_json(&ctx.load("partition", partition)?)?;
            ctx.record("measure", io::measure_to_json(&p));
            ctx.record("partition", io::partition_to_json(&a));
            property(&check_dense(&generated_algebra(&a), &p)?)
        }
        CheckCmd::WeakEqui { measure, partition, samples } => {
            let p = io::measure_from_json(&ctx.load("measure", measure)?)?;
            let a = io::partition_from_json(&ctx.load("partition", partition)?)?;
            ctx.record("measure", io::measure_to_json(&p));
            ctx.record("partition", io::partition_to_json(&a));
            ctx.record("samples", json!(samples));
            let mut rng = generators::rng(ctx.seed);
            let report = check_weak_equi_equivalence(&p, &a, &mut rng, *samples)?;
            let all_hold = report.dense.holds
                && report.lebesgue_coincidence.holds
                && report.weak_monotone_convergence.holds
                && report.null_additive.holds;
            Outcome { results: serde_json::to_value(&report)?, verdict: Some(report.agree && all_hold) }
        }
    })
}

fn cover(ctx: &mut Ctx, capacity: &Path, out: Option<&Path>) -> Result<Outcome> {
    let v = ctx.capacity(capacity)?;
    let cover = balanced_cover(&v)?;
    let encoded = io::capacity_to_json(&cover);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&encoded)? + "\n")?;
    }
    let equal = cover == v;
    Ok(Outcome {
        results: json!({
            "equal_to_input": equal,
            "total": ctx.num(cover.total()),
            "cover": encoded,
        }),
        verdict: Some(equal),
    })
}

fn countable_trace(ctx: &mut Ctx, model: CountableModel, depth: u64) -> Result<Outcome> {
    ctx.record("model", io::model_to_json(&model));
    ctx.record("depth", json!(depth));
    let one = EventuallyConstantFunction::constant(Rational::one())?;
    let report = monotone_convergence_countable(&model, &CountableSequence::Truncation(one.clone()), &one, depth)?;
    let continuity = continuity_from_below_countable(&model, depth)?;
    Ok(Outcome {
        results: json!({
            "sequence": "f_n = 1 on {1..n}, 0 beyond",
            "trace": ctx.nums(&report.trace),
            "limit_of_integrals": ctx.num(&report.limit),
            "integral_of_limit": ctx.num(&report.integral_of_limit),
            "converges": report.converges,
            "bracket_gap": ctx.num(&report.bracket_gap),
            "finite_atoms": check_finite_atoms(&model.partition),
            "continuity_from_below": continuity,
        }),
        verdict: Some(report.converges),
    })
}

fn increasing_info(ctx: &mut Ctx, m: u32, trivial: bool) -> Result<Outcome> {
    if m > 20 {
        return Err(Error::Precondition(format!("m = {m} is too large; use m ≤ 20")));
    }
    let len = 1u64 << m;
    let measure = CountableMeasure::uniform_on(len)?;
    let partitions = if trivial { vec![CountablePartition::trivial(); m as usize + 1] } else { dyadic_partitions(m) };
    let mut rng = generators::rng(ctx.seed);
    let values = (0..len).map(|_| rational::int(rand::Rng::random_range(&mut rng, 0..=8))).collect();
    let f = EventuallyConstantFunction::from_values(values, Rational::from_integer(0.into()))?;
    ctx.record("m", json!(m));
    ctx.record("trivial", json!(trivial));
    let report = increasing_information_run(&partitions, &measure, &f, len)?;
    Ok(Outcome {
        results: json!({
            "trace": ctx.nums(&report.trace),
            "lebesgue": ctx.num(&report.lebesgue),
            "first_exact": report.first_exact,
            "converges": report.converges,
            "increases_continuously": report.increases_continuously,
            "union_dense": report.union_dense,
        }),
        verdict: Some(report.converges && report.increases_continuously.holds),
    })
}

fn converge(ctx: &mut Ctx, args: &ConvergeArgs) -> Result<Outcome> {
    if let Some(preset) = args.preset {
        let name = preset.to_possible_value().expect("presets are not skipped").get_name().to_string();
        ctx.record("preset", json!(name));
        let telescoping = CountableMeasure::telescoping();
        return match preset {
            Preset::PairsTruncation => {
                countable_trace(ctx, CountableModel::new(telescoping, CountablePartition::pairs()), args.depth)
            }
            Preset::TrivialTruncation => {
                countable_trace(ctx, CountableModel::new(telescoping, CountablePartition::trivial()), args.depth)
            }
            Preset::IncreasingInfo => increasing_info(ctx, args.m, false),
            Preset::IncreasingInfoTrivial => increasing_info(ctx, args.m, true),
        };
    }
    if let Some(model) = args.model.as_deref().filter(|m| *m != "countable") {
        let model = io::model_from_json(&ctx.load("model", Path::new(model))?)?;
        return countable_trace(ctx, model, args.depth);
    }
    let experiment = match (&args.experiment, &args.capacity, &args.sequence) {
        (Some(path), _, _) => {
            let raw = ctx.load("experiment", path)?;
            io::experiment_from_json(&raw, path.parent())?
        }
        (None, Some(c), Some(s)) => {
            let capacity = ctx.capacity(c)?;
            let sequence = io::sequence_from_json(&ctx.load("sequence", s)?, &capacity)?;
            io::Experiment {
                integral: io::integral_kind_from_json(args.integral.as_ref().map(|s| json!(s)).as_ref())?,
                capacity,
                sequence,
            }
        }
        _ => {
            return Err(Error::Precondition(
                "converge needs --preset, --model, --experiment, or --capacity with --sequence".into(),
            ))
        }
    };
    let kind = match &args.integral {
        Some(s) => io::integral_kind_from_json(Some(&json!(s)))?,
        None => experiment.integral,
    };
    ctx.record("capacity", io::capacity_to_json(&experiment.capacity));
    ctx.record("sequence", io::sequence_to_json(&experiment.sequence));
    ctx.record("integral", json!(kind));
    let v = &experiment.capacity;
    let report = monotone_convergence_experiment(&experiment.sequence, v, kind)?;
    let trace = report.integral_trace.as_ref().expect("experiments record a trace");
    Ok(Outcome {
        results: json!({
            "integral": kind,
            "mode": report.mode,
            "weak_ae": converges_weak_ae(&experiment.sequence, v)?,
            "strong_ae": converges_strong_ae(&experiment.sequence, v)?,
            "trace": ctx.nums(&trace.terms),
            "integral_of_limit": ctx.num(&trace.integral_of_limit),
            "gap": ctx.num(&trace.gap()),
            "converges": report.holds,
        }),
        verdict: Some(report.holds),
    })
}

fn generate(ctx: &mut Ctx, n: usize, profile: Profile, out: Option<&Path>) -> Result<Outcome> {
    ctx.record("n", json!(n));
    ctx.record("profile", json!(profile));
    let c = random_capacity(n, ctx.seed, profile)?;
    let encoded = io::capacity_to_json(&c);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&encoded)? + "\n")?;
    }
    Ok(Outcome { results: json!({"capacity": encoded}), verdict: None })
}

/// Runs one parsed command. Returns the report and the verdict, if the command has one.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<(RunReport, Option<bool>)> {
    let started = Instant::now();
    let mut ctx = Ctx { decimal: cli.decimal, seed: cli.seed, inputs: BTreeMap::new() };
    ctx.record("seed", json!(cli.seed));
    let outcome = match &cli.command {
        Command::Integrate { kind } => integrate(&mut ctx, kind)?,
        Command::Check { kind } => check(&mut ctx, kind)?,
        Command::Cover { capacity, out } => cover(&mut ctx, capacity, out.as_deref())?,
        Command::Converge(args) => converge(&mut ctx, args)?,
        Command::Gen { n, profile, out } => generate(&mut ctx, *n, *profile, out.as_deref())?,
    };
    let mut results = outcome.results;
    if let (Some(verdict), Value::Object(map)) = (outcome.verdict, &mut results) {
        map.insert("verdict".into(), json!(verdict));
    }
    let report = RunReport {
        command: argv,
        inputs_digest: io::inputs_digest(&ctx.inputs),
        results,
        timing_ms: cli.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
    };
    Ok((report, outcome.verdict))
}

/// Parses `argv`, runs the command, prints the report and returns the process exit code:
/// 0 on completion, 1 for a false verdict under `--assert`, 2 on errors.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, argv.into_iter().skip(1).collect()) {
        Ok((report, verdict)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            // A closed pipe downstream (e.g. `| head`) is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if cli.assert && verdict == Some(false) {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
