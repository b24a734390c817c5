use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use confcount::bounds::{best_bound, BoundTable};
use confcount::chow::intersection_number;
use confcount::combinatorics::{build_graph, count_weighted_transversals, surplus, surplus_condition_via_matchings};
use confcount::engine::{
    stochastic_count, verify_reduction, CountOptions, CountReport, CountStatus, ReductionCheck, TrialOutcome,
    DEFAULT_SEED,
};
use confcount::ffield::{combinations, stream_rng, PrimeField, DEFAULT_PRIMES};
use confcount::groebner::Limits;
use confcount::polysys::{build_system, Rabinowitsch, Saturation, SystemOptions};
use confcount::reduce::{common_markings, fully_reduce, reduce_once};
use confcount::{parse_instance, Error, Format, Instance};

const OK: u8 = 0;
const INCONSISTENT: u8 = 1;
const BAD_INPUT: u8 = 2;
const RESOURCE_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "confcount", version, about = "Bounds, reductions and stochastic counts of projective configuration counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,

    /// Worker threads for trials and pruning sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension, surplus, common markings and reduction trail.
    Analyze(InstanceArgs),
    /// Transversal upper bounds over all prunings.
    Bound {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Only bound the instance as given.
        #[arg(long)]
        no_reduce: bool,
    },
    /// Stochastic count by solving sampled systems over prime fields.
    Count {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Cross-check the intersection oracle against the transversal count for
    /// every pruning, and counts before and after one reduction step.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print the polynomial system of one trial.
    System {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = DEFAULT_PRIMES[0])]
        prime: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Trial index (selects the random stream).
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, value_enum, default_value_t = SaturationArg::Denominators)]
        saturation: SaturationArg,
        #[arg(long, value_enum, default_value_t = RabinowitschArg::PerFactor)]
        rabinowitsch: RabinowitschArg,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Constraints in compact form, e.g. 12347,34567,12567 (needs --r).
    #[arg(conflicts_with = "json", required_unless_present = "json")]
    instance: Option<String>,
    /// Projective dimension plus one: points live in P^{r-1}.
    #[arg(long)]
    r: Option<usize>,
    /// Read the instance from a JSON file {"r":..,"n":..,"constraints":[[..],..]}.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, Error> {
        match (&self.instance, &self.json) {
            (Some(text), None) => parse_instance(text, Format::Compact, self.r),
            (None, Some(path)) => parse_instance(&std::fs::read_to_string(path)?, Format::Json, self.r),
            _ => Err(Error::Parse("give exactly one of a compact instance or --json".into())),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Primes used round-robin across trials (repeat or comma-separate).
    #[arg(long = "prime", alias = "primes", value_delimiter = ',')]
    primes: Vec<u64>,
    #[arg(long, value_enum, default_value_t = SaturationArg::Denominators)]
    saturation: SaturationArg,
    #[arg(long, value_enum, default_value_t = RabinowitschArg::PerFactor)]
    rabinowitsch: RabinowitschArg,
    /// Count the instance as given, without dimension reduction.
    #[arg(long)]
    no_reduce: bool,
    /// Largest S-pair degree before a trial gives up.
    #[arg(long, default_value_t = Limits::default().max_degree)]
    max_degree: u32,
    /// Largest pending S-pair queue before a trial gives up.
    #[arg(long, default_value_t = Limits::default().max_pairs)]
    max_pairs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SaturationArg {
    Denominators,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum RabinowitschArg {
    Single,
    PerFactor,
}

fn system_options(saturation: SaturationArg, rabinowitsch: RabinowitschArg) -> SystemOptions {
    SystemOptions {
        saturation: match saturation {
            SaturationArg::Denominators => Saturation::Denominators,
            SaturationArg::Full => Saturation::Full,
        },
        rabinowitsch: match rabinowitsch {
            RabinowitschArg::Single => Rabinowitsch::Single,
            RabinowitschArg::PerFactor => Rabinowitsch::PerFactor,
        },
    }
}

impl SolverArgs {
    fn options(&self) -> CountOptions {
        let mut opts = CountOptions {
            trials: self.trials,
            seed: self.seed,
            system: system_options(self.saturation, self.rabinowitsch),
            reduce: !self.no_reduce,
            limits: Limits { max_degree: self.max_degree, max_pairs: self.max_pairs, ..Limits::default() },
            ..CountOptions::default()
        };
        if !self.primes.is_empty() {
            opts.primes = self.primes.clone();
        }
        opts
    }
}

/// Rendered result plus exit code.
struct Output {
    text: String,
    json: Value,
    code: u8,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit(_) | Error::TooManyVariables { .. } => RESOURCE_LIMIT,
        Error::Parse(_)
        | Error::Invalid(_)
        | Error::BadPruning { .. }
        | Error::InvalidPrime(_)
        | Error::NoConstraints
        | Error::Io(_)
        | Error::Json(_) => BAD_INPUT,
        _ => INCONSISTENT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("confcount: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(BAD_INPUT);
        }
    }
    match run(&cli.command) {
        Ok(out) => {
            match cli.format {
                OutputFormat::Text => print!("{}", out.text),
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&out.json).expect("report serializes"))
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("confcount: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(command: &Command) -> Result<Output, Error> {
    match command {
        Command::Analyze(args) => analyze(&args.load()?),
        Command::Bound { instance, no_reduce } => bound(&instance.load()?, !no_reduce),
        Command::Count { instance, solver } => {
            let report = stochastic_count(&instance.load()?, &solver.options())?;
            Ok(count_output(&report))
        }
        Command::Verify { instance, solver } => verify(&instance.load()?, &solver.options()),
        Command::System { instance, prime, seed, trial, saturation, rabinowitsch } => {
            let inst = instance.load()?;
            let field = PrimeField::new(*prime)?;
            let mut rng = stream_rng(*seed, *trial);
            let sys = build_system(&inst, field, &mut rng, system_options(*saturation, *rabinowitsch))?;
            let names = sys.variable_names();
            let equations: Vec<String> = sys.equations()?.iter().map(|e| e.display_with(&names).to_string()).collect();
            Ok(Output {
                text: sys.dump()?,
                json: json!({"schema": 1, "prime": prime, "variables": names, "equations": equations}),
                code: OK,
            })
        }
    }
}

fn set_text(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn analyze(inst: &Instance) -> Result<Output, Error> {
    let sigma = surplus(inst)?;
    let by_surplus = sigma == inst.r() as i64 + 1;
    let by_matchings = surplus_condition_via_matchings(inst);
    let common: Vec<usize> = common_markings(inst).into_iter().collect();
    let uncovered = inst.uncovered_markings();
    let trail = fully_reduce(inst);

    let mut text = String::new();
    writeln!(text, "instance {inst}").ok();
    writeln!(text, "n = {}, k = {}, r = {}", inst.n(), inst.k(), inst.r()).ok();
    writeln!(text, "moduli dimension {}", inst.moduli_dimension()).ok();
    let verdict = |b: bool| if b { "holds" } else { "fails" };
    writeln!(text, "surplus {sigma} (condition {} by surplus, {} by matchings)", verdict(by_surplus), verdict(by_matchings))
        .ok();
    writeln!(text, "common markings {}", set_text(&common)).ok();
    if !uncovered.is_empty() {
        writeln!(text, "markings in no constraint {}", set_text(&uncovered)).ok();
    }
    if trail.is_trivial() {
        writeln!(text, "no reduction applies").ok();
    } else {
        let removed = trail.removed_original_labels();
        writeln!(text, "reduces to {} by removing {}", trail.reduced, set_text(&removed)).ok();
    }

    let json = json!({
        "schema": 1,
        "instance": inst,
        "n": inst.n(),
        "k": inst.k(),
        "r": inst.r(),
        "dimension": inst.moduli_dimension(),
        "surplus": sigma,
        "surplus_condition": {"by_surplus": by_surplus, "by_matchings": by_matchings},
        "common_markings": common,
        "uncovered_markings": uncovered,
        "reduction": trail,
    });
    Ok(Output { text, json, code: if by_surplus == by_matchings { OK } else { INCONSISTENT } })
}

fn table_line(label: &str, t: &BoundTable) -> String {
    let values: Vec<String> = t.distinct_bounds.iter().map(ToString::to_string).collect();
    format!("{label}: {}; best {} at S = {}\n", values.join(", "), t.best, set_text(&t.argmin_s))
}

fn bound(inst: &Instance, reduce: bool) -> Result<Output, Error> {
    let direct = best_bound(inst, false)?;
    let reduced = if reduce && reduce_once(inst).is_some() { Some(best_bound(inst, true)?) } else { None };
    let best = reduced.as_ref().map_or(&direct.best, |t| (&t.best).min(&direct.best)).clone();

    let mut text = table_line("bounds", &direct);
    if let Some(t) = &reduced {
        text.push_str(&table_line(&format!("bounds after reduction to {}", t.bounded_instance()), t));
        writeln!(text, "best {best}").ok();
    }
    let json = json!({
        "schema": 1,
        "best": best.to_string().parse::<Value>().expect("integer literal"),
        "direct": direct,
        "reduced": reduced,
    });
    Ok(Output { text, json, code: OK })
}

fn status_code(status: CountStatus) -> u8 {
    match status {
        CountStatus::Ok => OK,
        CountStatus::Inconclusive | CountStatus::Inconsistent => INCONSISTENT,
        CountStatus::ResourceLimit => RESOURCE_LIMIT,
    }
}

fn count_text(report: &CountReport) -> String {
    let mut text = String::new();
    writeln!(text, "instance {}", report.instance).ok();
    if !report.reduction.is_trivial() {
        writeln!(text, "counting the reduced instance {}", report.reduction.reduced).ok();
    }
    for rec in &report.trials {
        let outcome = match &rec.outcome {
            TrialOutcome::Finite { dimension, .. } => format!("dimension {dimension}"),
            TrialOutcome::Infinite { .. } => "positive-dimensional".to_string(),
            TrialOutcome::Failed { reason, .. } => format!("failed: {reason}"),
        };
        writeln!(text, "trial {} (p = {}): {outcome}", rec.trial, rec.prime).ok();
    }
    if report.short_circuit.is_some() {
        writeln!(text, "surplus condition fails: count is 0 without solving").ok();
    }
    match report.count {
        Some(c) => writeln!(
            text,
            "count {c} (agreement {}/{}), status {}",
            report.agreement.0,
            report.agreement.1,
            json!(report.status).as_str().unwrap_or_default()
        ),
        None => writeln!(text, "no count, status {}", json!(report.status).as_str().unwrap_or_default()),
    }
    .ok();
    writeln!(text, "upper bound {} (direct {}, reduced {})", report.best_bound(), report.bound_direct, report.bound_reduced)
        .ok();
    writeln!(
        text,
        "surplus {} (condition {})",
        report.surplus,
        if report.surplus_condition { "holds" } else { "fails" }
    )
    .ok();
    if let Some(c) = report.conjecture_consistent {
        writeln!(text, "conjecture-consistent: {}", if c { "yes" } else { "no" }).ok();
    }
    if report.guards.is_empty() {
        writeln!(text, "guards: none").ok();
    } else {
        let names: Vec<String> = report.guards.iter().map(|g| json!(g).as_str().unwrap_or_default().to_string()).collect();
        writeln!(text, "guards: {}", names.join(", ")).ok();
    }
    match report.status {
        CountStatus::Ok => {}
        CountStatus::ResourceLimit => {
            writeln!(text, "every trial hit a resource limit; raise --max-degree or --max-pairs").ok();
        }
        _ => {
            writeln!(text, "the method is probabilistic; rerun with other --prime or --seed values").ok();
        }
    }
    text
}

fn count_output(report: &CountReport) -> Output {
    Output {
        text: count_text(report),
        json: serde_json::to_value(report).expect("report serializes"),
        code: status_code(report.status),
    }
}

fn verify(inst: &Instance, options: &CountOptions) -> Result<Output, Error> {
    let g = build_graph(inst);
    let level = inst.r() as u32 - 1;
    let mut mismatches = Vec::new();
    let prunings = combinations(inst.n(), inst.r() + 1);
    for s in &prunings {
        let s: Vec<usize> = s.iter().map(|i| i + 1).collect();
        let dp = count_weighted_transversals(&g.prune(&s)?, level)?;
        let chow = intersection_number(inst, &s)?;
        if dp != chow {
            mismatches.push(json!({"S": s, "transversals": dp.to_string(), "intersection_number": chow.to_string()}));
        }
    }
    let reduction: Option<ReductionCheck> = match verify_reduction(inst, options) {
        Ok(rep) => Some(rep),
        Err(Error::NotReducible) => None,
        Err(e) => return Err(e),
    };

    let mut text = String::new();
    if mismatches.is_empty() {
        writeln!(text, "intersection numbers match transversal counts for all {} prunings", prunings.len()).ok();
    } else {
        writeln!(text, "{} of {} prunings disagree", mismatches.len(), prunings.len()).ok();
    }
    let mut code = if mismatches.is_empty() { OK } else { INCONSISTENT };
    match &reduction {
        None => {
            writeln!(text, "no reduction applies").ok();
        }
        Some(rep) => {
            let show = |c: Option<u64>| c.map_or("none".to_string(), |c| c.to_string());
            writeln!(
                text,
                "count {} for {} and {} for {}: {}",
                show(rep.unreduced.count),
                rep.unreduced.instance,
                show(rep.reduced.count),
                rep.reduced.instance,
                if rep.consistent { "consistent" } else { "inconsistent" }
            )
            .ok();
            if !rep.consistent && code == OK {
                let limited = [&rep.unreduced, &rep.reduced].iter().any(|r| r.status == CountStatus::ResourceLimit);
                code = if limited { RESOURCE_LIMIT } else { INCONSISTENT };
            }
        }
    }
    let json = json!({
        "schema": 1,
        "instance": inst,
        "prunings": prunings.len(),
        "mismatches": mismatches,
        "reduction": reduction,
    });
    Ok(Output { text, json, code })
}
