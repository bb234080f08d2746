//! Command implementations behind the `fairdiv` binary.
//!
//! Every command produces a JSON result document on success. Agents are
//! 1-based on the command line and in output; goods are referenced by label.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use fairdiv::fairness::{self, check_all, fair_set, mms_share, Criterion, ReportEntry};
use fairdiv::format::{self, allocation_to_json, instance_to_json, parse_allocation, parse_instance};
use fairdiv::mechanisms::{run, GoodTieBreak, MechanismConfig, MechanismId, SourceTieBreak};
use fairdiv::repro::{run_case, Case};
use fairdiv::strategy::{best_misreport, tie_break_configs, MisreportSpace, DEFAULT_MAX_RUNS};
use fairdiv::{Error, ErrorClass, Instance};

pub const TOOL: &str = "fairdiv";

#[derive(Debug, Parser)]
#[command(name = "fairdiv", version, about = "Fair allocation of indivisible goods: checkers, mechanisms, manipulation search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an allocation mechanism on an instance.
    Allocate(AllocateArgs),
    /// Check an allocation against fairness criteria.
    Check(CheckArgs),
    /// Compute maximin shares.
    Mms(MmsArgs),
    /// List every allocation satisfying a criterion.
    Enumerate(EnumerateArgs),
    /// Search for a profitable misreport.
    Manipulate(ManipulateArgs),
    /// Run a built-in reproduction case.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MechanismArgs {
    #[arg(long, value_parser = parse_mechanism)]
    pub mechanism: MechanismId,
    /// Agent order as 1-based indices, e.g. `2,1`.
    #[arg(long)]
    pub agent_order: Option<String>,
    /// Good order as labels, e.g. `d,a,b,c`.
    #[arg(long)]
    pub item_order: Option<String>,
    /// Resolution of equally valued goods: lowest or highest index.
    #[arg(long, default_value = "lowest", value_parser = parse_good_tie)]
    pub tie_break: GoodTieBreak,
    /// Choice among unenvied agents: lowest, highest or least-value.
    #[arg(long, default_value = "lowest", value_parser = parse_source_tie)]
    pub source_tie_break: SourceTieBreak,
    /// Source rule used while one good is handed out, e.g. `b=highest`; repeatable.
    #[arg(long = "source-tie-at")]
    pub source_tie_at: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AllocateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Include the step-by-step trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub allocation: PathBuf,
    /// Comma-separated subset of prop,ef,ef1,efx,mms; all when omitted.
    #[arg(long)]
    pub criteria: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MmsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Single 1-based agent; all agents when omitted.
    #[arg(long)]
    pub agent: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_criterion)]
    pub criterion: Criterion,
}

#[derive(Debug, Clone, Args)]
pub struct ManipulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// 1-based manipulating agent.
    #[arg(long)]
    pub agent: usize,
    /// Additive report grid `lo:hi:step`.
    #[arg(long, conflicts_with = "space", required_unless_present = "space")]
    pub grid: Option<String>,
    /// Named report space; only `single-minded` is available.
    #[arg(long)]
    pub space: Option<String>,
    /// Repeat the search under all six tie-break configurations.
    #[arg(long)]
    pub quantify_tie_breaks: bool,
    /// Budget of mechanism runs per search.
    #[arg(long, default_value_t = DEFAULT_MAX_RUNS)]
    pub max_runs: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long, value_parser = parse_case)]
    pub case: Case,
}

fn parse_mechanism(s: &str) -> Result<MechanismId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_good_tie(s: &str) -> Result<GoodTieBreak, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_source_tie(s: &str) -> Result<SourceTieBreak, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_case(s: &str) -> Result<Case, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A finished command: its document and exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: Json,
    pub exit_code: i32,
}

/// Command failure, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self.error.class() {
            ErrorClass::Input => 2,
            ErrorClass::Restriction => 3,
            ErrorClass::Capacity => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Failure {
        Failure { error }
    }
}

pub type CmdResult = Result<Outcome, Failure>;

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Allocate(args) => cmd_allocate(args),
        Command::Check(args) => cmd_check(args),
        Command::Mms(args) => cmd_mms(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Manipulate(args) => cmd_manipulate(args),
        Command::Repro(args) => Ok(cmd_repro(args)),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<Instance, Error> {
    parse_instance(&read(path)?).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn document(command: &str, config: Json, instance: Option<&Instance>, result: Json) -> Json {
    json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "instance": instance.map(instance_to_json),
        "result": result,
    })
}

fn agent_index(one_based: usize, instance: &Instance) -> Result<usize, Error> {
    if one_based == 0 || one_based > instance.agents() {
        return Err(Error::Config(format!(
            "agent {one_based} is out of range 1..={}",
            instance.agents()
        )));
    }
    Ok(one_based - 1)
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Builds the mechanism configuration from flags, resolving labels and 1-based agents.
pub fn mechanism_config(args: &MechanismArgs, instance: &Instance) -> Result<MechanismConfig, Error> {
    let agent_order = args
        .agent_order
        .as_deref()
        .map(|list| {
            split_list(list)
                .map(|a| {
                    let index: usize = a.parse().map_err(|_| Error::Config(format!("bad agent `{a}` in agent order")))?;
                    agent_index(index, instance)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let item_order = args
        .item_order
        .as_deref()
        .map(|list| split_list(list).map(|g| instance.good_index(g)).collect::<Result<Vec<_>, _>>())
        .transpose()?;
    let mut source_tie_overrides = BTreeMap::new();
    for entry in &args.source_tie_at {
        let (good, rule) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected GOOD=RULE, got `{entry}`")))?;
        source_tie_overrides.insert(instance.good_index(good.trim())?, rule.trim().parse()?);
    }
    let config = MechanismConfig {
        agent_order,
        item_order,
        good_tie_break: args.tie_break,
        source_tie_break: args.source_tie_break,
        source_tie_overrides,
    };
    config.agent_order(instance.agents())?;
    config.item_order(instance.goods_count())?;
    Ok(config)
}

fn mechanism_echo(mechanism: MechanismId, config: &MechanismConfig, instance: &Instance) -> Json {
    json!({"mechanism": mechanism.key(), "mechanism_config": format::config_to_json(instance, config)})
}

fn merge(mut base: Json, extra: Json) -> Json {
    if let (Some(base), Json::Object(extra)) = (base.as_object_mut(), extra) {
        base.extend(extra);
    }
    base
}

pub fn cmd_allocate(args: &AllocateArgs) -> CmdResult {
    let instance = load_instance(&args.instance)?;
    let mechanism = args.mechanism.mechanism;
    let config = mechanism_config(&args.mechanism, &instance)?;
    let outcome = run(mechanism, &instance, &config)?;
    let mut result = json!({"allocation": allocation_to_json(&instance, &outcome.allocation)});
    if args.trace {
        result["trace"] = format::trace_to_json(&instance, &outcome.trace);
    }
    let echo = merge(mechanism_echo(mechanism, &config, &instance), json!({"trace": args.trace}));
    Ok(Outcome { document: document("allocate", echo, Some(&instance), result), exit_code: 0 })
}

pub fn cmd_check(args: &CheckArgs) -> CmdResult {
    let instance = load_instance(&args.instance)?;
    let allocation = parse_allocation(&read(&args.allocation)?, &instance)?;
    let verdicts: Vec<Json>;
    let all_hold;
    let criteria_echo;
    match args.criteria.as_deref() {
        None => {
            let report = check_all(&instance, &allocation)?;
            all_hold = report.entries.iter().all(|e| match e {
                ReportEntry::Checked(v) => v.holds,
                ReportEntry::Skipped { .. } => true,
            });
            verdicts = format::report_to_json(&instance, &report).as_array().cloned().unwrap_or_default();
            criteria_echo = Json::Null;
        }
        Some(list) => {
            let criteria: Vec<Criterion> = split_list(list).map(str::parse).collect::<Result<_, _>>()?;
            let checked: Vec<_> = criteria
                .iter()
                .map(|&c| fairness::check(&instance, &allocation, c))
                .collect::<Result<_, _>>()?;
            all_hold = checked.iter().all(|v| v.holds);
            verdicts = checked.iter().map(|v| format::verdict_to_json(&instance, v)).collect();
            criteria_echo = json!(criteria.iter().map(|c| c.key()).collect::<Vec<_>>());
        }
    }
    let result = json!({
        "allocation": allocation_to_json(&instance, &allocation),
        "all_hold": all_hold,
        "verdicts": verdicts,
    });
    Ok(Outcome {
        document: document("check", json!({"criteria": criteria_echo}), Some(&instance), result),
        exit_code: if all_hold { 0 } else { 1 },
    })
}

pub fn cmd_mms(args: &MmsArgs) -> CmdResult {
    let instance = load_instance(&args.instance)?;
    let agents: Vec<usize> = match args.agent {
        Some(a) => vec![agent_index(a, &instance)?],
        None => (0..instance.agents()).collect(),
    };
    let shares: Vec<Json> = agents
        .iter()
        .map(|&a| mms_share(&instance, a).map(|s| format::mms_share_to_json(&instance, &s)))
        .collect::<Result<_, _>>()?;
    Ok(Outcome {
        document: document("mms", json!({"agent": args.agent}), Some(&instance), json!({"shares": shares})),
        exit_code: 0,
    })
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> CmdResult {
    let instance = load_instance(&args.instance)?;
    let set = fair_set(&instance, args.criterion)?;
    let result = json!({
        "count": set.len(),
        "allocations": set.iter().map(|a| allocation_to_json(&instance, a)).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        document: document("enumerate", json!({"criterion": args.criterion.key()}), Some(&instance), result),
        exit_code: 0,
    })
}

/// Parses `lo:hi:step`.
pub fn parse_grid(spec: &str) -> Result<MisreportSpace, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let numbers: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("grid `{spec}` must be lo:hi:step with non-negative integers")))?;
    match numbers[..] {
        [lo, hi, step] => MisreportSpace::grid(lo, hi, step),
        _ => Err(Error::Config(format!("grid `{spec}` must be lo:hi:step"))),
    }
}

pub fn cmd_manipulate(args: &ManipulateArgs) -> CmdResult {
    let instance = load_instance(&args.instance)?;
    let mechanism = args.mechanism.mechanism;
    let base = mechanism_config(&args.mechanism, &instance)?;
    let agent = agent_index(args.agent, &instance)?;
    let space = match (&args.grid, args.space.as_deref()) {
        (Some(grid), _) => parse_grid(grid)?,
        (None, Some("single-minded")) => MisreportSpace::SingleMinded,
        (None, Some(other)) => return Err(Error::Config(format!("unknown space `{other}`")).into()),
        (None, None) => return Err(Error::Config("either --grid or --space is required".into()).into()),
    };
    let configs = if args.quantify_tie_breaks { tie_break_configs(&base) } else { vec![base.clone()] };
    let mut searches = Vec::with_capacity(configs.len());
    let mut found_any = false;
    for config in &configs {
        let witness = best_misreport(mechanism, &instance, agent, &space, config, args.max_runs)?;
        found_any |= witness.is_some();
        searches.push(json!({
            "mechanism_config": format::config_to_json(&instance, config),
            "witness": witness.as_ref().map(format::manipulation_to_json),
            "verdict": if witness.is_some() { "manipulable" } else { "no profitable misreport on grid" },
        }));
    }
    let echo = merge(
        mechanism_echo(mechanism, &base, &instance),
        json!({
            "agent": args.agent,
            "space": format::space_to_json(&instance, &space),
            "quantify_tie_breaks": args.quantify_tie_breaks,
            "max_runs": args.max_runs,
        }),
    );
    let result = json!({"manipulable": found_any, "searches": searches});
    Ok(Outcome {
        document: document("manipulate", echo, Some(&instance), result),
        exit_code: if found_any { 1 } else { 0 },
    })
}

pub fn cmd_repro(args: &ReproArgs) -> Outcome {
    let report = run_case(args.case);
    let assertions: Vec<Json> = report
        .assertions
        .iter()
        .map(|a| json!({"name": a.name, "status": if a.pass { "PASS" } else { "FAIL" }, "detail": a.detail}))
        .collect();
    let result = json!({"passed": report.passed(), "assertions": assertions});
    Outcome {
        document: document("repro", json!({"case": args.case.key()}), None, result),
        exit_code: if report.passed() { 0 } else { 1 },
    }
}
