use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bipforge_core::behavior::check_behavior;
use bipforge_core::diagram::{
    check_encodable, enumerate_configurations, expand_unique, DiagramError, EncodabilityReport, EnumerateOptions,
    DEFAULT_NODE_LIMIT,
};
use bipforge_core::dsl::{load_pattern, load_scenario, parse_model, serialize_model, substitute_params, EventSchedule};
use bipforge_core::engine::{self, GlueSource, Policy, RunConfig, Terminal};
use bipforge_core::glue::emit_glue;
use bipforge_core::interaction::interactions_of_configuration;
use bipforge_core::macros::{check_equivalence, encode_macros, interactions_from_macros, MacroError, MacroMode};
use bipforge_core::pil::{formula_of_interactions, DEFAULT_UNIVERSE_BOUND};
use bipforge_core::{
    has_errors, render_interactions, validate_references, CardinalityAssignment, Diagnostic, InteractionSet, Model,
    PortInstance,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_ERRORS: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NOT_ENCODABLE: u8 = 3;
const EXIT_DEADLOCK: u8 = 4;
const EXIT_LIMIT: u8 = 5;

/// Check, expand, encode and run BIP component models.
#[derive(Parser)]
#[command(name = "bipforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reference, behaviour and encodability checks.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Also write the JSON report to this file.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Print the unique configuration of an encodable diagram.
    Expand {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print every configuration conforming to the diagram.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Search nodes to visit before giving up.
        #[arg(long, env = "BIPFORGE_LIMIT", default_value_t = DEFAULT_NODE_LIMIT)]
        limit: u64,
        /// Stop after this many configurations.
        #[arg(long, value_name = "N")]
        max_solutions: Option<usize>,
    },
    /// Print the interaction set.
    Interactions {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        glue: GlueArgs,
    },
    /// Print Require/Accept macros and optionally write the glue XML.
    Encode {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Compare diagram and macro interaction sets.
    Equiv {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Largest port-instance universe to enumerate.
        #[arg(long, default_value_t = DEFAULT_UNIVERSE_BOUND)]
        bound: usize,
    },
    /// Print the canonical DNF of the interaction set.
    Formula {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        glue: GlueArgs,
    },
    /// Execute the model and write a trace.
    Run {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cycles: u64,
        /// Spontaneous event schedule.
        #[arg(long, value_name = "FILE")]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Uniform)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = GlueArg::Diagram)]
        glue: GlueArg,
        /// Trace file; the trace goes to stdout when omitted.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Exit with code 4 when the run gets stuck.
        #[arg(long)]
        fail_on_deadlock: bool,
    },
    /// Instantiate a bundled architecture pattern.
    Pattern {
        name: String,
        #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_binding)]
        params: Vec<(String, u32)>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    file: PathBuf,
    /// Cardinality override.
    #[arg(long = "card", value_name = "TYPE=N", value_parser = parse_binding)]
    cards: Vec<(String, u32)>,
    /// Value for a `$name` placeholder or a symbolic cardinality.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_binding)]
    params: Vec<(String, u32)>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct GlueArgs {
    #[arg(long, value_enum, default_value_t = GlueArg::Diagram)]
    glue: GlueArg,
    #[arg(long, value_enum, default_value_t = MacroModeArg::Scoped)]
    macro_mode: MacroModeArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GlueArg {
    Diagram,
    Macros,
}

#[derive(Clone, Copy, ValueEnum)]
enum MacroModeArg {
    Scoped,
    Flat,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Uniform,
    First,
}

fn parse_binding(s: &str) -> Result<(String, u32), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v = v.trim().parse().map_err(|_| format!("'{v}' is not a non-negative integer"))?;
    Ok((k.trim().to_string(), v))
}

/// Terminates with the given code; whatever needed saying is already printed.
#[derive(Debug)]
struct Exit(u8);

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8) -> anyhow::Error {
    Exit(code).into()
}

struct Loaded {
    model: Model,
    overrides: BTreeMap<String, u32>,
    params: BTreeMap<String, u32>,
}

impl Loaded {
    fn cards(&self) -> anyhow::Result<CardinalityAssignment> {
        for name in self.overrides.keys() {
            if self.model.component(name).is_none() {
                bail!("--card names unknown component type [{name}]");
            }
        }
        Ok(CardinalityAssignment::resolve(&self.model, &self.overrides, &self.params)?)
    }
}

fn load(args: &ModelArgs) -> anyhow::Result<Loaded> {
    let file = args.file.display().to_string();
    let raw = fs::read_to_string(&args.file).with_context(|| format!("cannot read {file}"))?;
    let params: BTreeMap<String, u32> = args.params.iter().cloned().collect();
    let text = match substitute_params(&raw, &params) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ERROR PARSE {file} {e}");
            return Err(exit(EXIT_PARSE));
        }
    };
    let model = match parse_model(&text, &file) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("ERROR PARSE {} {}", e.span, e.message);
            return Err(exit(EXIT_PARSE));
        }
    };
    Ok(Loaded { model, overrides: args.cards.iter().cloned().collect(), params })
}

/// Prints diagnostics to stderr and stops on errors.
fn gate(model: &Model, behavior: bool) -> anyhow::Result<()> {
    let mut diags = validate_references(model);
    if behavior && !has_errors(&diags) {
        diags.extend(check_behavior(model));
    }
    for d in &diags {
        eprintln!("{d}");
    }
    if has_errors(&diags) {
        return Err(exit(EXIT_ERRORS));
    }
    Ok(())
}

fn not_encodable(report: &EncodabilityReport) -> anyhow::Error {
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    exit(EXIT_NOT_ENCODABLE)
}

fn diagram_error(err: DiagramError) -> anyhow::Error {
    match err {
        DiagramError::NotEncodable(r) => not_encodable(&r),
        e @ DiagramError::LimitExceeded { .. } => {
            eprintln!("ERROR LIMIT {e}");
            exit(EXIT_LIMIT)
        }
    }
}

fn macro_error(err: MacroError) -> anyhow::Error {
    match err {
        MacroError::Diagram(e) => diagram_error(e),
        e @ MacroError::UniverseTooLarge { .. } => {
            eprintln!("ERROR LIMIT {e}");
            exit(EXIT_LIMIT)
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn glue_set(model: &Model, cards: &CardinalityAssignment, glue: &GlueArgs) -> anyhow::Result<InteractionSet> {
    match glue.glue {
        GlueArg::Diagram => Ok(interactions_of_configuration(&expand_unique(model, cards).map_err(diagram_error)?)),
        GlueArg::Macros => {
            let mode = match glue.macro_mode {
                MacroModeArg::Scoped => MacroMode::Scoped,
                MacroModeArg::Flat => MacroMode::Flat,
            };
            interactions_from_macros(&encode_macros(model), cards, DEFAULT_UNIVERSE_BOUND, mode).map_err(macro_error)
        }
    }
}

fn interactions_json(set: &InteractionSet) -> serde_json::Value {
    json!(set.iter().map(|a| a.iter().map(|p| p.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn check(model_args: &ModelArgs, out: &OutputArgs, report_file: Option<&Path>) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    let mut diags: Vec<Diagnostic> = validate_references(&loaded.model);
    let sound = !has_errors(&diags);
    if sound {
        diags.extend(check_behavior(&loaded.model));
    }
    let mut code = if has_errors(&diags) { EXIT_ERRORS } else { 0 };

    let mut card_error = None;
    let mut encodability = None;
    if sound {
        match loaded.cards() {
            Ok(cards) => encodability = Some(check_encodable(&loaded.model, &cards)),
            Err(e) => {
                card_error = Some(e.to_string());
                code = EXIT_ERRORS;
            }
        }
    }
    if code == 0 && encodability.as_ref().is_some_and(|r| !r.verdict) {
        code = EXIT_NOT_ENCODABLE;
    }

    let doc = json!({
        "diagnostics": diags,
        "cardinalityError": card_error,
        "encodability": encodability,
        "exitCode": code,
    });
    if let Some(path) = report_file {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    }
    match out.format {
        Format::Json => print_json(&doc)?,
        Format::Text => {
            for d in &diags {
                println!("{d}");
            }
            if let Some(e) = &card_error {
                println!("ERROR CARDINALITY {e}");
            }
            if let Some(r) = &encodability {
                for d in &r.diagnostics {
                    println!("{d}");
                }
                for end in &r.ends {
                    println!("{end}");
                }
                println!("encodable: {}", if r.verdict { "yes" } else { "no" });
            }
        }
    }
    Ok(code)
}

fn expand(model_args: &ModelArgs, out: &OutputArgs) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, false)?;
    let cards = loaded.cards()?;
    let config = expand_unique(&loaded.model, &cards).map_err(diagram_error)?;
    match out.format {
        Format::Json => print_json(&json!({
            "connectors": config.connectors().iter().map(|c| json!({
                "motif": c.motif,
                "text": c.root.to_string(),
                "root": c.root,
            })).collect::<Vec<_>>(),
        }))?,
        Format::Text => print!("{config}"),
    }
    Ok(0)
}

fn enumerate(model_args: &ModelArgs, out: &OutputArgs, limit: u64, max_solutions: Option<usize>) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, false)?;
    let cards = loaded.cards()?;
    let opts = EnumerateOptions { node_limit: limit, max_solutions };
    let configs = enumerate_configurations(&loaded.model, &cards, opts).map_err(diagram_error)?;
    match out.format {
        Format::Json => print_json(&json!({
            "count": configs.len(),
            "configurations": configs.iter().map(|c| {
                c.connectors().iter().map(|k| k.to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        }))?,
        Format::Text => {
            for (i, c) in configs.iter().enumerate() {
                println!("configuration {}:", i + 1);
                for k in c.connectors() {
                    println!("  {k}");
                }
            }
            println!("{} configuration(s)", configs.len());
        }
    }
    Ok(0)
}

fn interactions(model_args: &ModelArgs, out: &OutputArgs, glue: &GlueArgs) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, false)?;
    let cards = loaded.cards()?;
    let set = glue_set(&loaded.model, &cards, glue)?;
    match out.format {
        Format::Json => print_json(&json!({ "interactions": interactions_json(&set) }))?,
        Format::Text => print!("{}", render_interactions(&set)),
    }
    Ok(0)
}

fn encode(model_args: &ModelArgs, out: &OutputArgs, output: Option<&Path>) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, true)?;
    let macros = encode_macros(&loaded.model);
    match out.format {
        Format::Json => print_json(&macros)?,
        Format::Text => print!("{macros}"),
    }
    if let Some(path) = output {
        write_file(path, &emit_glue(&macros))?;
    }
    Ok(0)
}

fn equiv(model_args: &ModelArgs, out: &OutputArgs, bound: usize) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, false)?;
    let cards = loaded.cards()?;
    let report = check_equivalence(&loaded.model, &cards, bound).map_err(macro_error)?;
    match out.format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            println!("equal: {}", if report.equal { "yes" } else { "no" });
            for a in &report.only_in_diagram {
                println!("only in diagram: {a}");
            }
            for a in &report.only_in_macros {
                println!("only in macros: {a}");
            }
        }
    }
    Ok(if report.equal { 0 } else { EXIT_ERRORS })
}

fn formula(model_args: &ModelArgs, out: &OutputArgs, glue: &GlueArgs) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, false)?;
    let cards = loaded.cards()?;
    let set = glue_set(&loaded.model, &cards, glue)?;
    let universe: BTreeSet<PortInstance> =
        loaded.model.motif_port_types().iter().flat_map(|t| cards.port_instances(t)).collect();
    let f = formula_of_interactions(&set, &universe)?;
    match out.format {
        Format::Json => print_json(&json!({
            "universe": universe.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "formula": f.to_string(),
        }))?,
        Format::Text => println!("{f}"),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run(
    model_args: &ModelArgs,
    seed: u64,
    cycles: u64,
    scenario: Option<&Path>,
    policy: PolicyArg,
    glue: GlueArg,
    trace_file: Option<&Path>,
    fail_on_deadlock: bool,
) -> anyhow::Result<u8> {
    let loaded = load(model_args)?;
    gate(&loaded.model, true)?;
    let cards = loaded.cards()?;
    let schedule = match scenario {
        None => EventSchedule::default(),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            match load_scenario(&text, &path.display().to_string()) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("ERROR PARSE {} {}", e.span, e.message);
                    return Err(exit(EXIT_PARSE));
                }
            }
        }
    };
    let config = RunConfig {
        seed,
        max_cycles: cycles,
        policy: match policy {
            PolicyArg::Uniform => Policy::Uniform,
            PolicyArg::First => Policy::First,
        },
        glue: match glue {
            GlueArg::Diagram => GlueSource::Diagram,
            GlueArg::Macros => GlueSource::Macros,
        },
    };
    let trace = match engine::run(&loaded.model, &cards, config, &schedule) {
        Ok(t) => t,
        Err(engine::EngineError::Diagram(e)) => return Err(diagram_error(e)),
        Err(engine::EngineError::Macro(e)) => return Err(macro_error(e)),
        Err(e) => {
            eprintln!("ERROR ENGINE {e}");
            return Err(exit(EXIT_ERRORS));
        }
    };
    for rec in &trace.records {
        for d in &rec.dropped {
            eprintln!("WARNING DROPPED_EVENT cycle {}: {d}", rec.cycle);
        }
    }
    let terminal = serde_json::to_value(trace.terminal)?;
    match trace_file {
        Some(path) => {
            write_file(path, &trace.to_json())?;
            println!("{} cycle(s), terminal {}", trace.records.len(), terminal.as_str().unwrap_or_default());
        }
        None => print!("{}", trace.to_json()),
    }
    let stuck = matches!(trace.terminal, Terminal::Deadlock | Terminal::EventExhausted);
    Ok(if stuck && fail_on_deadlock { EXIT_DEADLOCK } else { 0 })
}

fn pattern(name: &str, params: &[(String, u32)], output: Option<&Path>) -> anyhow::Result<u8> {
    let params: BTreeMap<String, u32> = params.iter().cloned().collect();
    let model = load_pattern(name, &params)?;
    let text = serialize_model(&model);
    match output {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Check { model, out, report } => check(model, out, report.as_deref()),
        Command::Expand { model, out } => expand(model, out),
        Command::Enumerate { model, out, limit, max_solutions } => enumerate(model, out, *limit, *max_solutions),
        Command::Interactions { model, out, glue } => interactions(model, out, glue),
        Command::Encode { model, out, output } => encode(model, out, output.as_deref()),
        Command::Equiv { model, out, bound } => equiv(model, out, *bound),
        Command::Formula { model, out, glue } => formula(model, out, glue),
        Command::Run { model, seed, cycles, scenario, policy, glue, trace, fail_on_deadlock } => {
            run(model, *seed, *cycles, scenario.as_deref(), *policy, *glue, trace.as_deref(), *fail_on_deadlock)
        }
        Command::Pattern { name, params, output } => pattern(name, params, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => match e.downcast_ref::<Exit>() {
            Some(Exit(code)) => ExitCode::from(*code),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_ERRORS)
            }
        },
    }
}
