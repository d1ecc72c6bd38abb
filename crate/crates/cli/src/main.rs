use std::collections::BTreeMap;
use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fks_core::behavior::{IdlePolicy, SemanticsOptions, DEFAULT_BUDGET};
use fks_core::consistency::{all_codes, completeness_report, gate, run_rules, Finding};
use fks_core::kernel::{TimedStream, Valuation};
use fks_core::model::Model;
use fks_core::network::NetworkDef;
use fks_core::simulator::{self, compile_model, create_session, SimService, Stimulus};
use fks_core::speclang::{format_model, parse_model, parse_stream_spec, print_trace, EventDecl, Pos, Severity, TraceDecl};
use fks_core::traces::{generate_traces, membership, MembershipVerdict};

// A closed stdout (e.g. `fks trace check | head`) ends the run quietly.
macro_rules! println {
    () => {
        emit("\n")
    };
    ($($arg:tt)*) => {
        emit(&(format!($($arg)*) + "\n"))
    };
}

macro_rules! print {
    ($($arg:tt)*) => {
        emit(&format!($($arg)*))
    };
}

fn emit(text: &str) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("fks: {e}");
        std::process::exit(2);
    }
}

#[derive(Parser)]
#[command(name = "fks", version, about = "Timed-stream component models: check, refine, trace and simulate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse documents and report diagnostics.
    Parse { files: Vec<PathBuf> },
    /// Print a document in canonical form.
    Fmt {
        file: PathBuf,
        /// Exit with status 1 if the file is not already canonical.
        #[arg(long)]
        check: bool,
    },
    /// Wellformedness and consistency errors of a corpus.
    Check { file: PathBuf },
    /// Run consistency rules.
    Lint {
        /// Comma-separated rule codes, or `all`.
        #[arg(long, default_value = "all")]
        rules: String,
        #[arg(long)]
        json: bool,
        files: Vec<PathBuf>,
    },
    /// Check refinement claims.
    Refine {
        file: PathBuf,
        #[arg(long)]
        claim: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    #[command(subcommand)]
    Trace(TraceCommand),
    #[command(subcommand)]
    Sim(SimCommand),
    /// Compile a network to the JSON transition-table form.
    Compile {
        file: PathBuf,
        #[arg(long)]
        network: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Membership of every trace (or one) against its network.
    Check {
        file: PathBuf,
        #[arg(long)]
        trace: Option<String>,
        /// Defaults to the trace's last interval plus one.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = IdlePolicy::Idle)]
        policy: IdlePolicy,
    },
    /// Generate the traces of a network for one input.
    Gen {
        file: PathBuf,
        #[arg(long)]
        network: String,
        /// E.g. `In = [3] [] []`.
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 10)]
        limit: usize,
        #[arg(long, default_value_t = IdlePolicy::Idle)]
        policy: IdlePolicy,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a stimulus script and print one delta per interval.
    Run {
        file: PathBuf,
        #[arg(long)]
        network: String,
        /// E.g. `In = [3] []`; one bracket per interval.
        #[arg(long, default_value = "")]
        input: String,
        /// Intervals to run; defaults to the script length.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = IdlePolicy::Idle)]
        policy: IdlePolicy,
        #[arg(long)]
        json: bool,
    },
    /// Serve the line-delimited JSON protocol.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

/// Exit status 2: the tool itself could not do its job.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("fks: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Parse { files } => parse(&files),
        Command::Fmt { file, check } => fmt(&file, check),
        Command::Check { file } => check(&file),
        Command::Lint { rules, json, files } => lint(&rules, json, &files),
        Command::Refine {
            file,
            claim,
            json,
            budget,
        } => refine(&file, claim.as_deref(), json, budget),
        Command::Trace(TraceCommand::Check {
            file,
            trace,
            horizon,
            policy,
        }) => trace_check(&file, trace.as_deref(), horizon, policy),
        Command::Trace(TraceCommand::Gen {
            file,
            network,
            input,
            horizon,
            limit,
            policy,
        }) => trace_gen(&file, &network, &input, horizon, limit, policy),
        Command::Sim(SimCommand::Run {
            file,
            network,
            input,
            steps,
            seed,
            policy,
            json,
        }) => sim_run(&file, &network, &input, steps, seed, policy, json),
        Command::Sim(SimCommand::Serve { port }) => {
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            eprintln!("fks: serving on {}", listener.local_addr()?);
            simulator::serve(listener, Arc::new(SimService::new()))?;
            Ok(true)
        }
        Command::Compile { file, network, output } => compile(&file, &network, output.as_deref()),
    }
}

fn load(file: &Path) -> Result<Model, Failure> {
    Model::load(file).map_err(|e| {
        let detail: Vec<String> = e.diagnostics().iter().map(|d| d.to_string()).collect();
        Failure(format!("{e}\n{}", detail.join("\n")))
    })
}

fn parse(files: &[PathBuf]) -> Outcome {
    let mut ok = true;
    for f in files {
        let text = fs::read_to_string(f)?;
        let report = parse_model(&text);
        for d in &report.diagnostics {
            println!("{}: {d}", f.display());
        }
        ok &= report.is_success();
    }
    Ok(ok)
}

fn fmt(file: &Path, check: bool) -> Outcome {
    let text = fs::read_to_string(file)?;
    let report = parse_model(&text);
    let Some(doc) = report.document else {
        for d in &report.diagnostics {
            eprintln!("{}: {d}", file.display());
        }
        return Ok(false);
    };
    let canonical = format_model(&doc);
    if check {
        return Ok(canonical == text);
    }
    print!("{canonical}");
    Ok(true)
}

fn check(file: &Path) -> Outcome {
    let model = load(file)?;
    let errors = gate(model.corpus());
    for f in &errors {
        println!("{f}");
    }
    for f in completeness_report(model.corpus()) {
        println!("{f}");
    }
    Ok(errors.is_empty())
}

fn lint(rules: &str, json: bool, files: &[PathBuf]) -> Outcome {
    let selection: Vec<String> = if rules == "all" {
        all_codes().into_iter().collect()
    } else {
        rules.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    let mut findings: Vec<Finding> = Vec::new();
    for f in files {
        let model = load(f)?;
        findings.extend(run_rules(model.corpus(), &selection)?);
    }
    findings.sort();
    findings.dedup();
    for f in &findings {
        if json {
            println!("{}", serde_json::to_string(f)?);
        } else {
            println!("{f}");
        }
    }
    Ok(!findings.iter().any(|f| f.severity == Severity::Error))
}

fn refine(file: &Path, claim: Option<&str>, json: bool, budget: usize) -> Outcome {
    let model = load(file)?;
    let names: Vec<String> = match claim {
        Some(c) => vec![c.to_string()],
        None => model.claim_names().into_iter().map(String::from).collect(),
    };
    let mut all_hold = true;
    for name in names {
        let claim = model.claim(&name)?;
        let check = claim.prepare(&model, budget)?;
        let verdict = check.run()?;
        all_hold &= verdict.holds();
        if json {
            let record = serde_json::json!({ "claim": name, "kind": claim.kind.keyword(), "result": verdict });
            println!("{record}");
            continue;
        }
        match verdict.witness() {
            None => println!("{name}: holds at horizon {}", claim.bounds.horizon),
            Some(w) => {
                println!("{name}: fails at horizon {}", w.horizon);
                println!("  input:  {}", w.input);
                println!("  output: {}", w.offending_output);
                println!("  {}", w.explanation);
            }
        }
    }
    Ok(all_hold)
}

fn trace_decls(model: &Model) -> Vec<&TraceDecl> {
    model.corpus().docs().flat_map(|d| d.traces.iter()).collect()
}

fn trace_check(file: &Path, only: Option<&str>, horizon: Option<usize>, policy: IdlePolicy) -> Outcome {
    let model = load(file)?;
    let errors = gate(model.corpus());
    if !errors.is_empty() {
        for f in &errors {
            eprintln!("{f}");
        }
        return Err(Failure("the corpus has consistency errors".into()));
    }
    let opts = SemanticsOptions::default().with_policy(policy);
    let mut ok = true;
    let mut checked = 0;
    for decl in trace_decls(&model) {
        if only.is_some_and(|n| n != decl.name) {
            continue;
        }
        checked += 1;
        let (trace, network) = model.trace(&decl.name)?;
        let net = model.network(&network)?;
        let k = horizon.unwrap_or(trace.span() + 1);
        match membership(&trace, &net, k, &opts)? {
            MembershipVerdict::Member => println!("{}: member", decl.name),
            MembershipVerdict::NonMember(d) => {
                ok = false;
                let at = d.index.map(|i| format!("event {}", i + 1)).unwrap_or_else(|| "end".into());
                println!("{}: not a member; diverges at {at} (interval {})", decl.name, d.interval);
                if let Some(e) = d.expected {
                    println!("  expected   {e}");
                }
                if let Some(e) = d.unexpected {
                    println!("  run offers {e}");
                }
            }
        }
    }
    if let Some(name) = only.filter(|_| checked == 0) {
        return Err(Failure(format!("no trace named `{name}`")));
    }
    Ok(ok)
}

/// Builds a valuation over `net`'s inputs from a stream spec; missing
/// channels are silent and short streams are padded.
fn valuation(net: &NetworkDef, spec: &str, horizon: Option<usize>) -> Result<Valuation, Failure> {
    let parsed = parse_stream_spec(spec).map_err(|e| Failure(format!("--input: {}", e.message)))?;
    for ch in parsed.keys() {
        if net.input(ch).is_none() {
            return Err(Failure(format!("`{}` has no input `{ch}`", net.name)));
        }
    }
    let k = horizon.unwrap_or_else(|| parsed.values().map(Vec::len).max().unwrap_or(0));
    let mut streams = BTreeMap::new();
    for c in &net.inputs {
        let intervals = parsed.get(&c.name).cloned().unwrap_or_default();
        if intervals.len() > k {
            return Err(Failure(format!("`{}` is longer than the horizon {k}", c.name)));
        }
        streams.insert(c.name.clone(), TimedStream::new(intervals).extended_to(k));
    }
    Ok(Valuation::new(k, streams)?)
}

fn trace_gen(
    file: &Path,
    network: &str,
    input: &str,
    horizon: Option<usize>,
    limit: usize,
    policy: IdlePolicy,
) -> Outcome {
    let model = load(file)?;
    let net = model.network(network)?;
    let x = valuation(&net, input, horizon)?;
    let opts = SemanticsOptions::default().with_policy(policy);
    for (i, t) in generate_traces(&net, &x, x.horizon(), limit, &opts)?.iter().enumerate() {
        let decl = TraceDecl {
            name: format!("Generated{}", i + 1),
            network: network.to_string(),
            events: t
                .events()
                .iter()
                .map(|e| EventDecl {
                    sender: e.sender.clone(),
                    receiver: e.receiver.clone(),
                    channel: e.channel.clone(),
                    message: e.message.clone(),
                    interval: e.interval,
                    pos: Pos::default(),
                })
                .collect(),
            pos: Pos::default(),
        };
        if i > 0 {
            println!();
        }
        print!("{}", print_trace(&decl));
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn sim_run(
    file: &Path,
    network: &str,
    input: &str,
    steps: Option<usize>,
    seed: u64,
    policy: IdlePolicy,
    json: bool,
) -> Outcome {
    let model = load(file)?;
    let mut session = match create_session(&model, network, seed, policy, "run") {
        Ok(s) => s,
        Err(simulator::SimError::Rejected(findings)) => {
            for f in &findings {
                eprintln!("{f}");
            }
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let net = session.engine().network().clone();
    let script = valuation(&net, input, None)?;
    let steps = steps.unwrap_or(script.horizon());
    for i in 1..=steps {
        let stimuli: Vec<Stimulus> = script
            .at_interval(i)
            .into_iter()
            .flat_map(|(ch, msgs)| msgs.into_iter().map(move |v| Stimulus::new(ch.clone(), v)))
            .collect();
        let delta = session.step(&stimuli, None)?;
        if json {
            println!("{}", serde_json::to_string(&delta)?);
            continue;
        }
        let states: Vec<String> = delta
            .nodes
            .iter()
            .map(|n| match n.transition {
                Some(t) => format!("{}: {} -> {} (t{})", n.instance, n.from, n.to, t + 1),
                None => format!("{}: {} idle", n.instance, n.from),
            })
            .collect();
        let outputs: Vec<String> = delta
            .outputs
            .iter()
            .map(|(ch, vs)| {
                let vs: Vec<String> = vs.iter().map(ToString::to_string).collect();
                format!("{ch} = [{}]", vs.join(", "))
            })
            .collect();
        println!("@{:<3} {} | {}", delta.interval, outputs.join("; "), states.join("; "));
    }
    Ok(true)
}

fn compile(file: &Path, network: &str, output: Option<&Path>) -> Outcome {
    let model = load(file)?;
    let ir = match compile_model(&model, network) {
        Ok(ir) => ir,
        Err(simulator::SimError::Rejected(findings)) => {
            for f in &findings {
                eprintln!("{f}");
            }
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let text = serde_json::to_string_pretty(&ir)?;
    match output {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(true)
}
