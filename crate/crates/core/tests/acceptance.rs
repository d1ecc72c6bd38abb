//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --release --test acceptance` for representative timings.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::mutations::{mutate, BASE, MUTATIONS};
use common::{fixture_files, int, model, one};
use fks_core::behavior::{check_time_guardedness, denote, IdlePolicy, Sampler, SemanticsOptions, DEFAULT_BUDGET};
use fks_core::consistency::{all_codes, gate, run_rules};
use fks_core::kernel::{enumerate_valuations, Bounds, TimedStream, Value};
use fks_core::model::Model;
use fks_core::network::compose_check;
use fks_core::refinement::{check_behavioral, Spec};
use fks_core::simulator::{compile_model, create_session, IrInterpreter, SimError, Stimulus};
use fks_core::speclang::{parse_model, print_model, Corpus};
use fks_core::traces::{generate_traces, language, membership, EventTrace, Party, TraceEvent, TraceExpr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, time budget and check.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn time_abstraction() -> Outcome {
    let sym = |c: char| Value::Enum(c.to_string());
    let rows = ["a", "ab", "", "bca", "b"];
    let s = TimedStream::new(rows.iter().map(|r| r.chars().map(sym).collect()).collect());
    let flat: String = s.time_abstraction().iter().map(|v| v.to_string()).collect();
    ensure(flat == "aabbcab", || format!("got {flat}"))?;
    Ok(flat)
}

fn squarer_law() -> Outcome {
    let m = model();
    let sq = m.machine("Sq").map_err(|e| e.to_string())?;
    let k = 4;
    let mut cases = 0;
    for x in 0..=9i64 {
        for i in 1..k {
            let mut rows = vec![Vec::new(); k];
            rows[i - 1].push(int(x));
            let mut want = vec![Vec::new(); k];
            want[i].push(int(x * x));
            let want = one("Out", TimedStream::new(want));

            let got = denote(&sq, &one("In", TimedStream::new(rows)), k, &SemanticsOptions::strict())
                .map_err(|e| e.to_string())?;
            ensure(got == BTreeSet::from([want.clone()]), || format!("denote X={x} i={i}: {got:?}"))?;

            let mut s = create_session(&m, "SqNet", 0, IdlePolicy::Strict, "law").map_err(|e| e.to_string())?;
            for j in 1..=k {
                let stimuli = if j == i { vec![Stimulus::new("In", int(x))] } else { Vec::new() };
                let d = s.step(&stimuli, None).map_err(|e| e.to_string())?;
                let out = d.outputs.get("Out").cloned().unwrap_or_default();
                let expected = want.get("Out").unwrap().interval(j).unwrap().to_vec();
                ensure(out == expected, || format!("replay X={x} i={i} @{j}: {out:?}"))?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn two_value_bounds(inputs: &[fks_core::kernel::ChannelId], k: usize) -> Bounds {
    inputs.iter().fold(Bounds::new(k), |b, c| {
        let values = if c.name == "In" && c.msg_type.conforms(&int(0)) && c.msg_type.conforms(&int(1)) {
            vec![int(0), int(1)]
        } else {
            c.msg_type.values().into_iter().take(2).collect()
        };
        b.with_domain(c.name.clone(), values)
    })
}

fn time_guardedness() -> Outcome {
    let m = model();
    let mut pairs = 0;
    let names = m.automaton_names();
    for name in &names {
        let machine = m.machine(name).map_err(|e| e.to_string())?;
        let sampler = Sampler::Exhaustive(two_value_bounds(&machine.inputs, 4));
        let v = check_time_guardedness(&machine, 4, &sampler, &SemanticsOptions::default())
            .map_err(|e| format!("{name}: {e}"))?;
        match v {
            fks_core::behavior::GuardednessVerdict::Pass { pairs: p } => pairs += p,
            fail => return Err(format!("{name}: {fail:?}")),
        }
    }
    Ok(format!("{} machines, {pairs} pairs", names.len()))
}

fn compositionality() -> Outcome {
    let m = model();
    let pipe = m.network("Pipe").map_err(|e| e.to_string())?;
    let bounds = Bounds::new(4)
        .with_domain("In", vec![int(0), int(1), int(2)])
        .with_domain("a.Out", vec![int(0), int(1), int(4)]);
    let v = compose_check(&pipe, &bounds, &SemanticsOptions::default()).map_err(|e| e.to_string())?;
    ensure(v.is_equal(), || format!("Pipe: {v:?}"))?;
    let feedback = m.network("Loop").map_err(|e| e.to_string())?;
    let bounds = Bounds::new(4).with_domain("In", vec![int(0), int(1)]);
    let w = compose_check(&feedback, &bounds, &SemanticsOptions::default()).map_err(|e| e.to_string())?;
    ensure(w.is_equal(), || format!("Loop: {w:?}"))?;
    Ok("Pipe and Loop equal at k=4".into())
}

fn refinement_suite() -> Outcome {
    let m = model();
    let run = |name: &str| -> Result<fks_core::refinement::Verdict, String> {
        let claim = m.claim(name).map_err(|e| e.to_string())?;
        claim.prepare(&m, DEFAULT_BUDGET).and_then(|c| c.run()).map_err(|e| e.to_string())
    };
    for (name, holds) in [
        ("SqRefinesNdup", true),
        ("NdupRefinesSq", false),
        ("SqSubclassOfNdup", true),
        ("NdupSubclassOfSq", false),
        ("PipeSlack1", true),
        ("PipeSlack0", false),
    ] {
        let v = run(name)?;
        ensure(v.holds() == holds, || format!("{name}: {v:?}"))?;
        if let Some(w) = v.witness() {
            let check = m.claim(name).unwrap().prepare(&m, DEFAULT_BUDGET).unwrap();
            ensure(check.reverify(w).map_err(|e| e.to_string())?, || format!("{name}: witness does not reverify"))?;
        }
    }
    let mut specs: Vec<Spec> = m.automaton_names().iter().map(|n| Spec::Machine(m.machine(n).unwrap())).collect();
    specs.extend(m.network_names().iter().map(|n| Spec::Network(m.network(n).unwrap())));
    for s in &specs {
        let v = check_behavioral(s, s, &two_value_bounds(s.inputs(), 3), &SemanticsOptions::default())
            .map_err(|e| format!("{}: {e}", s.name()))?;
        ensure(v.holds(), || format!("{} does not refine itself", s.name()))?;
    }
    Ok(format!("6 claims, {} reflexive specs", specs.len()))
}

/// Every trace of at most three events over two events and three intervals.
fn small_traces() -> Vec<EventTrace> {
    let atoms = [
        (Party::Env, Party::Instance("sq".into()), "In", 0),
        (Party::Instance("sq".into()), Party::Env, "Out", 0),
    ];
    let mut all = vec![Vec::<TraceEvent>::new()];
    let mut frontier = all.clone();
    for _ in 0..3 {
        let mut next = Vec::new();
        for t in &frontier {
            let from = t.last().map_or(1, |e| e.interval);
            for interval in from..=3 {
                for (s, r, c, v) in &atoms {
                    let mut u = t.clone();
                    u.push(TraceEvent {
                        sender: s.clone(),
                        receiver: r.clone(),
                        channel: c.to_string(),
                        message: int(*v),
                        interval,
                    });
                    next.push(u);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.into_iter().map(|e| EventTrace::new(e).unwrap()).collect()
}

fn traces_round_trip() -> Outcome {
    let m = model();
    let mut generated = 0;
    for name in m.network_names() {
        let net = m.network(name).map_err(|e| e.to_string())?;
        for x in enumerate_valuations(&net.inputs, &two_value_bounds(&net.inputs, 3)).map_err(|e| e.to_string())? {
            let ts = generate_traces(&net, &x, 3, 20, &SemanticsOptions::default()).map_err(|e| e.to_string())?;
            for t in ts {
                let v = membership(&t, &net, 3, &SemanticsOptions::default()).map_err(|e| e.to_string())?;
                ensure(v.is_member(), || format!("{name}: generated {t} is not a member"))?;
                generated += 1;
            }
        }
    }

    let small = small_traces();
    let leaf = |t: &EventTrace| TraceExpr::leaf(t.clone());
    let lang = |e: &TraceExpr, k| language(e, k, DEFAULT_BUDGET).map_err(|e| e.to_string());
    for a in &small {
        for n in 0..2 {
            let lhs = lang(&TraceExpr::iter(leaf(a), n + 1), 6)?;
            let mut rhs = lang(&TraceExpr::seq(leaf(a), TraceExpr::iter(leaf(a), n)), 6)?;
            rhs.insert(EventTrace::empty());
            ensure(lhs == rhs, || format!("iter unfolding fails on {a}"))?;
        }
        for b in &small {
            if a.len() + b.len() > 3 {
                continue;
            }
            let ab = lang(&TraceExpr::par(leaf(a), leaf(b)), 3)?;
            let ba = lang(&TraceExpr::par(leaf(b), leaf(a)), 3)?;
            ensure(ab == ba, || format!("par symmetry fails on {a} and {b}"))?;
        }
    }
    Ok(format!("{generated} generated traces, {} small traces", small.len()))
}

fn consistency_gating() -> Outcome {
    let all: Vec<String> = all_codes().into_iter().collect();
    let mut caught = 0;
    for (code, from, to) in MUTATIONS {
        let c = mutate(from, to);
        let found = run_rules(&c, &all).unwrap();
        if found.iter().any(|f| f.code == *code) {
            caught += 1;
        }
        let net = if code.starts_with("C-ET") { "Pipe" } else { "Top" };
        match create_session(&Model::new(c), net, 0, IdlePolicy::Idle, "g") {
            Err(SimError::Rejected(_)) => {}
            other => return Err(format!("{code}: session not rejected: {other:?}")),
        }
    }
    ensure(caught == MUTATIONS.len(), || format!("{caught}/{} mutations caught", MUTATIONS.len()))?;
    let clean = Corpus::parse("base.fks", BASE).unwrap();
    ensure(gate(&clean).is_empty(), || "clean corpus has errors".into())?;
    create_session(&Model::new(clean), "Top", 0, IdlePolicy::Idle, "g").map_err(|e| e.to_string())?;
    let m = model();
    ensure(gate(m.corpus()).is_empty(), || "fixture corpus has errors".into())?;
    Ok(format!("{caught}/{} mutations caught", MUTATIONS.len()))
}

fn ir_fidelity() -> Outcome {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let networks: Vec<&str> = m.network_names();
    let mut steps = 0;
    for case in 0..50 {
        let name = networks[case % networks.len()];
        let net = m.network(name).map_err(|e| e.to_string())?;
        let seed: u64 = rng.gen();
        let policy = if case % 2 == 0 { IdlePolicy::Idle } else { IdlePolicy::Strict };
        let ir = compile_model(&m, name).map_err(|e| e.to_string())?;
        let mut direct = create_session(&m, name, seed, policy, "d").map_err(|e| e.to_string())?;
        let mut compiled = IrInterpreter::new(ir, seed, policy).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let mut stimuli = Vec::new();
            for c in &net.inputs {
                if rng.gen_bool(0.6) {
                    let values = c.msg_type.values();
                    let v = values[rng.gen_range(0..values.len().min(12))].clone();
                    stimuli.push(Stimulus::new(c.name.clone(), v));
                }
            }
            let a = direct.step(&stimuli, None);
            let b = compiled.step(&stimuli, None);
            ensure(a == b, || format!("{name} seed {seed}: {a:?} vs {b:?}"))?;
            steps += 1;
            if a.is_err() {
                break;
            }
        }
    }
    Ok(format!("50 scripts, {steps} steps"))
}

fn parser_round_trip() -> Outcome {
    let files = fixture_files();
    ensure(files.len() >= 10, || format!("only {} documents", files.len()))?;
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let doc = parse_model(&text).document.ok_or_else(|| format!("{} does not parse", f.display()))?;
        let printed = print_model(&doc).map_err(|e| e.to_string())?;
        let again = parse_model(&printed).document.ok_or_else(|| format!("{} reprint does not parse", f.display()))?;
        ensure(again == doc, || format!("{} changes on reprint", f.display()))?;
    }
    Ok(format!("{} documents", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("time abstraction of the worked stream", Some(Duration::from_millis(1)), time_abstraction),
        ("squarer law via denote and replay", Some(Duration::from_secs(1)), squarer_law),
        ("time-guardedness of every corpus machine", Some(Duration::from_secs(30)), time_guardedness),
        ("compositionality on Pipe and Loop", Some(Duration::from_secs(120)), compositionality),
        ("refinement suite", Some(Duration::from_secs(120)), refinement_suite),
        ("trace round-trip and operator laws", Some(Duration::from_secs(60)), traces_round_trip),
        ("consistency gating", None, consistency_gating),
        ("direct and compiled execution agree", Some(Duration::from_secs(60)), ir_fidelity),
        ("parser round-trip on the fixture corpus", None, parser_round_trip),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let limit = budget.map_or("no limit".to_string(), |b| format!("limit {b:?}"));
        match outcome {
            Ok(detail) if !over => println!("PASS {name}: {detail} ({elapsed:.2?}, {limit})"),
            Ok(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}, over budget ({elapsed:.2?}, {limit})");
            }
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({elapsed:.2?}, {limit})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
