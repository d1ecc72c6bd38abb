mod common;

use std::collections::BTreeSet;

use common::{int, ints, model, one};
use fks_core::behavior::{SemanticsOptions, DEFAULT_BUDGET};
use fks_core::traces::{
    check_assumption_commitment, generate_traces, language, membership, AcVerdict, EventTrace, MembershipVerdict,
    Party, TraceError, TraceEvent, TraceExpr,
};

fn ev(from: &str, to: &str, channel: &str, message: i64, interval: usize) -> TraceEvent {
    let party = |p: &str| if p == "env" { Party::Env } else { Party::Instance(p.into()) };
    TraceEvent {
        sender: party(from),
        receiver: party(to),
        channel: channel.into(),
        message: int(message),
        interval,
    }
}

fn trace(events: Vec<TraceEvent>) -> EventTrace {
    EventTrace::new(events).unwrap()
}

fn leaf(name: &str) -> TraceExpr {
    TraceExpr::leaf(model().trace(name).unwrap().0)
}

#[test]
fn every_fixture_trace_is_a_member() {
    let m = model();
    for name in ["SqRun", "SqTwice", "SignedRun", "NegativeRun", "Walk"] {
        let (t, net) = m.trace(name).unwrap();
        let verdict = membership(&t, &m.network(&net).unwrap(), t.span() + 1, &SemanticsOptions::default()).unwrap();
        assert_eq!(verdict, MembershipVerdict::Member, "{name}");
    }
}

#[test]
fn wrong_square_diverges_at_the_second_event() {
    let m = model();
    let t = trace(vec![ev("env", "sq", "In", 3, 1), ev("sq", "env", "Out", 10, 2)]);
    let verdict = membership(&t, &m.network("SqNet").unwrap(), 3, &SemanticsOptions::default()).unwrap();
    let MembershipVerdict::NonMember(d) = verdict else {
        panic!("expected a divergence");
    };
    assert_eq!(d.index, Some(1));
    assert_eq!(d.interval, 2);
    assert_eq!(d.expected, Some(t.events()[1].clone()));
}

#[test]
fn missing_output_is_an_extra_run_event() {
    // Strict runs must square 3 at @1, so a trace stopping after the input
    // is not the whole story.
    let m = model();
    let t = trace(vec![ev("env", "sq", "In", 3, 1)]);
    let net = m.network("SqNet").unwrap();
    assert!(membership(&t, &net, 3, &SemanticsOptions::default()).unwrap().is_member());
    let MembershipVerdict::NonMember(d) = membership(&t, &net, 3, &SemanticsOptions::strict()).unwrap() else {
        panic!("strict runs always emit");
    };
    assert_eq!(d.index, None);
    assert_eq!(d.unexpected, Some(ev("sq", "env", "Out", 9, 2)));
}

#[test]
fn empty_trace_is_a_member() {
    let net = model().network("SqNet").unwrap();
    let verdict = membership(&EventTrace::empty(), &net, 4, &SemanticsOptions::strict()).unwrap();
    assert!(verdict.is_member());
}

#[test]
fn unordered_events_are_rejected() {
    let err = EventTrace::new(vec![ev("env", "sq", "In", 3, 2), ev("env", "sq", "In", 3, 1)]).unwrap_err();
    assert_eq!(err, TraceError::Unordered { index: 1 });
}

#[test]
fn generated_traces_are_members() {
    let m = model();
    for net_name in ["SqNet", "Pipe", "Loop"] {
        let net = m.network(net_name).unwrap();
        let x = one("In", ints(&[&[1], &[0], &[], &[]]));
        let traces = generate_traces(&net, &x, 4, 50, &SemanticsOptions::default()).unwrap();
        assert!(!traces.is_empty());
        assert!(traces.windows(2).all(|w| w[0] < w[1]), "ascending and distinct");
        for t in &traces {
            assert!(membership(t, &net, 4, &SemanticsOptions::default()).unwrap().is_member(), "{t}");
        }
    }
}

#[test]
fn generation_respects_limit_and_policy() {
    let net = model().network("SqNet").unwrap();
    let x = one("In", ints(&[&[3], &[], &[]]));
    assert!(generate_traces(&net, &x, 3, 0, &SemanticsOptions::default()).unwrap().is_empty());
    assert_eq!(generate_traces(&net, &x, 3, 2, &SemanticsOptions::default()).unwrap().len(), 2);
    // Idle: the square arrives at @2, @3 or never.
    assert_eq!(generate_traces(&net, &x, 3, 10, &SemanticsOptions::default()).unwrap().len(), 3);
    let strict = generate_traces(&net, &x, 3, 10, &SemanticsOptions::strict()).unwrap();
    assert_eq!(strict, vec![model().trace("SqRun").unwrap().0]);
}

#[test]
fn iteration_shifts_each_copy() {
    let got = language(&model().trace_expr("Repeat").unwrap(), 4, DEFAULT_BUDGET).unwrap();
    let want = BTreeSet::from([
        EventTrace::empty(),
        trace(vec![ev("env", "sq", "In", 3, 1), ev("sq", "env", "Out", 9, 2)]),
        trace(vec![
            ev("env", "sq", "In", 3, 1),
            ev("sq", "env", "Out", 9, 2),
            ev("env", "sq", "In", 3, 3),
            ev("sq", "env", "Out", 9, 4),
        ]),
    ]);
    assert_eq!(got, want);
    assert_eq!(language(&model().trace_expr("Repeat").unwrap(), 3, DEFAULT_BUDGET).unwrap().len(), 2);
}

#[test]
fn sequence_needs_the_summed_span() {
    let then = model().trace_expr("Then").unwrap();
    assert!(language(&then, 4, DEFAULT_BUDGET).unwrap().is_empty());
    let got = language(&then, 5, DEFAULT_BUDGET).unwrap();
    assert_eq!(got.len(), 1);
    let t = got.into_iter().next().unwrap();
    let intervals: Vec<usize> = t.events().iter().map(|e| e.interval).collect();
    assert_eq!(intervals, [1, 2, 3, 4, 4, 5]);
}

/// Interleavings per interval multiply: C(a+b, a) for each interval.
fn interleaving_count(a: &EventTrace, b: &EventTrace) -> usize {
    fn choose(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let span = a.span().max(b.span());
    (1..=span)
        .map(|i| {
            let na = a.events().iter().filter(|e| e.interval == i).count();
            let nb = b.events().iter().filter(|e| e.interval == i).count();
            choose(na + nb, na)
        })
        .product()
}

#[test]
fn parallel_interleaves_within_intervals() {
    let m = model();
    let a = m.trace("SqRun").unwrap().0;
    let b = m.trace("SqTwice").unwrap().0;
    let got = language(&m.trace_expr("Both").unwrap(), 3, DEFAULT_BUDGET).unwrap();
    assert_eq!(got.len(), interleaving_count(&a, &b));
    assert_eq!(got.len(), 6);
    for t in &got {
        assert_eq!(t.len(), a.len() + b.len());
        assert!(t.events().windows(2).all(|w| w[0].interval <= w[1].interval));
    }
}

#[test]
fn parallel_is_symmetric() {
    let k = 4;
    for (x, y) in [("SqRun", "SqTwice"), ("SqRun", "SqRun"), ("SignedRun", "NegativeRun")] {
        let ab = language(&TraceExpr::par(leaf(x), leaf(y)), k, DEFAULT_BUDGET).unwrap();
        let ba = language(&TraceExpr::par(leaf(y), leaf(x)), k, DEFAULT_BUDGET).unwrap();
        assert_eq!(ab, ba, "{x} || {y}");
    }
}

#[test]
fn iteration_unfolds() {
    // iter(e, n + 1) = {empty} + seq(e, iter(e, n))
    let k = 6;
    for n in 0..3 {
        let lhs = language(&TraceExpr::iter(leaf("SqRun"), n + 1), k, DEFAULT_BUDGET).unwrap();
        let mut rhs = language(
            &TraceExpr::seq(leaf("SqRun"), TraceExpr::iter(leaf("SqRun"), n)),
            k,
            DEFAULT_BUDGET,
        )
        .unwrap();
        rhs.insert(EventTrace::empty());
        assert_eq!(lhs, rhs, "n = {n}");
    }
}

#[test]
fn language_budget_is_enforced() {
    let e = TraceExpr::iter(TraceExpr::par(leaf("SqTwice"), leaf("SqTwice")), 3);
    assert_eq!(language(&e, 9, 20), Err(TraceError::ExplosionGuard { budget: 20 }));
}

fn contract_parts(name: &str) -> (fks_core::expr::Expr, fks_core::expr::Expr) {
    let m = model();
    let c = m.contract_decl(name).unwrap();
    (c.assume.clone(), c.commit.clone())
}

#[test]
fn assumption_commitment_verdicts() {
    let m = model();
    let env = m.predicate_env("SignedNet").unwrap();
    let (assume, commit) = contract_parts("NonNegSquare");

    let run = m.trace("SignedRun").unwrap().0;
    assert_eq!(check_assumption_commitment(&run, &assume, &commit, &env).unwrap(), AcVerdict::Satisfied);

    let negative = m.trace("NegativeRun").unwrap().0;
    assert_eq!(check_assumption_commitment(&negative, &assume, &commit, &env).unwrap(), AcVerdict::Vacuous);

    let wrong = trace(vec![
        ev("env", "sq", "In", 3, 1),
        ev("env", "sq", "In", 2, 2),
        ev("sq", "env", "Out", 9, 2),
        ev("sq", "env", "Out", 5, 3),
    ]);
    assert_eq!(
        check_assumption_commitment(&wrong, &assume, &commit, &env).unwrap(),
        AcVerdict::Violated { position: Some(1) }
    );
}

#[test]
fn ill_typed_predicate_is_rejected() {
    let m = model();
    let env = m.predicate_env("SignedNet").unwrap();
    let (assume, _) = contract_parts("NonNegSquare");
    let commit = fks_core::speclang::parse_expr("Out + 1").unwrap();
    let run = m.trace("SignedRun").unwrap().0;
    assert!(matches!(
        check_assumption_commitment(&run, &assume, &commit, &env),
        Err(TraceError::PredicateTypeError(_))
    ));
}
