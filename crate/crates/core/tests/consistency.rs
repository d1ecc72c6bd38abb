mod common;

use std::collections::BTreeSet;

use common::model;
use common::mutations::{mutate, BASE, MUTATIONS};
use fks_core::consistency::{all_codes, completeness_report, gate, rule, run_rules, UnknownRuleCode};
use fks_core::speclang::{Corpus, Severity};

fn corpus(text: &str) -> Corpus {
    Corpus::parse("base.fks", text).unwrap()
}

fn codes(corpus: &Corpus) -> BTreeSet<String> {
    run_rules(corpus, &all_codes().into_iter().collect::<Vec<_>>())
        .unwrap()
        .into_iter()
        .map(|f| f.code)
        .collect()
}

#[test]
fn clean_corpora_have_no_findings() {
    assert_eq!(codes(&corpus(BASE)), BTreeSet::new());
    assert!(gate(&corpus(BASE)).is_empty());
    let m = model();
    assert_eq!(codes(m.corpus()), BTreeSet::new());
    assert!(gate(m.corpus()).is_empty());
}

#[test]
fn each_error_rule_catches_its_mutation() {
    assert_eq!(MUTATIONS.len(), 6);
    for (code, from, to) in MUTATIONS {
        let c = mutate(from, to);
        let found = codes(&c);
        assert!(found.contains(*code), "{code} not raised; got {found:?}");
        let blocking: BTreeSet<String> = gate(&c).into_iter().map(|f| f.code).collect();
        assert!(blocking.contains(*code), "{code} does not block; gate gave {blocking:?}");
    }
}

#[test]
fn missing_behavior_warns_without_blocking() {
    let c = mutate("  behavior network Pipe\n", "");
    assert!(codes(&c).contains("W-CMP-01"));
    assert!(gate(&c).iter().all(|f| f.code != "W-CMP-01"));
    assert!(!completeness_report(&corpus(BASE)).iter().any(|f| f.code == "W-CMP-01"));
}

#[test]
fn unused_datatype_warns() {
    let c = corpus(&format!("{BASE}\ndatatype Spare = int[0..1]\n"));
    let found: Vec<_> = completeness_report(&c).into_iter().filter(|f| f.code == "W-DT-01").collect();
    assert_eq!(found.len(), 1);
    assert!(found[0].path.contains("Spare"), "{:?}", found[0]);
    assert!(gate(&c).is_empty());
    assert!(!codes(&corpus(BASE)).contains("W-DT-01"));
}

#[test]
fn unwired_port_warns() {
    let c = mutate("  wire b.Out -> Out\n", "");
    let report = completeness_report(&c);
    assert!(report.iter().any(|f| f.code == "W-NET-01"), "{report:?}");
    assert!(report.iter().all(|f| f.severity == Severity::Warning));
    assert!(gate(&c).is_empty());
    assert!(!codes(&corpus(BASE)).contains("W-NET-01"));
}

#[test]
fn empty_selection_runs_nothing() {
    let c = mutate("behavior automaton Sq", "behavior automaton Sqq");
    assert_eq!(run_rules::<&str>(&c, &[]).unwrap(), Vec::new());
}

#[test]
fn selection_is_monotone() {
    let c = mutate("wire a.Out -> b.In", "wire a.Out -> b.Inp");
    let all: Vec<String> = all_codes().into_iter().collect();
    let every = run_rules(&c, &all).unwrap();
    for code in &all {
        let subset = run_rules(&c, &[code]).unwrap();
        assert!(subset.iter().all(|f| every.contains(f) && &f.code == code));
    }
}

#[test]
fn unknown_code_is_an_error() {
    assert_eq!(
        run_rules(&corpus(BASE), &["C-XX-99"]),
        Err(UnknownRuleCode("C-XX-99".into()))
    );
}

#[test]
fn rule_table_severities_follow_prefix() {
    for code in all_codes() {
        let r = rule(&code).unwrap();
        let expected = if code.starts_with('W') { Severity::Warning } else { Severity::Error };
        assert_eq!(r.severity, expected, "{code}");
    }
    assert_eq!(all_codes().len(), 9);
}
