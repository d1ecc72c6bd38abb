mod common;

use common::{fixture, fixture_files};
use fks_core::expr::{BinOp, Expr, UnOp};
use fks_core::speclang::{check_wellformedness, parse_expr, parse_model, print_model, ModelDocument};
use proptest::prelude::*;

fn parse_ok(text: &str) -> ModelDocument {
    let report = parse_model(text);
    let errors: Vec<String> = report.errors().map(|d| d.to_string()).collect();
    report.document.unwrap_or_else(|| panic!("parse failed: {errors:?}"))
}

#[test]
fn every_fixture_is_a_print_fixpoint() {
    let files = fixture_files();
    assert!(files.len() >= 10, "only {} fixtures", files.len());
    for f in files {
        let doc = parse_ok(&std::fs::read_to_string(&f).unwrap());
        let printed = print_model(&doc).unwrap();
        let reparsed = parse_ok(&printed);
        assert_eq!(reparsed, doc, "{}", f.display());
        assert_eq!(print_model(&reparsed).unwrap(), printed, "{}", f.display());
    }
}

#[test]
fn squarer_fixture_shape() {
    let doc = parse_ok(&std::fs::read_to_string(fixture("squarer.fks")).unwrap());
    assert_eq!(doc.components.len(), 1);
    assert_eq!(doc.automata.len(), 1);
    assert!(check_wellformedness(&doc).is_empty());
}

#[test]
fn two_networks_survive_round_trip() {
    let src = "datatype D = int[0..3]\n\
               network A { in I: D out O: D }\n\
               network B { in I: D out O: D }\n";
    let doc = parse_ok(src);
    let again = parse_ok(&print_model(&doc).unwrap());
    assert_eq!(again.networks.len(), 2);
}

#[test]
fn empty_document() {
    let doc = parse_ok("");
    assert!(doc.is_empty());
    assert!(parse_ok(&print_model(&doc).unwrap()).is_empty());
}

#[test]
fn unresolved_channel_is_reported() {
    let src = "datatype D = int[0..3]\n\
               automaton A { in In: D out Out: D state s initial transition s -> s : Zap?X / Out!X }";
    let report = parse_model(src);
    assert!(report.document.is_none());
    let d = report.errors().next().unwrap();
    assert_eq!(d.code, "E-RES-01");
    assert!(d.message.contains("Zap"), "{}", d.message);
    assert!(d.pos.is_some());
}

#[test]
fn ill_typed_output_term() {
    let src = "datatype D = int[0..3]\n\
               automaton A { in In: D out Out: D state s initial transition s -> s : In?X / Out!X + true }";
    let doc = parse_ok(src);
    let codes: Vec<String> = check_wellformedness(&doc).into_iter().map(|d| d.code).collect();
    assert_eq!(codes, ["WF-TY-01"]);
    assert!(print_model(&doc).is_err());
}

#[test]
fn duplicate_component_names() {
    let src = "component C { }\ncomponent C { }\n";
    let doc = parse_ok(src);
    let codes: Vec<String> = check_wellformedness(&doc).into_iter().map(|d| d.code).collect();
    assert_eq!(codes, ["WF-DUP-01"]);
}

#[test]
fn syntax_errors_carry_positions() {
    for src in ["automaton A {\n  state s initial\n  transition s => s\n}", "network N { wire -> }", "datatype = 3"] {
        let report = parse_model(src);
        assert!(report.document.is_none(), "{src}");
        let d = report.errors().next().unwrap();
        assert_eq!(d.code, "E-SYN-01");
        assert!(d.pos.is_some());
    }
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-5i64..20).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        prop::sample::select(vec!["X", "Y", "n"]).prop_map(Expr::ident),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Mod,
            BinOp::Eq,
            BinOp::Lt,
            BinOp::Ge,
            BinOp::And,
            BinOp::Or,
        ];
        prop_oneof![
            (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::sample::select(vec![UnOp::Neg, UnOp::Not]), inner.clone())
                .prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (inner.clone(), prop::sample::select(vec!["hi", "lo"]))
                .prop_map(|(e, f)| Expr::Field(Box::new(e), f.to_string())),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Record(vec![("a".into(), a), ("b".into(), b)])),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_print_and_reparse(e in expr_strategy()) {
        let printed = e.to_string();
        let back = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {}", err.message)))?;
        prop_assert_eq!(back.to_string(), printed);
    }
}
