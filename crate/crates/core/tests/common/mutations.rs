//! A small clean corpus and one defect per error rule.

use fks_core::speclang::Corpus;

pub const BASE: &str = r#"
datatype Num = int[0..10000]

automaton Sq {
  in In: Num
  out Out: Num
  state s0 initial
  transition s0 -> s0 : In?X / Out!X * X
}

component SQ {
  in In: Num
  out Out: Num
  behavior automaton Sq
}

network Pipe {
  in In: Num
  out Out: Num
  node a: SQ
  node b: SQ
  wire In -> a.In
  wire a.Out -> b.In
  wire b.Out -> Out
}

component PAIR {
  in In: Num
  out Out: Num
  behavior network Pipe
}

network Top {
  in In: Num
  out Out: Num
  node p: PAIR
  wire In -> p.In
  wire p.Out -> Out
}

trace Run on Pipe {
  env -> a : In!3 @1
  a -> b : Out!9 @2
  b -> env : Out!81 @3
}
"#;

/// `(rule, find, replace)`: replacing the first `find` in [`BASE`] with
/// `replace` introduces a defect only `rule` is meant to catch.
pub const MUTATIONS: &[(&str, &str, &str)] = &[
    // The automaton's port is renamed away from the component's.
    (
        "C-IF-01",
        "  out Out: Num\n  state s0 initial\n  transition s0 -> s0 : In?X / Out!X * X",
        "  out Res: Num\n  state s0 initial\n  transition s0 -> s0 : In?X / Res!X * X",
    ),
    ("C-IF-02", "behavior automaton Sq", "behavior automaton Sqq"),
    ("C-HY-01", "component PAIR {\n  in In: Num", "component PAIR {\n  in Aux: Num\n  in In: Num"),
    ("C-TY-01", "wire a.Out -> b.In", "wire a.Out -> b.Inp"),
    ("C-ET-01", "In!3 @1", "In!20000 @1"),
    ("C-ET-02", "env -> a : In!3 @1", "env -> z : In!3 @1"),
];

pub fn mutate(from: &str, to: &str) -> Corpus {
    assert!(BASE.contains(from), "mutation site `{from}` missing");
    Corpus::parse("base.fks", &BASE.replacen(from, to, 1)).unwrap()
}
