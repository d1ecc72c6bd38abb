mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{int, ints, model, one};
use fks_core::behavior::{denote, SemanticsOptions};
use fks_core::kernel::{enumerate_valuations, Bounds, TimedStream, Valuation};
use fks_core::model::{Model, ModelError};
use fks_core::network::{
    compose_check, denote_network, flatten, ComposeVerdict, Endpoint, NetworkDef, NetworkError, Node,
    NodeBehavior, Wire, WiringMode,
};

fn silent_tail(rows: usize, at: usize, value: i64) -> TimedStream {
    let mut v = vec![Vec::new(); rows];
    v[at - 1].push(int(value));
    TimedStream::new(v)
}

#[test]
fn hierarchy_flattens_to_paths() {
    let net = model().network("QuadNet").unwrap();
    assert!(!net.is_flat());
    let flat = flatten(&net, WiringMode::Strict).unwrap();
    assert!(flat.is_flat());
    let names: Vec<&str> = flat.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["q/a", "q/b"]);
    assert!(flat
        .nodes
        .iter()
        .all(|n| matches!(&n.behavior, NodeBehavior::Machine(m) if m.name == "Sq")));
    let internal = flat
        .wires
        .iter()
        .filter(|w| matches!(w.source, Endpoint::Node { .. }) && matches!(w.sink, Endpoint::Node { .. }))
        .count();
    assert_eq!(internal, 1);
}

#[test]
fn cyclic_hierarchy_is_rejected() {
    let text = r#"
datatype N = int[0..3]
component A {
  in In: N
  out Out: N
  behavior network Self
}
network Self {
  in In: N
  out Out: N
  node x: A
  wire In -> x.In
  wire x.Out -> Out
}
"#;
    let m = Model::parse("cycle", text).unwrap();
    match m.network("Self") {
        Err(ModelError::Network(NetworkError::CyclicHierarchy(path))) => {
            assert_eq!(path.first(), path.last());
        }
        other => panic!("expected a cycle, got {other:?}"),
    }
}

#[test]
fn pipe_squares_twice_with_two_interval_latency() {
    // a consumes 2 at @1, 4 is on a.Out at @2 and consumed by b there,
    // so 16 leaves the network at @3.
    let pipe = model().network("Pipe").unwrap();
    let x = one("In", ints(&[&[2], &[], &[], &[], &[]]));
    let got = denote_network(&pipe, &x, 5, &SemanticsOptions::strict()).unwrap();
    assert_eq!(got, BTreeSet::from([one("Out", silent_tail(5, 3, 16))]));
}

#[test]
fn feedback_wire_routes_back_into_the_node() {
    let net = model().network("Loop").unwrap();
    let x = one("In", ints(&[&[1], &[], &[], &[]]));
    let got = denote_network(&net, &x, 4, &SemanticsOptions::strict()).unwrap();
    assert_eq!(got, BTreeSet::from([one("Out", silent_tail(4, 3, 1))]));
}

#[test]
fn wrapping_a_machine_is_a_unit() {
    let m = model();
    for name in ["Sq", "Ndup", "Fourth"] {
        let machine = m.machine(name).unwrap();
        let net = NetworkDef::wrapping("only", machine.clone());
        let bounds = Bounds::new(3).with_domain("In", vec![int(0), int(2)]);
        for x in enumerate_valuations(&machine.inputs, &bounds).unwrap() {
            let direct = denote(&machine, &x, 3, &SemanticsOptions::default()).unwrap();
            let wrapped = denote_network(&net, &x, 3, &SemanticsOptions::default()).unwrap();
            assert_eq!(direct, wrapped, "{name} on {x:?}");
        }
    }
}

#[test]
fn flattening_preserves_denotation() {
    let m = model();
    let quad = m.network("QuadNet").unwrap();
    let pipe = m.network("Pipe").unwrap();
    let bounds = Bounds::new(3).with_domain("In", vec![int(0), int(1), int(2)]);
    for x in enumerate_valuations(&pipe.inputs, &bounds).unwrap() {
        let a = denote_network(&quad, &x, 3, &SemanticsOptions::default()).unwrap();
        let b = denote_network(&pipe, &x, 3, &SemanticsOptions::default()).unwrap();
        let flat = flatten(&quad, WiringMode::Lenient).unwrap();
        let c = denote_network(&flat, &x, 3, &SemanticsOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

#[test]
fn engine_matches_composition_on_pipe() {
    let pipe = model().network("Pipe").unwrap();
    let bounds = Bounds::new(4)
        .with_domain("In", vec![int(0), int(1), int(2)])
        .with_domain("a.Out", vec![int(0), int(1), int(4)]);
    let verdict = compose_check(&pipe, &bounds, &SemanticsOptions::default()).unwrap();
    assert!(verdict.is_equal(), "{verdict:?}");
    assert_eq!(verdict, ComposeVerdict::Equal { inputs: 256 });
}

#[test]
fn engine_matches_composition_on_feedback() {
    let net = model().network("Loop").unwrap();
    let bounds = Bounds::new(4).with_domain("In", vec![int(0), int(1)]);
    let verdict = compose_check(&net, &bounds, &SemanticsOptions::default()).unwrap();
    assert!(verdict.is_equal(), "{verdict:?}");
}

#[test]
fn strict_wiring_reports_dangling_ports() {
    let mut pipe = model().network("Pipe").unwrap();
    pipe.wires.retain(|w| w.sink != Endpoint::node("b", "In"));
    let err = flatten(&pipe, WiringMode::Strict).unwrap_err();
    assert!(matches!(err, NetworkError::DanglingPort { .. }), "{err}");
    // Lenient mode leaves b silent.
    let x = one("In", ints(&[&[2], &[], &[]]));
    let got = denote_network(&pipe, &x, 3, &SemanticsOptions::strict()).unwrap();
    assert_eq!(got, BTreeSet::from([Valuation::silent(["Out"], 3)]));
}

#[test]
fn ill_typed_wire_is_rejected() {
    let m = model();
    let mut pipe = m.network("Pipe").unwrap();
    // Echo takes Bit on `In`; a.Out carries Num.
    pipe.nodes[1] = Node::machine("b", m.machine("Echo").unwrap());
    let err = pipe.validate().unwrap_err();
    assert!(matches!(err, NetworkError::TypeMismatch { .. }), "{err}");
}

#[test]
fn outputs_of_every_run_cover_every_output_port() {
    let pipe = model().network("Pipe").unwrap();
    let x = one("In", ints(&[&[1, 2], &[], &[]]));
    for o in denote_network(&pipe, &x, 3, &SemanticsOptions::default()).unwrap() {
        let channels: BTreeMap<&str, usize> = o.channels().map(|c| (c, o.get(c).unwrap().horizon())).collect();
        assert_eq!(channels, BTreeMap::from([("Out", 3)]));
    }
}

#[test]
fn fan_out_needs_an_explicit_node() {
    let mut pipe = model().network("Pipe").unwrap();
    pipe.wires.push(Wire::new(Endpoint::node("a", "Out"), Endpoint::env("Out")));
    let err = pipe.validate().unwrap_err();
    assert!(err.to_string().contains("wired twice"), "{err}");
}

#[test]
fn pass_through_wire_is_rejected() {
    let mut pipe = model().network("Pipe").unwrap();
    pipe.wires.retain(|w| w.to_string() != "b.Out -> Out");
    pipe.wires.push(Wire::new(Endpoint::env("In"), Endpoint::env("Out")));
    let err = pipe.validate().unwrap_err();
    assert!(err.to_string().contains("straight through"), "{err}");
}
