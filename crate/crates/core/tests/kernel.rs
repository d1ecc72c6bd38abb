mod common;

use std::collections::BTreeMap;

use common::{int, ints, one};
use fks_core::kernel::{
    enumerate_streams, enumerate_valuations, validate_typing, Bounds, ChannelId, StreamError, TimedStream, Type,
    TypingViolation, Valuation, Value,
};
use proptest::prelude::*;

fn sym(s: &str) -> Value {
    Value::Enum(s.to_string())
}

fn letters(intervals: &[&str]) -> TimedStream {
    TimedStream::new(intervals.iter().map(|i| i.chars().map(|c| sym(&c.to_string())).collect()).collect())
}

#[test]
fn abstraction_of_the_worked_stream() {
    // a √ ab √ √ bca √ b √
    let s = letters(&["a", "ab", "", "bca", "b"]);
    let flat: String = s.time_abstraction().iter().map(|v| v.to_string()).collect();
    assert_eq!(flat, "aabbcab");
    assert_eq!(s.horizon(), 5);
    assert_eq!(s.message_count(), 7);
}

#[test]
fn abstraction_edge_cases() {
    assert!(TimedStream::silent(3).time_abstraction().is_empty());
    assert_eq!(letters(&["x"]).time_abstraction(), vec![sym("x")]);
}

#[test]
fn prefixes() {
    let s = letters(&["a", "b", "c"]);
    assert_eq!(s.prefix_through(2).unwrap(), letters(&["a", "b"]));
    assert_eq!(s.prefix_through(0).unwrap().horizon(), 0);
    assert_eq!(s.prefix_through(3).unwrap(), s);
    assert_eq!(
        letters(&["a"]).prefix_through(2),
        Err(StreamError::IndexBeyondHorizon { index: 2, horizon: 1 })
    );
}

#[test]
fn typing_violations() {
    let decl = [ChannelId::new("In", Type::Int { lo: 0, hi: 9 })];
    assert!(validate_typing(&one("In", ints(&[&[3], &[]])), &decl).is_empty());

    let bad = validate_typing(&one("In", ints(&[&[12]])), &decl);
    assert_eq!(
        bad,
        vec![TypingViolation::IllTyped {
            channel: "In".into(),
            interval: 1,
            position: 0,
            expected: "int[0..9]".into(),
        }]
    );

    let with_out = [decl[0].clone(), ChannelId::new("Out", Type::Int { lo: 0, hi: 81 })];
    let missing = validate_typing(&one("In", ints(&[&[1]])), &with_out);
    assert_eq!(missing, vec![TypingViolation::MissingChannel { channel: "Out".into() }]);
}

#[test]
fn valuation_horizons_are_uniform() {
    let mixed: BTreeMap<String, TimedStream> =
        [("A".to_string(), ints(&[&[1]])), ("B".to_string(), ints(&[&[], &[]]))].into();
    assert!(matches!(Valuation::new(1, mixed), Err(StreamError::HorizonMismatch { .. })));

    let v = one("A", ints(&[&[1], &[2]]));
    assert_eq!(v.extended_to(4).horizon(), 4);
    assert_eq!(v.extended_to(4).get("A").unwrap().horizon(), 4);
    assert_eq!(v.shifted_back(1).get("A").unwrap(), &ints(&[&[2]]));
    let mut grown = v.with_silent(["B"]);
    grown.push_interval(&[("B".to_string(), vec![int(7)])].into());
    assert_eq!(grown.horizon(), 3);
    assert_eq!(grown.get("A").unwrap().horizon(), 3);
    assert_eq!(grown.get("B").unwrap(), &ints(&[&[], &[], &[7]]));
}

#[test]
fn stream_counts_match_closed_form() {
    // With at most m messages per interval over d values, each interval has
    // sum_{j<=m} d^j contents.
    for (d, k, m) in [(2usize, 3usize, 1usize), (3, 2, 2), (1, 4, 3), (0, 2, 1)] {
        let domain: Vec<Value> = (0..d as i64).map(int).collect();
        let per: usize = (0..=m).map(|j| d.pow(j as u32)).sum();
        let streams = enumerate_streams(&domain, k, m);
        assert_eq!(streams.len(), per.pow(k as u32), "d={d} k={k} m={m}");
        let unique: std::collections::BTreeSet<_> = streams.iter().collect();
        assert_eq!(unique.len(), streams.len());
    }
}

#[test]
fn valuation_enumeration_respects_domains() {
    let chans = [
        ChannelId::new("A", Type::Int { lo: 0, hi: 9 }),
        ChannelId::new("B", Type::Bool),
    ];
    let bounds = Bounds::new(2).with_domain("A", vec![int(0), int(1), int(2)]);
    let all = enumerate_valuations(&chans, &bounds).unwrap();
    assert_eq!(all.len(), 16 * 9);
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    assert!(all.iter().all(|v| validate_typing(v, &chans).is_empty()));

    let ill = Bounds::new(1).with_domain("A", vec![int(10)]);
    assert!(enumerate_valuations(&chans, &ill).is_err());
}

#[test]
fn type_domains() {
    assert_eq!(Type::Int { lo: -1, hi: 1 }.values(), vec![int(-1), int(0), int(1)]);
    let rec = Type::Record {
        name: "P".into(),
        fields: vec![("hi".into(), Type::Bool), ("lo".into(), Type::Bool)],
    };
    assert_eq!(rec.cardinality(), 4);
    assert_eq!(rec.values().len(), 4);
    assert!(rec.values().iter().all(|v| rec.conforms(v)));
    assert!(!rec.conforms(&int(0)));
}

fn stream_strategy() -> impl Strategy<Value = TimedStream> {
    prop::collection::vec(prop::collection::vec(0i64..4, 0..3), 0..6)
        .prop_map(|iv| TimedStream::new(iv.into_iter().map(|xs| xs.into_iter().map(int).collect()).collect()))
}

proptest! {
    #[test]
    fn abstraction_distributes_over_concat(a in stream_strategy(), b in stream_strategy()) {
        let mut expected = a.time_abstraction();
        expected.extend(b.time_abstraction());
        prop_assert_eq!(a.concat(&b).time_abstraction(), expected);
    }

    #[test]
    fn prefixes_are_monotone(s in stream_strategy(), i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i.min(j).min(s.horizon()), i.max(j).min(s.horizon()));
        let short = s.prefix_through(i).unwrap();
        let long = s.prefix_through(j).unwrap();
        prop_assert_eq!(long.prefix_through(i).unwrap(), short);
    }
}
