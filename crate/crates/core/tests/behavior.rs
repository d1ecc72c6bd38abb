mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use common::{int, ints, model, one};
use fks_core::behavior::{
    check_time_guardedness, check_time_guardedness_with, denote, step, BehaviorError, IdlePolicy, Sampler,
    SemanticsOptions,
};
use fks_core::kernel::{Bounds, TimedStream, Valuation, Value};
use proptest::prelude::*;

fn arrivals(channel: &str, values: &[i64]) -> BTreeMap<String, Vec<Value>> {
    BTreeMap::from([(channel.to_string(), values.iter().map(|&n| int(n)).collect())])
}

/// Strict squarer by hand: a FIFO queue, one message consumed per interval,
/// its square visible one interval later.
fn squarer_oracle(input: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut queue = VecDeque::new();
    let mut out = vec![Vec::new(); input.len()];
    for (i, arriving) in input.iter().enumerate() {
        queue.extend(arriving.iter().copied());
        if let Some(x) = queue.pop_front() {
            if i + 1 < input.len() {
                out[i + 1].push(x * x);
            }
        }
    }
    out
}

fn stream_of(rows: &[Vec<i64>]) -> TimedStream {
    TimedStream::new(rows.iter().map(|r| r.iter().map(|&n| int(n)).collect()).collect())
}

#[test]
fn squarer_step_consumes_one_message() {
    let sq = model().machine("Sq").unwrap();
    let init = sq.initial_config();
    let branches = step(&sq, &init, &arrivals("In", &[3]), IdlePolicy::Idle).unwrap();
    assert_eq!(branches.len(), 2);
    assert_eq!(branches[0].transition, Some(0));
    assert_eq!(branches[0].consumed.get("In"), Some(&int(3)));
    assert_eq!(branches[0].emissions.get("Out"), Some(&int(9)));
    assert_eq!(branches[0].config.buffered(), 0);
    assert_eq!(branches[1].transition, None);
    assert_eq!(branches[1].config.buffered(), 1);
}

#[test]
fn buffered_messages_leave_in_order() {
    let sq = model().machine("Sq").unwrap();
    let branches = step(&sq, &sq.initial_config(), &arrivals("In", &[2, 3]), IdlePolicy::Strict).unwrap();
    assert_eq!(branches.len(), 1);
    let b = &branches[0];
    assert_eq!(b.consumed.get("In"), Some(&int(2)));
    assert_eq!(b.emissions.get("Out"), Some(&int(4)));
    assert_eq!(b.config.buffers["In"], VecDeque::from([int(3)]));
}

#[test]
fn strict_empty_buffers_stutter() {
    let sq = model().machine("Sq").unwrap();
    let branches = step(&sq, &sq.initial_config(), &BTreeMap::new(), IdlePolicy::Strict).unwrap();
    assert_eq!(branches.len(), 1);
    assert_eq!(branches[0].transition, None);
}

#[test]
fn step_rejects_bad_arrivals() {
    let sq = model().machine("Sq").unwrap();
    let err = step(&sq, &sq.initial_config(), &arrivals("Nope", &[1]), IdlePolicy::Idle).unwrap_err();
    assert!(matches!(err, BehaviorError::UnknownChannel { .. }));
    let err = step(&sq, &sq.initial_config(), &arrivals("In", &[-1]), IdlePolicy::Idle).unwrap_err();
    assert!(matches!(err, BehaviorError::TypeError { .. }));
}

#[test]
fn strict_stuck_state_is_reported() {
    // Guard fails for 11: the message can never leave the buffer.
    let m = model().machine("SqSigned").unwrap();
    let err = step(&m, &m.initial_config(), &arrivals("In", &[11]), IdlePolicy::Strict).unwrap_err();
    assert!(matches!(err, BehaviorError::StuckState { buffered: 1, .. }));
}

#[test]
fn idle_squarer_on_single_message() {
    let sq = model().machine("Sq").unwrap();
    let x = one("In", ints(&[&[3], &[], &[]]));
    let got = denote(&sq, &x, 3, &SemanticsOptions::default()).unwrap();
    let want: BTreeSet<Valuation> = [
        ints(&[&[], &[9], &[]]),
        ints(&[&[], &[], &[9]]),
        ints(&[&[], &[], &[]]),
    ]
    .into_iter()
    .map(|s| one("Out", s))
    .collect();
    assert_eq!(got, want);
}

#[test]
fn zero_horizon_gives_the_empty_valuation() {
    let sq = model().machine("Sq").unwrap();
    let x = one("In", ints(&[]));
    let got = denote(&sq, &x, 0, &SemanticsOptions::default()).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got.into_iter().next().unwrap(), one("Out", ints(&[])));
}

#[test]
fn horizon_mismatch_is_rejected() {
    let sq = model().machine("Sq").unwrap();
    let x = one("In", ints(&[&[3]]));
    let err = denote(&sq, &x, 2, &SemanticsOptions::default()).unwrap_err();
    assert_eq!(err, BehaviorError::HorizonMismatch { expected: 2, found: 1 });
}

#[test]
fn strict_squarer_matches_oracle() {
    let sq = model().machine("Sq").unwrap();
    let input = vec![vec![2, 3], vec![], vec![5], vec![], vec![]];
    let got = denote(&sq, &one("In", stream_of(&input)), 5, &SemanticsOptions::strict()).unwrap();
    let want = one("Out", stream_of(&squarer_oracle(&input)));
    assert_eq!(got, BTreeSet::from([want]));
}

#[test]
fn machine_policy_overrides_requested_policy() {
    let mut sq = model().machine("Sq").unwrap();
    sq.policy = Some(IdlePolicy::Strict);
    let x = one("In", ints(&[&[3], &[], &[]]));
    assert_eq!(denote(&sq, &x, 3, &SemanticsOptions::default()).unwrap().len(), 1);
}

#[test]
fn explosion_guard_trips() {
    let sq = model().machine("Sq").unwrap();
    let x = one("In", ints(&[&[1, 2, 3], &[4], &[5], &[6], &[7]]));
    let opts = SemanticsOptions {
        budget: 10,
        ..SemanticsOptions::default()
    };
    let err = denote(&sq, &x, 5, &opts).unwrap_err();
    assert!(matches!(err, BehaviorError::ExplosionGuard { budget: 10, .. }));
}

#[test]
fn squarer_is_time_guarded() {
    let sq = model().machine("Sq").unwrap();
    let bounds = Bounds::new(4).with_domain("In", vec![int(0), int(1)]);
    let verdict =
        check_time_guardedness(&sq, 4, &Sampler::Exhaustive(bounds), &SemanticsOptions::default()).unwrap();
    assert!(verdict.passed(), "{verdict:?}");
}

#[test]
fn same_interval_engine_is_caught() {
    // Squares each message in the interval it arrives: output at `i`
    // depends on input at `i`.
    let sq = model().machine("Sq").unwrap();
    let broken = |x: &Valuation| -> Result<BTreeSet<Valuation>, BehaviorError> {
        let input = x.get("In").unwrap();
        let rows = input
            .intervals()
            .iter()
            .map(|ms| ms.iter().map(|v| int(v.as_int().unwrap().pow(2))).collect())
            .collect();
        Ok(BTreeSet::from([one("Out", TimedStream::new(rows))]))
    };
    let bounds = Bounds::new(3).with_domain("In", vec![int(0), int(1)]);
    let verdict = check_time_guardedness_with(&sq.inputs, 3, &Sampler::Exhaustive(bounds), broken).unwrap();
    assert!(!verdict.passed());
}

#[test]
fn random_sampler_agrees_on_guarded_machine() {
    let sq = model().machine("Sq").unwrap();
    let sampler = Sampler::Random {
        bounds: Bounds::new(4).with_domain("In", (0..5).map(int).collect()),
        pairs: 50,
        seed: 11,
    };
    let verdict = check_time_guardedness(&sq, 4, &sampler, &SemanticsOptions::default()).unwrap();
    assert!(verdict.passed(), "{verdict:?}");
}

fn small_input() -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(0i64..5, 0..3), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn denotation_is_prefix_closed(input in small_input(), cut in 0usize..5) {
        let sq = model().machine("Sq").unwrap();
        let k = input.len();
        let cut = cut.min(k);
        let x = one("In", stream_of(&input));
        let full = denote(&sq, &x, k, &SemanticsOptions::default()).unwrap();
        let shortened: BTreeSet<Valuation> = full.iter().map(|o| o.prefix_through(cut).unwrap()).collect();
        let direct = denote(&sq, &x.prefix_through(cut).unwrap(), cut, &SemanticsOptions::default()).unwrap();
        prop_assert_eq!(shortened, direct);
    }

    #[test]
    fn strict_squarer_is_deterministic(input in small_input()) {
        let sq = model().machine("Sq").unwrap();
        let k = input.len();
        let got = denote(&sq, &one("In", stream_of(&input)), k, &SemanticsOptions::strict()).unwrap();
        prop_assert_eq!(got, BTreeSet::from([one("Out", stream_of(&squarer_oracle(&input)))]));
    }
}
