#![allow(dead_code)]

pub mod mutations;

use std::path::PathBuf;

use fks_core::kernel::{TimedStream, Valuation, Value};
use fks_core::model::Model;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "fks"))
        .collect();
    files.sort();
    files
}

pub fn model() -> Model {
    Model::load(fixture("all.fks")).unwrap()
}

pub fn int(n: i64) -> Value {
    Value::Int(n)
}

/// `ints(&[&[3], &[]])` is the stream ⟨[3], []⟩.
pub fn ints(intervals: &[&[i64]]) -> TimedStream {
    TimedStream::new(intervals.iter().map(|xs| xs.iter().map(|&n| int(n)).collect()).collect())
}

pub fn one(channel: &str, stream: TimedStream) -> Valuation {
    Valuation::from_streams([(channel, stream)]).unwrap()
}
