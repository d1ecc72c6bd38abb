use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::machine::StateMachine;
use super::step::{denote, SemanticsOptions};
use super::BehaviorError;
use crate::kernel::{enumerate_valuations, Bounds, ChannelId, TimedStream, Valuation};

/// How input pairs are chosen.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Every pair of valuations within the bounds.
    Exhaustive(Bounds),
    /// `pairs` random pairs that agree on a random prefix.
    Random { bounds: Bounds, pairs: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuardednessVerdict {
    Pass {
        pairs: u64,
    },
    Fail {
        /// Both inputs agree on intervals `1..=agree_through`.
        agree_through: usize,
        x: Valuation,
        x_prime: Valuation,
        /// An output prefix through `agree_through + 1` possible for one input but not the other.
        output: Valuation,
    },
}

impl GuardednessVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, GuardednessVerdict::Pass { .. })
    }
}

/// Checks that outputs through interval `i + 1` depend only on inputs
/// through interval `i`, for the machine's own semantics.
pub fn check_time_guardedness(
    machine: &StateMachine,
    horizon: usize,
    sampler: &Sampler,
    opts: &SemanticsOptions,
) -> Result<GuardednessVerdict, BehaviorError> {
    check_time_guardedness_with(&machine.inputs, horizon, sampler, |x| denote(machine, x, horizon, opts))
}

/// The same check against an arbitrary semantics function, so the checker
/// itself can be tested against a deliberately broken engine.
pub fn check_time_guardedness_with<F>(
    inputs: &[ChannelId],
    horizon: usize,
    sampler: &Sampler,
    semantics: F,
) -> Result<GuardednessVerdict, BehaviorError>
where
    F: Fn(&Valuation) -> Result<BTreeSet<Valuation>, BehaviorError> + Sync,
{
    match sampler {
        Sampler::Exhaustive(bounds) => {
            let xs = enumerate_valuations(inputs, &bounds.at_horizon(horizon))?;
            let outs = xs
                .par_iter()
                .map(&semantics)
                .collect::<Result<Vec<_>, _>>()?;
            exhaustive(&xs, &outs, horizon)
        }
        Sampler::Random { bounds, pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut checked = 0;
            for _ in 0..*pairs {
                if horizon == 0 {
                    break;
                }
                let x = random_valuation(&mut rng, inputs, bounds, horizon);
                let i = rng.gen_range(0..horizon);
                let suffix = random_valuation(&mut rng, inputs, bounds, horizon - i);
                let x_prime = splice(&x, i, &suffix);
                let left = projection(&semantics(&x)?, i + 1);
                let right = projection(&semantics(&x_prime)?, i + 1);
                if let Some(output) = left.symmetric_difference(&right).next() {
                    return Ok(GuardednessVerdict::Fail {
                        agree_through: i,
                        output: output.clone(),
                        x,
                        x_prime,
                    });
                }
                checked += 1;
            }
            Ok(GuardednessVerdict::Pass { pairs: checked })
        }
    }
}

fn exhaustive(
    xs: &[Valuation],
    outs: &[BTreeSet<Valuation>],
    horizon: usize,
) -> Result<GuardednessVerdict, BehaviorError> {
    let mut pairs = 0u64;
    for i in 0..horizon {
        let mut groups: BTreeMap<Valuation, Vec<usize>> = BTreeMap::new();
        for (idx, x) in xs.iter().enumerate() {
            groups
                .entry(x.prefix_through(i).expect("i < horizon"))
                .or_default()
                .push(idx);
        }
        for members in groups.values() {
            let first = members[0];
            let reference = projection(&outs[first], i + 1);
            for &other in &members[1..] {
                let p = projection(&outs[other], i + 1);
                if let Some(output) = reference.symmetric_difference(&p).next() {
                    return Ok(GuardednessVerdict::Fail {
                        agree_through: i,
                        x: xs[first].clone(),
                        x_prime: xs[other].clone(),
                        output: output.clone(),
                    });
                }
            }
            let n = members.len() as u64;
            pairs += n * (n - 1) / 2;
        }
    }
    Ok(GuardednessVerdict::Pass { pairs })
}

fn projection(outs: &BTreeSet<Valuation>, through: usize) -> BTreeSet<Valuation> {
    outs.iter()
        .map(|o| o.prefix_through(through).expect("output covers the horizon"))
        .collect()
}

fn random_valuation(rng: &mut ChaCha8Rng, inputs: &[ChannelId], bounds: &Bounds, horizon: usize) -> Valuation {
    let streams = inputs.iter().map(|c| {
        let domain = bounds.domain_for(c);
        let intervals = (0..horizon)
            .map(|_| {
                if domain.is_empty() {
                    return Vec::new();
                }
                let n = rng.gen_range(0..=bounds.max_per_interval);
                (0..n).map(|_| domain[rng.gen_range(0..domain.len())].clone()).collect()
            })
            .collect();
        (c.name.clone(), TimedStream::new(intervals))
    });
    Valuation::new(horizon, streams.collect()).expect("uniform horizon")
}

fn splice(x: &Valuation, keep: usize, suffix: &Valuation) -> Valuation {
    let streams = x.entries().iter().map(|(c, s)| {
        let head = s.prefix_through(keep).expect("keep < horizon");
        (c.clone(), head.concat(suffix.get(c).expect("same channels")))
    });
    Valuation::new(x.horizon(), streams.collect()).expect("uniform horizon")
}
