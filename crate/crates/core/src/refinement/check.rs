use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::slack::within_slack;
use super::{RefinementError, Spec, Verdict, Witness};
use crate::behavior::{denote, IdlePolicy, SemanticsOptions, StateMachine};
use crate::kernel::{enumerate_valuations, Bounds, ChannelId, Valuation};
use crate::network::NetworkDef;
use crate::speclang::RefinementKind;

/// Interval delay added by the translator pair of an interface refinement:
/// each translator is a machine, so each takes one interval.
pub const TRANSLATOR_DELAY: usize = 2;

/// A prepared refinement check.
#[derive(Debug, Clone)]
pub struct Check {
    kind: RefinementKind,
    abstract_spec: Spec,
    concrete: Spec,
    translators: Option<(StateMachine, StateMachine)>,
    bounds: Bounds,
    opts: SemanticsOptions,
    slack: usize,
}

pub fn check_behavioral(
    abstract_spec: &Spec,
    concrete: &Spec,
    bounds: &Bounds,
    opts: &SemanticsOptions,
) -> Result<Verdict, RefinementError> {
    Check::behavioral(abstract_spec.clone(), concrete.clone(), bounds.clone(), *opts).run()
}

pub fn check_interface(
    abstract_spec: &Spec,
    concrete: &Spec,
    repr: &StateMachine,
    abst: &StateMachine,
    bounds: &Bounds,
    opts: &SemanticsOptions,
) -> Result<Verdict, RefinementError> {
    Check::interface(abstract_spec.clone(), concrete.clone(), repr.clone(), abst.clone(), bounds.clone(), *opts).run()
}

pub fn check_structural(
    abstract_spec: &Spec,
    concrete: &NetworkDef,
    bounds: &Bounds,
    slack: usize,
    opts: &SemanticsOptions,
) -> Result<Verdict, RefinementError> {
    Check::structural(abstract_spec.clone(), concrete.clone(), bounds.clone(), slack, *opts).run()
}

pub fn check_inheritance(
    sub: &Spec,
    sup: &Spec,
    bounds: &Bounds,
    opts: &SemanticsOptions,
) -> Result<Verdict, RefinementError> {
    Check::inheritance(sub.clone(), sup.clone(), bounds.clone(), *opts).run()
}

fn strict(m: StateMachine) -> StateMachine {
    StateMachine {
        policy: Some(IdlePolicy::Strict),
        ..m
    }
}

fn describe(chans: &[ChannelId]) -> String {
    let items: Vec<String> = chans.iter().map(|c| format!("{}: {}", c.name, c.msg_type)).collect();
    format!("({})", items.join(", "))
}

fn sorted(chans: &[ChannelId]) -> Vec<&ChannelId> {
    let mut v: Vec<&ChannelId> = chans.iter().collect();
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

fn same_channels(what: &str, a: &[ChannelId], c: &[ChannelId]) -> Result<(), RefinementError> {
    if sorted(a) != sorted(c) {
        return Err(RefinementError::InterfaceMismatch(format!(
            "{what} {} vs {}",
            describe(a),
            describe(c)
        )));
    }
    Ok(())
}

fn includes(what: &str, sub: &[ChannelId], sup: &[ChannelId]) -> Result<(), RefinementError> {
    for c in sup {
        if !sub.contains(c) {
            return Err(RefinementError::InterfaceMismatch(format!(
                "{what}: `{}: {}` is missing from the subclass",
                c.name, c.msg_type
            )));
        }
    }
    Ok(())
}

fn positional(what: &str, from: &[ChannelId], to: &[ChannelId]) -> Result<BTreeMap<String, String>, RefinementError> {
    if from.len() != to.len() || from.iter().zip(to).any(|(a, b)| a.msg_type != b.msg_type) {
        return Err(RefinementError::InterfaceMismatch(format!(
            "{what} {} vs {}",
            describe(from),
            describe(to)
        )));
    }
    Ok(from.iter().zip(to).map(|(a, b)| (a.name.clone(), b.name.clone())).collect())
}

impl Check {
    pub fn behavioral(abstract_spec: Spec, concrete: Spec, bounds: Bounds, opts: SemanticsOptions) -> Self {
        Check {
            kind: RefinementKind::Behavioral,
            abstract_spec,
            concrete,
            translators: None,
            bounds,
            opts,
            slack: 0,
        }
    }

    /// `sub` refines `sup` as a subclass: its behaviors, restricted to the
    /// superclass channels with the extra inputs kept silent, are among
    /// the superclass behaviors.
    pub fn inheritance(sub: Spec, sup: Spec, bounds: Bounds, opts: SemanticsOptions) -> Self {
        Check {
            kind: RefinementKind::Inheritance,
            abstract_spec: sup,
            concrete: sub,
            translators: None,
            bounds,
            opts,
            slack: 0,
        }
    }

    pub fn structural(abstract_spec: Spec, concrete: NetworkDef, bounds: Bounds, slack: usize, opts: SemanticsOptions) -> Self {
        Check {
            kind: RefinementKind::Structural,
            abstract_spec,
            concrete: Spec::Network(concrete),
            translators: None,
            bounds,
            opts,
            slack,
        }
    }

    /// `abst ∘ concrete ∘ repr` against the abstract spec. Translator ports
    /// match the abstract and concrete ports by position.
    pub fn interface(
        abstract_spec: Spec,
        concrete: Spec,
        repr: StateMachine,
        abst: StateMachine,
        bounds: Bounds,
        opts: SemanticsOptions,
    ) -> Self {
        Check {
            kind: RefinementKind::Interface,
            abstract_spec,
            concrete,
            translators: Some((strict(repr), strict(abst))),
            bounds,
            opts,
            slack: 0,
        }
    }

    pub fn kind(&self) -> RefinementKind {
        self.kind
    }

    pub fn delay(&self) -> Option<usize> {
        self.translators.as_ref().map(|_| TRANSLATOR_DELAY)
    }

    fn validate(&self) -> Result<(), RefinementError> {
        let (a, c) = (&self.abstract_spec, &self.concrete);
        match self.kind {
            RefinementKind::Behavioral | RefinementKind::Structural => {
                same_channels("inputs", a.inputs(), c.inputs())?;
                same_channels("outputs", a.outputs(), c.outputs())
            }
            RefinementKind::Inheritance => {
                includes("inputs", c.inputs(), a.inputs())?;
                includes("outputs", c.outputs(), a.outputs())
            }
            RefinementKind::Interface => {
                let (repr, abst) = self.translators.as_ref().expect("interface check has translators");
                positional("repr inputs", a.inputs(), &repr.inputs)?;
                positional("repr outputs", &repr.outputs, c.inputs())?;
                positional("abst inputs", c.outputs(), &abst.inputs)?;
                positional("abst outputs", &abst.outputs, a.outputs())?;
                Ok(())
            }
        }
    }

    /// The concrete side's behaviors on `x`, as histories over the abstract
    /// outputs.
    fn concrete_outputs(&self, x: &Valuation, k: usize) -> Result<BTreeSet<Valuation>, RefinementError> {
        let a = &self.abstract_spec;
        let c = &self.concrete;
        match self.kind {
            RefinementKind::Behavioral | RefinementKind::Structural => Ok(c.denote(x, k, &self.opts)?),
            RefinementKind::Inheritance => {
                let x_sub = x.with_silent(c.inputs().iter().map(|ch| ch.name.as_str()));
                let outs = c.denote(&x_sub, k, &self.opts)?;
                Ok(outs
                    .iter()
                    .map(|o| o.project(a.outputs().iter().map(|ch| ch.name.as_str())))
                    .collect())
            }
            RefinementKind::Interface => {
                let (repr, abst) = self.translators.as_ref().expect("interface check has translators");
                let big_k = k + TRANSLATOR_DELAY;
                let to_repr = positional("", a.inputs(), &repr.inputs)?;
                let to_concrete = positional("", &repr.outputs, c.inputs())?;
                let to_abst = positional("", c.outputs(), &abst.inputs)?;
                let to_abstract = positional("", &abst.outputs, a.outputs())?;

                let x_repr = x.extended_to(big_k).renamed(&to_repr);
                let reprs = denote(repr, &x_repr, big_k, &self.opts)?;
                let r = single(repr, reprs)?;
                let mut out = BTreeSet::new();
                for co in c.denote(&r.renamed(&to_concrete), big_k, &self.opts)? {
                    let abstracted = single(abst, denote(abst, &co.renamed(&to_abst), big_k, &self.opts)?)?;
                    out.insert(abstracted.renamed(&to_abstract).shifted_back(TRANSLATOR_DELAY));
                }
                Ok(out)
            }
        }
    }

    fn relates(&self, output: &Valuation, allowed: &BTreeSet<Valuation>) -> bool {
        if self.kind == RefinementKind::Structural && self.slack > 0 {
            allowed.iter().any(|a| within_slack(output, a, self.slack))
        } else {
            allowed.contains(output)
        }
    }

    /// The smallest offending output for `x`, if any.
    fn offending(&self, x: &Valuation, k: usize) -> Result<Option<Valuation>, RefinementError> {
        let allowed = self.abstract_spec.denote(x, k, &self.opts)?;
        let produced = self.concrete_outputs(x, k)?;
        Ok(produced.into_iter().find(|o| !self.relates(o, &allowed)))
    }

    pub fn run(&self) -> Result<Verdict, RefinementError> {
        self.validate()?;
        let mut checked = 0;
        for k in 0..=self.bounds.horizon {
            let xs = enumerate_valuations(self.abstract_spec.inputs(), &self.bounds.at_horizon(k))?;
            checked += xs.len();
            let failures = xs
                .par_iter()
                .map(|x| Ok(self.offending(x, k)?.map(|o| (x.clone(), o))))
                .collect::<Result<Vec<_>, RefinementError>>()?;
            if let Some((input, offending_output)) = failures.into_iter().flatten().min() {
                let explanation = format!(
                    "`{}` can produce {} on input {}, which `{}` does not allow{}",
                    self.concrete.name(),
                    offending_output,
                    input,
                    self.abstract_spec.name(),
                    match (self.kind, self.slack) {
                        (RefinementKind::Structural, s) if s > 0 => format!(" within a slack of {s}"),
                        _ => String::new(),
                    }
                );
                return Ok(Verdict::Fails(Witness {
                    horizon: k,
                    input,
                    offending_output,
                    explanation,
                }));
            }
        }
        Ok(Verdict::HoldsAtBounds {
            horizon: self.bounds.horizon,
            inputs_checked: checked,
            delay: self.delay(),
        })
    }

    /// Recomputes both sides at the witness: the offending output must be
    /// a concrete behavior that the abstract side rules out.
    pub fn reverify(&self, w: &Witness) -> Result<bool, RefinementError> {
        self.validate()?;
        let produced = self.concrete_outputs(&w.input, w.horizon)?;
        let allowed = self.abstract_spec.denote(&w.input, w.horizon, &self.opts)?;
        Ok(produced.contains(&w.offending_output) && !self.relates(&w.offending_output, &allowed))
    }
}

fn single(m: &StateMachine, set: BTreeSet<Valuation>) -> Result<Valuation, RefinementError> {
    if set.len() != 1 {
        return Err(RefinementError::NondeterministicTranslator {
            translator: m.name.clone(),
            count: set.len(),
        });
    }
    Ok(set.into_iter().next().expect("one element"))
}
