//! The operational semantics.
//!
//! [`raw_steps`] enumerates every one-step derivation of a configuration:
//!
//! * `[silent]` — a marked tau place emits `tau` and passes its token.
//! * `[out]` — output with public channel and datum instantiations; the
//!   observation carries both names.
//! * `[o-fresh]` — output of a private instantiation on a public channel
//!   (bound output): the datum box is re-instantiated with the next fresh
//!   output name and the clock ticks.
//! * `[i-fresh]` — input on a public channel: the binder box receives the
//!   next fresh input name and the clock ticks.
//! * `[match]` — an epsilon step refining the partition when the operands
//!   are compatible; silently blocked otherwise.
//! * `[sync]` — internal communication between an output and an input in
//!   distinct parallel components whose channels may be equated; the
//!   partition is refined on the channels and the binder box receives the
//!   emitted datum instantiation.
//! * `[sum]` — one move ahead: each branch that can derive an observation
//!   after finitely many epsilons contributes a step committing the whole
//!   sequence. The lookahead is confined to the branch subgraph.
//! * `[sum0]`/`[par0]`/`[iter0]` — epsilon termination steps; `[par0]`
//!   waits for every fork, `[iter0]` resets the iterator's private and
//!   binder boxes on the way back to the `*`-place.
//! * `[par]`/`[iter]` — epsilon activation steps.
//!
//! Side conditions test the current instantiations, not the static box
//! names: a binder holding a fresh input is public and may carry an
//! observable output, while outputs and inputs on privately-instantiated
//! channels can only fire through `[sync]`.
//!
//! [`gc`] removes names no longer referenced by the instantiation from the
//! causal clock and the partition; [`observable_steps`] performs the
//! epsilon closure used by state-space construction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::clocks::Clock;
use crate::names::{may_equal, Name, Partition};
use crate::syntax::{
    Configuration, GraphAst, PlaceId, PlaceType, PrefixKind, ProcessAst, ZeroRole,
};

/// A transition label. `Epsilon` marks normalization steps that are
/// abstracted away before the transition system is built.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    Epsilon,
    Out { chan: Name, datum: Name },
    In { chan: Name, datum: Name },
}

impl Label {
    pub fn is_epsilon(&self) -> bool {
        matches!(self, Label::Epsilon)
    }
}

impl fmt::Display for Label {
    /// `tau`, `c!<1!>`, `c?(2?)`; epsilon renders `eps` in debug traces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::Epsilon => f.write_str("eps"),
            Label::Out { chan, datum } => write!(f, "{chan}!<{datum}>"),
            Label::In { chan, datum } => write!(f, "{chan}?({datum})"),
        }
    }
}

/// The rule that produced a step, for traces and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Silent,
    Out,
    OFresh,
    IFresh,
    Match,
    Sync,
    Sum,
    Sum0,
    Par,
    Par0,
    Iter,
    Iter0,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Silent => "[silent]",
            Rule::Out => "[out]",
            Rule::OFresh => "[o-fresh]",
            Rule::IFresh => "[i-fresh]",
            Rule::Match => "[match]",
            Rule::Sync => "[sync]",
            Rule::Sum => "[sum]",
            Rule::Sum0 => "[sum0]",
            Rule::Par => "[par]",
            Rule::Par0 => "[par0]",
            Rule::Iter => "[iter]",
            Rule::Iter0 => "[iter0]",
        };
        f.write_str(s)
    }
}

/// One derivation: label, successor configuration, and the rule that fired.
#[derive(Debug, Clone)]
pub struct Step {
    pub label: Label,
    pub target: Configuration,
    pub rule: Rule,
}

/// Where garbage collection runs during exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GcMode {
    /// After every raw rule application (default). Required to reproduce
    /// index reuse within an iteration cycle.
    Step,
    /// Only on the targets of observable transitions.
    Obs,
    /// Never. Forced for logical clocks, where gc is undefined.
    Off,
}

impl fmt::Display for GcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GcMode::Step => f.write_str("step"),
            GcMode::Obs => f.write_str("obs"),
            GcMode::Off => f.write_str("off"),
        }
    }
}

impl FromStr for GcMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "step" => Ok(GcMode::Step),
            "obs" => Ok(GcMode::Obs),
            "off" => Ok(GcMode::Off),
            other => Err(format!("unknown gc mode `{other}` (expected step|obs|off)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// The epsilon closure ran deeper than the static bound. The bound is
    /// guaranteed by construction, so tripping it means an engine bug, not
    /// a user error.
    #[error("epsilon closure exceeded the static bound {bound}; this is an engine bug")]
    EpsilonBoundExceeded { bound: u64 },
}

/// All one-step derivations of the configuration. Blocked configurations
/// yield the empty set.
pub fn raw_steps(config: &Configuration) -> Vec<Step> {
    steps_filtered(config, None)
}

/// Deduplicated, deterministically ordered step collection.
struct StepSet {
    steps: BTreeMap<(String, String, Rule), Step>,
}

impl StepSet {
    fn new() -> StepSet {
        StepSet {
            steps: BTreeMap::new(),
        }
    }

    fn push(&mut self, step: Step) {
        debug_assert!(
            step.target.validate().is_ok(),
            "rule {} produced an invalid configuration: {:?}",
            step.rule,
            step.target.validate()
        );
        let key = (step.label.to_string(), step.target.state_key(), step.rule);
        self.steps.entry(key).or_insert(step);
    }

    fn into_vec(self) -> Vec<Step> {
        self.steps.into_values().collect()
    }
}

/// Compatibility of two instantiations under the current context. Names
/// outside the partition carrier (binders, restrictions, privates) are
/// only compatible with themselves; carrier names go through the partition.
/// Returns the refined partition on success.
fn try_refine(config: &Configuration, a: &Name, b: &Name) -> Option<Partition> {
    if a.in_partition_carrier() && b.in_partition_carrier() {
        let gamma = &config.gamma;
        if gamma
            .compatible(&config.clock, a, b)
            .expect("carrier kinds")
        {
            Some(gamma.refine(&config.clock, a, b).expect("compatible"))
        } else {
            None
        }
    } else if may_equal(&config.clock, a, b) {
        // reduces to a == b outside the carrier; classes are singletons
        Some(config.gamma.clone())
    } else {
        None
    }
}

fn steps_filtered(config: &Configuration, filter: Option<&BTreeSet<PlaceId>>) -> Vec<Step> {
    let graph = config.graph().clone();
    let allowed = |p: PlaceId| filter.is_none_or(|f| f.contains(&p));
    let mut steps = StepSet::new();

    let marked: Vec<PlaceId> = config.marked_places().filter(|p| allowed(*p)).collect();
    let mut marked_outs: Vec<PlaceId> = Vec::new();
    let mut marked_ins: Vec<PlaceId> = Vec::new();
    let mut par_zero_candidates: BTreeSet<PlaceId> = BTreeSet::new();

    for &p in &marked {
        let info = graph.place(p);
        match info.ty {
            PlaceType::Tau => {
                let mut target = config.clone();
                target.move_token(p, info.ctl[0]);
                steps.push(Step {
                    label: Label::Tau,
                    target,
                    rule: Rule::Silent,
                });
            }
            PlaceType::Out => {
                marked_outs.push(p);
                let chan = config.inst(info.output.unwrap()).clone();
                if !chan.is_public() {
                    continue; // private channel: only [sync] applies
                }
                let datum_box = info.data.unwrap();
                let datum = config.inst(datum_box).clone();
                if datum.is_public() {
                    let mut target = config.clone();
                    target.move_token(p, info.ctl[0]);
                    steps.push(Step {
                        label: Label::Out { chan, datum },
                        target,
                        rule: Rule::Out,
                    });
                } else {
                    let fresh = Name::fresh_out(config.clock.next_o());
                    let mut target = config.clone();
                    target.set_inst(datum_box, fresh.clone());
                    target.clock = config.clock.tick_out();
                    target.move_token(p, info.ctl[0]);
                    steps.push(Step {
                        label: Label::Out { chan, datum: fresh },
                        target,
                        rule: Rule::OFresh,
                    });
                }
            }
            PlaceType::In => {
                marked_ins.push(p);
                let chan = config.inst(info.input.unwrap()).clone();
                if !chan.is_public() {
                    continue;
                }
                let fresh = Name::fresh_in(config.clock.next_i());
                let mut target = config.clone();
                target.set_inst(info.data.unwrap(), fresh.clone());
                target.clock = config.clock.tick_in();
                target.move_token(p, info.ctl[0]);
                steps.push(Step {
                    label: Label::In { chan, datum: fresh },
                    target,
                    rule: Rule::IFresh,
                });
            }
            PlaceType::Match => {
                let left = config.inst(info.data.unwrap()).clone();
                let right = config.inst(info.data2.unwrap()).clone();
                if let Some(gamma) = try_refine(config, &left, &right) {
                    let mut target = config.clone();
                    target.gamma = gamma;
                    target.move_token(p, info.ctl[0]);
                    steps.push(Step {
                        label: Label::Epsilon,
                        target,
                        rule: Rule::Match,
                    });
                }
            }
            PlaceType::Sum => {
                sum_lookahead(config, p, &mut steps);
            }
            PlaceType::Par => {
                let construct = info.construct.as_ref().unwrap();
                let mut target = config.clone();
                target.set_mark(p, false);
                for branch in &construct.branches {
                    target.set_mark(branch.initial, true);
                }
                steps.push(Step {
                    label: Label::Epsilon,
                    target,
                    rule: Rule::Par,
                });
            }
            PlaceType::Iter => {
                let mut target = config.clone();
                target.move_token(p, info.ctl[0]);
                steps.push(Step {
                    label: Label::Epsilon,
                    target,
                    rule: Rule::Iter,
                });
            }
            PlaceType::Zero => match info.zero_role.unwrap() {
                ZeroRole::IterBody { iter } => {
                    let it = &graph.iterators[iter];
                    let mut target = config.clone();
                    for &b in &it.reset_boxes {
                        let default = graph.box_name(b).clone();
                        target.set_inst(b, default);
                    }
                    target.move_token(p, it.star);
                    steps.push(Step {
                        label: Label::Epsilon,
                        target,
                        rule: Rule::Iter0,
                    });
                }
                ZeroRole::SumBranch { sum, .. } => {
                    // the owning sum must be inside the active subgraph,
                    // otherwise this terminator is a lookahead dead end
                    if allowed(sum) {
                        let cont = graph.place(sum).construct.as_ref().unwrap().continuation;
                        let mut target = config.clone();
                        target.move_token(p, cont);
                        steps.push(Step {
                            label: Label::Epsilon,
                            target,
                            rule: Rule::Sum0,
                        });
                    }
                }
                ZeroRole::ParBranch { par, .. } => {
                    if allowed(par) {
                        par_zero_candidates.insert(par);
                    }
                }
            },
        }
    }

    // [par0] fires once per parallel construct whose branch terminators are
    // all marked.
    for par in par_zero_candidates {
        let construct = graph.place(par).construct.as_ref().unwrap();
        if construct.branches.iter().all(|b| config.is_marked(b.zero)) {
            let mut target = config.clone();
            for branch in &construct.branches {
                target.set_mark(branch.zero, false);
            }
            debug_assert!(!config.is_marked(construct.continuation));
            target.set_mark(construct.continuation, true);
            steps.push(Step {
                label: Label::Epsilon,
                target,
                rule: Rule::Par0,
            });
        }
    }

    // [sync] over all concurrent output/input pairs with a default binder
    // and compatible channel instantiations.
    for &o in &marked_outs {
        for &i in &marked_ins {
            if !graph.distinct_components(o, i) {
                continue;
            }
            let out_info = graph.place(o);
            let in_info = graph.place(i);
            let binder_box = in_info.data.unwrap();
            if config.inst(binder_box) != graph.box_name(binder_box) {
                continue;
            }
            let chan_out = config.inst(out_info.output.unwrap()).clone();
            let chan_in = config.inst(in_info.input.unwrap()).clone();
            let Some(gamma) = try_refine(config, &chan_out, &chan_in) else {
                continue;
            };
            let datum = config.inst(out_info.data.unwrap()).clone();
            let mut target = config.clone();
            target.gamma = gamma;
            target.set_inst(binder_box, datum);
            target.move_token(o, out_info.ctl[0]);
            target.move_token(i, in_info.ctl[0]);
            steps.push(Step {
                label: Label::Tau,
                target,
                rule: Rule::Sync,
            });
        }
    }

    steps.into_vec()
}

/// `[sum]`: for each branch, explore the epsilon closure of the branch
/// subgraph in isolation and emit one step per reachable observation,
/// committing the whole sequence. Epsilon steps inside the lookahead never
/// change the clock or the instantiation, so the closure is finite and
/// deduplication by state key terminates it.
fn sum_lookahead(config: &Configuration, sum_place: PlaceId, steps: &mut StepSet) {
    let graph = config.graph().clone();
    let construct = graph.place(sum_place).construct.as_ref().unwrap();
    for branch in &construct.branches {
        let branch_places: BTreeSet<PlaceId> = branch.places.iter().copied().collect();
        let mut start = config.clone();
        start.move_token(sum_place, branch.initial);

        let mut visited = BTreeSet::from([start.state_key()]);
        let mut queue = VecDeque::from([start]);
        while let Some(state) = queue.pop_front() {
            for step in steps_filtered(&state, Some(&branch_places)) {
                if step.label.is_epsilon() {
                    if visited.insert(step.target.state_key()) {
                        queue.push_back(step.target);
                    }
                } else {
                    steps.push(Step {
                        label: step.label,
                        target: step.target,
                        rule: Rule::Sum,
                    });
                }
            }
        }
    }
}

/// Garbage collection of unused names. Identity for logical clocks.
///
/// The partition keeps free names, fresh outputs and instantiated names;
/// classes shrunk to one element become implicit again. The clock keeps
/// the bottom entry, entries instantiated somewhere, and output entries
/// still equated to inputs by the collected partition; every kept entry is
/// intersected with the instantiated inputs. Idempotent.
pub fn gc(config: &Configuration) -> Configuration {
    let Clock::Causal(causal) = &config.clock else {
        return config.clone();
    };
    let cod: BTreeSet<Name> = config.inst_codomain().into_iter().cloned().collect();

    let mut classes = Vec::new();
    for class in config.gamma.classes() {
        let kept: BTreeSet<Name> = class
            .iter()
            .filter(|n| matches!(n, Name::Free(_) | Name::FreshOut(_)) || cod.contains(n))
            .cloned()
            .collect();
        if kept.len() >= 2 {
            classes.push(kept);
        }
    }
    let gamma = Partition::from_classes(classes);

    let output_in_gamma = |d: u64| {
        gamma
            .classes()
            .any(|class| class.contains(&Name::FreshOut(d)))
    };
    let clock = causal.retain(
        |key| match key {
            None => true,
            Some(d) => cod.contains(&Name::FreshOut(d)) || output_in_gamma(d),
        },
        |m| cod.contains(&Name::FreshIn(m)),
    );

    let mut collected = config.clone();
    collected.clock = Clock::Causal(clock);
    collected.gamma = gamma;
    collected
}

/// Static upper bound on the length of any epsilon run the model can
/// generate: silent, input and output prefixes contribute nothing, a match
/// one step, a parallel the sum of its branch bounds plus one, a choice
/// the maximum of its branch bounds plus one; a process sums its prefixes,
/// an iterator doubles its body bound plus two (terminal run, reset,
/// restart, initial run), and a graph sums its iterators since their runs
/// interleave.
pub fn epsilon_bound(ast: &GraphAst) -> u64 {
    ast.iterators
        .iter()
        .map(|it| 2 * process_bound(&it.body) + 2)
        .sum()
}

fn process_bound(proc: &ProcessAst) -> u64 {
    proc.prefixes
        .iter()
        .map(|p| match &p.kind {
            PrefixKind::Silent | PrefixKind::Output { .. } | PrefixKind::Input { .. } => 0,
            PrefixKind::Match { .. } => 1,
            PrefixKind::Par(branches) => branches.iter().map(process_bound).sum::<u64>() + 1,
            PrefixKind::Sum(branches) => branches.iter().map(process_bound).max().unwrap_or(0) + 1,
        })
        .sum()
}

/// Observable steps: the non-epsilon steps reachable from `config` through
/// epsilon steps only, with every returned target normalized under the
/// active gc mode. `config` itself must already be normalized.
///
/// The closure deduplicates states, so it always terminates; the depth
/// guard exists to surface engine bugs, since no legitimate run exceeds
/// the static bound.
pub fn observable_steps(
    config: &Configuration,
    bound: u64,
    mode: GcMode,
) -> Result<Vec<Step>, EngineError> {
    let mut observables = StepSet::new();
    let mut visited = BTreeSet::from([config.state_key()]);
    let mut queue = VecDeque::from([(config.clone(), 0u64)]);
    while let Some((state, depth)) = queue.pop_front() {
        for step in raw_steps(&state) {
            if step.label.is_epsilon() {
                if depth + 1 > bound {
                    return Err(EngineError::EpsilonBoundExceeded { bound });
                }
                let target = match mode {
                    GcMode::Step => gc(&step.target),
                    GcMode::Obs | GcMode::Off => step.target,
                };
                if visited.insert(target.state_key()) {
                    queue.push_back((target, depth + 1));
                }
            } else {
                let target = match mode {
                    GcMode::Step | GcMode::Obs => gc(&step.target),
                    GcMode::Off => step.target,
                };
                observables.push(Step {
                    label: step.label,
                    target,
                    rule: step.rule,
                });
            }
        }
    }
    Ok(observables.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clocks::{CausalClock, ClockModel};
    use crate::syntax::tests::{GENERATOR, MATCH_EMIT_FIRST};
    use crate::syntax::{compile, parse, render};

    const CHANNEL_PASSING: &str =
        "free(m) restr() *[ priv(c, d) bind(x, y) par{ d?(y).0 || c!<d>.0 || c?(x).x!<m>.0 }.0 ]";

    fn model(source: &str, clock: ClockModel) -> Configuration {
        compile(&parse(source).unwrap(), clock)
    }

    fn only(mut steps: Vec<Step>) -> Step {
        assert_eq!(
            steps.len(),
            1,
            "expected exactly one step, got {:?}",
            steps
                .iter()
                .map(|s| (s.rule, s.label.to_string()))
                .collect::<Vec<_>>()
        );
        steps.pop().unwrap()
    }

    /// Follows the unique step as long as `count` says so.
    fn chain(config: &Configuration, count: usize) -> Vec<Step> {
        let mut state = config.clone();
        let mut taken = Vec::new();
        for _ in 0..count {
            let step = only(raw_steps(&state));
            state = step.target.clone();
            taken.push(step);
        }
        taken
    }

    #[test]
    fn label_rendering_is_exact() {
        assert_eq!(Label::Tau.to_string(), "tau");
        assert_eq!(Label::Epsilon.to_string(), "eps");
        assert_eq!(
            Label::Out {
                chan: Name::free("c"),
                datum: Name::fresh_out(1)
            }
            .to_string(),
            "c!<1!>"
        );
        assert_eq!(
            Label::In {
                chan: Name::free("c"),
                datum: Name::fresh_in(2)
            }
            .to_string(),
            "c?(2?)"
        );
        assert_eq!(
            Label::Out {
                chan: Name::free("d"),
                datum: Name::private("d")
            }
            .to_string(),
            "d!<$d>"
        );
    }

    #[test]
    fn generator_activates_and_emits() {
        let initial = model(GENERATOR, ClockModel::Logical);
        let activate = only(raw_steps(&initial));
        assert_eq!(activate.rule, Rule::Iter);
        assert_eq!(activate.label, Label::Epsilon);

        let emit = only(raw_steps(&activate.target));
        assert_eq!(emit.rule, Rule::OFresh);
        assert_eq!(emit.label.to_string(), "c!<1!>");
        assert_eq!(emit.target.clock, Clock::Logical(1));
        assert_eq!(render(&emit.target), "1;{} |- *[ c!<$a|1!>.{0} ]");
    }

    #[test]
    fn match_example_replays_every_state() {
        let steps = chain(&model(MATCH_EMIT_FIRST, ClockModel::Logical), 4);
        let rules: Vec<Rule> = steps.iter().map(|s| s.rule).collect();
        assert_eq!(
            rules,
            vec![Rule::Iter, Rule::OFresh, Rule::IFresh, Rule::Match]
        );
        assert_eq!(steps[1].label.to_string(), "c!<1!>");
        assert_eq!(
            render(&steps[1].target),
            "1;{} |- *[ c!<$a|1!>.{d?(?x)}.[$a|1!=?x].tau.0 ]"
        );
        assert_eq!(steps[2].label.to_string(), "d?(2?)");
        assert_eq!(
            render(&steps[2].target),
            "2;{} |- *[ c!<$a|1!>.d?(?x|2?).{[$a|1!=?x|2?]}.tau.0 ]"
        );
        assert_eq!(steps[3].label, Label::Epsilon);
        assert_eq!(
            render(&steps[3].target),
            "2;{1!,2?} |- *[ c!<$a|1!>.d?(?x|2?).[$a|1!=?x|2?].{tau}.0 ]"
        );
    }

    #[test]
    fn reversed_match_blocks() {
        let reversed = "free(c, d) restr() *[ priv(a) bind(x) d?(x).c!<a>.[a=x].tau.0 ]";
        let steps = chain(&model(reversed, ClockModel::Logical), 3);
        assert_eq!(steps[1].label.to_string(), "d?(1?)");
        assert_eq!(steps[2].label.to_string(), "c!<2!>");
        // the marked =-place admits no step: 2! was created after 1?
        assert!(raw_steps(&steps[2].target).is_empty());
    }

    #[test]
    fn mobility_example_synchronizes_twice() {
        let initial = model(CHANNEL_PASSING, ClockModel::Causal);
        let graph = initial.graph().clone();
        let activate = only(raw_steps(&initial));
        assert_eq!(activate.rule, Rule::Iter);
        let fork = only(raw_steps(&activate.target));
        assert_eq!(fork.rule, Rule::Par);

        // first tau: B sends the private d to C over the private c
        let sync1 = only(raw_steps(&fork.target));
        assert_eq!(sync1.rule, Rule::Sync);
        assert_eq!(sync1.label, Label::Tau);
        let x_box = graph.box_by_name(&Name::binder("x")).unwrap();
        assert_eq!(sync1.target.inst(x_box), &Name::private("d"));
        assert!(sync1.target.gamma.is_empty());

        // second tau: C forwards m to A over the received d
        let sync2 = only(raw_steps(&sync1.target));
        assert_eq!(sync2.rule, Rule::Sync);
        let y_box = graph.box_by_name(&Name::binder("y")).unwrap();
        assert_eq!(sync2.target.inst(y_box), &Name::free("m"));

        // all forks terminated: par0, then iter0 resets back to the start
        let join = only(raw_steps(&sync2.target));
        assert_eq!(join.rule, Rule::Par0);
        let reset = only(raw_steps(&join.target));
        assert_eq!(reset.rule, Rule::Iter0);
        assert_eq!(reset.target.state_key(), initial.state_key());
    }

    #[test]
    fn gc_examples() {
        // initial graphs are garbage-free
        let initial = model(GENERATOR, ClockModel::Causal);
        assert_eq!(gc(&initial).state_key(), initial.state_key());

        // after emit + reset, the stale 1! leaves the clock
        let emitted = chain(&initial, 3); // iter, o-fresh, iter0
        assert_eq!(emitted[1].rule, Rule::OFresh);
        assert_eq!(emitted[2].rule, Rule::Iter0);
        let stale = &emitted[2].target;
        assert_eq!(
            stale.clock.names_of().unwrap(),
            [Name::fresh_out(1)].into_iter().collect()
        );
        let collected = gc(stale);
        assert!(collected.clock.names_of().unwrap().is_empty());
        assert_eq!(collected.state_key(), initial.state_key());

        // an uninstantiated output stays while the partition still equates it
        let mut state = model(MATCH_EMIT_FIRST, ClockModel::Causal);
        let graph = state.graph().clone();
        state.clock = Clock::Causal(CausalClock::init().tick_out().tick_in().tick_in());
        state.gamma = Partition::from_classes([[Name::fresh_out(1), Name::fresh_in(2)]]);
        state.set_inst(
            graph.box_by_name(&Name::binder("x")).unwrap(),
            Name::fresh_in(2),
        );
        let collected = gc(&state);
        assert_eq!(collected.gamma, state.gamma);
        assert_eq!(
            collected.clock.names_of().unwrap(),
            [Name::fresh_out(1), Name::fresh_in(2)]
                .into_iter()
                .collect()
        );
        // and gc is idempotent
        assert_eq!(gc(&collected).state_key(), collected.state_key());
    }

    #[test]
    fn epsilon_bound_examples() {
        let bound = |s: &str| epsilon_bound(&parse(s).unwrap());
        assert_eq!(bound("free() restr() *[ priv() bind() tau.0 ]"), 2);
        assert_eq!(bound("free(c) restr() *[ priv() bind(x) [x=c].tau.0 ]"), 4);
        assert_eq!(
            bound(
                "free(c) restr() *[ priv() bind() tau.0 ] \
                 *[ priv() bind(x) [x=c].tau.0 ]"
            ),
            6
        );
        // par sums branch bounds plus one, sum takes the max plus one
        assert_eq!(
            bound(
                "free(a, b) restr() *[ priv() bind() \
                 par{ [a=b].tau.0 || [a=b].tau.0 }.0 ]"
            ),
            2 * (1 + 1 + 1) + 2
        );
        assert_eq!(
            bound(
                "free(a, b) restr() *[ priv() bind() \
                 sum{ [a=b].tau.0 + tau.0 }.0 ]"
            ),
            2 * (1 + 1) + 2
        );
    }

    #[test]
    fn causal_generator_collapses_to_a_self_loop() {
        let initial = model(GENERATOR, ClockModel::Causal);
        let bound = initial.graph().eps_bound;
        let first = only(observable_steps(&initial, bound, GcMode::Step).unwrap());
        assert_eq!(first.label.to_string(), "c!<1!>");
        let second = only(observable_steps(&first.target, bound, GcMode::Step).unwrap());
        assert_eq!(second.label.to_string(), "c!<1!>");
        // the post-output state loops back to itself: 1! is reused
        assert_eq!(second.target.state_key(), first.target.state_key());
    }

    #[test]
    fn logical_generator_keeps_minting() {
        let initial = model(GENERATOR, ClockModel::Logical);
        let bound = initial.graph().eps_bound;
        let first = only(observable_steps(&initial, bound, GcMode::Off).unwrap());
        let second = only(observable_steps(&first.target, bound, GcMode::Off).unwrap());
        let third = only(observable_steps(&second.target, bound, GcMode::Off).unwrap());
        assert_eq!(first.label.to_string(), "c!<1!>");
        assert_eq!(second.label.to_string(), "c!<2!>");
        assert_eq!(third.label.to_string(), "c!<3!>");
        assert_ne!(first.target.state_key(), second.target.state_key());
    }

    #[test]
    fn sum_commits_one_move_ahead() {
        let initial = model(
            "free(a, b) restr() *[ priv() bind() sum{ a!<b>.0 + tau.0 }.0 ]",
            ClockModel::Causal,
        );
        let activated = only(raw_steps(&initial)).target;
        let steps = raw_steps(&activated);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|s| s.rule == Rule::Sum));
        let labels: Vec<String> = steps.iter().map(|s| s.label.to_string()).collect();
        assert_eq!(labels, vec!["a!<b>".to_string(), "tau".to_string()]);
        // the whole branch sequence is committed: the sum place is spent
        // and the taken branch sits at its terminator
        for step in &steps {
            let next = only(raw_steps(&step.target));
            assert_eq!(next.rule, Rule::Sum0);
        }
    }

    #[test]
    fn sum_lookahead_carries_the_refined_context() {
        let initial = model(
            "free(a, b) restr() *[ priv() bind() sum{ [a=b].tau.0 + tau.0 }.0 ]",
            ClockModel::Causal,
        );
        let activated = only(raw_steps(&initial)).target;
        let steps = raw_steps(&activated);
        // both branches observe tau, but through the match branch the
        // partition has been refined
        assert_eq!(steps.len(), 2);
        assert!(steps
            .iter()
            .all(|s| s.label == Label::Tau && s.rule == Rule::Sum));
        let gammas: Vec<String> = steps.iter().map(|s| s.target.gamma.to_string()).collect();
        assert!(gammas.contains(&"{}".to_string()));
        assert!(gammas.contains(&"{a,b}".to_string()));
    }

    #[test]
    fn sync_needs_distinct_components_and_a_default_binder() {
        let two_iters = "free(c) restr() \
                         *[ priv(a) bind() c!<a>.0 ] *[ priv() bind(x) c?(x).0 ]";
        let initial = model(two_iters, ClockModel::Causal);
        let graph = initial.graph().clone();
        // activate both iterators
        let mut state = initial;
        for _ in 0..2 {
            let step = raw_steps(&state)
                .into_iter()
                .find(|s| s.rule == Rule::Iter)
                .unwrap();
            state = step.target;
        }
        let steps = raw_steps(&state);
        let rules: Vec<Rule> = steps.iter().map(|s| s.rule).collect();
        assert!(rules.contains(&Rule::OFresh));
        assert!(rules.contains(&Rule::IFresh));
        assert!(rules.contains(&Rule::Sync));
        assert_eq!(steps.len(), 3);
        let sync = steps.into_iter().find(|s| s.rule == Rule::Sync).unwrap();
        let x_box = graph.box_by_name(&Name::binder("x")).unwrap();
        // the private datum moves without extrusion
        assert_eq!(sync.target.inst(x_box), &Name::private("a"));

        // an already-instantiated binder box refuses synchronization
        let mut taken = state.clone();
        taken.set_inst(x_box, Name::free("c"));
        assert!(raw_steps(&taken).iter().all(|s| s.rule != Rule::Sync));
    }

    #[test]
    fn private_channels_block_without_a_partner() {
        let initial = model(
            "free() restr() *[ priv(c, d) bind() c!<d>.0 ]",
            ClockModel::Causal,
        );
        let activated = only(raw_steps(&initial)).target;
        assert!(raw_steps(&activated).is_empty());
    }

    #[test]
    fn input_overwrites_a_previous_instantiation() {
        let initial = model(
            "free(c) restr() *[ priv() bind(x) c?(x).c?(x).0 ]",
            ClockModel::Causal,
        );
        let graph = initial.graph().clone();
        let x_box = graph.box_by_name(&Name::binder("x")).unwrap();
        let steps = chain(&initial, 3);
        assert_eq!(steps[1].label.to_string(), "c?(1?)");
        assert_eq!(steps[2].label.to_string(), "c?(2?)");
        assert_eq!(steps[2].target.inst(x_box), &Name::fresh_in(2));
    }

    #[test]
    fn restrictions_survive_iterations() {
        // the restriction box is extruded once and never reset
        let initial = model(
            "free(c) restr(S) *[ priv() bind() c!<S>.0 ]",
            ClockModel::Causal,
        );
        let steps = chain(&initial, 4); // iter, o-fresh, iter0, iter
        assert_eq!(steps[1].label.to_string(), "c!<1!>");
        assert_eq!(steps[1].rule, Rule::OFresh);
        let emit_again = only(raw_steps(&steps[3].target));
        // second iteration re-emits the same public identity
        assert_eq!(emit_again.rule, Rule::Out);
        assert_eq!(emit_again.label.to_string(), "c!<1!>");
    }

    #[test]
    fn static_part_is_shared_across_steps() {
        let initial = model(CHANNEL_PASSING, ClockModel::Causal);
        let mut state = initial.clone();
        for _ in 0..6 {
            let Some(step) = raw_steps(&state).into_iter().next() else {
                break;
            };
            assert!(std::sync::Arc::ptr_eq(initial.graph(), step.target.graph()));
            state = step.target;
        }
    }

    #[test]
    fn obs_mode_keeps_stale_indices_across_iterations() {
        // with gc only on observation targets, the stale 1! still sits in
        // the clock when the next output fires, so the labels alternate
        // c!<1!>, c!<2!>, c!<1!>, ... instead of collapsing
        let initial = model(GENERATOR, ClockModel::Causal);
        let bound = initial.graph().eps_bound;
        let first = only(observable_steps(&initial, bound, GcMode::Obs).unwrap());
        let second = only(observable_steps(&first.target, bound, GcMode::Obs).unwrap());
        let third = only(observable_steps(&second.target, bound, GcMode::Obs).unwrap());
        assert_eq!(first.label.to_string(), "c!<1!>");
        assert_eq!(second.label.to_string(), "c!<2!>");
        assert_eq!(third.label.to_string(), "c!<1!>");
        assert_eq!(third.target.state_key(), first.target.state_key());
    }

    #[test]
    fn causal_clocks_without_gc_diverge() {
        let initial = model(GENERATOR, ClockModel::Causal);
        let lts = crate::lts::build_lts(&initial, 10, GcMode::Off).unwrap();
        assert!(lts.truncated());
    }

    #[test]
    fn epsilon_bound_guard_reports_engine_bugs() {
        let initial = model(MATCH_EMIT_FIRST, ClockModel::Logical);
        // a bound of zero forbids even the [iter] activation
        assert_eq!(
            observable_steps(&initial, 0, GcMode::Off).unwrap_err(),
            EngineError::EpsilonBoundExceeded { bound: 0 }
        );
    }
}
