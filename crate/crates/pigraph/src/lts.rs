//! Finite labelled transition system construction and export.
//!
//! States are deduplicated by the canonical serialization of their dynamic
//! quadruple and numbered in BFS order, which makes every export
//! byte-reproducible. Epsilon steps never appear: only observation
//! endpoints are stored.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::clocks::{Clock, ClockModel};
use crate::engine::{gc, observable_steps, EngineError, GcMode, Label};
use crate::syntax::Configuration;

/// A finite ground transition system over one static graph.
#[derive(Debug, Clone)]
pub struct Lts {
    keys: Vec<String>,
    configs: Vec<Configuration>,
    transitions: BTreeSet<(usize, Label, usize)>,
    truncated: bool,
    clock_model: ClockModel,
    gc_mode: GcMode,
}

impl Lts {
    pub fn state_count(&self) -> usize {
        self.configs.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// The initial state is always state 0.
    pub fn initial(&self) -> usize {
        0
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn clock_model(&self) -> ClockModel {
        self.clock_model
    }

    pub fn gc_mode(&self) -> GcMode {
        self.gc_mode
    }

    pub fn key(&self, state: usize) -> &str {
        &self.keys[state]
    }

    pub fn config(&self, state: usize) -> &Configuration {
        &self.configs[state]
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, &Configuration)> {
        self.configs.iter().enumerate()
    }

    pub fn transitions(&self) -> impl Iterator<Item = &(usize, Label, usize)> {
        self.transitions.iter()
    }

    /// Assembles a transition system from explicit parts; used by tests and
    /// reference constructions. State 0 is the initial state.
    pub fn from_parts(
        configs: Vec<Configuration>,
        transitions: impl IntoIterator<Item = (usize, Label, usize)>,
        clock_model: ClockModel,
        gc_mode: GcMode,
    ) -> Lts {
        let keys = configs.iter().map(|c| c.state_key()).collect();
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        for (src, label, tgt) in &transitions {
            assert!(*src < configs.len() && *tgt < configs.len());
            assert!(!label.is_epsilon());
        }
        Lts {
            keys,
            configs,
            transitions,
            truncated: false,
            clock_model,
            gc_mode,
        }
    }
}

/// Breadth-first construction of the transition system reachable from the
/// configuration. Exploration stops normally when the frontier empties;
/// hitting `max_states` stops it early and flags the result as truncated.
pub fn build_lts(
    config: &Configuration,
    max_states: usize,
    gc_mode: GcMode,
) -> Result<Lts, EngineError> {
    let initial = match gc_mode {
        GcMode::Off => config.clone(),
        GcMode::Step | GcMode::Obs => gc(config),
    };
    let bound = config.graph().eps_bound;
    let clock_model = config.clock.model();

    let mut keys = vec![initial.state_key()];
    let mut configs = vec![initial];
    let mut index: HashMap<String, usize> = HashMap::from([(keys[0].clone(), 0)]);
    let mut transitions = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;

    'bfs: while let Some(src) = queue.pop_front() {
        let steps = observable_steps(&configs[src], bound, gc_mode)?;
        for step in steps {
            let key = step.target.state_key();
            let tgt = match index.get(&key) {
                Some(&t) => t,
                None => {
                    if configs.len() >= max_states {
                        truncated = true;
                        break 'bfs;
                    }
                    let t = configs.len();
                    keys.push(key.clone());
                    configs.push(step.target);
                    index.insert(key, t);
                    queue.push_back(t);
                    t
                }
            };
            transitions.insert((src, step.label, tgt));
        }
    }

    Ok(Lts {
        keys,
        configs,
        transitions,
        truncated,
        clock_model,
        gc_mode,
    })
}

/// Graphviz export: states `s0..sn` in BFS order, the initial state drawn
/// with a double circle, one edge per transition. Deterministic.
pub fn export_dot(lts: &Lts) -> String {
    use std::fmt::Write;
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
    for (i, _) in lts.states() {
        let shape = if i == lts.initial() {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  s{i} [shape={shape}];");
    }
    for (src, label, tgt) in lts.transitions() {
        let _ = writeln!(out, "  s{src} -> s{tgt} [label=\"{label}\"];");
    }
    out.push_str("}\n");
    out
}

/// JSON document model of an [`Lts`]; serialization is the export format
/// and deserializing an export reproduces the document exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtsDoc {
    /// State key -> rendered configuration.
    pub states: BTreeMap<String, StateDoc>,
    pub initial: String,
    pub transitions: Vec<TransitionDoc>,
    pub truncated: bool,
    pub clock_model: String,
    pub gc_mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub term: String,
    pub clock: ClockDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClockDoc {
    Logical(u64),
    Causal(Vec<CausalEntryDoc>),
}

/// One causal-clock table entry: `out` is `"⊥"` or `"n!"`, `ins` the sorted
/// fresh inputs recorded after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalEntryDoc {
    pub out: String,
    pub ins: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub src: String,
    pub label: String,
    pub dst: String,
}

fn clock_doc(clock: &Clock) -> ClockDoc {
    match clock {
        Clock::Logical(v) => ClockDoc::Logical(*v),
        Clock::Causal(c) => ClockDoc::Causal(
            c.domain()
                .map(|key| CausalEntryDoc {
                    out: match key {
                        None => "\u{22a5}".to_string(),
                        Some(n) => format!("{n}!"),
                    },
                    ins: c
                        .entry(key)
                        .unwrap()
                        .iter()
                        .map(|m| format!("{m}?"))
                        .collect(),
                })
                .collect(),
        ),
    }
}

pub fn lts_doc(lts: &Lts) -> LtsDoc {
    let states = lts
        .states()
        .map(|(i, config)| {
            (
                lts.key(i).to_string(),
                StateDoc {
                    term: crate::syntax::render(config),
                    clock: clock_doc(&config.clock),
                },
            )
        })
        .collect();
    let mut transitions: Vec<TransitionDoc> = lts
        .transitions()
        .map(|(src, label, tgt)| TransitionDoc {
            src: lts.key(*src).to_string(),
            label: label.to_string(),
            dst: lts.key(*tgt).to_string(),
        })
        .collect();
    transitions.sort();
    LtsDoc {
        states,
        initial: lts.key(lts.initial()).to_string(),
        transitions,
        truncated: lts.truncated(),
        clock_model: lts.clock_model().to_string(),
        gc_mode: lts.gc_mode().to_string(),
    }
}

/// Deterministic JSON export.
pub fn export_json(lts: &Lts) -> String {
    serde_json::to_string_pretty(&lts_doc(lts)).expect("serializable document")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clocks::ClockModel;
    use crate::syntax::tests::GENERATOR;
    use crate::syntax::{compile, parse};

    fn lts_of(source: &str, clock: ClockModel, max_states: usize, mode: GcMode) -> Lts {
        let config = compile(&parse(source).unwrap(), clock);
        build_lts(&config, max_states, mode).unwrap()
    }

    #[test]
    fn causal_generator_has_two_states() {
        let lts = lts_of(GENERATOR, ClockModel::Causal, 100_000, GcMode::Step);
        assert_eq!(lts.state_count(), 2);
        assert_eq!(lts.transition_count(), 2);
        assert!(!lts.truncated());
        let labels: Vec<String> = lts.transitions().map(|(_, l, _)| l.to_string()).collect();
        assert_eq!(labels, vec!["c!<1!>".to_string(), "c!<1!>".to_string()]);
        // self-loop on the post-output state
        assert!(lts.transitions().any(|(s, _, t)| *s == 1 && *t == 1));
        assert!(lts.transitions().any(|(s, _, t)| *s == 0 && *t == 1));
    }

    #[test]
    fn logical_generator_truncates() {
        let lts = lts_of(GENERATOR, ClockModel::Logical, 50, GcMode::Off);
        assert!(lts.truncated());
        assert_eq!(lts.state_count(), 50);
        // labels along the chain are pairwise distinct
        let labels: BTreeSet<String> = lts.transitions().map(|(_, l, _)| l.to_string()).collect();
        assert_eq!(labels.len(), lts.transition_count());
    }

    #[test]
    fn minimal_silent_model_loops() {
        let lts = lts_of(
            "free() restr() *[ priv() bind() tau.0 ]",
            ClockModel::Causal,
            100,
            GcMode::Step,
        );
        assert_eq!(lts.state_count(), 2);
        assert_eq!(lts.transition_count(), 2);
        assert!(lts
            .transitions()
            .all(|(_, l, t)| l == &Label::Tau && *t == 1));
    }

    #[test]
    fn bare_zero_body_deadlocks_in_one_state() {
        // [iter] and [iter0] cycle through epsilon only; the closure cuts
        // the cycle and finds no observation
        let lts = lts_of(
            "free() restr() *[ priv() bind() 0 ]",
            ClockModel::Causal,
            100,
            GcMode::Step,
        );
        assert_eq!(lts.state_count(), 1);
        assert_eq!(lts.transition_count(), 0);
    }

    #[test]
    fn dot_export_shape() {
        let lts = lts_of(GENERATOR, ClockModel::Causal, 100, GcMode::Step);
        let dot = export_dot(&lts);
        assert!(dot.starts_with("digraph lts {"));
        assert!(dot.contains("s0 [shape=doublecircle];"));
        assert!(dot.contains("s0 -> s1 [label=\"c!<1!>\"]"));
        assert!(dot.contains("s1 -> s1 [label=\"c!<1!>\"]"));

        let single = lts_of(
            "free() restr() *[ priv() bind() 0 ]",
            ClockModel::Causal,
            100,
            GcMode::Step,
        );
        let dot = export_dot(&single);
        assert!(dot.contains("s0 [shape=doublecircle];"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn json_round_trips_and_serializes_causal_clocks() {
        let lts = lts_of(GENERATOR, ClockModel::Causal, 100, GcMode::Step);
        let json = export_json(&lts);
        let parsed: LtsDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, lts_doc(&lts));
        assert_eq!(parsed.clock_model, "causal");
        assert_eq!(parsed.gc_mode, "step");
        assert_eq!(parsed.states.len(), 2);
        // the post-output state records 1! in its clock table
        let entries: Vec<&CausalEntryDoc> = parsed
            .states
            .values()
            .filter_map(|s| match &s.clock {
                ClockDoc::Causal(entries) => Some(entries),
                ClockDoc::Logical(_) => None,
            })
            .flatten()
            .collect();
        assert!(entries.iter().any(|e| e.out == "\u{22a5}"));
        assert!(entries.iter().any(|e| e.out == "1!"));

        let logical = lts_of(GENERATOR, ClockModel::Logical, 3, GcMode::Off);
        let parsed: LtsDoc = serde_json::from_str(&export_json(&logical)).unwrap();
        assert!(parsed.truncated);
        assert!(matches!(
            parsed.states.values().next().unwrap().clock,
            ClockDoc::Logical(_)
        ));
    }

    #[test]
    fn exports_are_deterministic() {
        for source in [
            GENERATOR,
            "free(a, b) restr() *[ priv() bind() sum{ a!<b>.0 + tau.0 }.0 ]",
        ] {
            let a = lts_of(source, ClockModel::Causal, 1000, GcMode::Step);
            let b = lts_of(source, ClockModel::Causal, 1000, GcMode::Step);
            assert_eq!(export_dot(&a), export_dot(&b));
            assert_eq!(export_json(&a), export_json(&b));
        }
    }
}
