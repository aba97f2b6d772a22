//! Strong ground bisimilarity between two transition systems.
//!
//! The decision procedure runs splitter-based partition refinement on the
//! disjoint union of the two systems: starting from a single block, every
//! (label, block) pair splits the blocks by whether a state can reach the
//! block under the label, until stable. The two models are bisimilar iff
//! their initial states end in the same block. Labels are compared by
//! exact equality of their rendered form.
//!
//! On a negative verdict a shortest distinguishing trace is extracted: a
//! breadth-first search over pairs of states follows moves of one side
//! whose matching answers all land in separated blocks, ending at a pair
//! where one side enables a label the other cannot match at all.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::lts::Lts;

/// Which of the two models a witness element refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// A distinguishing trace: the labels of a shortest run after which the
/// failing side cannot match the final label. Each label carries the side
/// that performs the move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub moves: Vec<(Side, String)>,
    /// The side unable to match the last label of `moves`.
    pub failing: Side,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimVerdict {
    pub bisimilar: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    /// A truncated state space would make any verdict unsound.
    #[error("the {0} transition system is truncated; bisimilarity needs complete state spaces")]
    TruncatedInput(Side),
}

/// Decides strong ground bisimilarity of the two systems and produces a
/// shortest distinguishing trace on failure.
pub fn bisimilar(left: &Lts, right: &Lts) -> Result<BisimVerdict, BisimError> {
    if left.truncated() {
        return Err(BisimError::TruncatedInput(Side::Left));
    }
    if right.truncated() {
        return Err(BisimError::TruncatedInput(Side::Right));
    }

    let union = Union::new(left, right);
    let blocks = refine(&union);

    let init_left = 0;
    let init_right = left.state_count() + right.initial();
    if blocks[init_left] == blocks[init_right] {
        return Ok(BisimVerdict {
            bisimilar: true,
            witness: None,
        });
    }
    let witness = extract_witness(&union, &blocks, init_left, init_right);
    Ok(BisimVerdict {
        bisimilar: false,
        witness: Some(witness),
    })
}

/// Disjoint union with interned labels; right-hand states are offset by
/// the number of left-hand states.
struct Union {
    /// adjacency: state -> sorted (label id, successor)
    succ: Vec<Vec<(usize, usize)>>,
    labels: Vec<String>,
}

impl Union {
    fn new(left: &Lts, right: &Lts) -> Union {
        let mut intern: BTreeMap<String, usize> = BTreeMap::new();
        let mut labels: Vec<String> = Vec::new();
        fn label_id(
            s: String,
            intern: &mut BTreeMap<String, usize>,
            labels: &mut Vec<String>,
        ) -> usize {
            if let Some(&id) = intern.get(&s) {
                return id;
            }
            let id = labels.len();
            labels.push(s.clone());
            intern.insert(s, id);
            id
        }
        let mut succ = vec![Vec::new(); left.state_count() + right.state_count()];
        for (src, label, tgt) in left.transitions() {
            let l = label_id(label.to_string(), &mut intern, &mut labels);
            succ[*src].push((l, *tgt));
        }
        let offset = left.state_count();
        for (src, label, tgt) in right.transitions() {
            let l = label_id(label.to_string(), &mut intern, &mut labels);
            succ[offset + src].push((l, offset + tgt));
        }
        for adjacent in &mut succ {
            adjacent.sort();
            adjacent.dedup();
        }
        Union { succ, labels }
    }

    fn successors(&self, state: usize, label: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[state]
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|(_, t)| *t)
    }

    fn enabled(&self, state: usize) -> BTreeSet<usize> {
        self.succ[state].iter().map(|(l, _)| *l).collect()
    }
}

/// Splitter refinement to the coarsest strong bisimulation. Returns the
/// stable block index of every state.
fn refine(union: &Union) -> Vec<usize> {
    let n = union.succ.len();
    let mut blocks = vec![0usize; n];
    if n == 0 {
        return blocks;
    }
    let mut block_count = 1;
    loop {
        // blocks created during this pass take their splitter turn on the
        // next pass; the fixpoint loop runs until nothing splits
        let snapshot = block_count;
        for label in 0..union.labels.len() {
            for splitter in 0..snapshot {
                // states with a `label` move into the splitter block
                let into: Vec<bool> = (0..n)
                    .map(|s| union.successors(s, label).any(|t| blocks[t] == splitter))
                    .collect();
                // split every block along `into`
                let mut assignment: HashMap<(usize, bool), usize> = HashMap::new();
                let mut updated = vec![0usize; n];
                for s in 0..n {
                    let fresh = assignment.len();
                    let id = *assignment.entry((blocks[s], into[s])).or_insert(fresh);
                    updated[s] = id;
                }
                if assignment.len() > block_count {
                    block_count = assignment.len();
                    blocks = updated;
                }
            }
        }
        if block_count == snapshot {
            return blocks;
        }
    }
}

/// BFS over state pairs for a shortest distinguishing trace, as described
/// in the module docs. Every explored pair is non-bisimilar, and from any
/// non-bisimilar pair either one side enables a label the other lacks, or
/// some move has all of its answers in separated blocks, so the search
/// always reaches a terminal pair.
fn extract_witness(
    union: &Union,
    blocks: &[usize],
    init_left: usize,
    init_right: usize,
) -> Witness {
    type Pair = (usize, usize);
    let start: Pair = (init_left, init_right);
    let mut parent: HashMap<Pair, (Pair, Side, usize)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = BTreeSet::from([start]);

    let finish =
        |terminal: Pair, mover: Side, label: usize, parent: &HashMap<Pair, (Pair, Side, usize)>| {
            let mut moves = vec![(mover, union.labels[label].clone())];
            let mut cursor = terminal;
            while let Some((prev, side, l)) = parent.get(&cursor) {
                moves.push((*side, union.labels[*l].clone()));
                cursor = *prev;
            }
            moves.reverse();
            Witness {
                moves,
                failing: mover.other(),
            }
        };

    while let Some(pair) = queue.pop_front() {
        let (s, t) = pair;
        let enabled_s = union.enabled(s);
        let enabled_t = union.enabled(t);

        // terminal: a label enabled on exactly one side
        if let Some(&label) = enabled_s.difference(&enabled_t).next() {
            return finish(pair, Side::Left, label, &parent);
        }
        if let Some(&label) = enabled_t.difference(&enabled_s).next() {
            return finish(pair, Side::Right, label, &parent);
        }

        // otherwise follow a move whose answers all separate; past the
        // terminal check both sides enable the same labels
        let enabled = enabled_s;
        for (mover, mover_state, other_state) in [(Side::Left, s, t), (Side::Right, t, s)] {
            for &label in &enabled {
                for moved in union.successors(mover_state, label) {
                    let answers: Vec<usize> = union.successors(other_state, label).collect();
                    if !answers.iter().all(|&a| blocks[a] != blocks[moved]) {
                        continue;
                    }
                    for answer in answers {
                        let next_pair = match mover {
                            Side::Left => (moved, answer),
                            Side::Right => (answer, moved),
                        };
                        if seen.insert(next_pair) {
                            parent.insert(next_pair, (pair, mover, label));
                            queue.push_back(next_pair);
                        }
                    }
                }
            }
        }
    }
    unreachable!("non-bisimilar pair admits no distinguishing trace")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clocks::ClockModel;
    use crate::engine::{GcMode, Label};
    use crate::names::Name;
    use crate::syntax::{compile, parse};

    /// Builds a synthetic LTS over a throwaway configuration: only the
    /// transition structure matters to the checker.
    fn synthetic(states: usize, transitions: &[(usize, &str, usize)]) -> Lts {
        let config = compile(
            &parse("free() restr() *[ priv() bind() tau.0 ]").unwrap(),
            ClockModel::Causal,
        );
        let parse_label = |s: &str| -> Label {
            if s == "tau" {
                Label::Tau
            } else if let Some((chan, rest)) = s.split_once("!<") {
                Label::Out {
                    chan: Name::free(chan),
                    datum: Name::free(rest.trim_end_matches('>')),
                }
            } else {
                let (chan, rest) = s.split_once("?(").unwrap();
                Label::In {
                    chan: Name::free(chan),
                    datum: Name::free(rest.trim_end_matches(')')),
                }
            }
        };
        Lts::from_parts(
            vec![config; states],
            transitions.iter().map(|(s, l, t)| (*s, parse_label(l), *t)),
            ClockModel::Causal,
            GcMode::Step,
        )
    }

    #[test]
    fn identical_loops_are_bisimilar() {
        // a two-state a-loop against a one-state a-loop
        let two = synthetic(2, &[(0, "a!<b>", 1), (1, "a!<b>", 1)]);
        let one = synthetic(1, &[(0, "a!<b>", 0)]);
        let verdict = bisimilar(&two, &one).unwrap();
        assert!(verdict.bisimilar);
        assert!(verdict.witness.is_none());
    }

    #[test]
    fn branching_difference_is_detected() {
        // after `a`, left still chooses between b and c; right committed
        let left = synthetic(4, &[(0, "a!<x>", 1), (1, "b!<x>", 2), (1, "c!<x>", 3)]);
        let right = synthetic(
            5,
            &[
                (0, "a!<x>", 1),
                (0, "a!<x>", 2),
                (1, "b!<x>", 3),
                (2, "c!<x>", 4),
            ],
        );
        let verdict = bisimilar(&left, &right).unwrap();
        assert!(!verdict.bisimilar);
        // right commits on `a`, so it is the side that cannot match the
        // remaining choice
        let witness = verdict.witness.unwrap();
        assert_eq!(witness.moves.len(), 2);
        assert_eq!(witness.moves[0].1, "a!<x>");
        assert_eq!(witness.moves[1].0, Side::Left);
        assert!(witness.moves[1].1 == "b!<x>" || witness.moves[1].1 == "c!<x>");
        assert_eq!(witness.failing, Side::Right);
    }

    #[test]
    fn deadlock_vs_loop() {
        let dead = synthetic(1, &[]);
        let looping = synthetic(1, &[(0, "tau", 0)]);
        let verdict = bisimilar(&dead, &looping).unwrap();
        assert!(!verdict.bisimilar);
        let witness = verdict.witness.unwrap();
        assert_eq!(witness.moves, vec![(Side::Right, "tau".to_string())]);
        assert_eq!(witness.failing, Side::Left);
    }

    #[test]
    fn truncated_inputs_are_refused() {
        let ast = parse("free(c) restr() *[ priv(a) bind() c!<a>.0 ]").unwrap();
        let config = compile(&ast, ClockModel::Logical);
        let truncated = crate::lts::build_lts(&config, 3, GcMode::Off).unwrap();
        assert!(truncated.truncated());
        let ok = synthetic(1, &[]);
        assert_eq!(
            bisimilar(&truncated, &ok).unwrap_err(),
            BisimError::TruncatedInput(Side::Left)
        );
        assert_eq!(
            bisimilar(&ok, &truncated).unwrap_err(),
            BisimError::TruncatedInput(Side::Right)
        );
    }

    /// Naive greatest-fixed-point oracle: start from all pairs over the
    /// disjoint union and drop pairs until the bisimulation condition
    /// holds. Independent of the refinement implementation.
    fn oracle(left: &Lts, right: &Lts) -> bool {
        let union = Union::new(left, right);
        let n = union.succ.len();
        let mut related = vec![vec![true; n]; n];
        loop {
            let mut changed = false;
            for s in 0..n {
                for t in 0..n {
                    if !related[s][t] {
                        continue;
                    }
                    let ok = |a: usize, b: usize, rel: &Vec<Vec<bool>>| -> bool {
                        union.succ[a]
                            .iter()
                            .all(|(l, a2)| union.successors(b, *l).any(|b2| rel[*a2][b2]))
                    };
                    if !(ok(s, t, &related) && ok(t, s, &related)) {
                        related[s][t] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        related[0][left.state_count() + right.initial()]
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_lts(max_states: usize) -> impl Strategy<Value = Lts> {
            (1..=max_states).prop_flat_map(move |n| {
                proptest::collection::vec(
                    (
                        0..n,
                        prop_oneof![Just("a!<x>"), Just("b!<x>"), Just("tau")],
                        0..n,
                    ),
                    0..(2 * n),
                )
                .prop_map(move |edges| {
                    let edges: Vec<(usize, &str, usize)> = edges;
                    super::synthetic(n, &edges)
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn refinement_matches_naive_fixed_point(
                left in arb_lts(5),
                right in arb_lts(5),
            ) {
                let verdict = bisimilar(&left, &right).unwrap();
                prop_assert_eq!(verdict.bisimilar, oracle(&left, &right));
            }

            #[test]
            fn bisimilarity_is_reflexive(lts in arb_lts(5)) {
                prop_assert!(bisimilar(&lts, &lts).unwrap().bisimilar);
            }

            #[test]
            fn bisimilarity_is_symmetric(
                left in arb_lts(4),
                right in arb_lts(4),
            ) {
                let ab = bisimilar(&left, &right).unwrap().bisimilar;
                let ba = bisimilar(&right, &left).unwrap().bisimilar;
                prop_assert_eq!(ab, ba);
            }
        }
    }
}
