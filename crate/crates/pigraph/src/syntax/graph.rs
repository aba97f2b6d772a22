//! The compiled place/box graph and its runtime configurations.
//!
//! Compilation turns an AST into a static graph that never changes again:
//! one place per prefix head plus one terminating `0`-place per process,
//! and one box per declared static name, shared by every prefix that
//! references it. Everything that evolves during execution lives in the
//! dynamic quadruple of [`Configuration`]: clock, partition, marking and
//! box instantiation.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::clocks::{Clock, ClockModel};
use crate::names::{Name, Partition};

use super::{GraphAst, NameRef, PrefixKind, ProcessAst};

/// Index of a place in the static graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub u32);

/// Index of a box in the static graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoxId(pub u32);

impl PlaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl BoxId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for BoxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaceType {
    Zero,
    Tau,
    In,
    Out,
    Match,
    Sum,
    Par,
    Iter,
}

impl fmt::Display for PlaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PlaceType::Zero => "0",
            PlaceType::Tau => "tau",
            PlaceType::In => "i",
            PlaceType::Out => "o",
            PlaceType::Match => "=",
            PlaceType::Sum => "sum",
            PlaceType::Par => "par",
            PlaceType::Iter => "*",
        };
        f.write_str(s)
    }
}

/// Which construct a `0`-place terminates; drives the choice between the
/// iterator, sum and parallel termination rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroRole {
    IterBody { iter: usize },
    SumBranch { sum: PlaceId, branch: usize },
    ParBranch { par: PlaceId, branch: usize },
}

/// Branch bookkeeping for a sum or parallel place.
#[derive(Debug, Clone)]
pub struct BranchInfo {
    pub initial: PlaceId,
    pub zero: PlaceId,
    /// Every place compiled inside this branch, including nested ones.
    /// Used to confine the sum lookahead to the branch subgraph.
    pub places: Vec<PlaceId>,
}

#[derive(Debug, Clone)]
pub struct ConstructInfo {
    pub branches: Vec<BranchInfo>,
    /// The glued place the branch terminators feed into.
    pub continuation: PlaceId,
}

#[derive(Debug, Clone)]
pub struct PlaceInfo {
    pub ty: PlaceType,
    /// Datum link (output datum, input binder, left match operand).
    pub data: Option<BoxId>,
    /// Second data slot of a match place (right operand).
    pub data2: Option<BoxId>,
    /// Channel box of an input place.
    pub input: Option<BoxId>,
    /// Channel box of an output place.
    pub output: Option<BoxId>,
    pub ctl: Vec<PlaceId>,
    /// Index of the owning iterator.
    pub iter: usize,
    /// Chain of enclosing parallel constructs: (par place, branch index),
    /// outermost first. Two marked places are concurrent iff they live in
    /// different iterators or diverge at a common parallel construct.
    pub par_path: Vec<(PlaceId, usize)>,
    pub zero_role: Option<ZeroRole>,
    pub construct: Option<ConstructInfo>,
}

/// Render-tree node: mirrors the prefix structure so configurations can be
/// printed in source order. Leaf link data lives in [`PlaceInfo`].
#[derive(Debug, Clone)]
pub enum RenderNode {
    Leaf(PlaceId),
    Sum(PlaceId, Vec<ProcNode>),
    Par(PlaceId, Vec<ProcNode>),
}

#[derive(Debug, Clone)]
pub struct ProcNode {
    pub prefixes: Vec<RenderNode>,
    pub zero: PlaceId,
}

#[derive(Debug, Clone)]
pub struct IterInfo {
    pub star: PlaceId,
    pub body_initial: PlaceId,
    pub body_zero: PlaceId,
    /// Private and binder boxes reset at the end of each iteration.
    pub reset_boxes: Vec<BoxId>,
    pub body: ProcNode,
}

#[derive(Debug, Clone)]
pub struct BoxInfo {
    pub name: Name,
}

/// The immutable part of a compiled model.
#[derive(Debug)]
pub struct StaticGraph {
    pub places: Vec<PlaceInfo>,
    pub boxes: Vec<BoxInfo>,
    pub iterators: Vec<IterInfo>,
    /// Static upper bound on the length of any epsilon run (see
    /// `engine::epsilon_bound`); cached here so exploration can enforce it.
    pub eps_bound: u64,
}

impl StaticGraph {
    pub fn place(&self, p: PlaceId) -> &PlaceInfo {
        &self.places[p.index()]
    }

    pub fn box_name(&self, b: BoxId) -> &Name {
        &self.boxes[b.index()].name
    }

    pub fn place_ids(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len() as u32).map(PlaceId)
    }

    pub fn box_ids(&self) -> impl Iterator<Item = BoxId> {
        (0..self.boxes.len() as u32).map(BoxId)
    }

    pub fn box_by_name(&self, name: &Name) -> Option<BoxId> {
        self.box_ids().find(|b| self.box_name(*b) == name)
    }

    /// True when the two places belong to distinct parallel components:
    /// different iterators, or different branches of a common parallel
    /// construct. Synchronization is only allowed across components.
    pub fn distinct_components(&self, a: PlaceId, b: PlaceId) -> bool {
        let pa = self.place(a);
        let pb = self.place(b);
        if pa.iter != pb.iter {
            return true;
        }
        for (ea, eb) in pa.par_path.iter().zip(pb.par_path.iter()) {
            if ea.0 == eb.0 {
                if ea.1 != eb.1 {
                    return true;
                }
            } else {
                return false;
            }
        }
        false
    }
}

/// A full runtime state: shared static graph plus the dynamic quadruple.
#[derive(Debug, Clone)]
pub struct Configuration {
    graph: Arc<StaticGraph>,
    pub clock: Clock,
    pub gamma: Partition,
    marking: BTreeSet<PlaceId>,
    inst: Vec<Name>,
}

impl Configuration {
    /// Initial configuration: every box at its default instantiation, one
    /// token on each iterator's `*`-place, fresh clock, empty partition.
    pub fn initial(graph: Arc<StaticGraph>, model: ClockModel) -> Configuration {
        let inst = graph.boxes.iter().map(|b| b.name.clone()).collect();
        let marking = graph.iterators.iter().map(|it| it.star).collect();
        Configuration {
            graph,
            clock: Clock::init(model),
            gamma: Partition::new(),
            marking,
            inst,
        }
    }

    pub fn graph(&self) -> &Arc<StaticGraph> {
        &self.graph
    }

    pub fn inst(&self, b: BoxId) -> &Name {
        &self.inst[b.index()]
    }

    pub fn set_inst(&mut self, b: BoxId, name: Name) {
        self.inst[b.index()] = name;
    }

    pub fn instantiations(&self) -> impl Iterator<Item = (BoxId, &Name)> {
        self.inst
            .iter()
            .enumerate()
            .map(|(i, n)| (BoxId(i as u32), n))
    }

    /// Codomain of the instantiation function.
    pub fn inst_codomain(&self) -> BTreeSet<&Name> {
        self.inst.iter().collect()
    }

    pub fn is_marked(&self, p: PlaceId) -> bool {
        self.marking.contains(&p)
    }

    pub fn marked_places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.marking.iter().copied()
    }

    pub fn set_mark(&mut self, p: PlaceId, marked: bool) {
        if marked {
            self.marking.insert(p);
        } else {
            self.marking.remove(&p);
        }
    }

    /// Moves the token from `from` to `to`.
    pub fn move_token(&mut self, from: PlaceId, to: PlaceId) {
        debug_assert!(self.marking.contains(&from));
        self.marking.remove(&from);
        self.marking.insert(to);
    }

    /// The freshness constraint: the names the clock would mint next are
    /// not held by any box.
    pub fn satisfies_freshness(&self) -> bool {
        let next_out = Name::fresh_out(self.clock.next_o());
        let next_in = Name::fresh_in(self.clock.next_i());
        !self.inst.iter().any(|n| *n == next_out || *n == next_in)
    }

    /// Canonical serialization of the dynamic quadruple. Two configurations
    /// over the same static graph get equal keys iff their quadruples are
    /// equal. Instantiations are restricted to boxes away from their
    /// default.
    pub fn state_key(&self) -> String {
        use std::fmt::Write;
        let mut key = String::new();
        let _ = write!(key, "k={};g={};m=", self.clock, self.gamma);
        let mut first = true;
        for p in &self.marking {
            if !first {
                key.push(',');
            }
            first = false;
            let _ = write!(key, "{}", p.0);
        }
        key.push_str(";i=");
        first = true;
        for (i, n) in self.inst.iter().enumerate() {
            if n != &self.graph.boxes[i].name {
                if !first {
                    key.push(',');
                }
                first = false;
                let _ = write!(key, "{}:{}", i, n);
            }
        }
        key
    }

    /// Structural checks on the dynamic part; used by tests and debug
    /// assertions after every step.
    pub fn validate(&self) -> Result<(), String> {
        if !self.gamma.well_formed() {
            return Err("partition representation invariant violated".into());
        }
        if !self.gamma.output_classes_ok() {
            return Err("partition holds a class with two outputs or a non-input peer".into());
        }
        if !self.satisfies_freshness() {
            return Err("freshness constraint violated".into());
        }
        for p in &self.marking {
            if p.index() >= self.graph.places.len() {
                return Err(format!("marked place {p} does not exist"));
            }
        }
        Ok(())
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph)
            && self.clock == other.clock
            && self.gamma == other.gamma
            && self.marking == other.marking
            && self.inst == other.inst
    }
}

impl Eq for Configuration {}

/// Compiles a well-formed AST into its initial configuration under the
/// given clock model.
pub fn compile(ast: &GraphAst, model: ClockModel) -> Configuration {
    let graph = compile_static(ast);
    Configuration::initial(Arc::new(graph), model)
}

/// Compiles the static part only.
pub fn compile_static(ast: &GraphAst) -> StaticGraph {
    Compiler::default().run(ast)
}

#[derive(Default)]
struct Compiler {
    places: Vec<PlaceInfo>,
    boxes: Vec<BoxInfo>,
    box_of: std::collections::HashMap<String, BoxId>,
}

impl Compiler {
    fn run(mut self, ast: &GraphAst) -> StaticGraph {
        for d in &ast.free_names {
            self.declare_box(&d.ident, Name::free(&d.ident));
        }
        for d in &ast.restrictions {
            self.declare_box(&d.ident, Name::restriction(&d.ident));
        }
        let mut iterators = Vec::new();
        for (i, it) in ast.iterators.iter().enumerate() {
            let mut reset_boxes = Vec::new();
            for d in &it.privates {
                reset_boxes.push(self.declare_box(&d.ident, Name::private(&d.ident)));
            }
            for d in &it.binders {
                reset_boxes.push(self.declare_box(&d.ident, Name::binder(&d.ident)));
            }
            let star = self.new_place(PlaceType::Iter, i, Vec::new());
            let compiled = self.process(&it.body, i, &[], star, ZeroRole::IterBody { iter: i });
            self.places[star.index()].ctl = vec![compiled.initial];
            iterators.push(IterInfo {
                star,
                body_initial: compiled.initial,
                body_zero: compiled.zero,
                reset_boxes,
                body: compiled.node,
            });
        }
        StaticGraph {
            places: self.places,
            boxes: self.boxes,
            iterators,
            eps_bound: crate::engine::epsilon_bound(ast),
        }
    }

    fn declare_box(&mut self, ident: &str, name: Name) -> BoxId {
        debug_assert!(!self.box_of.contains_key(ident), "duplicate declaration");
        let id = BoxId(self.boxes.len() as u32);
        self.boxes.push(BoxInfo { name });
        self.box_of.insert(ident.to_string(), id);
        id
    }

    fn new_place(
        &mut self,
        ty: PlaceType,
        iter: usize,
        par_path: Vec<(PlaceId, usize)>,
    ) -> PlaceId {
        let id = PlaceId(self.places.len() as u32);
        self.places.push(PlaceInfo {
            ty,
            data: None,
            data2: None,
            input: None,
            output: None,
            ctl: Vec::new(),
            iter,
            par_path,
            zero_role: None,
            construct: None,
        });
        id
    }

    fn resolve(&self, r: &NameRef) -> BoxId {
        *self
            .box_of
            .get(&r.ident)
            .expect("reference resolved during well-formedness checking")
    }

    /// Compiles one process. Prefixes are built right to left so that each
    /// prefix's terminating place is simply the place built after it; the
    /// process's own `0`-place feeds `zero_ctl` (the `*`-place for iterator
    /// bodies, the glued continuation for sum/par branches).
    fn process(
        &mut self,
        proc: &ProcessAst,
        iter: usize,
        par_path: &[(PlaceId, usize)],
        zero_ctl: PlaceId,
        zero_role: ZeroRole,
    ) -> CompiledProcess {
        let zero = self.new_place(PlaceType::Zero, iter, par_path.to_vec());
        self.places[zero.index()].ctl = vec![zero_ctl];
        self.places[zero.index()].zero_role = Some(zero_role);

        let mut all_places = vec![zero];
        let mut cur = zero;
        let mut nodes: Vec<RenderNode> = Vec::new();
        for prefix in proc.prefixes.iter().rev() {
            let node = match &prefix.kind {
                PrefixKind::Silent => {
                    let p = self.new_place(PlaceType::Tau, iter, par_path.to_vec());
                    self.places[p.index()].ctl = vec![cur];
                    cur = p;
                    RenderNode::Leaf(p)
                }
                PrefixKind::Output { chan, datum } => {
                    let p = self.new_place(PlaceType::Out, iter, par_path.to_vec());
                    let (chan, datum) = (self.resolve(chan), self.resolve(datum));
                    let info = &mut self.places[p.index()];
                    info.ctl = vec![cur];
                    info.output = Some(chan);
                    info.data = Some(datum);
                    cur = p;
                    RenderNode::Leaf(p)
                }
                PrefixKind::Input { chan, binder } => {
                    let p = self.new_place(PlaceType::In, iter, par_path.to_vec());
                    let (chan, binder) = (self.resolve(chan), self.resolve(binder));
                    let info = &mut self.places[p.index()];
                    info.ctl = vec![cur];
                    info.input = Some(chan);
                    info.data = Some(binder);
                    cur = p;
                    RenderNode::Leaf(p)
                }
                PrefixKind::Match { left, right } => {
                    let p = self.new_place(PlaceType::Match, iter, par_path.to_vec());
                    let (left, right) = (self.resolve(left), self.resolve(right));
                    let info = &mut self.places[p.index()];
                    info.ctl = vec![cur];
                    info.data = Some(left);
                    info.data2 = Some(right);
                    cur = p;
                    RenderNode::Leaf(p)
                }
                PrefixKind::Sum(branches) => {
                    let p = self.new_place(PlaceType::Sum, iter, par_path.to_vec());
                    let (infos, subnodes) = self.branches(branches, iter, par_path, cur, p, false);
                    self.places[p.index()].ctl = infos.iter().map(|b| b.initial).collect();
                    self.places[p.index()].construct = Some(ConstructInfo {
                        branches: infos.clone(),
                        continuation: cur,
                    });
                    for b in &infos {
                        all_places.extend(&b.places);
                    }
                    cur = p;
                    RenderNode::Sum(p, subnodes)
                }
                PrefixKind::Par(branches) => {
                    let p = self.new_place(PlaceType::Par, iter, par_path.to_vec());
                    let (infos, subnodes) = self.branches(branches, iter, par_path, cur, p, true);
                    self.places[p.index()].ctl = infos.iter().map(|b| b.initial).collect();
                    self.places[p.index()].construct = Some(ConstructInfo {
                        branches: infos.clone(),
                        continuation: cur,
                    });
                    for b in &infos {
                        all_places.extend(&b.places);
                    }
                    cur = p;
                    RenderNode::Par(p, subnodes)
                }
            };
            all_places.push(cur);
            nodes.push(node);
        }
        nodes.reverse();
        CompiledProcess {
            initial: cur,
            zero,
            places: all_places,
            node: ProcNode {
                prefixes: nodes,
                zero,
            },
        }
    }

    fn branches(
        &mut self,
        branches: &[ProcessAst],
        iter: usize,
        par_path: &[(PlaceId, usize)],
        continuation: PlaceId,
        construct: PlaceId,
        parallel: bool,
    ) -> (Vec<BranchInfo>, Vec<ProcNode>) {
        let mut infos = Vec::new();
        let mut nodes = Vec::new();
        for (i, branch) in branches.iter().enumerate() {
            let mut branch_path = par_path.to_vec();
            let role = if parallel {
                branch_path.push((construct, i));
                ZeroRole::ParBranch {
                    par: construct,
                    branch: i,
                }
            } else {
                ZeroRole::SumBranch {
                    sum: construct,
                    branch: i,
                }
            };
            let compiled = self.process(branch, iter, &branch_path, continuation, role);
            infos.push(BranchInfo {
                initial: compiled.initial,
                zero: compiled.zero,
                places: compiled.places,
            });
            nodes.push(compiled.node);
        }
        (infos, nodes)
    }
}

struct CompiledProcess {
    initial: PlaceId,
    zero: PlaceId,
    places: Vec<PlaceId>,
    node: ProcNode,
}
