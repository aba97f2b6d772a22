//! Execution and verification of pi-graph process models.
//!
//! A pi-graph is a static place/box graph encoding a mobile process: the
//! diagram never changes shape, behavior is a token game that relabels
//! boxes with names. This crate parses textual models, runs their
//! operational semantics under pluggable clock models, builds the finite
//! ground labelled transition system with garbage collection of unused
//! names, and decides strong ground bisimilarity between two models.
//!
//! ```
//! use pigraph::{bisimilar, build_lts, compile, parse, ClockModel, GcMode};
//!
//! let ast = parse("free(c) restr() *[ priv(a) bind() c!<a>.0 ]").unwrap();
//! let config = compile(&ast, ClockModel::Causal);
//! let lts = build_lts(&config, 100_000, GcMode::Step).unwrap();
//! assert_eq!(lts.state_count(), 2);
//! assert!(bisimilar(&lts, &lts).unwrap().bisimilar);
//! ```
//!
//! The runnable examples under `examples/` walk through each capability;
//! the `pigraph` binary exposes them as `check`, `trace`, `bound`, `lts`
//! and `bisim` subcommands.

pub mod bisim;
pub mod cli;
pub mod clocks;
pub mod engine;
pub mod lts;
pub mod names;
pub mod syntax;

pub use bisim::{bisimilar, BisimError, BisimVerdict, Side, Witness};
pub use clocks::{CausalClock, Clock, ClockError, ClockModel};
pub use engine::{
    epsilon_bound, gc, observable_steps, raw_steps, EngineError, GcMode, Label, Rule, Step,
};
pub use lts::{build_lts, export_dot, export_json, Lts};
pub use names::{may_equal, Name, NameKind, Partition, PartitionError};
pub use syntax::{
    compile, parse, render, to_source, Configuration, GraphAst, PlaceType, StaticGraph, SyntaxError,
};
