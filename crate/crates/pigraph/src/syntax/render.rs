//! Textual rendering of configurations.
//!
//! A configuration prints as `clock;gamma |- term` with each marked redex
//! wrapped in braces and instantiations shown as `name|value` whenever a
//! box is away from its default. Examples for the fresh-name generator:
//!
//! ```text
//! 0;{} |- *{ c!<$a>.0 }          initial, token on the *-place
//! 1;{} |- *[ c!<$a|1!>.{0} ]     after the bound output
//! ```

use super::graph::{BoxId, Configuration, PlaceId, ProcNode, RenderNode};

/// Deterministic textual form of a configuration.
pub fn render(config: &Configuration) -> String {
    let mut out = format!("{};{} |- ", config.clock, config.gamma);
    let graph = config.graph().clone();
    for (i, it) in graph.iterators.iter().enumerate() {
        if i > 0 {
            out.push_str(" || ");
        }
        let (open, close) = if config.is_marked(it.star) {
            ("*{ ", " }")
        } else {
            ("*[ ", " ]")
        };
        out.push_str(open);
        push_process(&mut out, config, &it.body);
        out.push_str(close);
    }
    out
}

fn push_process(out: &mut String, config: &Configuration, node: &ProcNode) {
    for prefix in &node.prefixes {
        push_prefix(out, config, prefix);
        out.push('.');
    }
    if config.is_marked(node.zero) {
        out.push_str("{0}");
    } else {
        out.push('0');
    }
}

fn push_prefix(out: &mut String, config: &Configuration, node: &RenderNode) {
    match node {
        RenderNode::Leaf(p) => push_leaf(out, config, *p),
        RenderNode::Sum(p, branches) => push_construct(out, config, *p, "sum", " + ", branches),
        RenderNode::Par(p, branches) => push_construct(out, config, *p, "par", " || ", branches),
    }
}

fn push_construct(
    out: &mut String,
    config: &Configuration,
    place: PlaceId,
    keyword: &str,
    sep: &str,
    branches: &[ProcNode],
) {
    out.push_str(keyword);
    let (open, close) = if config.is_marked(place) {
        ("{ ", " }")
    } else {
        ("[ ", " ]")
    };
    out.push_str(open);
    for (i, branch) in branches.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        push_process(out, config, branch);
    }
    out.push_str(close);
}

fn push_leaf(out: &mut String, config: &Configuration, place: PlaceId) {
    use super::graph::PlaceType;
    let info = config.graph().place(place);
    let marked = config.is_marked(place);
    if marked {
        out.push('{');
    }
    match info.ty {
        PlaceType::Tau => out.push_str("tau"),
        PlaceType::Out => {
            push_box(out, config, info.output.unwrap());
            out.push_str("!<");
            push_box(out, config, info.data.unwrap());
            out.push('>');
        }
        PlaceType::In => {
            push_box(out, config, info.input.unwrap());
            out.push_str("?(");
            push_box(out, config, info.data.unwrap());
            out.push(')');
        }
        PlaceType::Match => {
            out.push('[');
            push_box(out, config, info.data.unwrap());
            out.push('=');
            push_box(out, config, info.data2.unwrap());
            out.push(']');
        }
        other => unreachable!("leaf render node with place type {other}"),
    }
    if marked {
        out.push('}');
    }
}

/// `name` when the box holds its default, `name|value` otherwise.
fn push_box(out: &mut String, config: &Configuration, b: BoxId) {
    use std::fmt::Write;
    let name = config.graph().box_name(b).clone();
    let value = config.inst(b);
    if *value == name {
        let _ = write!(out, "{name}");
    } else {
        let _ = write!(out, "{name}|{value}");
    }
}
