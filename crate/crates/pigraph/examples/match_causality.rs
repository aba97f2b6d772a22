//! Name matching is causality-sensitive: a fresh output can only be
//! equated with a fresh input received *after* it.
//!
//! ```bash
//! cargo run -p pigraph --example match_causality
//! ```

use pigraph::{compile, parse, raw_steps, render, ClockModel};

fn replay(title: &str, path: &str) {
    let source = std::fs::read_to_string(path).unwrap();
    let mut state = compile(&parse(&source).unwrap(), ClockModel::Logical);
    println!("== {title} ==");
    println!("         {}", render(&state));
    loop {
        let steps = raw_steps(&state);
        let Some(step) = steps.into_iter().next() else {
            println!("blocked: the match cannot fire");
            break;
        };
        println!(
            "{:9} {:8} {}",
            step.rule.to_string(),
            step.label.to_string(),
            render(&step.target)
        );
        state = step.target;
        // one full pass: stop once the iterator loops back
        if state.marked_places().count() == 1 && state.is_marked(state.graph().iterators[0].star) {
            break;
        }
    }
    println!();
}

fn main() {
    let base = concat!(env!("CARGO_MANIFEST_DIR"), "/models");
    replay(
        "emit then receive: 1! precedes 2?, the match succeeds",
        &format!("{base}/match_emit_first.pig"),
    );
    replay(
        "receive then emit: 2! does not precede 1?, the match blocks",
        &format!("{base}/match_receive_first.pig"),
    );
}
