//! The fresh-name generator under both clock models.
//!
//! Logical clocks mint a new identity on every iteration, so the state
//! space is infinite; causal clocks with garbage collection reuse the
//! index 1 and the behavior collapses to a two-state loop.
//!
//! ```bash
//! cargo run -p pigraph --example fresh_name_generator
//! ```

use pigraph::{build_lts, compile, observable_steps, parse, render, ClockModel, GcMode};

fn main() {
    let source =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/models/generator.pig"))
            .unwrap();
    let ast = parse(&source).unwrap();

    println!("== logical clocks: every round is new ==");
    let mut state = compile(&ast, ClockModel::Logical);
    println!("        {}", render(&state));
    for _ in 0..4 {
        let bound = state.graph().eps_bound;
        let step = observable_steps(&state, bound, GcMode::Off)
            .unwrap()
            .into_iter()
            .next()
            .expect("the generator never blocks");
        println!("{:7} {}", step.label.to_string(), render(&step.target));
        state = step.target;
    }

    println!("\n== causal clocks + gc: the index is reused ==");
    let mut state = compile(&ast, ClockModel::Causal);
    println!("        {}", render(&state));
    for _ in 0..4 {
        let bound = state.graph().eps_bound;
        let step = observable_steps(&state, bound, GcMode::Step)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        println!("{:7} {}", step.label.to_string(), render(&step.target));
        state = step.target;
    }

    println!("\n== state spaces ==");
    let finite = build_lts(&compile(&ast, ClockModel::Causal), 100_000, GcMode::Step).unwrap();
    println!(
        "causal:  {} states, {} transitions, truncated={}",
        finite.state_count(),
        finite.transition_count(),
        finite.truncated()
    );
    let guarded = build_lts(&compile(&ast, ClockModel::Logical), 50, GcMode::Off).unwrap();
    println!(
        "logical: {} states explored, truncated={} (guard hit)",
        guarded.state_count(),
        guarded.truncated()
    );
}
