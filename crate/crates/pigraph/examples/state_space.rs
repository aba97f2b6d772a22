//! Build the finite transition system of a model and export it.
//!
//! ```bash
//! cargo run -p pigraph --example state_space
//! ```

use pigraph::{build_lts, compile, export_dot, export_json, parse, render, ClockModel, GcMode};

fn main() {
    let source = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/models/two_iter_sync.pig"
    ))
    .unwrap();
    let ast = parse(&source).unwrap();
    let config = compile(&ast, ClockModel::Causal);
    let lts = build_lts(&config, 100_000, GcMode::Step).unwrap();

    println!(
        "states={} transitions={} truncated={}",
        lts.state_count(),
        lts.transition_count(),
        lts.truncated()
    );
    println!();
    for (i, state) in lts.states() {
        println!("s{i}: {}", render(state));
    }
    println!();
    for (src, label, tgt) in lts.transitions() {
        println!("s{src} --{label}--> s{tgt}");
    }

    println!("\n== graphviz ==\n{}", export_dot(&lts));
    println!("== json ==\n{}", export_json(&lts));
}
