//! Parse a model, inspect its compiled structure and static bounds.
//!
//! ```bash
//! cargo run -p pigraph --example parse_and_check
//! ```

use pigraph::{compile, epsilon_bound, parse, ClockModel};

fn main() {
    let source = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/models/match_emit_first.pig"
    ))
    .unwrap();
    println!("source:\n{source}");

    let ast = parse(&source).expect("well-formed model");
    println!("free names:   {}", ast.free_names.len());
    println!("restrictions: {}", ast.restrictions.len());
    println!("iterators:    {}", ast.iterators.len());
    println!("eps bound:    {}", epsilon_bound(&ast));

    let config = compile(&ast, ClockModel::Causal);
    let graph = config.graph();
    println!("places:       {}", graph.places.len());
    println!("boxes:        {}", graph.boxes.len());
    println!("initial:      {}", pigraph::render(&config));

    // ill-formed inputs come back with positioned diagnostics
    for bad in [
        "free(c) restr() *[ priv() bind(x) [x=c].0 ]",
        "free(c) restr() *[ priv() bind() d!<c>.0 ]",
        "free(c) restr() *[ priv() bind() sum{ tau.0 }.0 ]",
    ] {
        let err = parse(bad).unwrap_err();
        println!("rejected: {err}");
    }
}
