//! Mobility by channel passing: a private channel is transmitted over
//! another private channel, then used by the receiver.
//!
//! Three processes run in parallel: B owns the channels c and d, sends d
//! to C over c, and C forwards m to A over the channel it just received.
//! Both communications are internal, so the outside observes two taus.
//!
//! ```bash
//! cargo run -p pigraph --example channel_passing
//! ```

use pigraph::{compile, parse, raw_steps, render, ClockModel, Name, Rule};

fn main() {
    let source = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/models/channel_passing.pig"
    ))
    .unwrap();
    let ast = parse(&source).unwrap();
    let mut state = compile(&ast, ClockModel::Causal);
    let graph = state.graph().clone();
    let x_box = graph.box_by_name(&Name::binder("x")).unwrap();
    let y_box = graph.box_by_name(&Name::binder("y")).unwrap();

    println!("initial: {}", render(&state));
    for round in 1.. {
        let Some(step) = raw_steps(&state).into_iter().next() else {
            break;
        };
        let note = match step.rule {
            Rule::Sync => format!(
                " (x |-> {}, y |-> {})",
                step.target.inst(x_box),
                step.target.inst(y_box)
            ),
            Rule::Iter0 => " (privates and binders reset)".to_string(),
            _ => String::new(),
        };
        println!(
            "{:9} {:4} {}{note}",
            step.rule.to_string(),
            step.label.to_string(),
            render(&step.target)
        );
        state = step.target;
        if step.rule == Rule::Iter0 || round > 8 {
            break;
        }
    }
}
