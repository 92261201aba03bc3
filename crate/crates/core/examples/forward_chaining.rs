//! Parses a small context, forward-chains it and answers a few questions
//! under the closed-world assumption.

use nesy_reasoning::logic::{answer, forward_chain, parse_context, parse_question};

const CONTEXT: [&str; 8] = [
    "Anne is rough.",
    "Anne is blue.",
    "Cold people are rough.",
    "Rough people are young.",
    "If Anne is green then Anne is blue.",
    "If someone is rough and nice then they are green.",
    "If someone is rough and furry then they are blue.",
    "All young people are cold.",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = parse_context(&CONTEXT)?;
    let mut derived: Vec<_> = forward_chain(&kb).into_iter().collect();
    derived.sort_by(|a, b| (a.1, a.0.to_string()).cmp(&(b.1, b.0.to_string())));
    println!("derived atoms (minimal depth):");
    for (atom, depth) in derived {
        println!("  {depth}  {atom}");
    }
    for q in [
        "Anne is cold.",
        "Anne is not young.",
        "Anne is green.",
        "Anne is not green.",
    ] {
        let v = answer(&kb, &parse_question(q)?)?;
        let depth = v.depth.map_or("by negation as failure".to_string(), |d| {
            format!("depth {d}")
        });
        println!("{q:<22} {} ({depth})", v.label);
    }
    Ok(())
}
