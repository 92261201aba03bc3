//! Generates a small depth-balanced dataset and writes it as JSON lines.
//!
//! `cargo run --example generate_dataset -- out.jsonl`

use std::collections::BTreeMap;

use nesy_reasoning::datagen::{
    generate_dataset, write_records, GenerationSpec, Scenario, SplitName,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "dataset.jsonl".into());
    let spec = GenerationSpec::single_split(
        Scenario::all().to_vec(),
        &[2, 3, 4, 5],
        SplitName::Train,
        40,
        7,
    );
    let data = generate_dataset(&spec)?;
    let split = &data[&SplitName::Train];

    let mut per_depth: BTreeMap<u32, [usize; 2]> = BTreeMap::new();
    for e in &split.examples {
        per_depth.entry(e.depth).or_default()[usize::from(e.label)] += 1;
    }
    for (d, [f, t]) in &per_depth {
        println!("depth {d}: {t} true, {f} false");
    }
    let e = &split.examples[0];
    println!("\n{}:", e.id);
    for s in &e.context {
        println!("  {s}");
    }
    println!("  Q: {} -> {}", e.question, e.label);

    write_records(split, &out)?;
    println!("\nwrote {} examples to {out}", split.len());
    Ok(())
}
