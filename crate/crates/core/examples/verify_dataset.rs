//! Re-derives labels and depths with the oracle, then shows what a
//! corrupted record looks like to the verifier.

use nesy_reasoning::datagen::{
    generate_dataset, verify_example, verify_examples, GenerationSpec, Scenario, SplitName,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenerationSpec::single_split(
        Scenario::all().to_vec(),
        &[2, 3, 4, 5],
        SplitName::Test,
        100,
        1,
    );
    let mut examples = generate_dataset(&spec)?
        .remove(&SplitName::Test)
        .unwrap()
        .examples;
    println!("{:?}", verify_examples(&examples));

    examples[0].label = !examples[0].label;
    examples[1].depth += 1;
    println!(
        "after corrupting two records: {:?}",
        verify_examples(&examples)
    );
    println!("first record: {:?}", verify_example(&examples[0])?);
    Ok(())
}
