//! Attention weights per iteration for each normalisation.

use nesy_reasoning::datagen::Example;
use nesy_reasoning::embeddings::EmbeddingTable;
use nesy_reasoning::model::{forward, ModelConfig, ModelParams, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example {
        id: "trace".into(),
        context: vec![
            "Anne is rough.".into(),
            "Rough people are young.".into(),
            "All young people are cold.".into(),
            "If someone is rough and nice then they are green.".into(),
        ],
        question: "Anne is cold.".into(),
        label: true,
        depth: 2,
    };
    let table = EmbeddingTable::bundled();
    for v in [Variant::ImaSigmoid, Variant::ImaSoftmax, Variant::ImaGate] {
        let p = forward(
            &ModelParams::init(ModelConfig::with_variant(v), 1),
            &table,
            &ex,
        )?;
        println!("{v}: p = {:.4}", p.probability);
        for (t, w) in p.attention_trace.iter().enumerate() {
            let cells: Vec<String> = w.iter().map(|x| format!("{x:.3}")).collect();
            println!(
                "  t={t} [{}] sum {:.6}",
                cells.join(" "),
                w.iter().sum::<f64>()
            );
        }
    }
    Ok(())
}
