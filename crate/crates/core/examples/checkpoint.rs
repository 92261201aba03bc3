//! Saves a model to the text checkpoint format and loads it back.

use nesy_reasoning::datagen::Example;
use nesy_reasoning::embeddings::EmbeddingTable;
use nesy_reasoning::logic::parse_context;
use nesy_reasoning::model::{forward, ModelConfig, ModelParams, Variant};
use nesy_reasoning::nn::Checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ModelParams::init(ModelConfig::with_variant(Variant::ImaSoftmax), 42);
    let path = std::env::temp_dir().join("nesy-example.ckpt");
    params.to_checkpoint().write(&path)?;
    let loaded = ModelParams::from_checkpoint(&Checkpoint::read(&path)?)?;
    assert_eq!(loaded, params);
    println!(
        "{} ({} bytes) round-trips exactly",
        path.display(),
        std::fs::metadata(&path)?.len()
    );

    let ex = Example {
        id: "demo".into(),
        context: vec!["Anne is rough.".into(), "Rough people are young.".into()],
        question: "Anne is young.".into(),
        label: true,
        depth: 1,
    };
    parse_context(&ex.context)?;
    let table = EmbeddingTable::bundled();
    let a = forward(&params, &table, &ex)?;
    let b = forward(&loaded, &table, &ex)?;
    println!("p = {} before, {} after", a.probability, b.probability);
    Ok(())
}
