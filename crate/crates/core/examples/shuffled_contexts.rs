//! Sentence order does not matter to the oracle. A trained network may
//! disagree, which is what `ood_eval` measures.

use nesy_reasoning::datagen::{generate_dataset, GenerationSpec, Scenario, SplitName};
use nesy_reasoning::embeddings::EmbeddingTable;
use nesy_reasoning::model::{ModelConfig, ModelParams, Variant};
use nesy_reasoning::train::{ood_eval, OraclePredictor, TrainedModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec =
        GenerationSpec::single_split(Scenario::all().to_vec(), &[2, 3], SplitName::Test, 50, 3);
    let split = generate_dataset(&spec)?.remove(&SplitName::Test).unwrap();

    let oracle = ood_eval(&OraclePredictor, &split, 11)?;
    println!(
        "oracle:    original {:.3} shuffled {:.3}",
        oracle.original.accuracy(),
        oracle.shuffled.accuracy()
    );

    let table = EmbeddingTable::bundled();
    let params = ModelParams::init(ModelConfig::with_variant(Variant::ImaGate), 0);
    let untrained = TrainedModel { params, table };
    let r = ood_eval(&untrained, &split, 11)?;
    println!(
        "untrained: original {:.3} shuffled {:.3}",
        r.original.accuracy(),
        r.shuffled.accuracy()
    );
    for (depth, delta) in r.delta() {
        let name = depth.map_or("all".to_string(), |d| d.to_string());
        println!("  delta at depth {name}: {delta:+.3}");
    }
    Ok(())
}
