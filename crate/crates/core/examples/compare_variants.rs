//! Trains gate attention and sigmoid attention on the same split with the
//! same seed, plus the untrained baseline, and prints one table.

use nesy_reasoning::datagen::{generate_dataset, GenerationSpec, Scenario, SplitName};
use nesy_reasoning::embeddings::EmbeddingTable;
use nesy_reasoning::model::{ModelConfig, ModelParams, Variant};
use nesy_reasoning::train::{evaluate, train, Report, TrainConfig, TrainedModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(300), |s| s.parse())?;
    let mut spec =
        GenerationSpec::single_split(vec![Scenario::all()[0]], &[2], SplitName::Train, n, 0);
    spec.counts
        .get_mut(&SplitName::Dev)
        .unwrap()
        .insert(2, n / 4);
    spec.counts
        .get_mut(&SplitName::Test)
        .unwrap()
        .insert(2, n / 2);
    let data = generate_dataset(&spec)?;
    let (tr, dev, test) = (
        &data[&SplitName::Train],
        &data[&SplitName::Dev],
        &data[&SplitName::Test],
    );
    let table = EmbeddingTable::bundled();

    let mut report = Report::default();
    for variant in [Variant::ImaGate, Variant::ImaSigmoid] {
        let config = TrainConfig {
            variant,
            epochs: 2,
            ..TrainConfig::default()
        };
        let out = train(&config, &table, tr, dev)?;
        report.add(variant.as_str(), &evaluate(&out.model, test, 0.5)?);
    }
    let baseline = TrainedModel {
        params: ModelParams::init(ModelConfig::with_variant(Variant::Baseline), 0),
        table,
    };
    report.add("untrained-baseline", &evaluate(&baseline, test, 0.5)?);
    print!("{}", report.to_tsv());
    Ok(())
}
