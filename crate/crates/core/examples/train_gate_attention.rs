//! Trains the gate-attention network on a small generated split and writes
//! a report.
//!
//! `cargo run --release --example train_gate_attention -- [examples] [epochs]`

use nesy_reasoning::datagen::{generate_dataset, GenerationSpec, Scenario, SplitName};
use nesy_reasoning::embeddings::EmbeddingTable;
use nesy_reasoning::train::{emit_report, evaluate, train_with_progress, Report, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(400), |s| s.parse())?;
    let epochs: usize = args.next().map_or(Ok(3), |s| s.parse())?;

    let scenarios = vec![Scenario::all()[0]];
    let mut spec = GenerationSpec::single_split(scenarios, &[2], SplitName::Train, n, 0);
    spec.counts
        .get_mut(&SplitName::Dev)
        .unwrap()
        .insert(2, n / 4);
    spec.counts
        .get_mut(&SplitName::Test)
        .unwrap()
        .insert(2, n / 4);
    let data = generate_dataset(&spec)?;

    let config = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    println!("{config}");
    let table = EmbeddingTable::from_env_or_bundled()?;
    let out = train_with_progress(
        &config,
        &table,
        &data[&SplitName::Train],
        &data[&SplitName::Dev],
        |s| {
            println!(
                "epoch {:>2}  loss {:.4}  dev {:.3}",
                s.epoch, s.loss, s.dev_accuracy
            )
        },
    )?;
    let test = evaluate(&out.model, &data[&SplitName::Test], 0.5)?;
    println!("test accuracy {:.3}", test.accuracy());

    let mut report = Report::with_history(&out.history);
    report.add("test", &test).note("config", &config);
    let path = std::env::temp_dir().join("train_gate_attention.json");
    let (json, tsv) = emit_report(&report, &path)?;
    println!("{}\n{}", json.display(), tsv.display());
    Ok(())
}
