//! Tokenization, the bundled vectors, and out-of-vocabulary handling.

use nesy_reasoning::embeddings::{tokenize, EmbeddingTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sentence = "If someone is rough and nice then they are green.";
    let tokens = tokenize(sentence);
    println!("{:?}", tokens.tokens);

    // NESY_EMBEDDINGS may point at a full GloVe file
    let table = EmbeddingTable::from_env_or_bundled()?;
    println!("{} vectors of dimension {}", table.len(), table.dimension());
    let m = table.embed(&tokens);
    println!("sentence matrix {:?}", m.shape());

    for word in ["rough", "zyzzyva"] {
        let v = table.vector(word);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!(
            "{word:<8} in table: {:<5} norm {norm:.3}",
            table.contains(word)
        );
    }
    assert_eq!(table.vector("zyzzyva"), table.vector("zyzzyva"));
    Ok(())
}
