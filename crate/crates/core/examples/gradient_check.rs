//! Central-difference check of every variant's backward pass at hidden
//! size 8, three five-word sentences.

use nesy_reasoning::model::{check_variant, gradient_fixture, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = gradient_fixture();
    println!("context {:?}\nquestion {:?}", ex.context, ex.question);
    for v in Variant::ALL {
        let r = check_variant(v, 200, 0)?;
        let worst = r.worst().expect("probes");
        println!(
            "{v:<12} max rel err {:.2e}  (worst: param {} analytic {:.4e} numeric {:.4e})",
            r.max_relative_error, worst.index, worst.analytic, worst.numeric
        );
    }
    Ok(())
}
