//! Classifies words of involutions by their exact lattice action.
//!
//! Every reduced word in the three marked involutions of the default
//! configuration acts on the 6-dimensional quotient lattice; the action is
//! elliptic (finite order), parabolic (unbounded, no expansion), or
//! loxodromic (a Salem-like dilation factor `lambda > 1`).  The dynamical
//! degree and topological entropy `log lambda` come out of exact integer
//! arithmetic.
//!
//! Run with `cargo run --example exact_classification`.

use autsurf::nsaction::{classify_word, default_k3_config, entropy, quotient_rep, Word};

fn main() {
    let cfg = default_k3_config();
    let gens = quotient_rep(&cfg).expect("default configuration is valid").matrices;

    let words: Vec<Vec<usize>> = vec![
        vec![1],
        vec![2],
        vec![1, 2],
        vec![2, 3],
        vec![1, 3],
        vec![1, 2, 3],
        vec![3, 2, 1],
        vec![1, 2, 1, 3],
        vec![3, 2, 3, 2, 1],
        vec![1, 2, 3, 1, 2, 3],
    ];

    println!("word           kind         lambda            entropy");
    println!("-------------- ------------ ----------------- -----------------");
    for letters in words {
        let w = Word::new(letters.clone()).expect("letters are 1-based");
        let c = classify_word(&gens, &w).expect("classification is total");
        let h = entropy(&gens, &w).expect("entropy is total");
        let name: String = letters.iter().map(|l| l.to_string()).collect();
        let order = match c.order {
            Some(o) => format!(" (order {o})"),
            None => String::new(),
        };
        println!("{name:<14} {:<12} {:<17.12} {h:<17.12}{order}", c.kind.to_string(), c.lambda);
        if let Some(salem) = &c.salem_factor {
            let coeffs: Vec<String> = salem.coeffs().iter().map(|c| c.to_string()).collect();
            println!("{:14} salem factor (ascending): [{}]", "", coeffs.join(", "));
        }
    }

    println!();
    println!("Single involutions are elliptic of order 2 and two-letter words are");
    println!("elliptic of order 4; parabolic words (unbounded growth, lambda = 1)");
    println!("first appear at length 5; products mixing all three letters are");
    println!("typically loxodromic, with entropy log(lambda) > 0.");
}
