//! Exact characteristic polynomials of lattice actions and their
//! palindromic structure.
//!
//! A word of involutions acting on the quotient lattice preserves an
//! integral bilinear form, which forces the characteristic polynomial to be
//! reciprocal: reading the integer coefficients backwards reproduces the
//! polynomial.  The dilation factor is then the largest root, computed here
//! from exact coefficients by bisection.
//!
//! Run with `cargo run --example characteristic_polynomials`.

use autsurf::exactlin::spectral_radius;
use autsurf::nsaction::{default_k3_config, quotient_rep, word_matrix, Word};
use num_bigint::BigInt;

fn is_palindromic(coeffs: &[BigInt]) -> bool {
    let n = coeffs.len();
    (0..n).all(|k| coeffs[k] == coeffs[n - 1 - k])
}

fn main() {
    let cfg = default_k3_config();
    let gens = quotient_rep(&cfg).expect("default configuration is valid").matrices;

    let three = vec![1usize, 2, 3];
    let fifteen = vec![1usize, 2, 3, 2, 1, 3, 1, 3, 1, 2, 3, 2, 1, 2, 3];

    for (name, letters) in [("f = product of the three involutions", three),
                            ("g = a fifteen-letter composition", fifteen)] {
        let w = Word::new(letters.clone()).expect("letters are 1-based");
        let m = word_matrix(&gens, &w).expect("word matrix is total");
        let p = m.char_poly();
        let coeffs: Vec<String> = p.coeffs().iter().map(|c| c.to_string()).collect();
        let lambda = spectral_radius(&m, 1e-12).expect("matrix has a real spectral radius");
        let word_str: String = letters.iter().map(|l| l.to_string()).collect();

        println!("{name}");
        println!("  word          {word_str}");
        println!("  char poly     [{}]  (ascending)", coeffs.join(", "));
        println!("  palindromic   {}", is_palindromic(p.coeffs()));
        println!("  lambda        {lambda:.15}");
        println!("  entropy       {:.15}", lambda.ln());
        println!();
    }

    // palindromy is not an accident of those two words: check a sample of
    // longer random-looking words
    let samples: Vec<Vec<usize>> = vec![
        vec![2, 1, 3, 1, 2, 3, 2],
        vec![3, 1, 2, 1, 3, 2, 1, 2],
        vec![1, 3, 2, 3, 1, 2, 3, 1, 2, 1],
    ];
    let mut all = true;
    for letters in &samples {
        let w = Word::new(letters.clone()).expect("letters are 1-based");
        let m = word_matrix(&gens, &w).expect("word matrix is total");
        all &= is_palindromic(m.char_poly().coeffs());
    }
    println!("palindromic for {} further sample words: {all}", samples.len());
    println!("(forced by the preserved integral bilinear form: the action is");
    println!("conjugate to its inverse transpose, pairing roots r with 1/r)");
}
