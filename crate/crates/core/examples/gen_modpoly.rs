//! Regenerates the bundled modular polynomial tables.
//!
//! Usage: `cargo run --release --example gen_modpoly -- <output-dir>`

use std::path::PathBuf;

use heegner_lab::ssoracle::modpoly::{generate, max_digits, SUPPORTED_PRIMES};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    for p in SUPPORTED_PRIMES {
        let phi = generate(p).unwrap_or_else(|e| panic!("Phi_{p}: {e}"));
        let path = dir.join(format!("phi_{p}.txt"));
        std::fs::write(&path, phi.to_text()).expect("write table");
        println!(
            "{}: {} terms, {} digits max",
            path.display(),
            phi.coeffs.len(),
            max_digits(&phi)
        );
    }
}
