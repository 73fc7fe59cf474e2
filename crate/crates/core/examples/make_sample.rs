//! Regenerates the bundled sample inputs: `cargo run -p gesturegen-core --example make_sample [DIR]`.

use std::path::PathBuf;

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data/sample"));
    match gesturegen_core::sample::write_sample(&dir) {
        Ok(_) => println!("wrote sample to {}", dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
