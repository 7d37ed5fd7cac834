//! Profiles ES and TM alone, predicts three concurrent deployments, then
//! simulates them and prints prediction error.
//!
//! cargo run --release --example reproduce_configs [out_dir]

use conflict_lens::pipeline::{reproduce, ReproduceOptions};

fn main() -> conflict_lens::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("conflict-lens-reproduce")
            .display()
            .to_string()
    });
    let (summary, manifest) = reproduce(&ReproduceOptions::new(&out))?;

    println!("severity(es, tm) = {:.4}", summary.conflict.severity);
    println!("{}", summary.to_tsv());
    print!("{}", summary.deployments_tsv());
    println!("\n{} files under {out}", manifest.outputs.len());
    Ok(())
}
