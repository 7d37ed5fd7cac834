//! Builds two ECDFs, aligns them on a common support and measures the gap.
//!
//! cargo run --example ecdf_basics

use conflict_lens::{
    build_ecdf, int_distance_flagged, ks_distance, step_interpolate, union_support, StepCdf,
};

fn main() -> conflict_lens::Result<()> {
    let a = build_ecdf(&[3.0, 6.0, 6.0, 9.0, 12.0])?;
    let b = build_ecdf(&[9.0, 12.0, 15.0, 15.0])?;
    print!("a:\n{}", a.to_tsv());

    let common = union_support(&[a.clone(), b.clone()])?;
    let ya = step_interpolate(&a, &common)?;
    let yb = step_interpolate(&b, &common)?;
    println!("\nx\tF_a\tF_b");
    for ((x, fa), fb) in common.iter().zip(&ya).zip(&yb) {
        println!("{x}\t{fa:.2}\t{fb:.2}");
    }

    let int = int_distance_flagged(&a, &b);
    println!("\nks = {:.4}", ks_distance(&a, &b));
    println!(
        "int = {:.4} (degenerate span: {})",
        int.value, int.degenerate_span
    );
    println!("F_a(7.5) = {}", a.evaluate(7.5));
    Ok(())
}
