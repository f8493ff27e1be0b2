//! Symmetry groups of a few channel families: which permutation pairs
//! `(G, Pi)` satisfy `T G = Pi T`, whether the input action is transitive,
//! and circulant recognition.
//!
//! Run with: `cargo run --example symmetry_report`

use bottleneck_lab::prob::{ChannelMatrix, ProbVector};
use bottleneck_lab::symmetry::{find_symmetry_group, is_circulant, DEFAULT_SYMMETRY_TOL};

fn describe(name: &str, t: &ChannelMatrix) {
    let group = find_symmetry_group(t, DEFAULT_SYMMETRY_TOL).unwrap();
    println!(
        "{name} ({} inputs, {} outputs)",
        t.input_dim(),
        t.output_dim()
    );
    println!("  pairs: {}", group.order());
    println!(
        "  input group: order {} (transitive: {})",
        group.input_group.len(),
        group.input_transitive
    );
    println!(
        "  output group: order {} (transitive: {})",
        group.output_group.len(),
        group.output_transitive
    );
    for g in group.generators() {
        println!(
            "  generator: input {} | output {}",
            g.input_perm.cycle_notation(),
            g.output_perm.cycle_notation()
        );
    }
    match is_circulant(t, DEFAULT_SYMMETRY_TOL) {
        Some(z) => println!("  circulant with noise {}", z.render_text()),
        None => println!("  not circulant"),
    }
    println!();
}

fn main() {
    describe("identity", &ChannelMatrix::identity(3));
    describe(
        "ternary circulant (0.1, 0.05)",
        &ChannelMatrix::tito(0.1, 0.05).unwrap(),
    );
    describe("Hamming(4, 0.6)", &ChannelMatrix::hamming(4, 0.6).unwrap());
    let z = ProbVector::new(vec![0.6, 0.25, 0.15]).unwrap();
    describe("binary-input symmetric", &ChannelMatrix::bms(&z).unwrap());
    describe(
        "asymmetric 2x2",
        &ChannelMatrix::new(vec![vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap(),
    );
}
