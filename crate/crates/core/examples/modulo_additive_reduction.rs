//! For a circulant channel `Y = X + Z mod n` with uniform input, the
//! bottleneck search collapses from test channels `P(W|X)` to noise vectors
//! `v` with `X = W + V`: maximize `log n - H(v * z)` subject to
//! `H(v) >= log n - C`. This example traces that reduced search and checks
//! it against the general envelope path.
//!
//! Run with: `cargo run --release --example modulo_additive_reduction`

use bottleneck_lab::ib::{ib_value, reduced_ib};
use bottleneck_lab::oracle::SolverConfig;
use bottleneck_lab::prob::{ChannelMatrix, ProbVector};

fn main() {
    let z = ProbVector::new(vec![0.75, 0.15, 0.1]).unwrap();
    let t = ChannelMatrix::circulant_from_noise(&z);
    let u = ProbVector::uniform(3);
    let cfg = SolverConfig {
        restarts: 8,
        ..SolverConfig::default()
    };
    let log3 = 3f64.log2();

    println!("channel noise z = {}", z.render_text());
    println!(
        "{:>8} {:>10} {:>10} {:>26}",
        "C", "reduced", "envelope", "achieving noise v"
    );
    for k in 0..=6 {
        let c = log3 * k as f64 / 6.0;
        let red = reduced_ib(&z, c, &cfg).unwrap();
        let env = ib_value(&t, &u, c, &cfg).unwrap();
        let v = red
            .noise_vector
            .as_ref()
            .map(|v| {
                v.iter()
                    .map(|x| format!("{x:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default();
        println!("{c:>8.4} {:>10.6} {:>10.6}   ({v})", red.r, env.r);
    }
    println!(
        "\nthe achieving v runs from uniform (C = 0, nothing disclosed) to a point \
         mass (C = log n, the test channel is noiseless)"
    );
}
