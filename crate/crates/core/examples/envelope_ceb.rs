//! The conditional entropy bound through the lower convex envelope.
//!
//! `F_T(q, x)` is the least output uncertainty achievable while keeping at
//! least `x` bits of input uncertainty. It is computed as
//! `max over lambda of psi(q, lambda) + lambda x`, where `psi` is the lower
//! convex envelope of `H(Tp) - lambda H(p)` over the simplex. The endpoints
//! are pinned analytically: `F(q, 0) = H(Y|X)` and `F(q, H(q)) = H(Y)`.
//!
//! Run with: `cargo run --example envelope_ceb`

use bottleneck_lab::ib::{ceb_value, ib_value, lower_convex_envelope};
use bottleneck_lab::oracle::SolverConfig;
use bottleneck_lab::prob::{ChannelMatrix, EntropyUnit, ProbVector};

fn main() {
    // a lopsided 3x3 channel with no symmetry at all
    let t = ChannelMatrix::new(vec![
        vec![0.7, 0.2, 0.1],
        vec![0.2, 0.6, 0.2],
        vec![0.1, 0.2, 0.7],
    ])
    .unwrap();
    let q = ProbVector::new(vec![0.5, 0.3, 0.2]).unwrap();
    let cfg = SolverConfig::default();

    let hq = q.entropy_bits();
    let hyx = t.conditional_entropy(&q, EntropyUnit::Bits).unwrap();
    let hy = t.push_forward(&q).unwrap().entropy_bits();
    println!("H(X) = {hq:.6}, H(Y|X) = {hyx:.6}, H(Y) = {hy:.6}\n");

    println!("{:>8} {:>10}", "x", "F(q, x)");
    for k in 0..=8 {
        let x = hq * k as f64 / 8.0;
        let f = ceb_value(&t, &q, x, &cfg).unwrap();
        println!("{x:>8.4} {f:>10.6}");
    }

    // the same machinery complements into the bottleneck curve
    println!("\n{:>8} {:>10} {:>12}", "C", "R(q, C)", "|W| used");
    for k in 0..=6 {
        let c = hq * k as f64 / 6.0;
        let sol = ib_value(&t, &q, c, &cfg).unwrap();
        let cols = sol.test_channel.as_ref().map_or(0, |m| m.input_dim());
        println!("{c:>8.4} {:>10.6} {cols:>12}", sol.r);
    }

    // a peek at one envelope: where does it separate from the potential?
    let mut graph = lower_convex_envelope(&t, 0.5, 200).unwrap();
    let probe = ProbVector::new(vec![0.15, 0.15, 0.7]).unwrap();
    let ev = graph.evaluate(&probe).unwrap();
    println!("\npsi(p, 0.5) at p = (0.15, 0.15, 0.70): {:.6}", ev.value);
    println!("facet support points:");
    for (w, p) in &ev.support {
        println!("  weight {w:.4} at {}", p.render_text());
    }
}
