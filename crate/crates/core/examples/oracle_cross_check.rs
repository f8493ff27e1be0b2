//! The brute-force oracle against the closed forms, plus a cardinality
//! scan showing that the ternary channel genuinely needs three test-channel
//! symbols.
//!
//! Run with: `cargo run --release --example oracle_cross_check`

use bottleneck_lab::ib::hamming_ib;
use bottleneck_lab::oracle::{cardinality_scan, IbFrontier, SolverConfig};
use bottleneck_lab::prob::{ChannelMatrix, ProbVector};

fn main() {
    let cfg = SolverConfig {
        restarts: 24,
        ..SolverConfig::default()
    };
    let u = ProbVector::uniform(3);
    let log3 = 3f64.log2();

    println!("Hamming(3, 0.5): closed form vs multistart oracle");
    let t = ChannelMatrix::hamming(3, 0.5).unwrap();
    let frontier = IbFrontier::sweep(&t, &u, 3, &cfg).unwrap();
    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "C", "closed", "oracle", "diff"
    );
    for k in 1..=8 {
        let c = log3 * k as f64 / 9.0;
        let closed = hamming_ib(3, 0.5, c).unwrap().r;
        let oracle = frontier.query(c, &cfg).value;
        println!(
            "{c:>8.4} {closed:>12.6} {oracle:>12.6} {:>10.2e}",
            (closed - oracle).abs()
        );
    }

    println!("\nternary circulant (0.1, 0.05): how many test-channel symbols are needed?");
    let tito = ChannelMatrix::tito(0.1, 0.05).unwrap();
    println!("{:>8} {:>10} {:>10} {:>10}", "C", "k = 1", "k = 2", "k = 3");
    for c in [0.3, 0.6, 0.9] {
        let scan = cardinality_scan(&tito, &u, c, &[1, 2, 3], &cfg).unwrap();
        println!(
            "{c:>8.4} {:>10.6} {:>10.6} {:>10.6}",
            scan[0].1, scan[1].1, scan[2].1
        );
    }
    println!("\nk = 2 stays strictly below k = 3: two symbols are never enough here.");
}
