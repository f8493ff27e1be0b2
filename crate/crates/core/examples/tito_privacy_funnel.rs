//! Symmetric privacy funnel for the ternary circulant channel.
//!
//! Locates the touch point `(p*, lambda*)`, builds the erasure-structured
//! test channel, evaluates the linear rate formula up to `C*`, and compares
//! against the brute-force oracle on both sides of the threshold.
//!
//! Run with: `cargo run --release --example tito_privacy_funnel`

use bottleneck_lab::oracle::{pf_oracle, SolverConfig};
use bottleneck_lab::pf::PfSymmetricSolver;
use bottleneck_lab::prob::{ChannelMatrix, ProbVector};

fn main() {
    let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
    let cfg = SolverConfig {
        restarts: 24,
        ..SolverConfig::default()
    };
    let solver = PfSymmetricSolver::new(&t, &cfg).unwrap();
    let tp = solver.touch_point();
    println!("touch point:");
    println!("  lambda* = {:.6}", tp.lambda_star);
    let p: Vec<String> = tp.p_star.iter().map(|x| format!("{x:.4}")).collect();
    println!("  p*      = ({})", p.join(", "));
    println!("  C*      = {:.4} bits", tp.c_star);
    println!(
        "  slope   = {:.6} (equals lambda* at the touch point)\n",
        solver.rate_slope()
    );

    let u = ProbVector::uniform(3);
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "C", "linear", "oracle", "epsilon"
    );
    for k in 0..=6 {
        let c = tp.c_star * k as f64 / 6.0;
        let lin = solver.value(c).unwrap();
        let ora = pf_oracle(&t, &u, c, 4, &cfg).unwrap();
        println!(
            "{:>8.4} {:>10.6} {:>10.6} {:>10.4}",
            c, lin.r, ora.value, lin.epsilon
        );
    }

    // print the erasure-structured test channel at half budget
    let sol = solver.value(0.5 * tp.c_star).unwrap();
    println!("\nP(X|W) columns at C = C*/2 (orbit of p*, then the erasure symbol):");
    for row in 0..3 {
        let cells: Vec<String> = (0..4)
            .map(|col| format!("{:.4}", sol.b_matrix.entry(row, col)))
            .collect();
        println!("  [{}]", cells.join("  "));
    }

    // beyond the threshold the optimal test channel stops being symmetric
    let c_beyond = tp.c_star + 0.2;
    let ora = pf_oracle(&t, &u, c_beyond, 4, &cfg).unwrap();
    println!(
        "\nbeyond the threshold: C = {:.4}, oracle R = {:.4} (linear extension of the \
         symmetric family would claim {:.4})",
        c_beyond,
        ora.value,
        c_beyond * solver.rate_slope()
    );
}
