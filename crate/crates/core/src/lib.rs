//! Information bottleneck and privacy funnel rate functions for
//! finite-alphabet channels.
//!
//! For a Markov chain `Y - X - W` with `X ~ q` and a fixed channel `T` from
//! `X` to `Y`, the crate computes
//!
//! * the **information bottleneck** value: maximal `I(W;Y)` over test
//!   channels `P(W|X)` with `I(W;X) <= C`, and
//! * the **privacy funnel** value: minimal `I(W;Y)` with `I(W;X) = C`,
//!
//! with fast exact paths when `T` is input symmetric (circulant and Hamming
//! channels reduce to closed forms or one-dimensional searches; symmetric
//! privacy funnels are linear up to a threshold `C*`), a general
//! small-alphabet path through the lower convex envelope of
//! `H(Tp) - lambda H(p)`, and an independent brute-force oracle used to
//! validate everything else.
//!
//! ```
//! use bottleneck_lab::prob::{ChannelMatrix, ProbVector, EntropyUnit};
//! use bottleneck_lab::ib::hamming_ib;
//!
//! // ternary Hamming channel, uniform input
//! let t = ChannelMatrix::hamming(3, 0.5).unwrap();
//! let u = ProbVector::uniform(3);
//! assert!(t.mutual_information(&u, EntropyUnit::Bits).unwrap() > 0.0);
//!
//! // closed-form bottleneck rate at C = 1 bit
//! let point = hamming_ib(3, 0.5, 1.0).unwrap();
//! assert!(point.r > 0.0 && point.r < 1.0);
//! ```
//!
//! The `examples/` directory has one runnable program per capability; the
//! thin `bottleneck-lab` binary exposes the same functionality as
//! subcommands (`ib`, `ib-curve`, `pf`, `pf-curve`, `ceb`, `oracle`,
//! `symmetry`).

pub mod cli;
pub mod curve;
pub mod error;
pub mod ib;
mod lp;
pub mod oracle;
pub mod pf;
pub mod prob;
mod simplex;
pub mod symmetry;

pub use error::{Error, Result};
pub use prob::{ChannelMatrix, EntropyUnit, ProbVector};
