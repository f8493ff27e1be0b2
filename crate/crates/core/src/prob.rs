//! Finite-probability primitives: points on the simplex, column-stochastic
//! channel matrices, entropies, and constructors for the channel families
//! (circulant / modulo-additive, Hamming, binary-input symmetric).
//!
//! Conventions used across the crate:
//!
//! * A channel `T` is an `m x n` **column-stochastic** matrix: column `i`
//!   is the conditional law of the output given input symbol `i`, so the
//!   output distribution of an input `p` is the matrix-vector product `T p`.
//! * Entropies default to bits (log base 2) and `0 log 0 = 0`.
//! * Probabilities are validated on construction: entries must be
//!   nonnegative (tiny negative round-off up to 1e-12 is clamped) and sums
//!   must be within 1e-9 of one, after which vectors are renormalized
//!   exactly. There is no epsilon-smoothing anywhere; closed forms need
//!   exact zeros.

use crate::error::{Error, Result};
use serde::Serialize;

/// Sum tolerance accepted before a probability vector is rejected.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Column-sum tolerance for channel matrices.
pub const COLUMN_SUM_TOL: f64 = 1e-9;
/// Magnitude of negative round-off clamped to zero on construction.
pub const ENTRY_NEG_TOL: f64 = 1e-12;

/// Unit in which entropies and information rates are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EntropyUnit {
    #[default]
    Bits,
    Nats,
}

impl EntropyUnit {
    /// Convert a quantity computed in bits into this unit.
    pub fn from_bits(self, x: f64) -> f64 {
        match self {
            EntropyUnit::Bits => x,
            EntropyUnit::Nats => x * std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntropyUnit::Bits => "bits",
            EntropyUnit::Nats => "nats",
        }
    }
}

impl std::str::FromStr for EntropyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(EntropyUnit::Bits),
            "nats" => Ok(EntropyUnit::Nats),
            other => Err(Error::Parse(format!(
                "unknown unit {other:?}, expected \"bits\" or \"nats\""
            ))),
        }
    }
}

/// Entropy in bits of a raw slice of probabilities (`0 log 0 = 0`).
pub(crate) fn entropy_bits_of(values: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in values {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits_of(&[p, 1.0 - p])
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    values: Vec<f64>,
}

impl ProbVector {
    /// Validate and normalize a vector of probability masses.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("empty probability vector".into()));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { index: i });
            }
            if *v < 0.0 {
                if *v < -ENTRY_NEG_TOL {
                    return Err(Error::NegativeEntry {
                        index: i,
                        value: *v,
                    });
                }
                *v = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        for v in values.iter_mut() {
            *v /= sum;
        }
        Ok(ProbVector { values })
    }

    /// Uniform distribution on `n` symbols.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        ProbVector {
            values: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on symbol `i`.
    pub fn point_mass(n: usize, i: usize) -> Self {
        assert!(i < n, "point mass index out of range");
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        ProbVector { values }
    }

    /// Construct without the sum check. The caller guarantees the slice is a
    /// distribution up to floating round-off; it is still renormalized.
    pub(crate) fn from_normalized(mut values: Vec<f64>) -> Self {
        let sum: f64 = values.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-6, "not a distribution: sum {sum}");
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
            *v /= sum;
        }
        ProbVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    /// Shannon entropy in the requested unit; always in `[0, log n]`.
    pub fn entropy(&self, unit: EntropyUnit) -> f64 {
        unit.from_bits(self.entropy_bits())
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits_of(&self.values)
    }

    pub fn max_abs_diff(&self, other: &ProbVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// One line of whitespace-separated decimals.
    pub fn parse_text(text: &str) -> Result<Self> {
        let values: Vec<f64> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad probability {tok:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        ProbVector::new(values)
    }

    pub fn render_text(&self) -> String {
        // the default float formatting is shortest-round-trip, so the text
        // form parses back to exactly the same values
        self.values
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Distribution of `V + Z mod n` for independent `V ~ v`, `Z ~ z`.
pub fn cyclic_convolve(v: &ProbVector, z: &ProbVector) -> Result<ProbVector> {
    let n = v.dim();
    if z.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "cyclic_convolve",
            expected: n,
            found: z.dim(),
        });
    }
    let mut out = vec![0.0; n];
    for j in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += v[i] * z[(j + n - i) % n];
        }
        out[j] = acc;
    }
    Ok(ProbVector::from_normalized(out))
}

/// An `m x n` column-stochastic channel matrix. Stored column-major.
///
/// ```
/// use bottleneck_lab::prob::{ChannelMatrix, ProbVector, EntropyUnit};
///
/// // binary symmetric channel, crossover 0.1
/// let t = ChannelMatrix::bsc(0.1).unwrap();
/// let u = ProbVector::uniform(2);
/// let capacity = t.mutual_information(&u, EntropyUnit::Bits).unwrap();
/// assert!((capacity - 0.5310044064107188).abs() < 1e-12);
/// ```
#[derive(Debug, Clone, Serialize)]
pub struct ChannelMatrix {
    /// Column-major entries, `entries[col * output_dim + row]`.
    entries: Vec<f64>,
    input_dim: usize,
    output_dim: usize,
}

impl ChannelMatrix {
    /// Build from rows (row-major, as in the text file format), validating
    /// that each column sums to one within 1e-9. Columns are then
    /// renormalized exactly.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows[0].is_empty() {
            return Err(Error::Parse("empty channel matrix".into()));
        }
        let n = rows[0].len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::Parse("ragged channel matrix".into()));
            }
        }
        let mut entries = vec![0.0; m * n];
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { index: r * n + c });
                }
                if v < -ENTRY_NEG_TOL {
                    return Err(Error::NegativeEntry {
                        index: r * n + c,
                        value: v,
                    });
                }
                entries[c * m + r] = v.max(0.0);
            }
        }
        let mut mat = ChannelMatrix {
            entries,
            input_dim: n,
            output_dim: m,
        };
        mat.validate_and_normalize_columns()?;
        Ok(mat)
    }

    fn validate_and_normalize_columns(&mut self) -> Result<()> {
        let m = self.output_dim;
        for c in 0..self.input_dim {
            let col = &mut self.entries[c * m..(c + 1) * m];
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::ColumnNotStochastic { column: c, sum });
            }
            for v in col.iter_mut() {
                *v /= sum;
            }
        }
        Ok(())
    }

    pub fn from_columns(cols: &[ProbVector]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Parse("empty channel matrix".into()));
        }
        let m = cols[0].dim();
        let mut entries = Vec::with_capacity(m * cols.len());
        for col in cols {
            if col.dim() != m {
                return Err(Error::DimensionMismatch {
                    context: "from_columns",
                    expected: m,
                    found: col.dim(),
                });
            }
            entries.extend_from_slice(col.as_slice());
        }
        Ok(ChannelMatrix {
            entries,
            input_dim: cols.len(),
            output_dim: m,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        ChannelMatrix {
            entries,
            input_dim: n,
            output_dim: n,
        }
    }

    /// Hamming channel `alpha * I + (1 - alpha) / n * E`: keep the symbol
    /// with probability `alpha`, otherwise resample uniformly.
    pub fn hamming(n: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::ParameterRange {
                name: "alpha",
                value: alpha,
                min: 0.0,
                max: 1.0,
            });
        }
        assert!(n > 0);
        let off = (1.0 - alpha) / n as f64;
        let mut entries = vec![off; n * n];
        for i in 0..n {
            entries[i * n + i] += alpha;
        }
        Ok(ChannelMatrix {
            entries,
            input_dim: n,
            output_dim: n,
        })
    }

    /// Circulant matrix of the modulo-additive channel `Y = X + Z mod n`
    /// with noise law `z`. Column `i` is `z` cyclically shifted down by `i`,
    /// so column 0 is `z` itself and `T p` is the cyclic convolution `p * z`.
    pub fn circulant_from_noise(z: &ProbVector) -> Self {
        let n = z.dim();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = z[(j + n - i) % n];
            }
        }
        ChannelMatrix {
            entries,
            input_dim: n,
            output_dim: n,
        }
    }

    /// Ternary-input ternary-output circulant channel: shift by one with
    /// probability `alpha`, by two with probability `beta`.
    pub fn tito(alpha: f64, beta: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParameterRange {
                    name,
                    value,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        if alpha + beta > 1.0 {
            return Err(Error::ParameterRange {
                name: "alpha + beta",
                value: alpha + beta,
                min: 0.0,
                max: 1.0,
            });
        }
        let z = ProbVector::from_normalized(vec![1.0 - alpha - beta, alpha, beta]);
        Ok(Self::circulant_from_noise(&z))
    }

    /// Binary-input symmetric channel `[z, reverse(z)]`.
    pub fn bms(z: &ProbVector) -> Result<Self> {
        if z.dim() < 2 {
            return Err(Error::ParameterRange {
                name: "bms output dimension",
                value: z.dim() as f64,
                min: 2.0,
                max: f64::INFINITY,
            });
        }
        let mut rev: Vec<f64> = z.as_slice().to_vec();
        rev.reverse();
        Self::from_columns(&[z.clone(), ProbVector::from_normalized(rev)])
    }

    /// Binary symmetric channel with crossover probability `delta`.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::ParameterRange {
                name: "delta",
                value: delta,
                min: 0.0,
                max: 1.0,
            });
        }
        let z = ProbVector::from_normalized(vec![1.0 - delta, delta]);
        Self::bms(&z)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn is_square(&self) -> bool {
        self.input_dim == self.output_dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[col * self.output_dim + row]
    }

    pub fn column_slice(&self, col: usize) -> &[f64] {
        &self.entries[col * self.output_dim..(col + 1) * self.output_dim]
    }

    pub fn column(&self, col: usize) -> ProbVector {
        ProbVector::from_normalized(self.column_slice(col).to_vec())
    }

    /// Output distribution `T p` as raw values; no allocation-free variant
    /// is needed at these sizes.
    pub(crate) fn apply(&self, p: &[f64]) -> Vec<f64> {
        let m = self.output_dim;
        let mut out = vec![0.0; m];
        for (c, &pc) in p.iter().enumerate() {
            if pc != 0.0 {
                let col = self.column_slice(c);
                for (o, &t) in out.iter_mut().zip(col) {
                    *o += pc * t;
                }
            }
        }
        out
    }

    /// Output distribution of the channel under input `p`.
    pub fn push_forward(&self, p: &ProbVector) -> Result<ProbVector> {
        if p.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "push_forward",
                expected: self.input_dim,
                found: p.dim(),
            });
        }
        Ok(ProbVector::from_normalized(self.apply(p.as_slice())))
    }

    /// `H(Y|X) = sum_i q_i H(column i)`.
    pub fn conditional_entropy(&self, q: &ProbVector, unit: EntropyUnit) -> Result<f64> {
        if q.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "conditional_entropy",
                expected: self.input_dim,
                found: q.dim(),
            });
        }
        let mut h = 0.0;
        for i in 0..self.input_dim {
            if q[i] > 0.0 {
                h += q[i] * entropy_bits_of(self.column_slice(i));
            }
        }
        Ok(unit.from_bits(h))
    }

    /// `I(X;Y) = H(Y) - H(Y|X)` under input distribution `q`.
    pub fn mutual_information(&self, q: &ProbVector, unit: EntropyUnit) -> Result<f64> {
        let hy = self.push_forward(q)?.entropy_bits();
        let hyx = self.conditional_entropy(q, EntropyUnit::Bits)?;
        Ok(unit.from_bits((hy - hyx).max(0.0)))
    }

    pub fn max_abs_diff(&self, other: &ChannelMatrix) -> f64 {
        assert_eq!(self.input_dim, other.input_dim);
        assert_eq!(self.output_dim, other.output_dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Parse the text format: first line `m n`, then `m` rows of `n`
    /// whitespace-separated decimals.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty channel file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad dimension {tok:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(Error::Parse(format!(
                "expected header \"m n\", got {header:?}"
            )));
        }
        let (m, n) = (dims[0], dims[1]);
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {r}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad entry {tok:?} in row {r}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        ChannelMatrix::new(rows)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{} {}\n", self.output_dim, self.input_dim);
        for r in 0..self.output_dim {
            let row: Vec<String> = (0..self.input_dim)
                .map(|c| format!("{}", self.entry(r, c)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use crate::test_util::random_simplex;

    const LOG2_3: f64 = 1.584962500721156;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_point_mass_uniform_coin() {
        assert_eq!(ProbVector::point_mass(3, 0).entropy_bits(), 0.0);
        assert!(close(ProbVector::uniform(3).entropy_bits(), LOG2_3, 1e-14));
        let coin = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert!(close(coin.entropy_bits(), 1.0, 1e-15));
    }

    #[test]
    fn entropy_bounds_and_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..6);
            let p = random_simplex(&mut rng, n);
            let h = p.entropy_bits();
            assert!(h >= 0.0 && h <= (n as f64).log2() + 1e-12);
            let mut shuffled: Vec<f64> = p.as_slice().to_vec();
            shuffled.shuffle(&mut rng);
            let hs = entropy_bits_of(&shuffled);
            assert!(close(h, hs, 1e-12), "entropy not permutation invariant");
        }
    }

    #[test]
    fn entropy_units() {
        let p = ProbVector::uniform(4);
        assert!(close(
            p.entropy(EntropyUnit::Nats),
            2.0 * std::f64::consts::LN_2,
            1e-15
        ));
    }

    #[test]
    fn push_forward_identity_and_hamming() {
        let p = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let id = ChannelMatrix::identity(3);
        assert!(id.push_forward(&p).unwrap().max_abs_diff(&p) < 1e-15);

        // alpha = 0 resamples uniformly regardless of the input
        let t0 = ChannelMatrix::hamming(3, 0.0).unwrap();
        let u = ProbVector::uniform(3);
        assert!(t0.push_forward(&p).unwrap().max_abs_diff(&u) < 1e-15);

        // direct arithmetic: 0.5 e_0 + 0.5 u_3
        let t = ChannelMatrix::hamming(3, 0.5).unwrap();
        let out = t.push_forward(&ProbVector::point_mass(3, 0)).unwrap();
        let expect = ProbVector::new(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn push_forward_dimension_mismatch() {
        let t = ChannelMatrix::identity(3);
        let p = ProbVector::uniform(2);
        assert!(matches!(
            t.push_forward(&p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conditional_entropy_examples() {
        let q = ProbVector::new(vec![0.3, 0.4, 0.3]).unwrap();
        let id = ChannelMatrix::identity(3);
        assert_eq!(id.conditional_entropy(&q, EntropyUnit::Bits).unwrap(), 0.0);

        // hamming(2, 0.5) is a BSC with crossover (1 - 0.5) / 2 = 0.25
        let t = ChannelMatrix::hamming(2, 0.5).unwrap();
        let u = ProbVector::uniform(2);
        let h = t.conditional_entropy(&u, EntropyUnit::Bits).unwrap();
        assert!(close(h, binary_entropy(0.25), 1e-14));
        assert!(close(h, 0.8112781244591328, 1e-12));

        // point-mass input reduces to a single column entropy
        let e1 = ProbVector::point_mass(3, 1);
        let t3 = ChannelMatrix::hamming(3, 0.3).unwrap();
        let expect = t3.column(1).entropy_bits();
        assert!(close(
            t3.conditional_entropy(&e1, EntropyUnit::Bits).unwrap(),
            expect,
            1e-15
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let q = ProbVector::new(vec![0.6, 0.1, 0.3]).unwrap();
        let id = ChannelMatrix::identity(3);
        assert!(close(
            id.mutual_information(&q, EntropyUnit::Bits).unwrap(),
            q.entropy_bits(),
            1e-14
        ));

        let t0 = ChannelMatrix::hamming(3, 0.0).unwrap();
        assert!(close(
            t0.mutual_information(&q, EntropyUnit::Bits).unwrap(),
            0.0,
            1e-14
        ));

        // hamming(2, 0.8) is a BSC with crossover 0.1
        let t = ChannelMatrix::hamming(2, 0.8).unwrap();
        let u = ProbVector::uniform(2);
        let i = t.mutual_information(&u, EntropyUnit::Bits).unwrap();
        assert!(close(i, 1.0 - binary_entropy(0.1), 1e-14));
        assert!(close(i, 0.5310044064107188, 1e-12));
    }

    #[test]
    fn mutual_information_upper_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = random_simplex(&mut rng, 3);
            let t = ChannelMatrix::circulant_from_noise(&z);
            let q = random_simplex(&mut rng, 3);
            let i = t.mutual_information(&q, EntropyUnit::Bits).unwrap();
            let hy = t.push_forward(&q).unwrap().entropy_bits();
            assert!(i >= -1e-12);
            assert!(i <= q.entropy_bits().min(hy) + 1e-12);
        }
    }

    #[test]
    fn circulant_construction() {
        let e0 = ProbVector::point_mass(4, 0);
        let t = ChannelMatrix::circulant_from_noise(&e0);
        assert!(t.max_abs_diff(&ChannelMatrix::identity(4)) < 1e-15);

        let u = ProbVector::uniform(3);
        let tu = ChannelMatrix::circulant_from_noise(&u);
        let t0 = ChannelMatrix::hamming(3, 0.0).unwrap();
        assert!(tu.max_abs_diff(&t0) < 1e-15);

        // column 0 is the noise vector itself, later columns are shifts
        let z = ProbVector::new(vec![0.85, 0.1, 0.05]).unwrap();
        let t = ChannelMatrix::circulant_from_noise(&z);
        assert!(t.column(0).max_abs_diff(&z) < 1e-15);
        assert!(close(t.entry(1, 0), 0.1, 1e-15));
        assert!(close(t.entry(1, 1), 0.85, 1e-15));
        assert!(close(t.entry(0, 1), 0.05, 1e-15));
        let tito = ChannelMatrix::tito(0.1, 0.05).unwrap();
        assert!(t.max_abs_diff(&tito) < 1e-15);
    }

    #[test]
    fn hamming_edge_cases() {
        let id = ChannelMatrix::hamming(4, 1.0).unwrap();
        assert!(id.max_abs_diff(&ChannelMatrix::identity(4)) < 1e-15);
        let t = ChannelMatrix::hamming(3, 0.5).unwrap();
        assert!(close(t.entry(0, 0), 2.0 / 3.0, 1e-15));
        assert!(close(t.entry(1, 0), 1.0 / 6.0, 1e-15));
        for c in 0..3 {
            let sum: f64 = t.column_slice(c).iter().sum();
            assert!(close(sum, 1.0, 1e-15));
        }
        assert!(ChannelMatrix::hamming(3, 1.5).is_err());
    }

    #[test]
    fn cyclic_convolution_examples() {
        let v = ProbVector::new(vec![0.8, 0.1, 0.1]).unwrap();
        let e0 = ProbVector::point_mass(3, 0);
        assert!(cyclic_convolve(&v, &e0).unwrap().max_abs_diff(&v) < 1e-15);

        let u = ProbVector::uniform(3);
        let z = ProbVector::new(vec![0.9, 0.05, 0.05]).unwrap();
        assert!(cyclic_convolve(&u, &z).unwrap().max_abs_diff(&u) < 1e-15);

        // frozen from the direct convolution sum:
        // out[j] = sum_i v[i] z[(j - i) mod 3]
        let out = cyclic_convolve(&v, &z).unwrap();
        let expect = ProbVector::new(vec![0.73, 0.135, 0.135]).unwrap();
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn cyclic_convolution_matches_circulant_push_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let n = rng.gen_range(2..6);
            let v = random_simplex(&mut rng, n);
            let z = random_simplex(&mut rng, n);
            let direct = cyclic_convolve(&v, &z).unwrap();
            let via_matrix = ChannelMatrix::circulant_from_noise(&z)
                .push_forward(&v)
                .unwrap();
            assert!(direct.max_abs_diff(&via_matrix) < 1e-14);
        }
    }

    #[test]
    fn doubly_stochastic_increases_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(2..5);
            let z = random_simplex(&mut rng, n);
            let t = ChannelMatrix::circulant_from_noise(&z);
            let p = random_simplex(&mut rng, n);
            let hp = p.entropy_bits();
            let htp = t.push_forward(&p).unwrap().entropy_bits();
            assert!(htp >= hp - 1e-12, "majorization violated: {htp} < {hp}");
        }
    }

    #[test]
    fn bms_examples() {
        let z = ProbVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let t = ChannelMatrix::bms(&z).unwrap();
        assert_eq!(t.output_dim(), 3);
        assert_eq!(t.input_dim(), 2);
        assert!(close(t.entry(0, 0), 0.7, 1e-15));
        assert!(close(t.entry(0, 1), 0.1, 1e-15));
        assert!(close(t.entry(1, 1), 0.2, 1e-15));
        assert!(close(t.entry(2, 1), 0.7, 1e-15));

        let bsc = ChannelMatrix::bsc(0.2).unwrap();
        assert!(close(bsc.entry(0, 0), 0.8, 1e-15));
        assert!(close(bsc.entry(1, 0), 0.2, 1e-15));
        assert!(close(bsc.entry(0, 1), 0.2, 1e-15));

        // uniform noise vector: both columns equal and capacity is zero
        let tu = ChannelMatrix::bms(&ProbVector::uniform(4)).unwrap();
        let i = tu
            .mutual_information(&ProbVector::uniform(2), EntropyUnit::Bits)
            .unwrap();
        assert!(close(i, 0.0, 1e-14));
    }

    #[test]
    fn normalization_policy() {
        // within 1e-9 of one: accepted and renormalized
        let p = ProbVector::new(vec![0.5, 0.5 + 4e-10]).unwrap();
        let sum: f64 = p.as_slice().iter().sum();
        assert!(close(sum, 1.0, 1e-15));
        // genuinely off: rejected
        assert!(matches!(
            ProbVector::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        // tiny negative round-off clamped
        let p = ProbVector::new(vec![1.0, -1e-13]).unwrap();
        assert_eq!(p[1], 0.0);
        assert!(matches!(
            ProbVector::new(vec![1.0, -1e-3]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn matrix_text_round_trip() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let text = t.render_text();
        let back = ChannelMatrix::parse_text(&text).unwrap();
        assert!(t.max_abs_diff(&back) < 1e-15);

        let bad = "2 2\n1.0 0.3\n0.0 0.3\n";
        match ChannelMatrix::parse_text(bad) {
            Err(Error::ColumnNotStochastic { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected column error, got {other:?}"),
        }
    }

    #[test]
    fn vector_text_round_trip() {
        let p = ProbVector::new(vec![0.25, 0.5, 0.25]).unwrap();
        let back = ProbVector::parse_text(&p.render_text()).unwrap();
        assert!(p.max_abs_diff(&back) < 1e-15);
    }
}
