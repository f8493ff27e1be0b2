//! Symmetry detection for stochastic matrices: all permutation pairs
//! `(G, Pi)` with `T G = Pi T`, the projections onto input and output
//! permutations, transitivity classification, and circulant recognition.

use crate::error::{Error, Result};
use crate::prob::{ChannelMatrix, ProbVector};
use serde::Serialize;

/// Hard cap for exhaustive enumeration of the input permutation group.
pub const MAX_ENUMERATION_DIM: usize = 8;
/// Default entrywise tolerance for `T G = Pi T`.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;
/// Cap on stored pairs; degenerate matrices with many duplicate rows can
/// otherwise make the group astronomically large.
const MAX_PAIRS: usize = 1_000_000;

/// A permutation of `{0, .., k-1}`, stored as the image map `i -> map[i]`.
///
/// As a matrix `G` acting on distributions, `(G p)[map[i]] = p[i]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Permutation {
            map: (0..k).collect(),
        }
    }

    /// Cyclic shift by `s`: symbol `i` maps to `(i + s) mod k`.
    pub fn cyclic_shift(k: usize, s: usize) -> Self {
        Permutation {
            map: (0..k).map(|i| (i + s) % k).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let k = map.len();
        let mut seen = vec![false; k];
        for &v in &map {
            if v >= k || seen[v] {
                return Err(Error::InvalidPermutation(map.clone()));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn image_of(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_map(&self) -> &[usize] {
        &self.map
    }

    /// `self` after `other`: `(self . other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len());
        Permutation {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// Apply to a distribution: mass at `i` moves to `map[i]`.
    pub fn apply_to_dist(&self, p: &ProbVector) -> ProbVector {
        assert_eq!(self.len(), p.dim());
        let mut out = vec![0.0; self.len()];
        for (i, &v) in self.map.iter().enumerate() {
            out[v] = p[i];
        }
        ProbVector::new(out).expect("permutation preserves the simplex")
    }

    /// Cycle notation, fixed points omitted; identity prints as `()`.
    pub fn cycle_notation(&self) -> String {
        let k = self.len();
        let mut seen = vec![false; k];
        let mut out = String::new();
        for start in 0..k {
            if seen[start] || self.map[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = self.map[start];
            while next != start {
                seen[next] = true;
                cycle.push(next);
                next = self.map[next];
            }
            out.push('(');
            out.push_str(
                &cycle
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    /// All permutations of `{0, .., k-1}` in lexicographic order of their maps.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (0..k).collect();
        let mut out = vec![Permutation {
            map: current.clone(),
        }];
        // lexicographic next-permutation loop
        loop {
            let Some(i) = (0..k.saturating_sub(1))
                .rev()
                .find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
            out.push(Permutation {
                map: current.clone(),
            });
        }
        out
    }
}

/// A pair `(G, Pi)` with `T G = Pi T` for the owning channel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SymmetryPair {
    pub input_perm: Permutation,
    pub output_perm: Permutation,
}

/// The full symmetry group of a channel together with its projections.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryGroup {
    pub pairs: Vec<SymmetryPair>,
    pub input_group: Vec<Permutation>,
    pub output_group: Vec<Permutation>,
    pub input_transitive: bool,
    pub output_transitive: bool,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    /// Input-symmetric means the input projection acts transitively.
    pub fn is_input_symmetric(&self) -> bool {
        self.input_transitive
    }

    pub fn is_output_symmetric(&self) -> bool {
        self.output_transitive
    }

    /// Orbit `{G p : G in input group}`, deduplicated within 1e-12 and
    /// sorted lexicographically.
    pub fn input_orbit(&self, p: &ProbVector) -> Result<Vec<ProbVector>> {
        let n = self.input_group.first().map(Permutation::len).unwrap_or(0);
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "input_orbit",
                expected: n,
                found: p.dim(),
            });
        }
        let mut orbit: Vec<ProbVector> = Vec::new();
        for g in &self.input_group {
            let gp = g.apply_to_dist(p);
            if !orbit.iter().any(|q| q.max_abs_diff(&gp) <= 1e-12) {
                orbit.push(gp);
            }
        }
        orbit.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap());
        Ok(orbit)
    }

    /// A small generating set of the pair group (greedy closure).
    pub fn generators(&self) -> Vec<SymmetryPair> {
        let mut gens: Vec<SymmetryPair> = Vec::new();
        let mut closure: Vec<SymmetryPair> = Vec::new();
        let identity = self
            .pairs
            .iter()
            .find(|p| p.input_perm.is_identity() && p.output_perm.is_identity())
            .cloned();
        if let Some(id) = identity {
            closure.push(id);
        }
        for pair in &self.pairs {
            if closure.contains(pair) {
                continue;
            }
            gens.push(pair.clone());
            closure = close_under_composition(&gens, self.pairs.len());
        }
        gens
    }
}

fn close_under_composition(gens: &[SymmetryPair], cap: usize) -> Vec<SymmetryPair> {
    let Some(first) = gens.first() else {
        return Vec::new();
    };
    let n = first.input_perm.len();
    let m = first.output_perm.len();
    let mut closure = vec![SymmetryPair {
        input_perm: Permutation::identity(n),
        output_perm: Permutation::identity(m),
    }];
    let mut frontier = closure.clone();
    while !frontier.is_empty() && closure.len() <= cap {
        let mut next = Vec::new();
        for f in &frontier {
            for g in gens {
                let cand = SymmetryPair {
                    input_perm: g.input_perm.compose(&f.input_perm),
                    output_perm: g.output_perm.compose(&f.output_perm),
                };
                if !closure.contains(&cand) {
                    closure.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    closure
}

fn is_transitive(perms: &[Permutation], k: usize) -> bool {
    if k == 0 {
        return false;
    }
    for i in 0..k {
        for j in 0..k {
            if !perms.iter().any(|g| g.image_of(i) == j) {
                return false;
            }
        }
    }
    true
}

/// Enumerate all `(G, Pi)` with `T G = Pi T` within `tol`. Exhaustive over
/// the input symmetric group, so the input dimension is capped at 8; use
/// the structured constructors (circulant, Hamming) above that.
pub fn find_symmetry_group(t: &ChannelMatrix, tol: f64) -> Result<SymmetryGroup> {
    let n = t.input_dim();
    let m = t.output_dim();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::ComplexityGuard {
            what: "symmetry group enumeration",
            limit: MAX_ENUMERATION_DIM,
            requested: n,
        });
    }

    let mut pairs: Vec<SymmetryPair> = Vec::new();
    for g in Permutation::all(n) {
        // TG has column j equal to column g(j) of T
        let tg_col = |j: usize| t.column_slice(g.image_of(j));

        // candidate output rows: row r of T can map to row s when
        // row_r(T) == row_s(TG) entrywise
        let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut feasible = true;
        for r in 0..m {
            let mut cand = Vec::new();
            's: for s in 0..m {
                for j in 0..n {
                    if (t.entry(r, j) - tg_col(j)[s]).abs() > tol {
                        continue 's;
                    }
                }
                cand.push(s);
            }
            if cand.is_empty() {
                feasible = false;
                break;
            }
            candidates.push(cand);
        }
        if !feasible {
            continue;
        }

        // enumerate all perfect matchings r -> s by backtracking
        let mut used = vec![false; m];
        let mut assign = vec![0usize; m];
        let overflow = enumerate_matchings(&candidates, 0, &mut used, &mut assign, &mut |assign| {
            // assign[r] = s means row r of T moves to row s under Pi
            let pi = Permutation::from_map(assign.to_vec()).expect("matching is a bijection");
            pairs.push(SymmetryPair {
                input_perm: g.clone(),
                output_perm: pi,
            });
            pairs.len() <= MAX_PAIRS
        });
        if overflow {
            return Err(Error::ComplexityGuard {
                what: "symmetry group size (duplicate rows make it degenerate)",
                limit: MAX_PAIRS,
                requested: MAX_PAIRS + 1,
            });
        }
    }

    pairs.sort();
    pairs.dedup();

    let mut input_group: Vec<Permutation> = pairs.iter().map(|p| p.input_perm.clone()).collect();
    input_group.sort();
    input_group.dedup();
    let mut output_group: Vec<Permutation> = pairs.iter().map(|p| p.output_perm.clone()).collect();
    output_group.sort();
    output_group.dedup();

    let input_transitive = is_transitive(&input_group, n);
    let output_transitive = is_transitive(&output_group, m);
    Ok(SymmetryGroup {
        pairs,
        input_group,
        output_group,
        input_transitive,
        output_transitive,
    })
}

/// Returns true on pair-count overflow.
fn enumerate_matchings(
    candidates: &[Vec<usize>],
    row: usize,
    used: &mut [bool],
    assign: &mut [usize],
    emit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if row == candidates.len() {
        return !emit(assign);
    }
    for &s in &candidates[row] {
        if !used[s] {
            used[s] = true;
            assign[row] = s;
            if enumerate_matchings(candidates, row + 1, used, assign, emit) {
                return true;
            }
            used[s] = false;
        }
    }
    false
}

/// If every column of square `T` is the cyclic shift of column 0, return
/// the generating noise vector (column 0).
pub fn is_circulant(t: &ChannelMatrix, tol: f64) -> Option<ProbVector> {
    if !t.is_square() {
        return None;
    }
    let n = t.input_dim();
    let z = t.column(0);
    for i in 0..n {
        for j in 0..n {
            if (t.entry(j, i) - z[(j + n - i) % n]).abs() > tol {
                return None;
            }
        }
    }
    Some(z)
}
