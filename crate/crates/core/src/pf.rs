//! Privacy funnel solver for input-symmetric channels with uniform input.
//!
//! The solver locates the touch point `(p*, lambda*)` where the non-uniform
//! maximizer of `phi(., lambda)` ties with the uniform distribution. Up to
//! the threshold `C* = log n - H(p*)` the optimal test channel mixes the
//! orbit of `p*` with one extra erasure symbol whose conditional law is
//! uniform, and the rate is linear in the disclosure constraint:
//! `R(C) = C (log n - H(T p*)) / (log n - H(p*))`.
//!
//! Beyond `C*` the optimal test channel stops being input symmetric and the
//! module refuses; callers fall back to the brute-force oracle there.

use crate::error::{Error, Result};
use crate::ib::{optimize_phi, phi_gradient, phi_raw, PhiGrid};
use crate::oracle::SolverConfig;
use crate::prob::{ChannelMatrix, ProbVector};
use crate::simplex::{grid_resolution_for, lex_less, projected_gradient_ascent, AscentOptions};
use crate::symmetry::{find_symmetry_group, is_circulant, Permutation, DEFAULT_SYMMETRY_TOL};
use serde::Serialize;

/// Indicator threshold deciding that the non-uniform branch has overtaken
/// the uniform one during the bisection for `lambda*`.
const TRANSITION_THRESHOLD: f64 = 1e-8;

/// The touch point of the privacy funnel construction.
#[derive(Debug, Clone, Serialize)]
pub struct TouchPoint {
    pub lambda_star: f64,
    pub p_star: ProbVector,
    /// `log n - H(p*)` in bits.
    pub c_star: f64,
    /// Noiseless channels never leave the uniform branch; they are reported
    /// with `C* = log n` and a vertex `p*`.
    pub degenerate: bool,
}

/// One point of the symmetric privacy funnel solution.
#[derive(Debug, Clone, Serialize)]
pub struct PfSolution {
    /// `n x (n+1)` test channel `P(X | W)`: the orbit of `p*` followed by
    /// the uniform erasure column.
    pub b_matrix: ChannelMatrix,
    /// Marginal of `W`: `((1-eps)/n, .., (1-eps)/n, eps)`.
    pub w_weights: ProbVector,
    pub epsilon: f64,
    pub c: f64,
    pub r: f64,
}

impl PfSolution {
    /// Bayes inversion `P(W | X)` under the uniform input marginal; the
    /// erasure symbol's row is constant across inputs.
    pub fn reverse_channel(&self) -> Result<ChannelMatrix> {
        let n = self.b_matrix.output_dim();
        let k = self.b_matrix.input_dim();
        let mut cols: Vec<ProbVector> = Vec::with_capacity(n);
        for x in 0..n {
            let mut col = vec![0.0; k];
            for (alpha, c) in col.iter_mut().enumerate() {
                *c = self.w_weights[alpha] * self.b_matrix.entry(x, alpha) * n as f64;
            }
            cols.push(ProbVector::new(col).map_err(|_| Error::NotUniformPreserving)?);
        }
        ChannelMatrix::from_columns(&cols)
    }
}

/// `W` never needs more than `n + 1` symbols for the privacy funnel.
pub fn pf_cardinality_bound(n: usize) -> usize {
    n + 1
}

/// A transitive input symmetry subgroup of order exactly `n`, identity
/// first. Circulant channels use the cyclic shifts directly; otherwise the
/// detected input group (or a cyclic subgroup of it) must act regularly.
pub fn regular_input_subgroup(t: &ChannelMatrix) -> Result<Vec<Permutation>> {
    let n = t.input_dim();
    if is_circulant(t, DEFAULT_SYMMETRY_TOL).is_some() {
        return Ok((0..n).map(|s| Permutation::cyclic_shift(n, s)).collect());
    }
    let group = find_symmetry_group(t, DEFAULT_SYMMETRY_TOL)?;
    if !group.is_input_symmetric() {
        return Err(Error::NotInputSymmetric);
    }
    if group.input_group.len() == n {
        return Ok(group.input_group);
    }
    // look for a single element generating a regular cyclic subgroup
    for g in &group.input_group {
        let mut powers = vec![Permutation::identity(n)];
        let mut current = g.clone();
        while !current.is_identity() && powers.len() <= n {
            powers.push(current.clone());
            current = g.compose(&current);
        }
        if powers.len() == n {
            let transitive = (0..n).all(|j| powers.iter().any(|p| p.image_of(0) == j));
            if transitive {
                return Ok(powers);
            }
        }
    }
    Err(Error::NoRegularInputSymmetry)
}

/// Locate the touch point by bisecting on the excess
/// `M(lambda) = max_p phi(p, lambda) - phi(u, lambda)`, which is zero up to
/// `lambda*` and positive afterwards. `p*` is extracted just above the
/// transition and polished at `lambda*` itself.
pub fn find_touch_point(t: &ChannelMatrix, cfg: &SolverConfig) -> Result<TouchPoint> {
    let n = t.input_dim();
    if !t.is_square() {
        return Err(Error::DimensionMismatch {
            context: "find_touch_point",
            expected: n,
            found: t.output_dim(),
        });
    }
    let shifts = regular_input_subgroup(t)?;
    let u = ProbVector::uniform(n);
    let tu = t.push_forward(&u)?;
    if tu.max_abs_diff(&ProbVector::uniform(t.output_dim())) > 1e-9 {
        return Err(Error::NotUniformPreserving);
    }
    let log_n = (n as f64).log2();

    let res = grid_resolution_for(n, cfg.grid_res);
    let grid = PhiGrid::new(t, res);
    let excess = |lambda: f64| -> (f64, ProbVector) {
        let s = optimize_phi(t, &grid, lambda, cfg, true);
        let phi_u = phi_raw(t, u.as_slice(), lambda);
        (s.value - phi_u, s.p)
    };

    let (m1, _) = excess(1.0);
    if m1 <= TRANSITION_THRESHOLD {
        return Ok(TouchPoint {
            lambda_star: 1.0,
            p_star: ProbVector::point_mass(n, 0),
            c_star: log_n,
            degenerate: true,
        });
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(mid).0 > TRANSITION_THRESHOLD {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda_star = hi;

    // the maximizer set at lambda* contains both u and the orbit of p*;
    // perturbing lambda selects the non-uniform branch, then polish back
    let (_, rough) = excess((lambda_star + 1e-6).min(1.0));
    let f = |p: &[f64]| phi_raw(t, p, lambda_star);
    let g = |p: &[f64]| phi_gradient(t, p, lambda_star);
    let (polished, _) = projected_gradient_ascent(
        &f,
        &g,
        rough.as_slice(),
        &AscentOptions {
            max_iters: cfg.max_iters,
            step_tolerance: cfg.step_tolerance,
        },
    );
    let mut p_star = ProbVector::from_normalized(polished);

    // canonical representative: lexicographically smallest orbit member
    for g in &shifts {
        let cand = g.apply_to_dist(&p_star);
        if lex_less(cand.as_slice(), p_star.as_slice()) {
            p_star = cand;
        }
    }

    Ok(TouchPoint {
        lambda_star,
        c_star: log_n - p_star.entropy_bits(),
        p_star,
        degenerate: false,
    })
}

/// Symmetric privacy funnel solver with the touch point computed once.
pub struct PfSymmetricSolver {
    orbit: Vec<ProbVector>,
    touch: TouchPoint,
    /// `(log n - H(T p*)) / C*`; also equals `lambda*` at the touch point.
    slope: f64,
    n: usize,
}

impl PfSymmetricSolver {
    pub fn new(t: &ChannelMatrix, cfg: &SolverConfig) -> Result<Self> {
        let shifts = regular_input_subgroup(t)?;
        let touch = find_touch_point(t, cfg)?;
        let orbit: Vec<ProbVector> = shifts
            .iter()
            .map(|g| g.apply_to_dist(&touch.p_star))
            .collect();
        let n = t.input_dim();
        let log_n = (n as f64).log2();
        let h_out = t.push_forward(&touch.p_star)?.entropy_bits();
        let slope = (log_n - h_out) / touch.c_star;
        Ok(PfSymmetricSolver {
            orbit,
            touch,
            slope,
            n,
        })
    }

    pub fn touch_point(&self) -> &TouchPoint {
        &self.touch
    }

    pub fn rate_slope(&self) -> f64 {
        self.slope
    }

    /// Evaluate the linear rate formula at `0 <= C <= C*`.
    pub fn value(&self, c: f64) -> Result<PfSolution> {
        if c < -1e-12 {
            return Err(Error::ParameterRange {
                name: "C",
                value: c,
                min: 0.0,
                max: self.touch.c_star,
            });
        }
        if c > self.touch.c_star + 1e-9 {
            return Err(Error::BeyondThreshold {
                c,
                c_star: self.touch.c_star,
            });
        }
        let c = c.clamp(0.0, self.touch.c_star);
        let epsilon = 1.0 - c / self.touch.c_star;
        let mut cols = self.orbit.clone();
        cols.push(ProbVector::uniform(self.n));
        let b_matrix = ChannelMatrix::from_columns(&cols)?;
        let mut w = vec![(1.0 - epsilon) / self.n as f64; self.n];
        w.push(epsilon);
        Ok(PfSolution {
            b_matrix,
            w_weights: ProbVector::from_normalized(w),
            epsilon,
            c,
            r: c * self.slope,
        })
    }
}

/// One-shot symmetric privacy funnel value; curve generation should reuse a
/// [`PfSymmetricSolver`] so the touch point is located only once.
pub fn pf_value(t: &ChannelMatrix, c: f64, cfg: &SolverConfig) -> Result<PfSolution> {
    PfSymmetricSolver::new(t, cfg)?.value(c)
}

/// Binary-input specialization: the touch point sits at a vertex, the test
/// channel is a binary erasure channel with `eps = 1 - C`, and the rate is
/// `C` times the input-output mutual information at uniform input.
pub fn bec_pf(t: &ChannelMatrix, c: f64) -> Result<PfSolution> {
    if t.input_dim() != 2 {
        return Err(Error::NotBms);
    }
    let m = t.output_dim();
    let z = t.column(0);
    let rev = t.column(1);
    for j in 0..m {
        if (z[j] - rev[m - 1 - j]).abs() > 1e-9 {
            return Err(Error::NotBms);
        }
    }
    if !(-1e-12..=1.0 + 1e-9).contains(&c) {
        return Err(Error::ParameterRange {
            name: "C",
            value: c,
            min: 0.0,
            max: 1.0,
        });
    }
    let c = c.clamp(0.0, 1.0);
    let u = ProbVector::uniform(2);
    let h_tu = t.push_forward(&u)?.entropy_bits();
    let epsilon = 1.0 - c;
    // canonical vertex: lexicographically smallest is (0, 1)
    let p_star = ProbVector::point_mass(2, 1);
    let orbit = vec![p_star.clone(), ProbVector::point_mass(2, 0)];
    let mut cols = orbit;
    cols.push(u);
    let b_matrix = ChannelMatrix::from_columns(&cols)?;
    let w = vec![(1.0 - epsilon) / 2.0, (1.0 - epsilon) / 2.0, epsilon];
    Ok(PfSolution {
        b_matrix,
        w_weights: ProbVector::from_normalized(w),
        epsilon,
        c,
        r: c * (h_tu - z.entropy_bits()),
    })
}
