//! Information bottleneck solver.
//!
//! The general small-alphabet path evaluates the conditional entropy bound
//! `F_T(q, x) = max { psi(q, lambda) + lambda x : 0 <= lambda <= 1 }`,
//! where `psi(., lambda)` is the lower convex envelope of the potential
//! `phi(p, lambda) = H(Tp) - lambda H(p)` over the simplex. The envelope is
//! evaluated by a small LP over a dense simplex grid: the optimal basis is
//! the hull facet containing the query point, and `max` over `lambda` is
//! found by golden section (the objective is concave in `lambda`, being an
//! infimum of affine functions).
//!
//! Circulant channels reduce to a one-dimensional noise-vector search, and
//! Hamming channels have a closed form.

use crate::error::{Error, Result};
use crate::lp;
use crate::oracle::SolverConfig;
use crate::prob::{entropy_bits_of, ChannelMatrix, EntropyUnit, ProbVector};
use crate::simplex::{
    self, fold_best_max, grid_resolution_for, projected_gradient_ascent, random_simplex_point,
    AscentOptions,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const LN_2: f64 = std::f64::consts::LN_2;
/// Envelope evaluation is hull-based and limited to small input alphabets.
pub const MAX_ENVELOPE_DIM: usize = 4;

/// How a rate value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolutionMethod {
    ClosedForm,
    Reduced,
    Envelope,
    Oracle,
}

impl SolutionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionMethod::ClosedForm => "closed_form",
            SolutionMethod::Reduced => "reduced",
            SolutionMethod::Envelope => "envelope",
            SolutionMethod::Oracle => "oracle",
        }
    }
}

/// A sampled value of the potential `phi`.
#[derive(Debug, Clone, Serialize)]
pub struct PhiSample {
    pub p: ProbVector,
    pub lambda: f64,
    pub value: f64,
}

/// One point of the information bottleneck curve.
#[derive(Debug, Clone, Serialize)]
pub struct IBSolution {
    /// Constraint on `I(W;X)` in bits.
    pub c: f64,
    /// Achieved `I(W;Y)` in bits.
    pub r: f64,
    pub method: SolutionMethod,
    /// For modulo-additive test channels: the noise `V` with `X = W + V`.
    pub noise_vector: Option<ProbVector>,
    /// For the envelope path: the decomposition columns `P(X | W = w)`.
    pub test_channel: Option<ChannelMatrix>,
}

/// Hamming-channel closed form: `v = beta e + (1 - beta) u`.
#[derive(Debug, Clone, Serialize)]
pub struct HammingSolution {
    pub alpha: f64,
    pub beta: f64,
    pub v: ProbVector,
    pub c: f64,
    pub r: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParameterRange {
            name: "lambda",
            value: lambda,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}

/// `phi(p, lambda) = H(Tp) - lambda H(p)` in bits.
pub fn phi(t: &ChannelMatrix, p: &ProbVector, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let out = t.push_forward(p)?;
    Ok(out.entropy_bits() - lambda * p.entropy_bits())
}

pub(crate) fn phi_raw(t: &ChannelMatrix, p: &[f64], lambda: f64) -> f64 {
    entropy_bits_of(&t.apply(p)) - lambda * entropy_bits_of(p)
}

/// Analytic gradient of `phi` in bits; entries of `p` are clamped away from
/// zero inside the logarithms only.
pub(crate) fn phi_gradient(t: &ChannelMatrix, p: &[f64], lambda: f64) -> Vec<f64> {
    let out = t.apply(p);
    let log_out: Vec<f64> = out.iter().map(|&y| y.max(1e-300).ln()).collect();
    let n = p.len();
    let mut grad = vec![0.0; n];
    for (k, g) in grad.iter_mut().enumerate() {
        let col = t.column_slice(k);
        let mut acc = 0.0;
        for (tjk, lj) in col.iter().zip(&log_out) {
            acc -= tjk * (lj + 1.0);
        }
        acc += lambda * (p[k].max(1e-300).ln() + 1.0);
        *g = acc / LN_2;
    }
    grad
}

/// Precomputed entropies over a simplex grid, shared by sweeps over lambda.
pub(crate) struct PhiGrid {
    pub points: Vec<Vec<f64>>,
    pub h_in: Vec<f64>,
    pub h_out: Vec<f64>,
    /// Indices of the simplex vertices inside `points`.
    pub vertex_indices: Vec<usize>,
}

impl PhiGrid {
    pub fn new(t: &ChannelMatrix, res: usize) -> Self {
        let n = t.input_dim();
        let points = simplex::simplex_grid(n, res);
        let mut h_in = Vec::with_capacity(points.len());
        let mut h_out = Vec::with_capacity(points.len());
        let mut vertex_indices = vec![0; n];
        for (i, p) in points.iter().enumerate() {
            h_in.push(entropy_bits_of(p));
            h_out.push(entropy_bits_of(&t.apply(p)));
            if let Some(k) = p.iter().position(|&v| v == 1.0) {
                vertex_indices[k] = i;
            }
        }
        PhiGrid {
            points,
            h_in,
            h_out,
            vertex_indices,
        }
    }

    pub fn phi_values(&self, lambda: f64) -> impl Iterator<Item = f64> + '_ {
        self.h_out
            .iter()
            .zip(&self.h_in)
            .map(move |(o, i)| o - lambda * i)
    }

    fn best(&self, lambda: f64, maximize: bool) -> (usize, f64) {
        let mut best_i = 0;
        let mut best_v = if maximize {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        for (i, v) in self.phi_values(lambda).enumerate() {
            if (maximize && v > best_v) || (!maximize && v < best_v) {
                best_v = v;
                best_i = i;
            }
        }
        (best_i, best_v)
    }
}

/// Shared multistart optimizer for `phi(., lambda)`; `maximize` flips signs.
pub(crate) fn optimize_phi(
    t: &ChannelMatrix,
    grid: &PhiGrid,
    lambda: f64,
    cfg: &SolverConfig,
    maximize: bool,
) -> PhiSample {
    let n = t.input_dim();
    let sign = if maximize { 1.0 } else { -1.0 };
    let f = |p: &[f64]| sign * phi_raw(t, p, lambda);
    let g = |p: &[f64]| {
        let mut gr = phi_gradient(t, p, lambda);
        gr.iter_mut().for_each(|v| *v *= sign);
        gr
    };
    let opts = AscentOptions {
        max_iters: cfg.max_iters,
        step_tolerance: cfg.step_tolerance,
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let (grid_best, _) = grid.best(lambda, maximize);
    starts.push(grid.points[grid_best].clone());
    starts.push(vec![1.0 / n as f64; n]);
    for &vi in &grid.vertex_indices {
        starts.push(grid.points[vi].clone());
    }
    for i in 0..cfg.restarts {
        let seed = simplex::derive_seed(cfg.seed, lambda.to_bits(), i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.push(random_simplex_point(&mut rng, n));
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (x, v) = projected_gradient_ascent(&f, &g, start, &opts);
        best = fold_best_max(best, (x, v));
    }
    let (p, v) = best.expect("at least one start");
    PhiSample {
        p: ProbVector::from_normalized(p),
        lambda,
        value: sign * v,
    }
}

/// Global minimum of `phi(., lambda)` over the simplex by a deterministic
/// grid sweep plus seeded multistart projected gradient descent. Ties are
/// broken toward the lexicographically smallest minimizer.
pub fn minimize_phi(t: &ChannelMatrix, lambda: f64, cfg: &SolverConfig) -> Result<PhiSample> {
    check_lambda(lambda)?;
    let res = grid_resolution_for(t.input_dim(), cfg.grid_res);
    let grid = PhiGrid::new(t, res);
    Ok(optimize_phi(t, &grid, lambda, cfg, false))
}

/// Global maximum of `phi(., lambda)`; used by the privacy funnel path.
pub fn maximize_phi(t: &ChannelMatrix, lambda: f64, cfg: &SolverConfig) -> Result<PhiSample> {
    check_lambda(lambda)?;
    let res = grid_resolution_for(t.input_dim(), cfg.grid_res);
    let grid = PhiGrid::new(t, res);
    Ok(optimize_phi(t, &grid, lambda, cfg, true))
}

/// Lower convex envelope value together with the achieving facet.
#[derive(Debug, Clone)]
pub struct EnvelopeValue {
    pub value: f64,
    /// Decomposition `q = sum w_a p_a` on the facet, as `(w_a, p_a)` pairs.
    pub support: Vec<(f64, ProbVector)>,
}

/// Envelope evaluator over a fixed channel and grid resolution. The LP
/// columns are the grid points plus the query point itself, so evaluation
/// at a grid point (and at `lambda` in {0, 1}) is exact.
pub struct EnvelopeGraph {
    t: ChannelMatrix,
    lambda: f64,
    grid: PhiGrid,
    columns: Vec<f64>,
    warm_basis: Option<Vec<usize>>,
}

/// Build the envelope evaluator for `phi(., lambda)`.
pub fn lower_convex_envelope(
    t: &ChannelMatrix,
    lambda: f64,
    grid_res: usize,
) -> Result<EnvelopeGraph> {
    check_lambda(lambda)?;
    EnvelopeGraph::new(t, lambda, grid_res)
}

impl EnvelopeGraph {
    fn new(t: &ChannelMatrix, lambda: f64, grid_res: usize) -> Result<Self> {
        let n = t.input_dim();
        if n > MAX_ENVELOPE_DIM {
            return Err(Error::ComplexityGuard {
                what: "lower convex envelope",
                limit: MAX_ENVELOPE_DIM,
                requested: n,
            });
        }
        if grid_res < 50 {
            return Err(Error::ParameterRange {
                name: "grid_res",
                value: grid_res as f64,
                min: 50.0,
                max: f64::INFINITY,
            });
        }
        let res = grid_resolution_for(n, grid_res);
        let grid = PhiGrid::new(t, res);
        let mut columns = Vec::with_capacity(n * (grid.points.len() + 1));
        for p in &grid.points {
            columns.extend_from_slice(p);
        }
        // slot for the query column, patched per evaluation
        columns.extend(std::iter::repeat_n(0.0, n));
        Ok(EnvelopeGraph {
            t: t.clone(),
            lambda,
            grid,
            columns,
            warm_basis: None,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid_len(&self) -> usize {
        self.grid.points.len()
    }

    /// `phi` at grid point `i`.
    pub fn sample(&self, i: usize) -> PhiSample {
        PhiSample {
            p: ProbVector::from_normalized(self.grid.points[i].clone()),
            lambda: self.lambda,
            value: self.grid.h_out[i] - self.lambda * self.grid.h_in[i],
        }
    }

    /// Evaluate `psi(q, lambda)`, optionally offering extra support points
    /// to the hull (the query point is always offered).
    pub fn evaluate_augmented(
        &mut self,
        q: &ProbVector,
        extra: &[ProbVector],
    ) -> Result<EnvelopeValue> {
        let lambda = self.lambda;
        evaluate_envelope(
            &self.t,
            &self.grid,
            &mut self.columns,
            &mut self.warm_basis,
            q,
            lambda,
            extra,
        )
    }

    /// Evaluate `psi(q, lambda)` at the fixed `lambda` of this graph.
    pub fn evaluate(&mut self, q: &ProbVector) -> Result<EnvelopeValue> {
        self.evaluate_augmented(q, &[])
    }
}

#[allow(clippy::too_many_arguments)]
fn evaluate_envelope(
    t: &ChannelMatrix,
    grid: &PhiGrid,
    columns: &mut Vec<f64>,
    warm_basis: &mut Option<Vec<usize>>,
    q: &ProbVector,
    lambda: f64,
    extra: &[ProbVector],
) -> Result<EnvelopeValue> {
    let n = t.input_dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "envelope evaluation",
            expected: n,
            found: q.dim(),
        });
    }
    let n_grid = grid.points.len();
    // patch the query column and append any extra support columns
    columns.truncate(n * (n_grid + 1));
    columns[n * n_grid..].copy_from_slice(q.as_slice());
    for p in extra {
        columns.extend_from_slice(p.as_slice());
    }
    let n_cols = n_grid + 1 + extra.len();

    let mut costs = Vec::with_capacity(n_cols);
    costs.extend(grid.phi_values(lambda));
    costs.push(phi_raw(t, q.as_slice(), lambda));
    for p in extra {
        costs.push(phi_raw(t, p.as_slice(), lambda));
    }

    let warm: Option<Vec<usize>> = match warm_basis {
        Some(b) if b.iter().all(|&j| j < n_cols) => Some(b.clone()),
        _ => Some(grid.vertex_indices.clone()),
    };
    let sol = lp::solve_min(n, columns, &costs, q.as_slice(), warm.as_deref());
    if !sol.feasible {
        // cannot happen: the vertices are always in the grid
        return Err(Error::Parse(format!(
            "envelope LP infeasible (residual {})",
            sol.infeasibility
        )));
    }
    *warm_basis = Some(sol.basis.clone());

    let mut support = Vec::new();
    for (&j, &w) in sol.basis.iter().zip(&sol.weights) {
        if w > 1e-12 {
            let p = if j < n_grid {
                ProbVector::from_normalized(grid.points[j].clone())
            } else if j == n_grid {
                q.clone()
            } else {
                extra[j - n_grid - 1].clone()
            };
            support.push((w, p));
        }
    }
    Ok(EnvelopeValue {
        value: sol.objective,
        support,
    })
}

fn check_constraint(name: &'static str, value: f64, max: f64) -> Result<f64> {
    // absorb round-off at the ends of the range
    if value < -1e-12 || value > max + 1e-9 {
        return Err(Error::ParameterRange {
            name,
            value,
            min: 0.0,
            max,
        });
    }
    Ok(value.clamp(0.0, max))
}

/// The conditional entropy bound `F_T(q, x)` with achieving decomposition.
pub(crate) struct CebOutcome {
    pub value: f64,
    pub lambda: f64,
    pub support: Vec<(f64, ProbVector)>,
}

pub(crate) fn ceb_with_witness(
    t: &ChannelMatrix,
    q: &ProbVector,
    x: f64,
    cfg: &SolverConfig,
) -> Result<CebOutcome> {
    let hq = q.entropy_bits();
    let x = check_constraint("x", x, hq)?;
    let n = t.input_dim();
    if n > MAX_ENVELOPE_DIM {
        return Err(Error::ComplexityGuard {
            what: "conditional entropy bound via envelope",
            limit: MAX_ENVELOPE_DIM,
            requested: n,
        });
    }
    let mut graph = EnvelopeGraph::new(t, 0.0, cfg.grid_res.max(50))?;

    // exact endpoint candidates:
    // at lambda = 0 the potential is concave, so the envelope is the affine
    // interpolation over the vertices: psi(q, 0) = H(Y|X);
    // at lambda = 1 data processing makes phi its own envelope.
    let hyx = t.conditional_entropy(q, EntropyUnit::Bits)?;
    let vertex_support: Vec<(f64, ProbVector)> = (0..n)
        .filter(|&i| q[i] > 1e-12)
        .map(|i| (q[i], ProbVector::point_mass(n, i)))
        .collect();
    let mut best = CebOutcome {
        value: hyx,
        lambda: 0.0,
        support: vertex_support,
    };
    let phi_q1 = phi_raw(t, q.as_slice(), 1.0);
    if phi_q1 + x > best.value {
        best = CebOutcome {
            value: phi_q1 + x,
            lambda: 1.0,
            support: vec![(1.0, q.clone())],
        };
    }

    // interior maximum by golden section on a concave objective
    let eval = |lambda: f64, graph: &mut EnvelopeGraph| -> Result<(f64, EnvelopeValue)> {
        graph.lambda = lambda;
        let ev = graph.evaluate(q)?;
        Ok((ev.value + lambda * x, ev))
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, ev1) = eval(x1, &mut graph)?;
    if f1 > best.value {
        best = CebOutcome {
            value: f1,
            lambda: x1,
            support: ev1.support,
        };
    }
    let (mut f2, ev2) = eval(x2, &mut graph)?;
    if f2 > best.value {
        best = CebOutcome {
            value: f2,
            lambda: x2,
            support: ev2.support,
        };
    }
    while (b - a) > 1e-10 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            let (f, ev) = eval(x2, &mut graph)?;
            f2 = f;
            if f > best.value {
                best = CebOutcome {
                    value: f,
                    lambda: x2,
                    support: ev.support,
                };
            }
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            let (f, ev) = eval(x1, &mut graph)?;
            f1 = f;
            if f > best.value {
                best = CebOutcome {
                    value: f,
                    lambda: x1,
                    support: ev.support,
                };
            }
        }
    }
    Ok(best)
}

/// `F_T(q, x)`: minimal `H(Y|W)` over test channels with `H(X|W) >= x`.
pub fn ceb_value(t: &ChannelMatrix, q: &ProbVector, x: f64, cfg: &SolverConfig) -> Result<f64> {
    Ok(ceb_with_witness(t, q, x, cfg)?.value)
}

/// `R_T(q, C)`: maximal `I(W;Y)` over test channels with `I(W;X) <= C`,
/// via the complement identity with the conditional entropy bound.
pub fn ib_value(
    t: &ChannelMatrix,
    q: &ProbVector,
    c: f64,
    cfg: &SolverConfig,
) -> Result<IBSolution> {
    let hq = q.entropy_bits();
    let c = check_constraint("C", c, hq)?;
    let outcome = ceb_with_witness(t, q, hq - c, cfg)?;
    let hy = t.push_forward(q)?.entropy_bits();
    let r = (hy - outcome.value).max(0.0);
    let cols: Vec<ProbVector> = outcome.support.iter().map(|(_, p)| p.clone()).collect();
    let test_channel = if cols.is_empty() {
        None
    } else {
        Some(ChannelMatrix::from_columns(&cols)?)
    };
    Ok(IBSolution {
        c,
        r,
        method: SolutionMethod::Envelope,
        noise_vector: None,
        test_channel,
    })
}

/// `g_n(beta) = log n - H(beta e + (1 - beta) u)` in bits: the constraint
/// value produced by the Hamming noise family. Monotone from 0 to `log n`.
pub fn g_n(n: usize, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::ParameterRange {
            name: "beta",
            value: beta,
            min: 0.0,
            max: 1.0,
        });
    }
    assert!(n >= 1);
    let nf = n as f64;
    let t1 = if beta < 1.0 {
        (nf - 1.0) / nf * (1.0 - beta) * (1.0 - beta).log2()
    } else {
        0.0
    };
    let arg = beta * nf + 1.0 - beta;
    Ok(t1 + arg / nf * arg.log2())
}

/// Inverse of `g_n` on `[0, log n]` by bisection.
pub fn invert_g_n(n: usize, c: f64) -> Result<f64> {
    let log_n = (n as f64).log2();
    let c = check_constraint("C", c, log_n)?;
    if c <= 0.0 {
        return Ok(0.0);
    }
    if c >= log_n {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g_n(n, mid)? < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form information bottleneck for the Hamming channel with uniform
/// input: the optimal test channel is itself Hamming with parameter
/// `beta = g_n^{-1}(C)`, and the rate composes to `R = g_n(alpha beta)`.
pub fn hamming_ib(n: usize, alpha: f64, c: f64) -> Result<HammingSolution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ParameterRange {
            name: "alpha",
            value: alpha,
            min: 0.0,
            max: 1.0,
        });
    }
    let beta = invert_g_n(n, c)?;
    let mut v = vec![(1.0 - beta) / n as f64; n];
    v[0] += beta;
    Ok(HammingSolution {
        alpha,
        beta,
        v: ProbVector::from_normalized(v),
        c,
        r: g_n(n, alpha * beta)?,
    })
}

impl HammingSolution {
    pub fn into_ib_solution(self) -> IBSolution {
        IBSolution {
            c: self.c,
            r: self.r,
            method: SolutionMethod::ClosedForm,
            noise_vector: Some(self.v),
            test_channel: None,
        }
    }
}

/// Information bottleneck for a circulant (modulo-additive) channel with
/// uniform input, reduced to a search over noise vectors `v`:
/// maximize `log n - H(v * z)` subject to `H(v) >= log n - C`.
///
/// A Lagrangian sweep over 200 values of `lambda` traces boundary points
/// `(H(v), H(Tv))`; the lower convex hull of the trace bridges plateaus
/// where the Lagrangian jumps, and a bisection on `lambda` supplies a
/// witness `v` whose entropy matches the constraint wherever the
/// single-vector frontier is convex. Across a plateau no single traced
/// vector matches the constraint exactly; the returned witness is then the
/// best feasible one while `r` carries the hull value.
pub fn reduced_ib(z: &ProbVector, c: f64, cfg: &SolverConfig) -> Result<IBSolution> {
    let n = z.dim();
    let log_n = (n as f64).log2();
    let c = check_constraint("C", c, log_n)?;
    let t = ChannelMatrix::circulant_from_noise(z);
    let res = grid_resolution_for(n, cfg.grid_res);
    let grid = PhiGrid::new(&t, res);
    let sweep_cfg = SolverConfig {
        restarts: cfg.restarts.min(8),
        ..cfg.clone()
    };

    let minimize = |lambda: f64| optimize_phi(&t, &grid, lambda, &sweep_cfg, false);

    // trace (H(v), H(Tv)) along the Lagrangian path
    let mut trace: Vec<(f64, f64, ProbVector)> = Vec::new();
    trace.push((
        0.0,
        t.column(0).entropy_bits(),
        ProbVector::point_mass(n, 0),
    ));
    trace.push((log_n, log_n, ProbVector::uniform(n)));
    let sweeps = 200;
    for i in 0..=sweeps {
        let lambda = i as f64 / sweeps as f64;
        let s = minimize(lambda);
        let hv = s.p.entropy_bits();
        let htv = s.value + lambda * hv;
        trace.push((hv, htv, s.p));
    }

    let x0 = log_n - c;

    // witness with entropy matching the constraint: H(v(lambda)) is
    // nondecreasing in lambda, so bisect
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let s = minimize(mid);
        let hv = s.p.entropy_bits();
        trace.push((hv, s.value + mid * hv, s.p));
        if hv < x0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // lower convex hull of the traced pairs, evaluated at x0
    let mut pts: Vec<(f64, f64)> = trace.iter().map(|(x, y, _)| (*x, *y)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or above segment a-p
            if (b.1 - a.1) * (p.0 - a.0) >= (p.1 - a.1) * (b.0 - a.0) - 1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let f_hull = interpolate_hull(&hull, x0);

    // best single feasible traced point
    let witness = trace
        .iter()
        .filter(|(hv, _, _)| *hv >= x0 - 1e-9)
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("uniform endpoint is always feasible");

    let f_best = f_hull.min(witness.1);
    Ok(IBSolution {
        c,
        r: (log_n - f_best).max(0.0),
        method: SolutionMethod::Reduced,
        noise_vector: Some(witness.2.clone()),
        test_channel: None,
    })
}

fn interpolate_hull(hull: &[(f64, f64)], x: f64) -> f64 {
    debug_assert!(!hull.is_empty());
    if x <= hull[0].0 {
        return hull[0].1;
    }
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x <= x1 {
            if x1 - x0 < 1e-15 {
                return y0.min(y1);
            }
            let t = (x - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    hull.last().unwrap().1
}

/// Witness that `(q, C)` lies in the representable set of an
/// input-symmetric channel: a mixing weight vector over the orbit of the
/// minimizer `p*` at some `lambda`, with `C = log n - H(p*)`.
#[derive(Debug, Clone, Serialize)]
pub struct SetQWitness {
    pub lambda: f64,
    pub p_star: ProbVector,
    pub orbit: Vec<ProbVector>,
    pub weights: Vec<f64>,
    pub c_of_lambda: f64,
}

/// Scan `lambda_grid` for a minimizer whose orbit can mix to `q` while the
/// constraint matches `C = log n - H(p*)` within `c_tol`.
pub fn set_q_contains(
    t: &ChannelMatrix,
    q: &ProbVector,
    c: f64,
    lambda_grid: &[f64],
    c_tol: f64,
    cfg: &SolverConfig,
) -> Result<Option<SetQWitness>> {
    let n = t.input_dim();
    let shifts = crate::pf::regular_input_subgroup(t)?;
    let res = grid_resolution_for(n, cfg.grid_res);
    let grid = PhiGrid::new(t, res);
    let log_n = (n as f64).log2();

    for &lambda in lambda_grid {
        check_lambda(lambda)?;
        let s = optimize_phi(t, &grid, lambda, cfg, false);
        let c_of_lambda = log_n - s.p.entropy_bits();
        if (c_of_lambda - c).abs() > c_tol {
            continue;
        }
        let orbit: Vec<ProbVector> = shifts.iter().map(|g| g.apply_to_dist(&s.p)).collect();
        let mut columns = Vec::with_capacity(n * orbit.len());
        for p in &orbit {
            columns.extend_from_slice(p.as_slice());
        }
        let costs = vec![0.0; orbit.len()];
        let sol = lp::solve_min(n, &columns, &costs, q.as_slice(), None);
        if !sol.feasible {
            continue;
        }
        let mut weights = vec![0.0; orbit.len()];
        for (&j, &w) in sol.basis.iter().zip(&sol.weights) {
            weights[j] = w.max(0.0);
        }
        // validate the mixture numerically before claiming a witness
        let mut mix = vec![0.0; n];
        for (w, p) in weights.iter().zip(&orbit) {
            for (m, v) in mix.iter_mut().zip(p.as_slice()) {
                *m += w * v;
            }
        }
        let err = mix
            .iter()
            .zip(q.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err <= 1e-8 {
            return Ok(Some(SetQWitness {
                lambda,
                p_star: s.p,
                orbit,
                weights,
                c_of_lambda,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_channel, random_simplex};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LOG2_3: f64 = 1.584962500721156;

    fn fast_cfg() -> SolverConfig {
        SolverConfig {
            restarts: 8,
            grid_res: 120,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn phi_examples() {
        let t = ChannelMatrix::hamming(2, 0.5).unwrap();
        let u = ProbVector::uniform(2);
        assert!((phi(&t, &u, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi(&t, &u, 0.5).unwrap() - 0.5).abs() < 1e-15);

        let id = ChannelMatrix::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_simplex(&mut rng, 3);
            assert!(phi(&id, &p, 1.0).unwrap().abs() < 1e-12);
        }
        assert!(phi(&t, &u, 1.5).is_err());
    }

    #[test]
    fn phi_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_channel(&mut rng, 3, 3);
        for _ in 0..20 {
            // interior point, away from the log singularities
            let mut p = random_simplex(&mut rng, 3).as_slice().to_vec();
            p.iter_mut().for_each(|v| *v = 0.1 + 0.8 * *v);
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            let lambda = rng.gen::<f64>();
            let g = phi_gradient(&t, &p, lambda);
            for k in 0..3 {
                let h = 1e-6;
                let mut pp = p.clone();
                pp[k] += h;
                let mut pm = p.clone();
                pm[k] -= h;
                let fd = (phi_raw(&t, &pp, lambda) - phi_raw(&t, &pm, lambda)) / (2.0 * h);
                let rel = (g[k] - fd).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-4, "gradient mismatch: {} vs {}", g[k], fd);
            }
        }
    }

    #[test]
    fn minimize_phi_at_zero_is_a_vertex() {
        let t = ChannelMatrix::tito(0.15, 0.05).unwrap();
        let s = minimize_phi(&t, 0.0, &fast_cfg()).unwrap();
        // phi(., 0) = H(Tp) is concave, minimized at a vertex, where the
        // output entropy is the noise entropy
        assert!(s.p.entropy_bits() < 1e-9);
        let expect = t.column(0).entropy_bits();
        assert!((s.value - expect).abs() < 1e-9);
    }

    #[test]
    fn minimize_phi_identity_channel() {
        let id = ChannelMatrix::identity(3);
        let s = minimize_phi(&id, 0.5, &fast_cfg()).unwrap();
        assert!(s.value.abs() < 1e-10);
        assert!(s.p.entropy_bits() < 1e-8);
    }

    #[test]
    fn minimize_phi_matches_dense_grid_oracle() {
        let t = ChannelMatrix::hamming(3, 0.5).unwrap();
        let lambda = 0.5;
        let s = minimize_phi(&t, lambda, &fast_cfg()).unwrap();
        // independent dense sweep at resolution 400
        let mut best = f64::INFINITY;
        for p in crate::simplex::simplex_grid(3, 400) {
            best = best.min(phi_raw(&t, &p, lambda));
        }
        assert!(s.value <= best + 1e-9, "{} > {}", s.value, best);
        assert!((s.value - best).abs() < 5e-5);
    }

    #[test]
    fn envelope_is_below_phi_and_exact_on_grid_points() {
        let t = ChannelMatrix::tito(0.2, 0.1).unwrap();
        let mut graph = lower_convex_envelope(&t, 0.6, 60).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let q = random_simplex(&mut rng, 3);
            let ev = graph.evaluate(&q).unwrap();
            let direct = phi_raw(&t, q.as_slice(), 0.6);
            assert!(ev.value <= direct + 1e-10);
            let mix: f64 = ev.support.iter().map(|(w, _)| w).sum();
            assert!((mix - 1.0).abs() < 1e-8);
        }
        // identity channel at lambda = 1: phi is identically zero
        let id = ChannelMatrix::identity(3);
        let mut graph = lower_convex_envelope(&id, 1.0, 60).unwrap();
        let q = ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(graph.evaluate(&q).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn envelope_is_convex_along_segments() {
        let t = ChannelMatrix::tito(0.2, 0.05).unwrap();
        let mut graph = lower_convex_envelope(&t, 0.5, 80).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = random_simplex(&mut rng, 3);
            let b = random_simplex(&mut rng, 3);
            let mut vals = Vec::new();
            for k in 0..=4 {
                let s = k as f64 / 4.0;
                let mix: Vec<f64> = a
                    .as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| (1.0 - s) * x + s * y)
                    .collect();
                let q = ProbVector::from_normalized(mix);
                vals.push(graph.evaluate(&q).unwrap().value);
            }
            for w in vals.windows(3) {
                assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-7, "not convex: {vals:?}");
            }
        }
    }

    #[test]
    fn envelope_guard() {
        let t = ChannelMatrix::identity(5);
        assert!(matches!(
            lower_convex_envelope(&t, 0.5, 100),
            Err(Error::ComplexityGuard { .. })
        ));
        let t = ChannelMatrix::identity(3);
        assert!(lower_convex_envelope(&t, 0.5, 10).is_err());
    }

    #[test]
    fn envelope_touches_minimum_on_orbit_mixtures() {
        // psi(sum w_a G_a p*, lambda) = phi(p*, lambda) when p* minimizes
        let t = ChannelMatrix::hamming(3, 0.5).unwrap();
        let cfg = fast_cfg();
        let lambda = 0.8;
        let s = minimize_phi(&t, lambda, &cfg).unwrap();
        assert!(
            s.p.entropy_bits() > 0.2,
            "need an interior minimizer for this lambda"
        );
        let orbit: Vec<ProbVector> = (0..3)
            .map(|k| crate::symmetry::Permutation::cyclic_shift(3, k).apply_to_dist(&s.p))
            .collect();
        let mut graph = lower_convex_envelope(&t, lambda, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let w = random_simplex(&mut rng, 3);
            let mut mix = vec![0.0; 3];
            for (wi, p) in w.as_slice().iter().zip(&orbit) {
                for (m, v) in mix.iter_mut().zip(p.as_slice()) {
                    *m += wi * v;
                }
            }
            let q = ProbVector::from_normalized(mix);
            let ev = graph.evaluate_augmented(&q, &orbit).unwrap();
            assert!(
                (ev.value - s.value).abs() < 1e-8,
                "psi = {}, phi(p*) = {}",
                ev.value,
                s.value
            );
        }
    }

    #[test]
    fn ceb_witness_decomposes_the_input() {
        let t = ChannelMatrix::tito(0.2, 0.1).unwrap();
        let q = ProbVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let cfg = fast_cfg();
        for x in [0.0, 0.4 * q.entropy_bits(), q.entropy_bits()] {
            let w = ceb_with_witness(&t, &q, x, &cfg).unwrap();
            assert!((0.0..=1.0).contains(&w.lambda));
            let mut mix = vec![0.0; 3];
            for (wt, p) in &w.support {
                for (m, v) in mix.iter_mut().zip(p.as_slice()) {
                    *m += wt * v;
                }
            }
            for (m, v) in mix.iter().zip(q.as_slice()) {
                assert!((m - v).abs() < 1e-8, "support does not mix to q");
            }
        }
        // at x = 0 the decomposition is over vertices
        let w0 = ceb_with_witness(&t, &q, 0.0, &cfg).unwrap();
        assert_eq!(w0.lambda, 0.0);
        assert!(w0.support.iter().all(|(_, p)| p.entropy_bits() < 1e-12));
    }

    #[test]
    fn ceb_endpoints_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = fast_cfg();
        for _ in 0..5 {
            let t = random_channel(&mut rng, 3, 3);
            let q = random_simplex(&mut rng, 3);
            let hyx = t.conditional_entropy(&q, EntropyUnit::Bits).unwrap();
            let hy = t.push_forward(&q).unwrap().entropy_bits();
            let f0 = ceb_value(&t, &q, 0.0, &cfg).unwrap();
            let f1 = ceb_value(&t, &q, q.entropy_bits(), &cfg).unwrap();
            assert!((f0 - hyx).abs() < 1e-9, "F(q,0): {f0} vs {hyx}");
            assert!((f1 - hy).abs() < 1e-9, "F(q,H): {f1} vs {hy}");
        }
    }

    #[test]
    fn ib_value_endpoints_and_shape() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast_cfg();
        let at_zero = ib_value(&t, &u, 0.0, &cfg).unwrap();
        assert!(at_zero.r.abs() < 1e-9);
        let ixy = t.mutual_information(&u, EntropyUnit::Bits).unwrap();
        let at_max = ib_value(&t, &u, u.entropy_bits(), &cfg).unwrap();
        assert!((at_max.r - ixy).abs() < 1e-9);

        // monotone nondecreasing and concave in C, bounded by min(C, I)
        let mut rs = Vec::new();
        for k in 0..=8 {
            let c = LOG2_3 * k as f64 / 8.0;
            let sol = ib_value(&t, &u, c, &cfg).unwrap();
            assert!(sol.r <= c.min(ixy) + 1e-9);
            rs.push(sol.r);
        }
        for w in rs.windows(2) {
            assert!(w[1] >= w[0] - 1e-8);
        }
        for w in rs.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-6);
        }
    }

    #[test]
    fn g_n_endpoints_and_binary_identity() {
        assert_eq!(g_n(3, 0.0).unwrap(), 0.0);
        assert!((g_n(3, 1.0).unwrap() - LOG2_3).abs() < 1e-15);
        assert!((g_n(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // g_2(beta) = 1 - h2((1 - beta) / 2)
        for k in 0..=10 {
            let beta = k as f64 / 10.0;
            let direct = g_n(2, beta).unwrap();
            let via_h2 = 1.0 - crate::prob::binary_entropy((1.0 - beta) / 2.0);
            assert!((direct - via_h2).abs() < 1e-14);
        }
        assert!((g_n(2, 0.5).unwrap() - 0.18872187554086717).abs() < 1e-14);
        // monotone
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = g_n(3, k as f64 / 100.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(g_n(3, 1.2).is_err());
    }

    #[test]
    fn invert_g_n_examples() {
        assert!(invert_g_n(3, 0.0).unwrap().abs() < 1e-12);
        assert!((invert_g_n(3, LOG2_3).unwrap() - 1.0).abs() < 1e-12);
        // frozen by the prototype bisection: solve 1 - h2((1-b)/2) = 0.5
        let b = invert_g_n(2, 0.5).unwrap();
        assert!((b - 0.7799442711232809).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let c = rng.gen::<f64>() * LOG2_3;
            let beta = invert_g_n(3, c).unwrap();
            assert!((g_n(3, beta).unwrap() - c).abs() < 1e-10);
        }
    }

    #[test]
    fn hamming_ib_closed_form() {
        // R = 0 at C = 0
        let s = hamming_ib(3, 0.7, 0.0).unwrap();
        assert!(s.beta.abs() < 1e-12 && s.r.abs() < 1e-12);
        // noiseless channel passes everything through
        let s = hamming_ib(3, 1.0, LOG2_3).unwrap();
        assert!((s.r - LOG2_3).abs() < 1e-10);
        // binary case, frozen by the prototype: beta = 0.77994427...,
        // R = 1 - h2((1 - alpha beta) / 2) = 0.11266619007046116
        let s = hamming_ib(2, 0.5, 0.5).unwrap();
        assert!((s.beta - 0.7799442711232809).abs() < 1e-10);
        assert!((s.r - 0.11266619007046116).abs() < 1e-10);
        let via_bsc = 1.0 - crate::prob::binary_entropy((1.0 - s.alpha * s.beta) / 2.0);
        assert!((s.r - via_bsc).abs() < 1e-12);
        // v really is beta e + (1 - beta) u and satisfies g_n(beta) = C
        assert!((s.v.entropy_bits() - (1.0 - 0.5)).abs() < 1e-10);
        assert!((g_n(2, s.beta).unwrap() - s.c).abs() < 1e-10);
    }

    #[test]
    fn reduced_ib_endpoints() {
        let z = ProbVector::new(vec![0.8, 0.15, 0.05]).unwrap();
        let cfg = fast_cfg();
        let at_zero = reduced_ib(&z, 0.0, &cfg).unwrap();
        assert!(at_zero.r.abs() < 1e-9);
        let v = at_zero.noise_vector.as_ref().unwrap();
        assert!(v.max_abs_diff(&ProbVector::uniform(3)) < 1e-6);

        let at_max = reduced_ib(&z, LOG2_3, &cfg).unwrap();
        assert!((at_max.r - (LOG2_3 - z.entropy_bits())).abs() < 1e-8);
        assert!(at_max.noise_vector.as_ref().unwrap().entropy_bits() < 1e-6);
    }

    #[test]
    fn reduced_ib_matches_hamming_closed_form() {
        // noise vector of hamming(3, 0.5), compared across a 20-point grid
        let z = ProbVector::new(vec![0.5 + 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0]).unwrap();
        let cfg = fast_cfg();
        for k in 1..=20 {
            let c = LOG2_3 * k as f64 / 21.0;
            let closed = hamming_ib(3, 0.5, c).unwrap();
            let reduced = reduced_ib(&z, c, &cfg).unwrap();
            assert!(
                (closed.r - reduced.r).abs() < 1e-4,
                "C={c}: closed {} vs reduced {}",
                closed.r,
                reduced.r
            );
            // the witness honors the entropy constraint; it matches it
            // tightly outside the small plateau region near C = 0, where
            // the single-vector frontier jumps and the hull takes over
            let v = reduced.noise_vector.as_ref().unwrap();
            assert!(v.entropy_bits() >= LOG2_3 - c - 1e-6);
            if c > 0.35 {
                assert!((v.entropy_bits() - (LOG2_3 - c)).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn reduced_ib_matches_the_envelope_path() {
        let z = ProbVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let t = ChannelMatrix::circulant_from_noise(&z);
        let u = ProbVector::uniform(3);
        let cfg = fast_cfg();
        for c in [0.45, 1.1] {
            let reduced = reduced_ib(&z, c, &cfg).unwrap();
            let general = ib_value(&t, &u, c, &cfg).unwrap();
            assert!(
                (reduced.r - general.r).abs() < 5e-3,
                "C={c}: reduced {} vs envelope {}",
                reduced.r,
                general.r
            );
        }
    }

    #[test]
    fn set_q_membership() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let cfg = fast_cfg();
        let lambda_grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();

        // pick an achievable C from the scan itself, then ask for uniform q
        let s = minimize_phi(&t, 0.35, &cfg).unwrap();
        let c = LOG2_3 - s.p.entropy_bits();
        let u = ProbVector::uniform(3);
        let w = set_q_contains(&t, &u, c, &lambda_grid, 2e-2, &cfg)
            .unwrap()
            .expect("uniform input is always representable");
        let total: f64 = w.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        // uniform weights over the orbit also reproduce u exactly
        let mut mix = vec![0.0; 3];
        for p in &w.orbit {
            for (m, v) in mix.iter_mut().zip(p.as_slice()) {
                *m += v / w.orbit.len() as f64;
            }
        }
        for m in mix {
            assert!((m - 1.0 / 3.0).abs() < 1e-9);
        }

        // a vertex is not representable at an interior constraint value
        let e0 = ProbVector::point_mass(3, 0);
        let res = set_q_contains(&t, &e0, c, &lambda_grid, 2e-2, &cfg).unwrap();
        assert!(res.is_none());

        // mismatched constraint value is rejected
        let res = set_q_contains(&t, &u, c + 0.3, &[0.35], 1e-3, &cfg).unwrap();
        assert!(res.is_none());
    }
}
