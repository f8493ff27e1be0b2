//! Brute-force multistart optimizers over test channels `P(W|X)`. These
//! know nothing about symmetry or envelopes; they are the independent
//! ground truth the closed forms are validated against, and the only path
//! where the structure theorems do not apply.
//!
//! The bottleneck side sweeps a Lagrangian `I(Y;W) - gamma I(X;W)` over a
//! grid of multipliers and reads the constrained value off the upper
//! concave hull of the traced rate pairs. The funnel side cannot use
//! multipliers (its boundary is convex, so duality has a gap); it uses a
//! quadratic penalty with continuation followed by a feasibility polish.

use crate::error::{Error, Result};
use crate::prob::{entropy_bits_of, ChannelMatrix, ProbVector};
use crate::simplex::{derive_seed, lex_less, project_to_simplex, random_simplex_point};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// A test channel `P(W|X)` is just a column-stochastic matrix with the
/// input symbols of the observed variable as columns.
pub type TestChannel = ChannelMatrix;

/// Knobs shared by every iterative solver in the crate. The seed fixes the
/// entire random stream; identical configurations give bit-identical
/// results regardless of thread count.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub constraint_tolerance: f64,
    pub seed: u64,
    pub grid_res: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 64,
            max_iters: 2000,
            step_tolerance: 1e-10,
            constraint_tolerance: 1e-6,
            seed: 7,
            grid_res: 200,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Outcome of one oracle run.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// Optimal rate in bits.
    pub value: f64,
    /// Best single achieving channel found.
    pub channel: TestChannel,
    /// Constraint value attained by `channel`.
    pub achieved_constraint: f64,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// rates and their gradients
// ---------------------------------------------------------------------------

/// `(I(X;W), I(Y;W))` in bits for the chain `Y - X - W` with `X ~ q`,
/// `Y = T(X)` and `W = pc(X)`.
pub fn joint_rates(t: &ChannelMatrix, q: &ProbVector, pc: &TestChannel) -> Result<(f64, f64)> {
    let n = q.dim();
    if t.input_dim() != n || pc.input_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "joint_rates",
            expected: n,
            found: if t.input_dim() != n {
                t.input_dim()
            } else {
                pc.input_dim()
            },
        });
    }
    let flat = flatten(pc);
    Ok(rates_raw(t, q.as_slice(), &flat, pc.output_dim()))
}

fn flatten(pc: &TestChannel) -> Vec<f64> {
    let (k, n) = (pc.output_dim(), pc.input_dim());
    let mut flat = Vec::with_capacity(k * n);
    for x in 0..n {
        flat.extend_from_slice(pc.column_slice(x));
    }
    flat
}

fn unflatten(flat: &[f64], k: usize) -> TestChannel {
    let cols: Vec<ProbVector> = flat
        .chunks(k)
        .map(|c| ProbVector::from_normalized(c.to_vec()))
        .collect();
    ChannelMatrix::from_columns(&cols).expect("columns are simplex points")
}

/// Rates for a flat column-major channel (`flat[x * k + w]`).
fn rates_raw(t: &ChannelMatrix, q: &[f64], flat: &[f64], k: usize) -> (f64, f64) {
    let n = q.len();
    let m = t.output_dim();
    let mut pw = vec![0.0; k];
    let mut h_w_given_x = 0.0;
    for x in 0..n {
        let col = &flat[x * k..(x + 1) * k];
        for (pwv, &v) in pw.iter_mut().zip(col) {
            *pwv += q[x] * v;
        }
        if q[x] > 0.0 {
            h_w_given_x += q[x] * entropy_bits_of(col);
        }
    }
    let ixw = (entropy_bits_of(&pw) - h_w_given_x).max(0.0);

    // joint of (Y, W): J[y][w] = sum_x T[y][x] q[x] pc[w|x]
    let mut joint = vec![0.0; m * k];
    let mut py = vec![0.0; m];
    for x in 0..n {
        if q[x] == 0.0 {
            continue;
        }
        let tcol = t.column_slice(x);
        let col = &flat[x * k..(x + 1) * k];
        for (y, &ty) in tcol.iter().enumerate() {
            let scale = ty * q[x];
            if scale > 0.0 {
                py[y] += scale;
                for (w, &v) in col.iter().enumerate() {
                    joint[y * k + w] += scale * v;
                }
            }
        }
    }
    let iyw = (entropy_bits_of(&py) + entropy_bits_of(&pw) - entropy_bits_of(&joint)).max(0.0);
    (ixw, iyw)
}

/// Analytic gradients of both rates in the channel entries, flattened
/// column-major like the channel itself. Logarithm arguments are clamped at
/// 1e-12 to keep boundary gradients finite.
pub fn joint_rate_gradients(
    t: &ChannelMatrix,
    q: &ProbVector,
    pc: &TestChannel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.dim();
    if t.input_dim() != n || pc.input_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "joint_rate_gradients",
            expected: n,
            found: pc.input_dim(),
        });
    }
    let flat = flatten(pc);
    Ok(gradients_raw(t, q.as_slice(), &flat, pc.output_dim()))
}

fn gradients_raw(t: &ChannelMatrix, q: &[f64], flat: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = q.len();
    let m = t.output_dim();
    let mut pw = vec![0.0; k];
    for x in 0..n {
        for (pwv, &v) in pw.iter_mut().zip(&flat[x * k..(x + 1) * k]) {
            *pwv += q[x] * v;
        }
    }
    let mut joint = vec![0.0; m * k];
    for x in 0..n {
        let tcol = t.column_slice(x);
        for (y, &ty) in tcol.iter().enumerate() {
            let scale = ty * q[x];
            for (w, &v) in flat[x * k..(x + 1) * k].iter().enumerate() {
                joint[y * k + w] += scale * v;
            }
        }
    }
    let lg = |v: f64| v.max(1e-12).log2();
    let mut dixw = vec![0.0; n * k];
    let mut diyw = vec![0.0; n * k];
    for x in 0..n {
        let tcol = t.column_slice(x);
        for w in 0..k {
            dixw[x * k + w] = q[x] * (lg(flat[x * k + w]) - lg(pw[w]));
            let mut acc = 0.0;
            for (y, &ty) in tcol.iter().enumerate() {
                if ty > 0.0 {
                    acc += ty * (lg(joint[y * k + w]) - lg(pw[w]));
                }
            }
            diyw[x * k + w] = q[x] * acc;
        }
    }
    (dixw, diyw)
}

/// Validation helper: worst relative error of the analytic rate gradients
/// against central finite differences with step `h` in the raw channel
/// entries. Returns `(worst for I(X;W), worst for I(Y;W))`.
pub fn gradient_check(
    t: &ChannelMatrix,
    q: &ProbVector,
    pc: &TestChannel,
    h: f64,
) -> Result<(f64, f64)> {
    let (dixw, diyw) = joint_rate_gradients(t, q, pc)?;
    let flat = flatten(pc);
    let k = pc.output_dim();
    let mut worst_x = 0.0f64;
    let mut worst_y = 0.0f64;
    for idx in 0..flat.len() {
        let mut plus = flat.clone();
        plus[idx] += h;
        let mut minus = flat.clone();
        minus[idx] -= h;
        let (ixp, iyp) = rates_raw(t, q.as_slice(), &plus, k);
        let (ixm, iym) = rates_raw(t, q.as_slice(), &minus, k);
        let fd_x = (ixp - ixm) / (2.0 * h);
        let fd_y = (iyp - iym) / (2.0 * h);
        worst_x = worst_x.max((dixw[idx] - fd_x).abs() / fd_x.abs().max(1.0));
        worst_y = worst_y.max((diyw[idx] - fd_y).abs() / fd_y.abs().max(1.0));
    }
    Ok((worst_x, worst_y))
}

// ---------------------------------------------------------------------------
// projected gradient over a product of simplices
// ---------------------------------------------------------------------------

struct ProductOpts {
    max_iters: usize,
    step_tolerance: f64,
}

fn project_product(x: &mut [f64], segments: &[usize]) {
    let mut offset = 0;
    for &len in segments {
        project_to_simplex(&mut x[offset..offset + len]);
        offset += len;
    }
}

/// Projection that additionally pins masked coordinates at exactly zero
/// (used to search faces of the simplex, where entropy gradients diverge).
fn project_product_masked(x: &mut [f64], segments: &[usize], mask: Option<&[bool]>) {
    project_product(x, segments);
    let Some(mask) = mask else { return };
    let mut offset = 0;
    for &len in segments {
        let seg = &mut x[offset..offset + len];
        let m = &mask[offset..offset + len];
        if m.iter().any(|&z| z) {
            let mut sum = 0.0;
            for (v, &z) in seg.iter_mut().zip(m) {
                if z {
                    *v = 0.0;
                }
                sum += *v;
            }
            if sum > 0.0 {
                seg.iter_mut().for_each(|v| *v /= sum);
            } else {
                let free = m.iter().filter(|&&z| !z).count().max(1);
                for (v, &z) in seg.iter_mut().zip(m) {
                    *v = if z { 0.0 } else { 1.0 / free as f64 };
                }
            }
        }
        offset += len;
    }
}

fn product_ascent_masked<F, G>(
    f: &F,
    grad: &G,
    x0: &[f64],
    segments: &[usize],
    opts: &ProductOpts,
    mask: Option<&[bool]>,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    project_product_masked(&mut x, segments, mask);
    let mut fx = f(&x);
    let mut step = 1.0f64;
    for _ in 0..opts.max_iters {
        let g = grad(&x);
        let mut trial_base: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + gi).collect();
        project_product_masked(&mut trial_base, segments, mask);
        let dir: Vec<f64> = trial_base.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let dir_norm: f64 = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if dir_norm < opts.step_tolerance {
            break;
        }
        let slope: f64 = g.iter().zip(&dir).map(|(gi, di)| gi * di).sum();
        if slope <= 0.0 {
            break;
        }
        step = (step * 2.0).min(1.0);
        let mut improved = false;
        while step > 1e-18 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = f(&trial);
            if ft >= fx + 1e-4 * step * slope {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
        if step * dir_norm < opts.step_tolerance {
            break;
        }
    }
    (x, fx)
}

fn product_ascent<F, G>(
    f: &F,
    grad: &G,
    x0: &[f64],
    segments: &[usize],
    opts: &ProductOpts,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    product_ascent_masked(f, grad, x0, segments, opts, None)
}

// ---------------------------------------------------------------------------
// information bottleneck oracle
// ---------------------------------------------------------------------------

/// One polished point of the achievable `(I(X;W), I(Y;W))` region.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub ixw: f64,
    pub iyw: f64,
    channel: Vec<f64>,
    k: usize,
}

impl FrontierPoint {
    pub fn channel(&self) -> TestChannel {
        unflatten(&self.channel, self.k)
    }
}

/// Achievable-region sample traced by the Lagrangian sweep, reusable across
/// constraint values.
pub struct IbFrontier {
    points: Vec<FrontierPoint>,
    hull: Vec<(f64, f64)>,
    k: usize,
    n: usize,
}

impl IbFrontier {
    /// Sweep `max I(Y;W) - gamma I(X;W)` over a multiplier grid with
    /// multistart ascent; every polished restart lands in the cloud.
    pub fn sweep(t: &ChannelMatrix, q: &ProbVector, k: usize, cfg: &SolverConfig) -> Result<Self> {
        let n = q.dim();
        if k == 0 {
            return Err(Error::ParameterRange {
                name: "cardinality",
                value: 0.0,
                min: 1.0,
                max: n as f64,
            });
        }
        if t.input_dim() != n {
            return Err(Error::DimensionMismatch {
                context: "ib frontier",
                expected: n,
                found: t.input_dim(),
            });
        }

        let mut gammas = vec![0.0];
        let log_lo = -3.0f64;
        let steps = 40;
        for i in 0..=steps {
            gammas.push(10f64.powf(log_lo + (0.0 - log_lo) * i as f64 / steps as f64));
        }

        let segments = vec![k; n];
        let opts = ProductOpts {
            max_iters: cfg.max_iters,
            step_tolerance: cfg.step_tolerance,
        };
        let qs = q.as_slice();

        let tasks: Vec<(usize, usize)> = (0..gammas.len())
            .flat_map(|gi| (0..cfg.restarts + 1).map(move |r| (gi, r)))
            .collect();
        let mut points: Vec<FrontierPoint> = tasks
            .par_iter()
            .map(|&(gi, r)| {
                let gamma = gammas[gi];
                let x0 = if r == 0 {
                    // deterministic start resembling W = X
                    let mut x = vec![0.02 / (k as f64 - 1.0).max(1.0); n * k];
                    for xsym in 0..n {
                        x[xsym * k + (xsym % k)] = 0.98;
                    }
                    project_product(&mut x, &segments);
                    x
                } else {
                    let seed = derive_seed(cfg.seed, gi as u64, r as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut x = Vec::with_capacity(n * k);
                    for _ in 0..n {
                        x.extend(random_simplex_point(&mut rng, k));
                    }
                    x
                };
                let f = |x: &[f64]| {
                    let (ixw, iyw) = rates_raw(t, qs, x, k);
                    iyw - gamma * ixw
                };
                let g = |x: &[f64]| {
                    let (dixw, diyw) = gradients_raw(t, qs, x, k);
                    diyw.iter()
                        .zip(&dixw)
                        .map(|(dy, dx)| dy - gamma * dx)
                        .collect()
                };
                let (x, _) = product_ascent(&f, &g, &x0, &segments, &opts);
                let (ixw, iyw) = rates_raw(t, qs, &x, k);
                FrontierPoint {
                    ixw,
                    iyw,
                    channel: x,
                    k,
                }
            })
            .collect();

        // the constant channel anchors the origin
        let mut constant = vec![0.0; n * k];
        for x in 0..n {
            constant[x * k] = 1.0;
        }
        points.push(FrontierPoint {
            ixw: 0.0,
            iyw: 0.0,
            channel: constant,
            k,
        });

        let hull = upper_concave_hull(
            points
                .iter()
                .map(|p| (p.ixw, p.iyw))
                .chain(std::iter::once((0.0, 0.0))),
        );
        Ok(IbFrontier { points, hull, k, n })
    }

    /// Every polished restart endpoint traced by the sweep.
    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    /// Largest traced `I(Y;W)` among channels satisfying `I(X;W) <= c`.
    pub fn best_feasible(&self, c: f64, tol: f64) -> Option<&FrontierPoint> {
        let mut best: Option<&FrontierPoint> = None;
        for p in &self.points {
            if p.ixw <= c + tol {
                best = match best {
                    None => Some(p),
                    Some(b) => {
                        if p.iyw > b.iyw + 1e-12
                            || ((p.iyw - b.iyw).abs() <= 1e-12 && lex_less(&p.channel, &b.channel))
                        {
                            Some(p)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
        }
        best
    }

    /// Hull-interpolated value at `c` (only meaningful when time sharing is
    /// admissible, i.e. the cardinality is not binding).
    pub fn hull_value(&self, c: f64) -> f64 {
        eval_hull_monotone(&self.hull, c)
    }

    /// Constrained oracle value at `c`.
    pub fn query(&self, c: f64, cfg: &SolverConfig) -> OracleResult {
        let witness = self
            .best_feasible(c, cfg.constraint_tolerance)
            .expect("the constant channel is always feasible");
        // time sharing needs extra alphabet room; below the cardinality
        // lemma regime only single channels count
        let value = if self.k >= self.n {
            self.hull_value(c).max(witness.iyw)
        } else {
            witness.iyw
        };
        OracleResult {
            value,
            channel: witness.channel(),
            achieved_constraint: witness.ixw,
            // the budget constraint is an inequality and the constant
            // channel always meets it; parameter problems surface as Err
            converged: true,
        }
    }
}

fn upper_concave_hull(points: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // keep only the highest point per x cluster
    let mut filtered: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        match filtered.last_mut() {
            Some(last) if (last.0 - p.0).abs() < 1e-12 => {
                if p.1 > last.1 {
                    *last = p;
                }
            }
            _ => filtered.push(p),
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in filtered {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= -1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn eval_hull_monotone(hull: &[(f64, f64)], x: f64) -> f64 {
    if hull.is_empty() {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    let mut interpolated = hull[0].1;
    for (i, &(xi, yi)) in hull.iter().enumerate() {
        if xi <= x {
            best = best.max(yi);
            interpolated = yi;
            if i + 1 < hull.len() {
                let (xn, yn) = hull[i + 1];
                if xn > x && xn - xi > 1e-15 {
                    let t = (x - xi) / (xn - xi);
                    interpolated = yi + t * (yn - yi);
                }
            }
        }
    }
    best.max(interpolated).max(0.0)
}

/// Maximize `I(Y;W)` over `k x n` test channels with `I(X;W) <= c`.
pub fn ib_oracle(
    t: &ChannelMatrix,
    q: &ProbVector,
    c: f64,
    k: usize,
    cfg: &SolverConfig,
) -> Result<OracleResult> {
    check_rate_constraint(c, q)?;
    let frontier = IbFrontier::sweep(t, q, k, cfg)?;
    Ok(frontier.query(c, cfg))
}

/// Run the bottleneck oracle across a range of cardinalities.
pub fn cardinality_scan(
    t: &ChannelMatrix,
    q: &ProbVector,
    c: f64,
    k_range: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<(usize, f64)>> {
    k_range
        .iter()
        .map(|&k| Ok((k, ib_oracle(t, q, c, k, cfg)?.value)))
        .collect()
}

fn check_rate_constraint(c: f64, q: &ProbVector) -> Result<f64> {
    let hq = q.entropy_bits();
    if c < -1e-12 || c > hq + 1e-9 {
        return Err(Error::ParameterRange {
            name: "C",
            value: c,
            min: 0.0,
            max: hq,
        });
    }
    Ok(c.clamp(0.0, hq))
}

// ---------------------------------------------------------------------------
// privacy funnel oracle
// ---------------------------------------------------------------------------

/// Minimize `I(Y;W)` over `k x n` test channels with `I(X;W) = c`
/// (equality). Quadratic penalty with continuation, then a feasibility
/// polish that mixes toward a reference channel until the constraint is met
/// within `constraint_tolerance`.
pub fn pf_oracle(
    t: &ChannelMatrix,
    q: &ProbVector,
    c: f64,
    k: usize,
    cfg: &SolverConfig,
) -> Result<OracleResult> {
    let c = check_rate_constraint(c, q)?;
    let n = q.dim();
    if k == 0 {
        return Err(Error::ParameterRange {
            name: "cardinality",
            value: 0.0,
            min: 1.0,
            max: (n + 1) as f64,
        });
    }
    if t.input_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "pf_oracle",
            expected: n,
            found: t.input_dim(),
        });
    }
    let segments = vec![k; n];
    let opts = ProductOpts {
        max_iters: cfg.max_iters,
        step_tolerance: cfg.step_tolerance,
    };
    let qs = q.as_slice();
    let rhos = [1.0, 10.0, 100.0, 1000.0];

    let candidates: Vec<(f64, f64, Vec<f64>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(cfg.seed, 0x9f, r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = Vec::with_capacity(n * k);
            for _ in 0..n {
                x.extend(random_simplex_point(&mut rng, k));
            }
            let descend = |x: &[f64], rho: f64| -> Vec<f64> {
                let f = |x: &[f64]| {
                    let (ixw, iyw) = rates_raw(t, qs, x, k);
                    -(iyw + rho * (ixw - c) * (ixw - c))
                };
                let g = |x: &[f64]| {
                    let (ixw, _) = rates_raw(t, qs, x, k);
                    let (dixw, diyw) = gradients_raw(t, qs, x, k);
                    diyw.iter()
                        .zip(&dixw)
                        .map(|(dy, dx)| -(dy + 2.0 * rho * (ixw - c) * dx))
                        .collect()
                };
                product_ascent(&f, &g, x, &segments, &opts).0
            };
            for &rho in &rhos {
                x = descend(&x, rho);
            }
            // the penalty leaves the iterate close to but not on the
            // constraint; alternate projection with further high-penalty
            // descents and keep the best feasible point along the way
            let mut best: Option<(f64, f64, Vec<f64>)> = None;
            for _ in 0..3 {
                x = polish_to_equality(t, qs, x, k, c, cfg.constraint_tolerance);
                let (ixw, iyw) = rates_raw(t, qs, &x, k);
                let feasible = (ixw - c).abs() <= cfg.constraint_tolerance;
                match &best {
                    _ if !feasible => {}
                    None => best = Some((ixw, iyw, x.clone())),
                    Some((_, bv, _)) if iyw < *bv => best = Some((ixw, iyw, x.clone())),
                    _ => {}
                }
                x = descend(&x, 2000.0);
            }
            match best {
                Some(b) => b,
                None => {
                    let x = polish_to_equality(t, qs, x, k, c, cfg.constraint_tolerance);
                    let (ixw, iyw) = rates_raw(t, qs, &x, k);
                    (ixw, iyw, x)
                }
            }
        })
        .collect();

    let mut best: Option<(f64, f64, &Vec<f64>)> = None;
    let mut fallback: Option<(f64, f64, &Vec<f64>)> = None;
    for (ixw, iyw, x) in &candidates {
        if (ixw - c).abs() <= cfg.constraint_tolerance {
            best = match best {
                None => Some((*ixw, *iyw, x)),
                Some((bi, bv, bx)) => {
                    if *iyw < bv - 1e-12 || ((iyw - bv).abs() <= 1e-12 && lex_less(x, bx)) {
                        Some((*ixw, *iyw, x))
                    } else {
                        Some((bi, bv, bx))
                    }
                }
            };
        }
        fallback = match fallback {
            None => Some((*ixw, *iyw, x)),
            Some(f) => {
                if (ixw - c).abs() < (f.0 - c).abs() {
                    Some((*ixw, *iyw, x))
                } else {
                    Some(f)
                }
            }
        };
    }

    let (converged, (ixw, iyw, x)) = match best {
        Some(b) => (true, b),
        None => (false, fallback.expect("at least one restart")),
    };
    Ok(OracleResult {
        value: iyw,
        channel: unflatten(x, k),
        achieved_constraint: ixw,
        converged,
    })
}

/// Mix toward a reference channel until `I(X;W) = c` within `tol`.
fn polish_to_equality(
    t: &ChannelMatrix,
    q: &[f64],
    x: Vec<f64>,
    k: usize,
    c: f64,
    tol: f64,
) -> Vec<f64> {
    let n = q.len();
    let (ixw, _) = rates_raw(t, q, &x, k);
    if (ixw - c).abs() <= tol {
        return x;
    }
    let target: Vec<f64> = if ixw < c {
        // most informative reference: deterministic partition
        let mut m = vec![0.0; n * k];
        for xs in 0..n {
            m[xs * k + (xs % k)] = 1.0;
        }
        m
    } else {
        // least informative reference: constant channel
        let mut m = vec![0.0; n * k];
        for xs in 0..n {
            m[xs * k] = 1.0;
        }
        m
    };
    let rate_at = |s: f64| -> f64 {
        let mixed: Vec<f64> = x
            .iter()
            .zip(&target)
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        rates_raw(t, q, &mixed, k).0
    };
    if (rate_at(1.0) - c).signum() == (ixw - c).signum() {
        return x; // reference cannot cross the constraint (cardinality too small)
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (rate_at(mid) - c).signum() == (ixw - c).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    x.iter()
        .zip(&target)
        .map(|(a, b)| (1.0 - s) * a + s * b)
        .collect()
}

// ---------------------------------------------------------------------------
// conditional entropy bound oracle
// ---------------------------------------------------------------------------

/// Minimize `H(Y|W)` subject to `H(X|W) >= x` through the decomposition
/// view: optimize weights `w` on the simplex and columns `p_a` with a
/// penalty enforcing `sum_a w_a p_a = q`.
pub fn ceb_oracle(
    t: &ChannelMatrix,
    q: &ProbVector,
    x: f64,
    k: usize,
    cfg: &SolverConfig,
) -> Result<OracleResult> {
    let n = q.dim();
    let hq = q.entropy_bits();
    if x < -1e-12 || x > hq + 1e-9 {
        return Err(Error::ParameterRange {
            name: "x",
            value: x,
            min: 0.0,
            max: hq,
        });
    }
    let x = x.clamp(0.0, hq);
    if k == 0 {
        return Err(Error::ParameterRange {
            name: "cardinality",
            value: 0.0,
            min: 1.0,
            max: n as f64,
        });
    }
    let mut segments = vec![k];
    segments.extend(std::iter::repeat_n(n, k));
    let dim = k + k * n;
    let opts = ProductOpts {
        max_iters: cfg.max_iters,
        step_tolerance: cfg.step_tolerance,
    };
    let qs: Vec<f64> = q.as_slice().to_vec();
    let rhos = [1.0, 10.0, 100.0];

    let objective = |z: &[f64], rho: f64| -> f64 {
        let (value, residual_sq, slack) = ceb_parts(t, &qs, z, k, x);
        -(value + rho * residual_sq + rho * slack * slack)
    };
    let gradient = |z: &[f64], rho: f64| -> Vec<f64> { ceb_gradient(t, &qs, z, k, x, rho) };

    let candidates: Vec<(f64, f64, f64, Vec<f64>)> = (0..cfg.restarts.max(5))
        .into_par_iter()
        .map(|r| {
            let mut mask: Option<Vec<bool>> = None;
            let mut z = match r {
                0 => {
                    // anchor: every column equals q, uniform weights
                    let mut z = vec![1.0 / k as f64; k];
                    for _ in 0..k {
                        z.extend_from_slice(&qs);
                    }
                    z
                }
                1 => {
                    // vertex decomposition (exact for x = 0 when k >= n)
                    let mut z = Vec::with_capacity(dim);
                    for a in 0..k {
                        z.push(if a < n { qs[a] } else { 0.0 });
                    }
                    for a in 0..k {
                        let mut col = vec![0.0; n];
                        col[a % n] = 1.0;
                        z.extend(col);
                    }
                    project_product(&mut z, &segments);
                    z
                }
                2 => spread_start(&qs, k, x),
                3 | 4 => {
                    // peel small-mass symbols into point columns and search
                    // the complementary face for the rest
                    let thresh = if r == 3 { 0.15 } else { 0.35 };
                    match peel_start(&qs, k, x, thresh) {
                        Some((z, m)) => {
                            mask = Some(m);
                            z
                        }
                        None => spread_start(&qs, k, x),
                    }
                }
                _ => {
                    let seed = derive_seed(cfg.seed, 0xceb, r as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut z = random_simplex_point(&mut rng, k);
                    for _ in 0..k {
                        z.extend(random_simplex_point(&mut rng, n));
                    }
                    z
                }
            };
            let mask = mask.as_deref();
            // later stages can regress, so keep the best feasible state
            // seen anywhere along the pipeline
            let mut best: Option<(f64, f64, f64, Vec<f64>)> = None;
            let consider = |z: &[f64], best: &mut Option<(f64, f64, f64, Vec<f64>)>| {
                let mut zr = ceb_repair(&qs, z.to_vec(), k, x);
                reweight_by_lp(t, &qs, &mut zr, k, x);
                let (value, residual_sq, slack) = ceb_parts(t, &qs, &zr, k, x);
                let cand = (value, residual_sq.sqrt(), slack, zr);
                let better = match best {
                    None => true,
                    Some(b) => {
                        let cand_ok = cand.1 + cand.2 <= 1e-8;
                        let b_ok = b.1 + b.2 <= 1e-8;
                        match (cand_ok, b_ok) {
                            (true, false) => true,
                            (false, true) => false,
                            (true, true) => cand.0 < b.0,
                            (false, false) => cand.1 + cand.2 < b.1 + b.2,
                        }
                    }
                };
                if better {
                    *best = Some(cand);
                }
            };
            consider(&z, &mut best);
            for &rho in &rhos {
                let f = |z: &[f64]| objective(z, rho);
                let g = |z: &[f64]| gradient(z, rho);
                let (next, _) = product_ascent_masked(&f, &g, &z, &segments, &opts, mask);
                z = next;
                consider(&z, &mut best);
            }
            // alternate an exact weight LP (columns fixed) with a column
            // descent (weights fixed); penalty descent alone stalls once
            // the constraints become active
            for _ in 0..3 {
                if mask.is_none() {
                    z = ceb_repair(&qs, z, k, x);
                    reweight_by_lp(t, &qs, &mut z, k, x);
                }
                let rho = 200.0;
                let f = |z: &[f64]| objective(z, rho);
                let g = |z: &[f64]| {
                    let mut g = gradient(z, rho);
                    g[..k].iter_mut().for_each(|v| *v = 0.0);
                    g
                };
                let (next, _) = product_ascent_masked(&f, &g, &z, &segments, &opts, mask);
                z = next;
                consider(&z, &mut best);
            }
            // finish by descending the pure objective with the repair map
            // as a retraction back onto the feasible set
            if mask.is_none() {
                z = ceb_repair(&qs, z, k, x);
                reweight_by_lp(t, &qs, &mut z, k, x);
            }
            let surface_merit = |z: &[f64]| -> f64 {
                let zr = ceb_repair(&qs, z.to_vec(), k, x);
                let (value, residual_sq, slack) = ceb_parts(t, &qs, &zr, k, x);
                -(value + 50.0 * (residual_sq.sqrt() + slack))
            };
            let surface_grad = |z: &[f64]| gradient(z, 0.0);
            let (polished, _) =
                product_ascent_masked(&surface_merit, &surface_grad, &z, &segments, &opts, mask);
            consider(&polished, &mut best);
            best.expect("pipeline always produces a candidate")
        })
        .collect();

    let tol = cfg.constraint_tolerance.max(1e-6);
    let mut best: Option<&(f64, f64, f64, Vec<f64>)> = None;
    let mut fallback: Option<&(f64, f64, f64, Vec<f64>)> = None;
    for cand in &candidates {
        let feasible = cand.1 <= tol && cand.2 <= tol;
        if feasible {
            best = match best {
                None => Some(cand),
                Some(b) => {
                    if cand.0 < b.0 - 1e-12
                        || ((cand.0 - b.0).abs() <= 1e-12 && lex_less(&cand.3, &b.3))
                    {
                        Some(cand)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        fallback = match fallback {
            None => Some(cand),
            Some(f) => {
                if cand.1 + cand.2 < f.1 + f.2 {
                    Some(cand)
                } else {
                    Some(f)
                }
            }
        };
    }
    let (converged, chosen) = match best {
        Some(b) => (true, b),
        None => (false, fallback.expect("at least one restart")),
    };
    let (value, _, _, z) = chosen;

    // forward test channel P(W|X) by Bayes inversion of the decomposition
    let weights = &z[..k];
    let entropy_of_w: f64 = weights
        .iter()
        .enumerate()
        .map(|(a, &w)| w * entropy_bits_of(&z[k + a * n..k + (a + 1) * n]))
        .sum();
    let mut forward_cols: Vec<ProbVector> = Vec::with_capacity(n);
    for xsym in 0..n {
        let mut col = vec![0.0; k];
        let mut mass = 0.0;
        for a in 0..k {
            let v = weights[a] * z[k + a * n + xsym];
            col[a] = v;
            mass += v;
        }
        if mass > 1e-300 {
            col.iter_mut().for_each(|v| *v /= mass);
        } else {
            col.iter_mut().for_each(|v| *v = 1.0 / k as f64);
        }
        forward_cols.push(ProbVector::from_normalized(col));
    }
    Ok(OracleResult {
        value: *value,
        channel: ChannelMatrix::from_columns(&forward_cols)?,
        achieved_constraint: entropy_of_w,
        converged,
    })
}

/// `(sum_a w_a H(T p_a), |sum_a w_a p_a - q|^2, max(0, x - sum_a w_a H(p_a)))`.
fn ceb_parts(t: &ChannelMatrix, q: &[f64], z: &[f64], k: usize, x: f64) -> (f64, f64, f64) {
    let n = q.len();
    let weights = &z[..k];
    let mut value = 0.0;
    let mut entropy = 0.0;
    let mut mix = vec![0.0; n];
    for a in 0..k {
        let col = &z[k + a * n..k + (a + 1) * n];
        value += weights[a] * entropy_bits_of(&t.apply(col));
        entropy += weights[a] * entropy_bits_of(col);
        for (m, &v) in mix.iter_mut().zip(col) {
            *m += weights[a] * v;
        }
    }
    let residual_sq: f64 = mix.iter().zip(q).map(|(m, qv)| (m - qv) * (m - qv)).sum();
    (value, residual_sq, (x - entropy).max(0.0))
}

fn ceb_gradient(t: &ChannelMatrix, q: &[f64], z: &[f64], k: usize, x: f64, rho: f64) -> Vec<f64> {
    let ln2 = std::f64::consts::LN_2;
    let n = q.len();
    let weights = &z[..k];
    let mut mix = vec![0.0; n];
    let mut h_out = vec![0.0; k];
    let mut h_in = vec![0.0; k];
    let mut entropy = 0.0;
    for a in 0..k {
        let col = &z[k + a * n..k + (a + 1) * n];
        h_out[a] = entropy_bits_of(&t.apply(col));
        h_in[a] = entropy_bits_of(col);
        entropy += weights[a] * h_in[a];
        for (m, &v) in mix.iter_mut().zip(col) {
            *m += weights[a] * v;
        }
    }
    let slack = (x - entropy).max(0.0);
    let r: Vec<f64> = mix.iter().zip(q).map(|(m, qv)| m - qv).collect();

    let mut grad = vec![0.0; z.len()];
    for a in 0..k {
        let col = &z[k + a * n..k + (a + 1) * n];
        let dot_rp: f64 = r.iter().zip(col).map(|(ri, ci)| ri * ci).sum();
        // descent objective is negated for the shared ascent routine
        grad[a] = -(h_out[a] + 2.0 * rho * dot_rp - 2.0 * rho * slack * h_in[a]);

        let out = t.apply(col);
        let log_out: Vec<f64> = out.iter().map(|&y| y.max(1e-12).ln()).collect();
        for j in 0..n {
            let mut dhout = 0.0;
            for (ty, ly) in t.column_slice(j).iter().zip(&log_out) {
                dhout -= ty * (ly + 1.0);
            }
            dhout /= ln2;
            let dhin = -(col[j].max(1e-12).ln() + 1.0) / ln2;
            let d = weights[a] * dhout + 2.0 * rho * r[j] * weights[a]
                - 2.0 * rho * slack * weights[a] * dhin;
            grad[k + a * n + j] = -d;
        }
    }
    grad
}

/// Improve the decomposition by an exact small LP over a candidate column
/// pool: the current columns plus the simplex vertices and `q` itself.
/// Minimizes `sum w_a H(T p_a)` subject to `sum w_a p_a = q` and
/// `sum w_a H(p_a) - slack = x`, and adopts the solution when it fits the
/// cardinality budget and lowers the objective. The vertices matter: when
/// `q` sits near a face, optimal decompositions peel off point masses that
/// gradient flow cannot reach (the entropy gradient diverges there).
fn reweight_by_lp(t: &ChannelMatrix, q: &[f64], z: &mut [f64], k: usize, x: f64) {
    let n = q.len();
    let rows = n + 1;
    let mut pool: Vec<Vec<f64>> = (0..k)
        .map(|a| z[k + a * n..k + (a + 1) * n].to_vec())
        .collect();
    for j in 0..n {
        let mut vertex = vec![0.0; n];
        vertex[j] = 1.0;
        pool.push(vertex);
    }
    pool.push(q.to_vec());

    let mut columns = Vec::with_capacity(rows * (pool.len() + 1));
    let mut costs = Vec::with_capacity(pool.len() + 1);
    for col in &pool {
        columns.extend_from_slice(col);
        columns.push(entropy_bits_of(col));
        costs.push(entropy_bits_of(&t.apply(col)));
    }
    // slack column for the entropy inequality
    columns.extend(std::iter::repeat_n(0.0, n));
    columns.push(-1.0);
    costs.push(0.0);
    let mut rhs = q.to_vec();
    rhs.push(x);
    let sol = crate::lp::solve_min(rows, &columns, &costs, &rhs, None);
    if !sol.feasible {
        return;
    }
    let current: f64 = (0..k)
        .map(|a| z[a] * entropy_bits_of(&t.apply(&z[k + a * n..k + (a + 1) * n])))
        .sum();
    if sol.objective > current + 1e-12 {
        return;
    }
    let mut support: Vec<(f64, usize)> = sol
        .basis
        .iter()
        .zip(&sol.weights)
        .filter(|(&j, &w)| j < pool.len() && w > 1e-12)
        .map(|(&j, &w)| (w, j))
        .collect();
    if support.len() > k {
        return; // needs more symbols than the cardinality budget allows
    }
    support.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total: f64 = support.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return;
    }
    for a in 0..k {
        match support.get(a) {
            Some(&(w, j)) => {
                z[a] = w / total;
                z[k + a * n..k + (a + 1) * n].copy_from_slice(&pool[j]);
            }
            None => {
                z[a] = 0.0;
                z[k + a * n..k + (a + 1) * n].copy_from_slice(q);
            }
        }
    }
}

/// Start that peels small-mass symbols into exact point columns and spreads
/// the remaining mass over the complementary face, with a coordinate mask
/// keeping the descent on that face. The entropy budget is met by bisecting
/// the in-face spread.
fn peel_start(q: &[f64], k: usize, x: f64, thresh: f64) -> Option<(Vec<f64>, Vec<bool>)> {
    let n = q.len();
    let small: Vec<usize> = (0..n).filter(|&j| q[j] <= thresh).collect();
    let face: Vec<usize> = (0..n).filter(|&j| q[j] > thresh).collect();
    if small.is_empty() || face.len() < 2 || small.len() >= k {
        return None;
    }
    let mass_small: f64 = small.iter().map(|&j| q[j]).sum();
    let mass_face = 1.0 - mass_small;
    if mass_face <= 1e-12 {
        return None;
    }
    let q_face: Vec<f64> = face.iter().map(|&j| q[j] / mass_face).collect();
    let k_face = k - small.len();
    let spread_ok = k_face >= face.len();

    let build = |s: f64| -> Vec<f64> {
        let mut z = vec![0.0; k + k * n];
        for (slot, &j) in small.iter().enumerate() {
            z[slot] = q[j];
            z[k + slot * n + j] = 1.0;
        }
        for a in 0..k_face {
            let slot = small.len() + a;
            if spread_ok && a < face.len() {
                z[slot] = mass_face * q_face[a];
                for (fi, &j) in face.iter().enumerate() {
                    let vertex = if fi == a { 1.0 } else { 0.0 };
                    z[k + slot * n + j] = (1.0 - s) * q_face[fi] + s * vertex;
                }
            } else {
                // park leftover slots on the face barycenter with the
                // whole face mass on the first of them
                z[slot] = if a == 0 && !spread_ok { mass_face } else { 0.0 };
                for (fi, &j) in face.iter().enumerate() {
                    z[k + slot * n + j] = q_face[fi];
                }
            }
        }
        z
    };
    let entropy_of = |z: &[f64]| -> f64 {
        (0..k)
            .map(|a| z[a] * entropy_bits_of(&z[k + a * n..k + (a + 1) * n]))
            .sum()
    };

    let mut s_star = 0.0;
    if spread_ok && entropy_of(&build(0.0)) >= x {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if entropy_of(&build(mid)) > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        s_star = lo;
    }

    let mut mask = vec![false; k + k * n];
    for (slot, &j) in small.iter().enumerate() {
        for jj in 0..n {
            mask[k + slot * n + jj] = jj != j;
        }
    }
    for a in 0..k_face {
        let slot = small.len() + a;
        for jj in 0..n {
            mask[k + slot * n + jj] = !face.contains(&jj);
        }
    }
    Some((build(s_star), mask))
}

/// Fully feasible deterministic start: columns `(1 - s) q + s e_a` with
/// weights `q` mix back to `q` for every `s`, and `s` is bisected so the
/// mean column entropy hits the constraint exactly.
fn spread_start(q: &[f64], k: usize, x: f64) -> Vec<f64> {
    let n = q.len();
    let build = |s: f64| -> Vec<f64> {
        let mut z = Vec::with_capacity(k + k * n);
        for a in 0..k {
            z.push(if a < n { q[a] } else { 0.0 });
        }
        for a in 0..k {
            for (j, &qj) in q.iter().enumerate() {
                let vertex = if a < n && j == a { 1.0 } else { 0.0 };
                z.push((1.0 - s) * qj + s * vertex);
            }
        }
        z
    };
    let entropy_of = |z: &[f64]| -> f64 {
        (0..k)
            .map(|a| z[a] * entropy_bits_of(&z[k + a * n..k + (a + 1) * n]))
            .sum()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if entropy_of(&build(mid)) > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(0.5 * (lo + hi))
}

/// Drive the decomposition onto the feasible set: shift every column by the
/// mixture residual (clipping back onto the simplex), then raise the mean
/// column entropy by mixing toward uniform if the entropy constraint is
/// still violated, and iterate.
fn ceb_repair(q: &[f64], mut z: Vec<f64>, k: usize, x: f64) -> Vec<f64> {
    let n = q.len();
    let mix_of = |z: &[f64]| -> Vec<f64> {
        let mut mix = vec![0.0; n];
        for a in 0..k {
            for (m, &v) in mix.iter_mut().zip(&z[k + a * n..k + (a + 1) * n]) {
                *m += z[a] * v;
            }
        }
        mix
    };
    let entropy_of = |z: &[f64]| -> f64 {
        (0..k)
            .map(|a| z[a] * entropy_bits_of(&z[k + a * n..k + (a + 1) * n]))
            .sum()
    };

    for _ in 0..4 {
        // mixture repair: the uniform shift keeps every column stochastic
        // up to clipping, which shrinks the residual geometrically
        for _ in 0..8 {
            let mix = mix_of(&z);
            let r: Vec<f64> = q.iter().zip(&mix).map(|(qv, m)| qv - m).collect();
            if r.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-13 {
                break;
            }
            for a in 0..k {
                let col = &mut z[k + a * n..k + (a + 1) * n];
                let mut sum = 0.0;
                for (cv, rv) in col.iter_mut().zip(&r) {
                    *cv = (*cv + rv).max(0.0);
                    sum += *cv;
                }
                if sum > 0.0 {
                    col.iter_mut().for_each(|v| *v /= sum);
                }
            }
        }
        if entropy_of(&z) >= x - 1e-10 {
            break;
        }
        // entropy repair: mixing every column toward uniform raises the
        // mean entropy monotonically; bisect the smallest sufficient mix
        let blend = |z: &[f64], s: f64| -> Vec<f64> {
            let mut out = z.to_vec();
            for a in 0..k {
                let col = &mut out[k + a * n..k + (a + 1) * n];
                for v in col.iter_mut() {
                    *v = (1.0 - s) * *v + s / n as f64;
                }
            }
            out
        };
        if entropy_of(&blend(&z, 1.0)) < x {
            break; // constraint unreachable from this decomposition
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if entropy_of(&blend(&z, mid)) < x + 1e-11 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        z = blend(&z, hi);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, EntropyUnit};
    use crate::test_util::{random_channel, random_simplex};

    fn fast() -> SolverConfig {
        SolverConfig {
            restarts: 12,
            max_iters: 1200,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn joint_rates_identity_and_constant() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let q = ProbVector::new(vec![0.5, 0.3, 0.2]).unwrap();

        let w_equals_x = ChannelMatrix::identity(3);
        let (ixw, iyw) = joint_rates(&t, &q, &w_equals_x).unwrap();
        assert!((ixw - q.entropy_bits()).abs() < 1e-12);
        let ixy = t.mutual_information(&q, EntropyUnit::Bits).unwrap();
        assert!((iyw - ixy).abs() < 1e-12);

        let constant = ChannelMatrix::new(vec![vec![1.0, 1.0, 1.0]]).unwrap();
        let (ixw, iyw) = joint_rates(&t, &q, &constant).unwrap();
        assert!(ixw.abs() < 1e-12 && iyw.abs() < 1e-12);
    }

    #[test]
    fn joint_rates_bsc_cascade() {
        // BSC(0.25) into BSC(0.25): crossover 0.25 * 0.75 + 0.75 * 0.25 = 0.375
        let t = ChannelMatrix::bsc(0.25).unwrap();
        let pc = ChannelMatrix::bsc(0.25).unwrap();
        let u = ProbVector::uniform(2);
        let (ixw, iyw) = joint_rates(&t, &u, &pc).unwrap();
        assert!((ixw - (1.0 - binary_entropy(0.25))).abs() < 1e-12);
        assert!((iyw - (1.0 - binary_entropy(0.375))).abs() < 1e-12);
        assert!((iyw - 0.04556599707503495).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = random_channel(&mut rng, 3, 3);
        let q = random_simplex(&mut rng, 3);
        for _ in 0..10 {
            // strictly interior channel
            let mut cols = Vec::new();
            for _ in 0..3 {
                let mut c = random_simplex(&mut rng, 3).as_slice().to_vec();
                c.iter_mut().for_each(|v| *v = 0.15 + 0.7 * *v);
                let s: f64 = c.iter().sum();
                c.iter_mut().for_each(|v| *v /= s);
                cols.push(ProbVector::new(c).unwrap());
            }
            let pc = ChannelMatrix::from_columns(&cols).unwrap();
            let (dixw, diyw) = joint_rate_gradients(&t, &q, &pc).unwrap();
            let flat = flatten(&pc);
            let h = 1e-6;
            for idx in 0..flat.len() {
                let mut plus = flat.clone();
                plus[idx] += h;
                let mut minus = flat.clone();
                minus[idx] -= h;
                let (ixp, iyp) = rates_raw(&t, q.as_slice(), &plus, 3);
                let (ixm, iym) = rates_raw(&t, q.as_slice(), &minus, 3);
                let fd_x = (ixp - ixm) / (2.0 * h);
                let fd_y = (iyp - iym) / (2.0 * h);
                let rel_x = (dixw[idx] - fd_x).abs() / fd_x.abs().max(1.0);
                let rel_y = (diyw[idx] - fd_y).abs() / fd_y.abs().max(1.0);
                assert!(rel_x < 1e-4, "dIXW[{idx}]: {} vs {}", dixw[idx], fd_x);
                assert!(rel_y < 1e-4, "dIYW[{idx}]: {} vs {}", diyw[idx], fd_y);
            }
        }
    }

    #[test]
    fn ib_oracle_is_deterministic() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        let a = ib_oracle(&t, &u, 0.6, 3, &cfg).unwrap();
        let b = ib_oracle(&t, &u, 0.6, 3, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(
            a.channel.max_abs_diff(&b.channel),
            0.0,
            "channels must be bit-identical"
        );
    }

    #[test]
    fn ib_oracle_trivial_and_sandwich() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        let zero = ib_oracle(&t, &u, 0.0, 3, &cfg).unwrap();
        assert!(zero.value < 1e-9);

        let ixy = t.mutual_information(&u, EntropyUnit::Bits).unwrap();
        for c in [0.2, 0.8, 1.4] {
            let r = ib_oracle(&t, &u, c, 3, &cfg).unwrap();
            assert!(r.value <= c.min(ixy) + 1e-9);
            assert!(r.achieved_constraint <= c + cfg.constraint_tolerance);
        }
    }

    #[test]
    fn ib_oracle_matches_hamming_closed_form() {
        let t = ChannelMatrix::hamming(3, 0.5).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        for c in [0.4, 1.0] {
            let oracle = ib_oracle(&t, &u, c, 3, &cfg).unwrap();
            let closed = crate::ib::hamming_ib(3, 0.5, c).unwrap();
            assert!(
                (oracle.value - closed.r).abs() < 2e-3,
                "C={c}: oracle {} vs closed {}",
                oracle.value,
                closed.r
            );
        }
    }

    #[test]
    fn more_restarts_never_hurt() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let few = SolverConfig {
            restarts: 8,
            ..SolverConfig::default()
        };
        let many = SolverConfig {
            restarts: 64,
            ..SolverConfig::default()
        };
        let c = 0.7;
        let ib_few = ib_oracle(&t, &u, c, 3, &few).unwrap().value;
        let ib_many = ib_oracle(&t, &u, c, 3, &many).unwrap().value;
        assert!(ib_many >= ib_few - 1e-12);

        let pf_few = pf_oracle(&t, &u, c, 4, &few).unwrap();
        let pf_many = pf_oracle(&t, &u, c, 4, &many).unwrap();
        assert!(pf_few.converged && pf_many.converged);
        assert!(pf_many.value <= pf_few.value + 1e-12);
    }

    #[test]
    fn pf_oracle_constraint_and_zero() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        let zero = pf_oracle(&t, &u, 0.0, 4, &cfg).unwrap();
        assert!(zero.value < 1e-6);

        let r = pf_oracle(&t, &u, 0.5, 4, &cfg).unwrap();
        assert!(r.converged);
        assert!((r.achieved_constraint - 0.5).abs() <= cfg.constraint_tolerance);
        assert!(r.value >= 0.0);
        // verify the reported channel really attains the reported rates
        let (ixw, iyw) = joint_rates(&t, &u, &r.channel).unwrap();
        assert!((ixw - r.achieved_constraint).abs() < 1e-12);
        assert!((iyw - r.value).abs() < 1e-12);
    }

    #[test]
    fn ceb_oracle_endpoints() {
        let t = ChannelMatrix::tito(0.15, 0.1).unwrap();
        let q = ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        let cfg = fast();

        let hyx = t.conditional_entropy(&q, EntropyUnit::Bits).unwrap();
        let at_zero = ceb_oracle(&t, &q, 0.0, 3, &cfg).unwrap();
        assert!(
            (at_zero.value - hyx).abs() < 2e-3,
            "F(q,0): {} vs {}",
            at_zero.value,
            hyx
        );

        // single symbol forces the column to q
        let hy = t.push_forward(&q).unwrap().entropy_bits();
        let at_max = ceb_oracle(&t, &q, q.entropy_bits(), 1, &cfg).unwrap();
        assert!(at_max.converged);
        assert!((at_max.value - hy).abs() < 1e-4);
    }

    #[test]
    fn ceb_oracle_agrees_with_ib_oracle_by_complementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = fast();
        for _ in 0..2 {
            let t = random_channel(&mut rng, 3, 3);
            let q = random_simplex(&mut rng, 3);
            let hq = q.entropy_bits();
            let hy = t.push_forward(&q).unwrap().entropy_bits();
            for c in [0.3 * hq, 0.7 * hq] {
                let ib = ib_oracle(&t, &q, c, 3, &cfg).unwrap().value;
                let ceb = ceb_oracle(&t, &q, hq - c, 3, &cfg).unwrap().value;
                assert!(
                    (hy - ceb - ib).abs() < 5e-3,
                    "complement mismatch: H(Y)-F = {} vs R = {}",
                    hy - ceb,
                    ib
                );
            }
        }
    }

    #[test]
    fn pf_boundary_is_convex_in_the_budget() {
        // the concave object is the conditional-entropy form max H(Y|W) as
        // a function of H(X|W); complementing both axes into (C, R) flips
        // it, so the funnel boundary is convex and slopes never decrease
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        let grid = [0.15, 0.45, 0.75, 1.05];
        let values: Vec<f64> = grid
            .iter()
            .map(|&c| pf_oracle(&t, &u, c, 4, &cfg).unwrap().value)
            .collect();
        let slopes: Vec<f64> = values
            .windows(2)
            .zip(grid.windows(2))
            .map(|(v, c)| (v[1] - v[0]) / (c[1] - c[0]))
            .collect();
        for w in slopes.windows(2) {
            assert!(w[1] >= w[0] - 1e-2, "slopes decreased: {slopes:?}");
        }
    }

    #[test]
    fn cardinality_scan_zero_constraint() {
        let t = ChannelMatrix::tito(0.1, 0.05).unwrap();
        let u = ProbVector::uniform(3);
        let cfg = fast();
        let scan = cardinality_scan(&t, &u, 0.0, &[1, 2, 3], &cfg).unwrap();
        for (_, v) in scan {
            assert!(v < 1e-9);
        }
    }

    #[test]
    fn hull_helpers() {
        let hull = upper_concave_hull([(0.0, 0.0), (0.5, 0.4), (1.0, 0.6), (0.5, 0.1)].into_iter());
        assert_eq!(hull.len(), 3);
        assert!((eval_hull_monotone(&hull, 0.25) - 0.2).abs() < 1e-12);
        assert!((eval_hull_monotone(&hull, 2.0) - 0.6).abs() < 1e-12);
    }
}
