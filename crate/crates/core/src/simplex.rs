//! Shared numerics on the probability simplex: regular grids, Euclidean
//! projection, and a deterministic multistart projected-gradient optimizer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Regular simplex grid of resolution `res`: all points with coordinates
/// `k_i / res`. Vertices and faces are included. The point count is
/// `C(res + n - 1, n - 1)`.
pub(crate) fn simplex_grid(n: usize, res: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1 && res >= 1);
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fill_grid(&mut out, &mut counts, 0, res, n);
    out
}

fn fill_grid(out: &mut Vec<Vec<f64>>, counts: &mut [usize], slot: usize, left: usize, n: usize) {
    if slot == n - 1 {
        counts[slot] = left;
        let res: usize = counts.iter().sum();
        out.push(counts.iter().map(|&k| k as f64 / res as f64).collect());
        return;
    }
    for k in 0..=left {
        counts[slot] = k;
        fill_grid(out, counts, slot + 1, left - k, n);
    }
}

/// Pick a grid resolution that keeps the point count around 20-50k for the
/// requested dimension; `base` is used directly for n <= 3.
pub(crate) fn grid_resolution_for(n: usize, base: usize) -> usize {
    match n {
        0 | 1 => 1,
        2 | 3 => base.max(2),
        4 => base.clamp(2, 60),
        5 => base.clamp(2, 28),
        6 => base.clamp(2, 18),
        _ => base.clamp(2, 10),
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
pub(crate) fn project_to_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut found = false;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        } else {
            found = true;
            break;
        }
    }
    if !found {
        theta = (cumsum - 1.0) / n as f64;
    }
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
        sum += *x;
    }
    // guard against fully-clipped degenerate input
    if sum <= 0.0 {
        let u = 1.0 / n as f64;
        v.iter_mut().for_each(|x| *x = u);
    } else {
        v.iter_mut().for_each(|x| *x /= sum);
    }
}

/// Random point on the simplex (normalized exponentials).
pub(crate) fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(rng.gen::<f64>().max(1e-300)).ln())
        .collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

/// Stable per-task seed derivation (splitmix64 over the packed indices).
pub(crate) fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z =
        base ^ stream.wrapping_mul(0x9e3779b97f4a7c15) ^ index.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub(crate) struct AscentOptions {
    pub max_iters: usize,
    pub step_tolerance: f64,
}

/// Projected gradient ascent with backtracking line search, starting from
/// `x0`. Returns the polished point and its objective value.
pub(crate) fn projected_gradient_ascent<F, G>(
    f: &F,
    grad: &G,
    x0: &[f64],
    opts: &AscentOptions,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    project_to_simplex(&mut x);
    let mut fx = f(&x);
    let mut step = 1.0f64;
    for _ in 0..opts.max_iters {
        let g = grad(&x);
        // ascent direction = projection of a gradient step minus the point
        let mut trial_base: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + gi).collect();
        project_to_simplex(&mut trial_base);
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
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            project_to_simplex(&mut trial);
            let ft = f(&trial);
            // sufficient decrease (Armijo)
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

/// Lexicographic comparison used to break ties between equal-value optima.
pub(crate) fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Fold candidate (point, value) pairs into the best one, preferring higher
/// value and breaking near-ties (1e-12) by lexicographically smaller point.
pub(crate) fn fold_best_max(
    best: Option<(Vec<f64>, f64)>,
    cand: (Vec<f64>, f64),
) -> Option<(Vec<f64>, f64)> {
    match best {
        None => Some(cand),
        Some((bx, bv)) => {
            if cand.1 > bv + 1e-12 || ((cand.1 - bv).abs() <= 1e-12 && lex_less(&cand.0, &bx)) {
                Some(cand)
            } else {
                Some((bx, bv))
            }
        }
    }
}
