//! Limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

pub struct LbfgsResult {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub value: f64,
    pub iterations: usize,
    /// True when the gradient norm dropped below the tolerance.
    pub stationary: bool,
}

/// Minimize `f` starting from `x0`, using at most `max_iters` iterations.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, max_iters: usize, grad_tol: f64) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    const MEMORY: usize = 10;
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut gx) = f(&x);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new(); // (s, y, rho)
    let mut iterations = 0;
    let mut skipped_updates = 0usize;

    for _ in 0..max_iters {
        let gnorm = norm(&gx);
        if gnorm <= grad_tol * fx.abs().max(1.0) {
            return LbfgsResult { x, value: fx, iterations, stationary: true };
        }
        // Two-loop recursion.
        let mut q = gx.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let alpha = rho * dot(s, &q);
            axpy(&mut q, -alpha, y);
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = pairs.back() {
            let yy = dot(y, y);
            if yy > 1e-300 {
                let gamma = dot(s, y) / yy;
                q.iter_mut().for_each(|v| *v *= gamma);
            }
        }
        for ((s, y, rho), alpha) in pairs.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &q);
            axpy(&mut q, alpha - beta, s);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&gx, &dir);
        if slope >= 0.0 {
            // Fall back to steepest descent if curvature went bad.
            dir = gx.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            pairs.clear();
        }

        // Armijo backtracking.
        let mut step = 1.0;
        let c1 = 1e-4;
        let mut accepted = false;
        let mut x_new = vec![0.0; n];
        let mut f_new = fx;
        let mut g_new = Vec::new();
        for _ in 0..40 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let (fv, gv) = f(&x_new);
            if fv <= fx + c1 * step * slope {
                f_new = fv;
                g_new = gv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            return LbfgsResult { x, value: fx, iterations, stationary: false };
        }
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - gx[i]).collect();
        let sy = dot(&s, &y);
        // Relative curvature guard: an absolute cutoff starves the model
        // of pairs once steps get small. Negative curvature along a stale
        // direction can repeat indefinitely, so the memory resets after
        // consecutive rejected updates.
        if sy > 1e-10 * norm(&s) * norm(&y) {
            skipped_updates = 0;
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > MEMORY {
                pairs.pop_front();
            }
        } else {
            skipped_updates += 1;
            if skipped_updates >= 2 {
                pairs.clear();
                skipped_updates = 0;
            }
        }
        x = x_new.clone();
        fx = f_new;
        gx = g_new;
    }
    let stationary = norm(&gx) <= grad_tol * fx.abs().max(1.0);
    LbfgsResult { x, value: fx, iterations, stationary }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(out: &mut [f64], alpha: f64, v: &[f64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += alpha * x;
    }
}
