//! Limited-memory BFGS with a sparse-Cholesky preconditioner.
//!
//! The initial inverse Hessian is `γ K⁻¹`, with `K` the `p = 2` stiffness
//! matrix and `γ` refreshed from the latest curvature pair. Steps are
//! accepted by Armijo backtracking; trial points failing the objective's
//! feasibility test are rejected like points of insufficient decrease.

use std::collections::VecDeque;

use crate::linalg::Stiffness;

pub(crate) trait Objective {
    /// Value at `x`; the gradient is written into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn feasible(&self, _x: &[f64]) -> bool {
        true
    }

    /// Rescales `x` after an accepted step and returns the factor used. The
    /// objective must be invariant under this scaling (degree-0 homogeneous).
    fn normalize(&self, _x: &mut [f64]) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub max_iter: usize,
    pub tol_rel: f64,
    pub memory: usize,
    pub window: usize,
}

impl Options {
    pub fn new(max_iter: usize, tol_rel: f64) -> Self {
        Self { max_iter, tol_rel, memory: 10, window: 5 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative objective decrease over the last window.
    pub last_change: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn minimize(obj: &dyn Objective, x0: Vec<f64>, precond: &Stiffness, opts: Options) -> Outcome {
    let n = x0.len();
    let mut x = x0;
    obj.normalize(&mut x);
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    let mut history: VecDeque<f64> = VecDeque::from([f]);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut gamma = 1.0;
    let mut last_change = f64::INFINITY;
    let mut g_new = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut stalls = 0;

    for it in 1..=opts.max_iter {
        // two-loop recursion
        let mut d = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        let mut d = precond.solve(&d);
        for v in d.iter_mut() {
            *v *= gamma;
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        for v in d.iter_mut() {
            *v = -*v;
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // not a descent direction: restart from the preconditioned gradient
            pairs.clear();
            d = precond.solve(&g);
            for v in d.iter_mut() {
                *v = -*v * gamma;
            }
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                return Outcome { x, f, iterations: it, converged: true, last_change: 0.0 };
            }
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            if obj.feasible(&x_new) {
                let f_try = obj.eval(&x_new, &mut g_new);
                if f_try.is_finite() && f_try <= f + 1e-4 * step * slope {
                    f = f_try;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // Newton-decrement estimate below the rounding level of f: done
            if -slope <= 1e-8 * (1.0 + f.abs()) {
                return Outcome { x, f, iterations: it, converged: true, last_change: -slope / (1.0 + f.abs()) };
            }
            stalls += 1;
            if stalls > 1 || pairs.is_empty() {
                return Outcome { x, f, iterations: it, converged: false, last_change };
            }
            pairs.clear();
            continue;
        }
        stalls = 0;
        let c = obj.normalize(&mut x_new);
        if c != 1.0 {
            // f is unchanged and the gradient scales like 1/c
            for v in g_new.iter_mut() {
                *v /= c;
            }
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let ks = precond.apply(&s);
            let sks = dot(&s, &ks);
            if sks > 0.0 {
                gamma = sks / sy;
            }
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);

        history.push_back(f);
        if history.len() > opts.window + 1 {
            history.pop_front();
        }
        if history.len() == opts.window + 1 {
            let drop = history.front().unwrap() - f;
            last_change = drop / (1.0 + f.abs());
            if last_change <= opts.tol_rel {
                return Outcome { x, f, iterations: it, converged: true, last_change };
            }
        }
    }
    Outcome { x, f, iterations: opts.max_iter, converged: false, last_change }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, ShapeSpec};
    use crate::linalg::stiffness;

    struct Quadratic<'a> {
        k: &'a Stiffness,
        b: Vec<f64>,
        scale: Vec<f64>,
    }

    impl Objective for Quadratic<'_> {
        fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            // ½ xᵀ D K D x − bᵀx with a diagonal distortion D
            let dx: Vec<f64> = x.iter().zip(&self.scale).map(|(a, s)| a * s).collect();
            let kdx = self.k.apply(&dx);
            for i in 0..x.len() {
                grad[i] = self.scale[i] * kdx[i] - self.b[i];
            }
            0.5 * dot(&dx, &kdx) - dot(&self.b, x)
        }
    }

    #[test]
    fn solves_a_distorted_quadratic() {
        let d = make_domain(&ShapeSpec::disk(1.0, 24.0)).unwrap();
        let k = stiffness(&d).unwrap();
        let n = k.dim();
        let scale: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.37).sin()).collect();
        let obj = Quadratic { k: &k, b: vec![1e-3; n], scale: scale.clone() };
        let out = minimize(&obj, vec![0.0; n], &k, Options::new(500, 1e-14));
        assert!(out.converged);
        let mut g = vec![0.0; n];
        obj.eval(&out.x, &mut g);
        let gn = dot(&g, &k.solve(&g)).sqrt();
        let bn = dot(&obj.b, &k.solve(&obj.b)).sqrt();
        assert!(gn < 1e-5 * bn, "{gn} vs {bn}");
    }
}
