//! Variational solvers on grid domains: the p-torsion function, minimizers of
//! the `λ_q` and `μ` quotients, and the singular problem `−Δ_p u = λ/u`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field_ops::{energy_with_grad, kernel_integral, log_mean, random_positive_field, ScalarField};
use crate::geometry::GridDomain;
use crate::linalg::stiffness;
use crate::optim::{self, Objective, Options};
use crate::radial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative gradient regularization `δ` for `p < 2`.
    pub grad_reg: f64,
    /// Relative positivity floor `ε_rel`.
    pub positivity_floor: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    pub multistart: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { grad_reg: 1e-8, positivity_floor: 1e-6, tol_rel: 1e-10, max_iter: 20_000, multistart: 4, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_reg >= 0.0) {
            return Err(invalid("grad_reg must be nonnegative"));
        }
        if !(self.positivity_floor > 0.0 && self.positivity_floor < 1e-2) {
            return Err(invalid("positivity_floor must lie in (0, 1e-2)"));
        }
        if !(self.tol_rel > 0.0) {
            return Err(invalid("tol_rel must be positive"));
        }
        if self.multistart == 0 || self.max_iter == 0 {
            return Err(invalid("multistart and max_iter must be at least 1"));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

fn scatter(d: &GridDomain, x: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; d.n_nodes()];
    for (i, &k) in d.interior.iter().enumerate() {
        v[k as usize] = x[i];
    }
    v
}

fn gather(d: &GridDomain, full: &[f64], out: &mut [f64]) {
    for (i, &k) in d.interior.iter().enumerate() {
        out[i] = full[k as usize];
    }
}

fn interior_load(d: &GridDomain) -> Vec<f64> {
    let w = d.lumped_weights();
    d.interior.iter().map(|&k| w[k as usize]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `δ` for `p < 2`: `grad_reg` times the root-mean-square gradient of `x`.
fn regularization(d: &GridDomain, x: &[f64], p: f64, cfg: &SolverConfig) -> f64 {
    if p >= 2.0 {
        return 0.0;
    }
    let e2 = energy_with_grad(d, &scatter(d, x), 2.0, 0.0, None);
    cfg.grad_reg * (e2 / d.volume).sqrt()
}

/// `(1/p) E(v) − load·v`: the torsion problem and the inner step of the
/// singular iteration.
struct Loaded<'a> {
    d: &'a GridDomain,
    p: f64,
    delta: f64,
    load: &'a [f64],
}

impl Objective for Loaded<'_> {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let v = scatter(self.d, x);
        let mut g = vec![0.0; v.len()];
        let e = energy_with_grad(self.d, &v, self.p, self.delta, Some(&mut g));
        gather(self.d, &g, grad);
        for (gi, li) in grad.iter_mut().zip(self.load) {
            *gi = *gi / self.p - li;
        }
        e / self.p - dot(self.load, x)
    }
}

/// `log E(v) − p log m_q(v)`, or `log E(v) − p β_v` when `q` is `None`.
pub(crate) struct Quotient<'a> {
    pub d: &'a GridDomain,
    pub p: f64,
    pub q: Option<f64>,
    pub delta: f64,
    pub floor: f64,
}

impl Quotient<'_> {
    /// `(log E, log-mean)` with gradients added to the given buffers.
    fn parts(&self, x: &[f64], ge: Option<&mut [f64]>, gm: Option<&mut [f64]>) -> (f64, f64) {
        let d = self.d;
        let v = scatter(d, x);
        let e = energy_with_grad(d, &v, self.p, self.delta, ge);
        let k = kernel_integral(d, &v, self.q.unwrap_or(0.0), gm);
        let mean = match self.q {
            Some(q) => (q * k / d.volume).ln_1p() / q,
            None => k / d.volume,
        };
        (e.ln(), mean)
    }
}

impl Objective for Quotient<'_> {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.d;
        let mut ge = vec![0.0; d.n_nodes()];
        let mut gm = vec![0.0; d.n_nodes()];
        let v = scatter(d, x);
        let e = energy_with_grad(d, &v, self.p, self.delta, Some(&mut ge));
        let k = kernel_integral(d, &v, self.q.unwrap_or(0.0), Some(&mut gm));
        if k == f64::NEG_INFINITY || !(e > 0.0) {
            return f64::INFINITY;
        }
        // d(mean)/dK
        let (mean, dmean) = match self.q {
            Some(q) => {
                let s = k / d.volume;
                ((q * s).ln_1p() / q, 1.0 / (d.volume * (1.0 + q * s)))
            }
            None => (k / d.volume, 1.0 / d.volume),
        };
        for (i, &node) in d.interior.iter().enumerate() {
            let n = node as usize;
            grad[i] = ge[n] / e - self.p * dmean * gm[n];
        }
        e.ln() - self.p * mean
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let top = x.iter().cloned().fold(0.0f64, f64::max);
        top > 0.0 && x.iter().all(|&v| v > self.floor * top)
    }

    fn normalize(&self, x: &mut [f64]) -> f64 {
        let (_, mean) = self.parts(x, None, None);
        let c = (-mean).exp();
        if c.is_finite() && c > 0.0 {
            for v in x.iter_mut() {
                *v *= c;
            }
            c
        } else {
            1.0
        }
    }
}

/// The p-torsion function: the minimizer of `(1/p)∫|∇v|^p − ∫v`.
pub fn solve_torsion(d: &Arc<GridDomain>, p: f64, cfg: &SolverConfig) -> Result<ScalarField> {
    check_p(p)?;
    cfg.validate()?;
    let k = stiffness(d)?;
    let load = interior_load(d);
    let x2 = k.solve(&load);
    let x = if p == 2.0 {
        x2
    } else {
        // best multiple of the p = 2 solution as the starting point
        let e = energy_with_grad(d, &scatter(d, &x2), p, 0.0, None);
        let t = (dot(&load, &x2) / e).powf(1.0 / (p - 1.0));
        let x0: Vec<f64> = x2.iter().map(|v| v * t).collect();
        let obj = Loaded { d, p, delta: regularization(d, &x0, p, cfg), load: &load };
        let out = optim::minimize(&obj, x0, &k, Options::new(cfg.max_iter, cfg.tol_rel));
        if !out.converged {
            return Err(Error::Convergence {
                iterations: out.iterations,
                last_change: out.last_change,
                last: Box::new(ScalarField::from_interior(d.clone(), &out.x)),
            });
        }
        out.x
    };
    if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::SolverDefect(format!("torsion function not positive at interior node {i}")));
    }
    Ok(ScalarField::from_interior(d.clone(), &x))
}

#[derive(Debug, Clone)]
pub struct Restart {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub field: ScalarField,
}

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    /// Normalized to unit power mean (`∫ v^q = |Ω|`) or unit geometric mean.
    pub field: ScalarField,
    /// `Λ_q = λ_q |Ω|^{p/q}`, or `μ(Ω)`.
    pub objective: f64,
    /// `log λ_q` for the sublinear problem.
    pub log_lambda_q: Option<f64>,
    pub iterations: usize,
    pub restarts_agreeing: usize,
    pub restarts: Vec<Restart>,
}

fn multistart(d: &Arc<GridDomain>, p: f64, q: Option<f64>, seed_field: &ScalarField, cfg: &SolverConfig) -> Result<MinimizerResult> {
    let k = stiffness(d)?;
    let starts: Vec<Vec<f64>> = (0..cfg.multistart)
        .map(|i| {
            if i == 0 {
                seed_field.interior_values()
            } else {
                random_positive_field(seed_field, cfg.seed.wrapping_add(i as u64), 4).interior_values()
            }
        })
        .collect();
    let delta = regularization(d, &starts[0], p, cfg);
    let delta = if delta > 0.0 {
        // scale-free: δ relative to a unit-mean field
        let obj = Quotient { d, p, q, delta: 0.0, floor: cfg.positivity_floor };
        let mut x = starts[0].clone();
        delta * obj.normalize(&mut x)
    } else {
        0.0
    };
    let runs: Vec<optim::Outcome> = starts
        .into_par_iter()
        .map(|x0| {
            let obj = Quotient { d, p, q, delta, floor: cfg.positivity_floor };
            optim::minimize(&obj, x0, &k, Options::new(cfg.max_iter, cfg.tol_rel))
        })
        .collect();
    let best = (0..runs.len()).min_by(|&a, &b| runs[a].f.total_cmp(&runs[b].f)).unwrap();
    let fb = runs[best].f;
    if !fb.is_finite() {
        return Err(Error::SolverDefect("objective is not finite at any restart".into()));
    }
    if !runs[best].converged {
        return Err(Error::Convergence {
            iterations: runs[best].iterations,
            last_change: runs[best].last_change,
            last: Box::new(ScalarField::from_interior(d.clone(), &runs[best].x)),
        });
    }
    let agree_tol = 10.0 * cfg.tol_rel * (1.0 + fb.abs());
    let agreeing = runs.iter().filter(|r| (r.f - fb).abs() <= agree_tol).count();
    if runs.len() > 1 && agreeing == 1 {
        let spread = runs.iter().map(|r| r.f - fb).fold(0.0, f64::max);
        return Err(Error::NonUnique { best: fb.exp(), spread });
    }
    let restarts: Vec<Restart> = runs
        .iter()
        .map(|r| Restart {
            objective: r.f.exp(),
            iterations: r.iterations,
            converged: r.converged,
            field: orient(ScalarField::from_interior(d.clone(), &r.x)),
        })
        .collect();
    let field = restarts[best].field.clone();
    let log_lambda_q = q.map(|q| fb - p / q * d.volume.ln());
    Ok(MinimizerResult {
        field,
        objective: fb.exp(),
        log_lambda_q,
        iterations: runs[best].iterations,
        restarts_agreeing: agreeing,
        restarts,
    })
}

/// Flips the sign so that the mean value is nonnegative.
fn orient(f: ScalarField) -> ScalarField {
    if f.values.iter().sum::<f64>() < 0.0 {
        f.scaled(-1.0)
    } else {
        f
    }
}

/// Minimizes `E(v)/m_q(v)^p`. The objective is `Λ_q = λ_q|Ω|^{p/q}`; the
/// returned field has unit power mean, so `u_q = field · |Ω|^{−1/q}`.
pub fn minimize_lambda_q(d: &Arc<GridDomain>, p: f64, q: f64, cfg: &SolverConfig) -> Result<MinimizerResult> {
    minimize_lambda_q_from(d, p, q, cfg, None)
}

/// As [`minimize_lambda_q`], seeding the multistart with `start` instead of
/// the torsion function.
pub fn minimize_lambda_q_from(
    d: &Arc<GridDomain>,
    p: f64,
    q: f64,
    cfg: &SolverConfig,
    start: Option<&ScalarField>,
) -> Result<MinimizerResult> {
    check_p(p)?;
    cfg.validate()?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    let seed = match start {
        Some(s) => s.clone(),
        None => solve_torsion(d, p, cfg)?,
    };
    multistart(d, p, Some(q), &seed, cfg)
}

/// Minimizes `E(v)/θ_v^p`. The objective is `μ(Ω)`; the field has `β = 0`.
pub fn minimize_mu(d: &Arc<GridDomain>, p: f64, cfg: &SolverConfig) -> Result<MinimizerResult> {
    minimize_mu_from(d, p, cfg, None)
}

pub fn minimize_mu_from(d: &Arc<GridDomain>, p: f64, cfg: &SolverConfig, start: Option<&ScalarField>) -> Result<MinimizerResult> {
    check_p(p)?;
    cfg.validate()?;
    let seed = match start {
        Some(s) => s.clone(),
        None => solve_torsion(d, p, cfg)?,
    };
    let mut res = multistart(d, p, None, &seed, cfg)?;
    // one last exact renormalization to β = 0
    let beta = log_mean(&res.field).log_value;
    res.field = res.field.scaled((-beta).exp());
    for r in res.restarts.iter_mut() {
        let b = log_mean(&r.field).log_value;
        r.field = r.field.scaled((-b).exp());
    }
    Ok(res)
}

/// `K_{N,p}` with the first eigenvalue of the unit ball from the radial oracle.
pub fn linfty_constant_oracle(dim: u32, p: f64) -> Result<f64> {
    let lam = radial::radial_eigen_p(dim, p, 1e-10)?;
    crate::analysis::linfty_constant(dim, p, crate::analysis::poincare_constant(dim, p, lam)?)
}

/// Lower and upper barrier constants at `q = 0`:
/// `c φ_p ≤ u_λ ≤ B` with `c = (K|Ω|^{1/N})^{−1/(p−1)} λ^{1/p}` and
/// `B = K|Ω|^{1/N} λ^{1/p}`.
pub fn singular_barriers(p: f64, lam: f64, volume: f64) -> Result<(f64, f64)> {
    let k = linfty_constant_oracle(2, p)?;
    let kv = k * volume.sqrt();
    let root = lam.powf(1.0 / p);
    Ok((kv.powf(-1.0 / (p - 1.0)) * root, kv * root))
}

#[derive(Debug, Clone)]
pub struct SingularSolution {
    pub field: ScalarField,
    pub iterations: usize,
    /// Sup norm of each iterate, starting with `u_0`.
    pub sup_history: Vec<f64>,
    pub lower_coefficient: f64,
    pub upper_bound: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Positive solution of `−Δ_p u = λ/u` with zero boundary values.
///
/// Each step solves `−Δ_p v = λ/max(u_k, ε‖u_k‖_∞)` and then corrects the
/// scale by the homogeneity of the problem, `u_{k+1} = v (θ_v/θ_{u_k})^{−1/p}`.
/// Fixed points are exactly the solutions; the plain iteration `u_{k+1} = v`
/// reverses order and oscillates between two multiples of the solution.
/// For `p < 2` the step is damped geometrically with weight `p − 1`.
pub fn solve_singular(d: &Arc<GridDomain>, p: f64, lam: f64, cfg: &SolverConfig) -> Result<SingularSolution> {
    check_p(p)?;
    cfg.validate()?;
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lam}")));
    }
    let k = stiffness(d)?;
    let phi = solve_torsion(d, p, cfg)?;
    let phi_x = phi.interior_values();
    let (c_low, upper) = singular_barriers(p, lam, d.volume)?;
    let mut u: Vec<f64> = phi_x.iter().map(|v| c_low * v).collect();
    let sup = |x: &[f64]| x.iter().cloned().fold(0.0f64, f64::max);
    let beta = |x: &[f64]| kernel_integral(d, &scatter(d, x), 0.0, None) / d.volume;
    let mut history = vec![sup(&u)];
    let tol = cfg.tol_rel.max(1e-13);
    let omega = (p - 1.0).min(1.0);
    for it in 1..=cfg.max_iter {
        let floor = cfg.positivity_floor * sup(&u);
        let clipped: Vec<f64> = u.iter().map(|&v| v.max(floor)).collect();
        let mut g = vec![0.0; d.n_nodes()];
        kernel_integral(d, &scatter(d, &clipped), 0.0, Some(&mut g));
        let mut load = vec![0.0; u.len()];
        gather(d, &g, &mut load);
        for l in load.iter_mut() {
            *l *= lam;
        }
        let v = if p == 2.0 {
            k.solve(&load)
        } else {
            let obj = Loaded { d, p, delta: regularization(d, &u, p, cfg), load: &load };
            let out = optim::minimize(&obj, u.clone(), &k, Options::new(cfg.max_iter, (tol * 1e-2).max(1e-15)));
            out.x
        };
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::SolverDefect(format!("singular iterate {it} lost positivity")));
        }
        let factor = (-(beta(&v) - beta(&u)) / p).exp();
        // T reacts to a shape perturbation with a factor up to 1/(p−1); for
        // p < 2 a geometric step of length p − 1 keeps the iteration contractive
        let next: Vec<f64> = if omega < 1.0 {
            v.iter().zip(&u).map(|(x, &old)| old.powf(1.0 - omega) * (x * factor).powf(omega)).collect()
        } else {
            v.iter().map(|x| x * factor).collect()
        };
        let change = next.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let s = sup(&next);
        u = next;
        history.push(s);
        if change <= tol * s {
            let field = ScalarField::from_interior(d.clone(), &u);
            let lower_ok = u.iter().zip(&phi_x).all(|(a, f)| *a >= 0.99 * c_low * f);
            let upper_ok = s <= 1.01 * upper;
            if !(lower_ok && upper_ok) {
                return Err(Error::SolverDefect(format!(
                    "singular solution violates its barriers (lower {lower_ok}, upper {upper_ok})"
                )));
            }
            return Ok(SingularSolution {
                field,
                iterations: it,
                sup_history: history,
                lower_coefficient: c_low,
                upper_bound: upper,
                lower_ok,
                upper_ok,
            });
        }
    }
    let last = *history.last().unwrap();
    let prev = history[history.len() - 2];
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        last_change: (last - prev).abs() / last,
        last: Box::new(ScalarField::from_interior(d.clone(), &u)),
    })
}

/// `(λ|Ω|/μ)^{1/p} u` for a field with `θ_u = 1`.
pub fn rescale_to_lambda(u: &ScalarField, mu: f64, lam: f64, volume: f64, p: f64) -> Result<ScalarField> {
    if !(mu > 0.0 && lam > 0.0 && volume > 0.0) {
        return Err(invalid("mu, lambda and volume must be positive"));
    }
    let beta = log_mean(u).log_value;
    if !(beta.abs() <= 1e-8) {
        return Err(invalid(format!("field must have unit geometric mean, log-mean is {beta}")));
    }
    Ok(u.scaled((lam * volume / mu).powf(1.0 / p)))
}

/// `λ|Ω| e^{−pβ}` from a solution of the singular problem.
pub fn mu_from_singular(u_lam: &ScalarField, lam: f64, p: f64, volume: f64) -> Result<f64> {
    let beta = log_mean(u_lam).log_value;
    if !beta.is_finite() {
        return Err(Error::DegenerateField("log-mean of the singular solution is not finite".into()));
    }
    Ok(lam * volume * (-p * beta).exp())
}

/// Weak-form residual of the `λ_q` Euler–Lagrange equation against a test
/// direction, relative to the energy scale:
/// `(E'(u)·φ/E − p m_q'(u)·φ/m_q) / ‖φ‖`, with `‖φ‖` the energy-normalized size.
pub fn euler_lagrange_residual(u: &ScalarField, p: f64, q: f64, test: &ScalarField) -> f64 {
    let d = &u.domain;
    let obj = Quotient { d, p, q: Some(q), delta: 0.0, floor: 0.0 };
    let x = u.interior_values();
    let mut g = vec![0.0; x.len()];
    obj.eval(&x, &mut g);
    let t = test.interior_values();
    let directional = dot(&g, &t);
    // scale: |E'(u)·φ|/E for the same direction
    let mut ge = vec![0.0; d.n_nodes()];
    let e = energy_with_grad(d, &u.values, p, 0.0, Some(&mut ge));
    let mut gi = vec![0.0; x.len()];
    gather(d, &ge, &mut gi);
    let scale = (dot(&gi, &t) / e).abs().max(1e-300);
    directional.abs() / scale
}
