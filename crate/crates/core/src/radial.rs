//! Radial reference solutions on balls by shooting.
//!
//! All three problems have the form
//! `−(r^{N−1}|w'|^{p−2}w')' = λ r^{N−1} w^s` with `w'(0) = 0`:
//! `s = q − 1` for `λ_q`, `s = p − 1` for the first eigenvalue and `s = −1` for
//! the singular problem. With `G = r^{N−1}|w'|^{p−1}` the system is first
//! order. Integration starts from the series `w ≈ w₀ − a r^{p'}` and switches
//! to the variable `t = −ln(w/w₀)` once `w` has halved, so the approach to the
//! zero of `w` (where `w^s` blows up for `s < 0`) is resolved in logarithmic
//! steps.

use serde::Serialize;

use crate::analysis::unit_ball_volume;
use crate::error::{invalid, Error, Result};

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration from `t0` until `t_end` or until
/// `stop` holds after an accepted step. A right-hand side returning `None`
/// marks the trial point as infeasible and forces a smaller step.
#[allow(clippy::too_many_arguments)]
fn dopri5<const M: usize>(
    f: impl Fn(f64, &[f64; M]) -> Option<[f64; M]>,
    t0: f64,
    y0: [f64; M],
    t_end: f64,
    h0: f64,
    rtol: f64,
    atol: f64,
    mut stop: impl FnMut(f64, &[f64; M]) -> bool,
    mut observe: impl FnMut(f64, &[f64; M]),
) -> Result<(f64, [f64; M])> {
    const MAX_STEPS: usize = 2_000_000;
    let (mut t, mut y) = (t0, y0);
    let mut h = h0.min(t_end - t0);
    let mut k0 = f(t, &y).ok_or_else(|| Error::Oracle("infeasible initial state".into()))?;
    observe(t, &y);
    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok((t, y));
        }
        if h < 1e-14 * t.abs().max(1e-300) {
            return Err(Error::Oracle(format!("step size underflow at t = {t}")));
        }
        h = h.min(t_end - t);
        let mut k = [[0.0; M]; 7];
        k[0] = k0;
        let mut feasible = true;
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                *yi += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            match f(t + C[s] * h, &ys) {
                Some(v) => k[s] = v,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            h *= 0.25;
            continue;
        }
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            *yi += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        let mut err = 0.0;
        for i in 0..M {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / M as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k0 = k[6];
            observe(t, &y);
            if stop(t, &y) {
                return Ok((t, y));
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(Error::Oracle("too many integration steps".into()))
}

/// Raw output of one shot with given `λ` and centre value `w₀`.
#[derive(Debug, Clone)]
struct Shot {
    /// First zero of `w`.
    radius: f64,
    /// `∫₀^R r^{N−1} w^q dr` (only meaningful when a `q` was supplied).
    iq: f64,
    /// `∫₀^R r^{N−1} |w'|^p dr`.
    ie: f64,
    /// `∫₀^R r^{N−1} ln w dr`.
    ilog: f64,
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Integrates `−(r^{N−1}|w'|^{p−2}w')' = λ r^{N−1} w^s`, `w(0) = w0`, up to the
/// first zero of `w`. `q` is the exponent of the moment `∫ w^q` to accumulate.
fn shoot(dim: u32, p: f64, s: f64, q: f64, lam: f64, w0: f64, tol: f64) -> Result<Shot> {
    let n = dim as f64;
    let pc = p / (p - 1.0);
    let inv = 1.0 / (p - 1.0);
    let rtol = (tol * 1e-2).clamp(1e-13, 1e-6);
    let atol = rtol * 1e-6;
    // natural length of the problem: λ L^p = w0^{p−1−s}
    let length = (w0.powf(p - 1.0 - s) / lam).powf(1.0 / p);
    let r0 = 1e-5 * length;
    let a = (lam * w0.powf(s) / n).powf(inv) / pc;
    let w_start = w0 - a * r0.powf(pc);
    let g_start = lam * w0.powf(s) * r0.powf(n) / n;
    let slope0 = a * pc * r0.powf(pc - 1.0);
    let y0 = [
        w_start / w0,
        g_start,
        w0.powf(q) * r0.powf(n) / n,
        slope0.powf(p) * r0.powf(n) / (n + pc),
        w0.ln() * r0.powf(n) / n,
    ];
    let (mut radii, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
    let slope_of = |r: f64, g: f64| (g / r.powf(n - 1.0)).powf(inv);

    // phase 1: independent variable r, state [w/w0, G, Iq, IE, Ilog]
    let rhs_r = |r: f64, y: &[f64; 5]| -> Option<[f64; 5]> {
        let w = y[0] * w0;
        if !(w > 0.0) || !(y[1] >= 0.0) {
            return None;
        }
        let rn = r.powf(n - 1.0);
        let ws = slope_of(r, y[1]);
        Some([-ws / w0, lam * rn * w.powf(s), rn * w.powf(q), rn * ws.powf(p), rn * w.ln()])
    };
    let (r1, y1) = dopri5(
        rhs_r,
        r0,
        y0,
        1e6 * length,
        1e-3 * length,
        rtol,
        atol,
        |_, y| y[0] < 0.5,
        |r, y| {
            radii.push(r);
            values.push(y[0] * w0);
            slopes.push(-slope_of(r, y[1]));
        },
    )?;
    if y1[0] >= 0.5 {
        return Err(Error::Oracle("profile did not decrease to half its centre value".into()));
    }

    // phase 2: t = −ln(w/w0), state [r, G, Iq, IE, Ilog]
    let rhs_t = |t: f64, y: &[f64; 5]| -> Option<[f64; 5]> {
        let (r, g) = (y[0], y[1]);
        if !(r > 0.0) || !(g > 0.0) {
            return None;
        }
        let w = w0 * (-t).exp();
        let rn = r.powf(n - 1.0);
        let ws = slope_of(r, g);
        let dr = w / ws;
        Some([dr, lam * rn * w.powf(s) * dr, rn * w.powf(q) * dr, rn * ws.powf(p) * dr, rn * w.ln() * dr])
    };
    let t1 = -y1[0].ln();
    let z0 = [r1, y1[1], y1[2], y1[3], y1[4]];
    let (_, z) = dopri5(
        rhs_t,
        t1,
        z0,
        t1 + 40.0,
        0.05,
        rtol,
        atol,
        |_, _| false,
        |t, z| {
            if t > t1 && z[0] > *radii.last().unwrap() {
                radii.push(z[0]);
                values.push(w0 * (-t).exp());
                slopes.push(-slope_of(z[0], z[1]));
            }
        },
    )?;
    let radius = z[0];
    // w is below e^{−40} w0 here; the last sample becomes the zero
    if radius > *radii.last().unwrap() {
        radii.push(radius);
        values.push(0.0);
        slopes.push(*slopes.last().unwrap());
    } else {
        *values.last_mut().unwrap() = 0.0;
    }
    Ok(Shot { radius, iq: z[2], ie: z[3], ilog: z[4], radii, values, slopes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialKind {
    LambdaQ,
    Singular,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialDerived {
    /// `λ_q(B₁)` for the sublinear problem, the given `λ` for the singular one.
    pub lambda: f64,
    pub log_lambda: f64,
    /// `Λ_q = λ_q |B₁|^{p/q}` (sublinear problem only).
    pub big_lambda: Option<f64>,
    /// `μ(B₁) = λ|B₁|e^{−pβ}` (singular problem only).
    pub mu: Option<f64>,
    pub sup_norm: f64,
    /// `β = (1/|B₁|) ∫ log w`.
    pub log_mean: f64,
}

/// A radial profile on `[0, 1]` with the constants derived from it.
///
/// For the sublinear problem the profile is normalized to unit power mean,
/// `(1/|B₁|)∫ w^q = 1`; the solution with `∫ w^q = 1` is the profile times
/// `|B₁|^{−1/q}`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub dim: u32,
    pub p: f64,
    /// `q` or `λ`, depending on `kind`.
    pub param: f64,
    pub kind: RadialKind,
    pub radii: Vec<f64>,
    pub profile: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    pub derived: RadialDerived,
}

impl RadialSolution {
    /// Cubic Hermite interpolation of the profile; 0 outside `[0, 1]`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let last = *self.radii.last().unwrap();
        if r >= last {
            return 0.0;
        }
        if r <= self.radii[0] {
            // series region: w0 − a r^{p'}
            let w0 = self.derived.sup_norm;
            let pc = self.p / (self.p - 1.0);
            let a = (w0 - self.profile[0]) / self.radii[0].powf(pc);
            return w0 - a * r.powf(pc);
        }
        let i = self.radii.partition_point(|&x| x <= r) - 1;
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let hseg = x1 - x0;
        let t = (r - x0) / hseg;
        let (y0, y1) = (self.profile[i], self.profile[i + 1]);
        let (m0, m1) = (self.slopes[i] * hseg, self.slopes[i + 1] * hseg);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

fn check(dim: u32, p: f64, tol: f64) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be > 1, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    Ok(())
}

/// `λ_q(B₁)` and its minimizer, `0 < q ≤ 1`.
pub fn radial_lambda_q(dim: u32, p: f64, q: f64, tol: f64) -> Result<RadialSolution> {
    check(dim, p, tol)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    let n = dim as f64;
    let omega = unit_ball_volume(dim);
    let shot = shoot(dim, p, q - 1.0, q, 1.0, 1.0, tol)?;
    let r0 = shot.radius;
    // w(r) = W(R₀ r) on B₁: energy and q-mean by change of variables
    let log_energy = (p - n) * r0.ln() + (n * omega * shot.ie).ln();
    let log_mean_q = ((n * shot.iq).ln() - n * r0.ln()) / q;
    let log_big = log_energy - p * log_mean_q;
    let log_lambda = log_big - p / q * omega.ln();
    let scale = (-log_mean_q).exp();
    let radii: Vec<f64> = shot.radii.iter().map(|r| r / r0).collect();
    let profile: Vec<f64> = shot.values.iter().map(|w| w * scale).collect();
    let slopes: Vec<f64> = shot.slopes.iter().map(|d| d * scale * r0).collect();
    let log_mean = scale.ln() + n * shot.ilog / r0.powf(n);
    Ok(RadialSolution {
        dim,
        p,
        param: q,
        kind: RadialKind::LambdaQ,
        radii,
        profile,
        slopes,
        derived: RadialDerived {
            lambda: log_lambda.exp(),
            log_lambda,
            big_lambda: Some(log_big.exp()),
            mu: None,
            sup_norm: scale,
            log_mean,
        },
    })
}

/// First Dirichlet eigenvalue `λ_p(B₁)` of the p-Laplacian.
pub fn radial_eigen_p(dim: u32, p: f64, tol: f64) -> Result<f64> {
    check(dim, p, tol)?;
    let shot = shoot(dim, p, p - 1.0, p, 1.0, 1.0, tol)?;
    Ok(shot.radius.powf(p))
}

/// The positive solution of `−Δ_p w = λ/w` on `B₁`, by shooting on `w(0)`.
pub fn radial_singular(dim: u32, p: f64, lam: f64, tol: f64) -> Result<RadialSolution> {
    radial_singular_from(dim, p, lam, tol, None)
}

/// As [`radial_singular`], with an explicit initial bracket for `w(0)`.
pub fn radial_singular_from(dim: u32, p: f64, lam: f64, tol: f64, bracket: Option<(f64, f64)>) -> Result<RadialSolution> {
    check(dim, p, tol)?;
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lam}")));
    }
    let n = dim as f64;
    let omega = unit_ball_volume(dim);
    let reach = |a: f64| shoot(dim, p, -1.0, 0.0, lam, a, tol).map(|s| s.radius);
    // the zero of w moves outwards as w(0) grows
    let (mut lo, mut hi) = match bracket {
        Some((lo, hi)) if lo > 0.0 && hi > lo => (lo, hi),
        Some(_) => return Err(invalid("bracket must satisfy 0 < lo < hi")),
        None => (0.5, 2.0),
    };
    let mut expansions = 0;
    while reach(lo)? > 1.0 {
        lo *= 0.25;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Oracle("could not bracket w(0) from below".into()));
        }
    }
    while reach(hi)? < 1.0 {
        hi *= 4.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Oracle("could not bracket w(0) from above".into()));
        }
    }
    while hi / lo - 1.0 > 1e-3 {
        let mid = (lo * hi).sqrt();
        if reach(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // final polish: with λ fixed, the zero of w is proportional to w(0)
    let mid = (lo * hi).sqrt();
    let a = mid / reach(mid)?;
    let shot = shoot(dim, p, -1.0, 0.0, lam, a, tol)?;
    let big_r = shot.radius;
    if (big_r - 1.0).abs() > 10.0 * tol.max(1e-10) {
        return Err(Error::Oracle(format!("shooting missed the unit radius: {big_r}")));
    }
    // map exactly onto B₁: w̃(r) = w(R r)/R solves the same problem
    let radii: Vec<f64> = shot.radii.iter().map(|r| r / big_r).collect();
    let profile: Vec<f64> = shot.values.iter().map(|w| w / big_r).collect();
    let slopes = shot.slopes.clone();
    let log_mean = -big_r.ln() + n * shot.ilog / big_r.powf(n);
    let mu = lam * omega * (-p * log_mean).exp();
    Ok(RadialSolution {
        dim,
        p,
        param: lam,
        kind: RadialKind::Singular,
        radii,
        profile,
        slopes,
        derived: RadialDerived {
            lambda: lam,
            log_lambda: lam.ln(),
            big_lambda: None,
            mu: Some(mu),
            sup_norm: a / big_r,
            log_mean,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use std::f64::consts::PI;

    #[test]
    fn torsion_case_gives_lambda1() {
        let s = radial_lambda_q(2, 2.0, 1.0, 1e-8).unwrap();
        assert!((s.derived.lambda / (8.0 / PI) - 1.0).abs() < 1e-7, "{}", s.derived.lambda);
        for (n, p) in [(3u32, 2.0), (2, 3.0), (2, 1.5)] {
            let s = radial_lambda_q(n, p, 1.0, 1e-8).unwrap();
            let exact = analysis::lambda1_ball(n, p, 1.0).unwrap();
            assert!((s.derived.lambda / exact - 1.0).abs() < 1e-6, "N={n} p={p}");
        }
    }

    #[test]
    fn torsion_profile_matches_closed_form() {
        let s = radial_lambda_q(2, 3.0, 1.0, 1e-8).unwrap();
        // w is a multiple of the torsion function
        let c = s.eval(0.0) / analysis::ball_torsion(2, 3.0, 1.0, 0.0).unwrap();
        for r in [0.1, 0.3, 0.5, 0.77, 0.95] {
            let exact = c * analysis::ball_torsion(2, 3.0, 1.0, r).unwrap();
            assert!((s.eval(r) - exact).abs() < 1e-6 * c, "r={r}");
        }
    }

    #[test]
    fn disk_and_ball_eigenvalues() {
        let j0 = 2.404_825_557_695_773f64;
        let l2 = radial_eigen_p(2, 2.0, 1e-9).unwrap();
        assert!((l2 - j0 * j0).abs() < 1e-7, "{l2}");
        let l3 = radial_eigen_p(3, 2.0, 1e-9).unwrap();
        assert!((l3 - PI * PI).abs() < 1e-7, "{l3}");
        assert!(l3 > l2);
    }

    #[test]
    fn self_convergence() {
        for q in [0.5, 0.25] {
            let tol = 1e-7;
            let a = radial_lambda_q(2, 2.0, q, tol).unwrap().derived.lambda;
            let b = radial_lambda_q(2, 2.0, q, tol / 2.0).unwrap().derived.lambda;
            assert!((a / b - 1.0).abs() <= 10.0 * tol, "q={q}");
        }
        let a = radial_singular(2, 2.0, 1.0, 1e-7).unwrap().derived.mu.unwrap();
        let b = radial_singular(2, 2.0, 1.0, 5e-8).unwrap().derived.mu.unwrap();
        assert!((a / b - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn aux2_scaling_matches_a_direct_shot() {
        // a shot with other λ, w0 lands on a ball of another radius; its
        // quotient must agree with the unit-ball value transported by scaling
        let (n, p, q) = (2u32, 2.5, 0.4);
        let unit = radial_lambda_q(n, p, q, 1e-9).unwrap().derived.lambda;
        let shot = shoot(n, p, q - 1.0, q, 3.7, 0.6, 1e-9).unwrap();
        let omega = unit_ball_volume(n);
        let energy = n as f64 * omega * shot.ie;
        let moment = n as f64 * omega * shot.iq;
        let direct = energy / moment.powf(p / q);
        let volume = omega * shot.radius.powf(n as f64);
        let transported = analysis::ball_lambda_q(unit, volume, n, p, q).unwrap();
        assert!((direct / transported - 1.0).abs() < 1e-7, "{direct} {transported}");
    }

    #[test]
    fn lambda_q_energy_identity() {
        // testing the equation with w itself: ∫|∇w|^p = λ ∫ w^q
        let shot = shoot(2, 2.0, -0.5, 0.5, 1.0, 1.0, 1e-9).unwrap();
        assert!((shot.ie / shot.iq - 1.0).abs() < 1e-8);
    }

    #[test]
    fn singular_solution_properties() {
        let s = radial_singular(2, 2.0, 1.0, 1e-8).unwrap();
        let mu = s.derived.mu.unwrap();
        assert!(mu >= 8.0 * PI * (1.0 - 1e-8));
        assert!((mu - 41.19).abs() < 0.05, "{mu}");
        // homogeneity of the profile
        let s2 = radial_singular(2, 2.0, 2.0, 1e-8).unwrap();
        for r in [0.0, 0.2, 0.5, 0.8, 0.99] {
            assert!((s2.eval(r) / s.eval(r) - 2f64.sqrt()).abs() < 1e-6, "r={r}");
        }
        assert!((s2.derived.mu.unwrap() / mu - 1.0).abs() < 1e-7);
        // lower barrier at the centre with the oracle constant K
        let c_np = analysis::poincare_constant(2, 2.0, radial_eigen_p(2, 2.0, 1e-9).unwrap()).unwrap();
        let k = analysis::linfty_constant(2, 2.0, c_np).unwrap();
        let c = (k * PI.sqrt()).powf(-1.0);
        assert!(s.eval(0.0) > c * analysis::ball_torsion(2, 2.0, 1.0, 0.0).unwrap());
        // and the upper one
        assert!(s.eval(0.0) <= k * PI.sqrt());
    }

    #[test]
    fn singular_shooting_is_bracket_independent() {
        let a = radial_singular_from(2, 3.0, 1.5, 1e-8, Some((1e-3, 1e-2))).unwrap();
        let b = radial_singular_from(2, 3.0, 1.5, 1e-8, Some((10.0, 50.0))).unwrap();
        assert!((a.derived.sup_norm / b.derived.sup_norm - 1.0).abs() < 1e-7);
    }

    #[test]
    fn profiles_decrease() {
        for s in [radial_lambda_q(2, 1.5, 0.3, 1e-8).unwrap(), radial_singular(3, 2.0, 1.0, 1e-8).unwrap()] {
            assert!(s.profile.windows(2).all(|w| w[1] < w[0]));
            assert!(s.radii.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(*s.profile.last().unwrap(), 0.0);
            assert!((s.radii.last().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(radial_lambda_q(2, 2.0, 0.0, 1e-8).is_err());
        assert!(radial_lambda_q(2, 1.0, 0.5, 1e-8).is_err());
        assert!(radial_singular(2, 2.0, -1.0, 1e-8).is_err());
        assert!(radial_eigen_p(1, 2.0, 1e-8).is_err());
        assert!(radial_eigen_p(2, 2.0, 0.0).is_err());
    }
}
