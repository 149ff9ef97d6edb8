//! Closed-form constants and one-dimensional identities: harmonic limits,
//! cone moments, the log-moment `I(N)`, the Sobolev constant, ball torsion
//! and eigenvalue formulas, and the explicit lower bounds for `μ(Ω)`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature;

/// A named constant together with the inputs it was evaluated at.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub name: String,
    pub value: f64,
    pub inputs: Vec<(String, f64)>,
    pub formula: String,
}

impl ConstantReport {
    fn new(name: &str, value: f64, inputs: &[(&str, f64)], formula: &str) -> Self {
        Self {
            name: name.to_string(),
            value,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            formula: formula.to_string(),
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, nine coefficients),
/// with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Volume of the unit ball in `R^dim`.
pub fn unit_ball_volume(dim: u32) -> f64 {
    let n = dim as f64;
    std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0)
}

/// `1 + 1/2 + ... + 1/n`.
pub fn harmonic_number(n: u32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

fn check_dim(dim: u32) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be > 1, got {p}")));
    }
    Ok(())
}

/// `exp(-(1 + 1/2 + ... + 1/N))`, the small-`q` limit of the cone moment.
pub fn harmonic_limit(dim: u32) -> Result<f64> {
    check_dim(dim)?;
    Ok((-harmonic_number(dim)).exp())
}

/// `(∫₀¹ (1 − t^{1/q})^N dt)^{1/q}`.
///
/// The complement `1 − ∫₀¹(1 − t^{1/q})^N dt` is integrated after the
/// substitution `t = e^{−q s}`, which turns the boundary layer at `t = 1`
/// into an exponentially decaying integrand on `[0, ∞)`.
pub fn cone_moment(q: f64, dim: u32) -> Result<f64> {
    check_dim(dim)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    let n = dim as f64;
    let integrand = |s: f64| {
        let e = (-s).exp();
        // 1 − (1 − e^{−s})^N, accurate for large s
        let bracket = -(n * (-e).ln_1p()).exp_m1();
        q * (-q * s).exp() * bracket
    };
    let upper = 60.0 + n.ln();
    let (complement, _) = quadrature::integrate(integrand, 0.0, upper, 1e-13)?;
    Ok(((-complement).ln_1p() / q).exp())
}

/// `I(N) = N ∫₀¹ (1 − τ)^{N−1} ln τ dτ`, evaluated with `τ = e^{−s}`.
pub fn log_moment_i(dim: u32) -> Result<f64> {
    check_dim(dim)?;
    let n = dim as f64;
    let integrand = |s: f64| {
        let e = (-s).exp();
        (-e).ln_1p().mul_add(n - 1.0, 0.0).exp() * s * e
    };
    let (v, _) = quadrature::integrate(integrand, 0.0, 80.0, 1e-12)?;
    Ok(-n * v)
}

/// The sharp Sobolev constant `S_{N,p}`, defined for `1 < p < N`.
pub fn sobolev_constant(dim: u32, p: f64) -> Result<f64> {
    check_dim(dim)?;
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return Err(invalid(format!("Sobolev constant needs 1 < p < N, got p={p}, N={dim}")));
    }
    let ratio = gamma(n / p) * gamma(1.0 + n - n / p) / (gamma(1.0 + n / 2.0) * gamma(n));
    Ok(std::f64::consts::PI.powf(p / 2.0)
        * n
        * ((n - p) / (p - 1.0)).powf(p - 1.0)
        * ratio.powf(p / n))
}

/// The p-torsion function of the ball of radius `radius` at distance `r`.
pub fn ball_torsion(dim: u32, p: f64, radius: f64, r: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    if !(radius > 0.0) || r < 0.0 || r > radius {
        return Err(invalid(format!("need 0 <= r <= R, got r={r}, R={radius}")));
    }
    let conj = p / (p - 1.0);
    let n = dim as f64;
    Ok((p - 1.0) / p * n.powf(-1.0 / (p - 1.0)) * (radius.powf(conj) - r.powf(conj)))
}

/// `‖φ_{p,B_R}‖₁`, integrated radially in closed form.
pub fn ball_torsion_l1(dim: u32, p: f64, radius: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    let n = dim as f64;
    let conj = p / (p - 1.0);
    Ok(unit_ball_volume(dim) * n.powf(-1.0 / (p - 1.0)) * radius.powf(n + conj) / (n + conj))
}

/// `λ₁(B_R) = ‖φ_{p,B_R}‖₁^{1−p}`.
pub fn lambda1_ball(dim: u32, p: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    Ok(ball_torsion_l1(dim, p, radius)?.powf(1.0 - p))
}

/// `C_{N,p} = λ_p(B₁) ω_N^{p/N}`; the ball eigenvalue comes from the radial oracle.
pub fn poincare_constant(dim: u32, p: f64, lambda_p_unit_ball: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    if !(lambda_p_unit_ball > 0.0) {
        return Err(invalid("λ_p(B_1) must be positive"));
    }
    Ok(lambda_p_unit_ball * unit_ball_volume(dim).powf(p / dim as f64))
}

/// The function maximized in the definition of `K_{N,p}`.
pub fn linfty_integrand(dim: u32, p: f64, c_np: f64, q: f64) -> f64 {
    let n = dim as f64;
    let base = (p + n * (p - q)) / p;
    let expo = (p + n * (p - 1.0)) / (n * (p - q));
    ((-c_np.ln()) / (p - q) + expo * base.ln()).exp()
}

/// `K_{N,p} = sup_{0≤q≤1} C^{−1/(p−q)} ((p + N(p−q))/p)^{(p+N(p−1))/(N(p−q))}`.
pub fn linfty_constant(dim: u32, p: f64, c_np: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    if !(c_np > 0.0) {
        return Err(invalid("C_{N,p} must be positive"));
    }
    let f = |q: f64| linfty_integrand(dim, p, c_np, q);
    // coarse scan, then golden-section refinement around the best sample
    let samples = 200;
    let (mut best_q, mut best) = (0.0, f(0.0));
    for k in 1..=samples {
        let q = k as f64 / samples as f64;
        let v = f(q);
        if v > best {
            best = v;
            best_q = q;
        }
    }
    let step = 1.0 / samples as f64;
    let (mut lo, mut hi) = ((best_q - step).max(0.0), (best_q + step).min(1.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    Ok(best.max(f1).max(f2).max(f(lo)).max(f(hi)))
}

/// Explicit lower bound `N (N + p/(p−1))^{p−1} ω_N^{p/N} |Ω|^{1−p/N} ≤ μ(Ω)`.
pub fn mu_lower_bound(dim: u32, p: f64, volume: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    if !(volume > 0.0) {
        return Err(invalid("volume must be positive"));
    }
    let n = dim as f64;
    Ok(n * (n + p / (p - 1.0)).powf(p - 1.0)
        * unit_ball_volume(dim).powf(p / n)
        * volume.powf(1.0 - p / n))
}

/// `λ_q` of the ball with the given volume, from `λ_q(B₁)`.
pub fn ball_lambda_q(lambda_q_unit_ball: f64, volume: f64, dim: u32, p: f64, q: f64) -> Result<f64> {
    Ok(log_ball_lambda_q(lambda_q_unit_ball.ln(), volume, dim, p, q)?.exp())
}

/// Logarithmic form of [`ball_lambda_q`], safe for small `q`.
pub fn log_ball_lambda_q(log_lambda_q_unit_ball: f64, volume: f64, dim: u32, p: f64, q: f64) -> Result<f64> {
    check_dim(dim)?;
    if !(volume > 0.0 && q > 0.0 && p > 0.0) {
        return Err(invalid("volume, p and q must be positive"));
    }
    let n = dim as f64;
    let expo = 1.0 - p / n - p / q;
    Ok(log_lambda_q_unit_ball + expo * (volume / unit_ball_volume(dim)).ln())
}

/// `C_{N,p,|Ω|}`, the explicit (weaker) log-Sobolev constant; the
/// reciprocal of [`mu_lower_bound`].
pub fn logsob_explicit_constant(dim: u32, p: f64, volume: f64) -> Result<f64> {
    check_dim(dim)?;
    check_p(p)?;
    if !(volume > 0.0) {
        return Err(invalid("volume must be positive"));
    }
    let n = dim as f64;
    Ok(n.recip()
        * (n + p / (p - 1.0)).powf(1.0 - p)
        * unit_ball_volume(dim).powf(-p / n)
        * volume.powf(p / n - 1.0))
}

/// Every constant this module knows, for reports.
pub fn constants_report(dim: u32, p: f64, lambda_p_unit_ball: f64, volume: f64) -> Result<Vec<ConstantReport>> {
    let n = dim as f64;
    let c_np = poincare_constant(dim, p, lambda_p_unit_ball)?;
    let mut out = vec![
        ConstantReport::new("omega_N", unit_ball_volume(dim), &[("N", n)], "volume of the unit ball"),
        ConstantReport::new("harmonic_limit", harmonic_limit(dim)?, &[("N", n)], "exp(-H_N)"),
        ConstantReport::new("I(N)", log_moment_i(dim)?, &[("N", n)], "N int (1-t)^(N-1) ln t"),
        ConstantReport::new("lambda_p(B1)", lambda_p_unit_ball, &[("N", n), ("p", p)], "radial shooting"),
        ConstantReport::new("C_Np", c_np, &[("N", n), ("p", p)], "lambda_p(B1) omega_N^(p/N)"),
        ConstantReport::new("K_Np", linfty_constant(dim, p, c_np)?, &[("N", n), ("p", p)], "sup over q in [0,1]"),
        ConstantReport::new("lambda1_ball", lambda1_ball(dim, p, 1.0)?, &[("N", n), ("p", p), ("R", 1.0)], "torsion L1 norm"),
        ConstantReport::new(
            "mu_lower_bound",
            mu_lower_bound(dim, p, volume)?,
            &[("N", n), ("p", p), ("volume", volume)],
            "lambda_1 of the symmetrized ball",
        ),
        ConstantReport::new(
            "C_Np_volume",
            logsob_explicit_constant(dim, p, volume)?,
            &[("N", n), ("p", p), ("volume", volume)],
            "explicit log-Sobolev constant",
        ),
    ];
    if p < n {
        out.push(ConstantReport::new("S_Np", sobolev_constant(dim, p)?, &[("N", n), ("p", p)], "Gamma-function formula"));
    }
    Ok(out)
}
