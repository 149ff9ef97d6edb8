//! Nodal fields and the functionals evaluated on them.
//!
//! Integrals of `|v|^q` and `log|v|` use a hybrid rule: triangles whose three
//! vertices are interior are lumped (a third of the area per vertex), while
//! triangles touching the Dirichlet boundary are integrated exactly for the
//! linear interpolant. Lumping alone misplaces the `log` singularity at the
//! boundary and biases geometric means by `O(h log h)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::GridDomain;

/// Values of a function at every node of a domain.
#[derive(Clone)]
pub struct ScalarField {
    pub domain: Arc<GridDomain>,
    pub values: Vec<f64>,
    /// True when every non-interior node holds exactly 0.
    pub dirichlet: bool,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        f.debug_struct("ScalarField")
            .field("nodes", &self.values.len())
            .field("min", &lo)
            .field("max", &hi)
            .field("dirichlet", &self.dirichlet)
            .finish()
    }
}

impl ScalarField {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(invalid(format!(
                "field has {} values for {} nodes",
                values.len(),
                domain.n_nodes()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateField(format!("non-finite value at node {k}")));
        }
        let dirichlet = (0..values.len()).all(|k| domain.is_interior(k) || values[k] == 0.0);
        Ok(Self { domain, values, dirichlet })
    }

    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.n_nodes();
        Self { domain, values: vec![0.0; n], dirichlet: true }
    }

    /// Samples `f` at interior nodes; all other nodes get 0.
    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; domain.n_nodes()];
        for &k in &domain.interior {
            let [x, y] = domain.coords(k as usize);
            values[k as usize] = f(x, y);
        }
        Self { domain, values, dirichlet: true }
    }

    /// Builds a Dirichlet field from its interior degrees of freedom.
    pub fn from_interior(domain: Arc<GridDomain>, x: &[f64]) -> Self {
        assert_eq!(x.len(), domain.n_interior());
        let mut values = vec![0.0; domain.n_nodes()];
        for (i, &k) in domain.interior.iter().enumerate() {
            values[k as usize] = x[i];
        }
        Self { domain, values, dirichlet: true }
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.domain.interior.iter().map(|&k| self.values[k as usize]).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            dirichlet: self.dirichlet,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| if self.domain.is_interior(k) { f(v) } else { v })
            .collect();
        Self { domain: self.domain.clone(), values, dirichlet: self.dirichlet }
    }

    /// Value at the node nearest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> f64 {
        let d = &self.domain;
        let ix = ((x - d.origin[0]) / d.h).round().clamp(0.0, (d.nx - 1) as f64) as usize;
        let iy = ((y - d.origin[1]) / d.h).round().clamp(0.0, (d.ny - 1) as f64) as usize;
        self.values[d.node(ix, iy)]
    }
}

/// A geometric mean `θ` stored together with its logarithm `β = log θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValue {
    pub value: f64,
    pub log_value: f64,
}

impl MeanValue {
    pub fn from_log(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            Self { value: 0.0, log_value }
        } else {
            Self { value: log_value.exp(), log_value }
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature of g_q(|v|), g_q(x) = (x^q − 1)/q and g_0 = log.

// Gauss–Legendre nodes and weights on [0, 1].
const GL_X: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_2,
];
const GL_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

#[derive(Clone, Copy)]
struct Kernel {
    q: f64,
}

impl Kernel {
    /// g_q(x)
    fn g(self, x: f64) -> f64 {
        if self.q == 0.0 {
            x.ln()
        } else if x == 0.0 {
            -1.0 / self.q
        } else {
            (self.q * x.ln()).exp_m1() / self.q
        }
    }

    /// g_q'(x) = x^{q−1}
    fn dg(self, x: f64) -> f64 {
        ((self.q - 1.0) * x.ln()).exp()
    }

    // H with H(0) = 0 and (xH)'' = g, so that the mean of g over a triangle
    // with vertex values (0, b, c) is 2 H[b, c].
    fn h(self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let q = self.q;
        x * (self.g(x) - 0.5 * (3.0 + q)) / ((q + 1.0) * (q + 2.0))
    }

    fn h1(self, x: f64) -> f64 {
        (2.0 * self.g(x) - 1.0) / (2.0 * (self.q + 2.0))
    }

    fn h2(self, x: f64) -> f64 {
        self.dg(x) / (self.q + 2.0)
    }

    /// Mean of g over a triangle with vertex values (0, b, c), b, c ≥ 0, and
    /// its partial derivatives in b and c.
    fn mean_one_zero(self, b: f64, c: f64) -> (f64, f64, f64) {
        let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
        if hi == 0.0 {
            return (self.g(0.0), 0.0, 0.0);
        }
        if self.q == 0.0 && lo == 0.0 {
            return (f64::NEG_INFINITY, 0.0, 0.0);
        }
        let diff = c - b;
        if diff.abs() <= 0.1 * hi {
            let (mut m, mut db, mut dc) = (0.0, 0.0, 0.0);
            for (&t, &w) in GL_X.iter().zip(&GL_W) {
                let x = b + t * diff;
                m += w * self.h1(x);
                let h2 = self.h2(x);
                db += w * (1.0 - t) * h2;
                dc += w * t * h2;
            }
            return (2.0 * m, 2.0 * db, 2.0 * dc);
        }
        let hbc = (self.h(c) - self.h(b)) / diff;
        let db = (hbc - self.h1(b)) / diff;
        let dc = (self.h1(c) - hbc) / diff;
        (2.0 * hbc, 2.0 * db, 2.0 * dc)
    }

    /// Mean of g over a triangle with vertex values (0, 0, c) and its derivative.
    fn mean_two_zeros(self, c: f64) -> (f64, f64) {
        if c == 0.0 {
            return (self.g(0.0), 0.0);
        }
        if self.q == 0.0 {
            return (c.ln() - 1.5, 1.0 / c);
        }
        let h = self.h(c);
        (2.0 * h / c, 2.0 * (self.h1(c) * c - h) / (c * c))
    }
}

/// `∫ g_q(|v|)` over the triangulated domain. When `grad` is given, the
/// derivative with respect to each nodal value is added to it. With `q = 0`
/// an interior zero yields `-∞` (and no gradient).
pub(crate) fn kernel_integral(d: &GridDomain, v: &[f64], q: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let kern = Kernel { q };
    let area = d.triangle_area();
    let third = area / 3.0;
    let mut total = 0.0;
    for t in &d.triangles {
        // vertices on the boundary holding 0 are integrated exactly; a field
        // that is not Dirichlet falls back to lumping on that triangle
        let active = |k: u32| d.is_interior(k as usize) || v[k as usize] != 0.0;
        let inner: [bool; 3] = [active(t[0]), active(t[1]), active(t[2])];
        let n_inner = inner.iter().filter(|&&b| b).count();
        if n_inner == 3 {
            for &k in t {
                let x = v[k as usize].abs();
                let g = kern.g(x);
                if g == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                total += third * g;
                if let Some(gr) = grad.as_deref_mut() {
                    gr[k as usize] += third * kern.dg(x) * v[k as usize].signum();
                }
            }
            continue;
        }
        let mut nodes = t.iter().zip(&inner).filter(|(_, &b)| b).map(|(&k, _)| k as usize);
        match n_inner {
            2 => {
                let (kb, kc) = (nodes.next().unwrap(), nodes.next().unwrap());
                let (mean, db, dc) = kern.mean_one_zero(v[kb].abs(), v[kc].abs());
                if mean == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                total += area * mean;
                if let Some(gr) = grad.as_deref_mut() {
                    gr[kb] += area * db * v[kb].signum();
                    gr[kc] += area * dc * v[kc].signum();
                }
            }
            1 => {
                let kc = nodes.next().unwrap();
                let (mean, dc) = kern.mean_two_zeros(v[kc].abs());
                if mean == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                total += area * mean;
                if let Some(gr) = grad.as_deref_mut() {
                    gr[kc] += area * dc * v[kc].signum();
                }
            }
            _ => unreachable!("every kept triangle has an interior vertex"),
        }
    }
    total
}

/// `Σ_T |T| ((|∇v|² + δ²)^{p/2} − δ^p)`, with the gradient added to `grad`.
pub(crate) fn energy_with_grad(d: &GridDomain, v: &[f64], p: f64, delta: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let area = d.triangle_area();
    let inv_h2 = 1.0 / (d.h * d.h);
    let d2 = delta * delta;
    let floor = delta.powf(p);
    let half_p = 0.5 * p;
    let mut total = 0.0;
    for t in &d.triangles {
        let (r, a, b) = (t[0] as usize, t[1] as usize, t[2] as usize);
        let dx = v[a] - v[r];
        let dy = v[b] - v[r];
        let s = (dx * dx + dy * dy) * inv_h2 + d2;
        if s == 0.0 {
            continue;
        }
        let sp = if p == 2.0 { s } else { s.powf(half_p) };
        total += area * (sp - floor);
        if let Some(gr) = grad.as_deref_mut() {
            let coef = area * p * (if p == 2.0 { 1.0 } else { sp / s }) * inv_h2;
            gr[a] += coef * dx;
            gr[b] += coef * dy;
            gr[r] -= coef * (dx + dy);
        }
    }
    total
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("q must lie in (0, 1], got {q}")));
    }
    Ok(())
}

/// `‖∇v‖_p^p` of the piecewise-linear interpolant.
pub fn p_energy(v: &ScalarField, p: f64) -> f64 {
    energy_with_grad(&v.domain, &v.values, p, 0.0, None)
}

/// `log m_q(v)`, with `m_q(v) = ((1/|Ω|) ∫|v|^q)^{1/q}`.
pub fn log_q_mean(v: &ScalarField, q: f64) -> Result<f64> {
    check_q(q)?;
    let s = kernel_integral(&v.domain, &v.values, q, None) / v.domain.volume;
    Ok((q * s).ln_1p() / q)
}

/// The power mean `m_q(v)`.
pub fn q_mean(v: &ScalarField, q: f64) -> Result<f64> {
    Ok(log_q_mean(v, q)?.exp())
}

/// `∫ |v|^r` for any `r > 0`.
pub fn power_integral(v: &ScalarField, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid(format!("exponent must be positive, got {r}")));
    }
    Ok(v.domain.volume + r * kernel_integral(&v.domain, &v.values, r, None))
}

/// `∫ v` of the interpolant (exact).
pub fn integral(v: &ScalarField) -> f64 {
    // the kernel at q = 1 works with |v|; use it on the positive and negative parts
    let pos = v.map(|x| x.max(0.0));
    let neg = v.map(|x| (-x).max(0.0));
    let i = |f: &ScalarField| v.domain.volume + kernel_integral(&f.domain, &f.values, 1.0, None);
    i(&pos) - i(&neg)
}

/// `β_v = (1/|Ω|) ∫ log|v|` and `θ_v = e^{β_v}`.
pub fn log_mean(v: &ScalarField) -> MeanValue {
    MeanValue::from_log(kernel_integral(&v.domain, &v.values, 0.0, None) / v.domain.volume)
}

/// `‖∇v‖_p^p / m_q(v)^p`, which equals `λ_q`'s quotient times `|Ω|^{p/q}`.
pub fn quotient_q(v: &ScalarField, p: f64, q: f64) -> Result<f64> {
    if sup_norm(v) == 0.0 {
        return Err(Error::DegenerateField("q-mean vanishes".into()));
    }
    let lm = log_q_mean(v, q)?;
    if lm == f64::NEG_INFINITY || lm.is_nan() {
        return Err(Error::DegenerateField("q-mean vanishes".into()));
    }
    Ok((p_energy(v, p).ln() - p * lm).exp())
}

/// `‖∇v‖_p^p / θ_v^p`; `+∞` when `θ_v = 0`.
pub fn quotient_log(v: &ScalarField, p: f64) -> f64 {
    let beta = log_mean(v).log_value;
    if beta == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (p_energy(v, p).ln() - p * beta).exp()
}

/// `(1/p) ‖∇v‖_p^p − lam ∫ log|v|`; `+∞` when the log integral diverges.
pub fn energy_j(v: &ScalarField, p: f64, lam: f64) -> f64 {
    let beta = log_mean(v).log_value;
    if beta == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    p_energy(v, p) / p - lam * v.domain.volume * beta
}

/// Minimum of `J_λ`, attained at `±u_λ`: `(λ|Ω|/p)(1 − log(λ|Ω|/μ))`.
pub fn j_lambda_minimum(mu: f64, lam: f64, volume: f64, p: f64) -> f64 {
    let a = lam * volume;
    a / p * (1.0 - (a / mu).ln())
}

pub fn sup_norm(v: &ScalarField) -> f64 {
    v.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// A positive Dirichlet field: `base` times smoothed uniform noise in `[1, 2]`.
pub fn random_positive_field(base: &ScalarField, seed: u64, smoothing: usize) -> ScalarField {
    let d = &base.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<f64> = (0..d.n_nodes()).map(|_| rng.random::<f64>()).collect();
    for _ in 0..smoothing {
        let prev = noise.clone();
        for iy in 1..d.ny - 1 {
            for ix in 1..d.nx - 1 {
                let k = d.node(ix, iy);
                noise[k] = 0.5 * prev[k] + 0.125 * (prev[k - 1] + prev[k + 1] + prev[k - d.nx] + prev[k + d.nx]);
            }
        }
    }
    let lo = noise.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = noise.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-300);
    let values = (0..d.n_nodes())
        .map(|k| if d.is_interior(k) { base.values[k] * (1.0 + (noise[k] - lo) / span) } else { 0.0 })
        .collect();
    ScalarField { domain: d.clone(), values, dirichlet: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::geometry::{cone_field, make_domain, ShapeSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn domain(spec: ShapeSpec) -> Arc<GridDomain> {
        Arc::new(make_domain(&spec).unwrap())
    }

    fn bump(d: &Arc<GridDomain>) -> ScalarField {
        // smooth, positive inside, vanishing on the unit circle
        ScalarField::from_fn(d.clone(), |x, y| (1.0 - x * x - y * y).max(0.0) * (1.0 + 0.3 * x))
    }

    #[test]
    fn energy_of_simple_fields() {
        let d = domain(ShapeSpec::disk(1.0, 16.0));
        assert_eq!(p_energy(&ScalarField::zeros(d.clone()), 2.0), 0.0);
        // a linear ramp is reproduced exactly on every triangle
        let ramp = ScalarField { domain: d.clone(), values: (0..d.n_nodes()).map(|k| 3.0 * d.coords(k)[0]).collect(), dirichlet: false };
        let e = p_energy(&ramp, 3.0);
        assert!((e - d.volume * 27.0).abs() < 1e-10 * e);
    }

    #[test]
    fn cone_energy_is_the_area() {
        let d = domain(ShapeSpec::disk(1.0, 128.0));
        let rho = cone_field(&d, [0.0, 0.0]).unwrap();
        let e = p_energy(&rho, 2.0);
        assert!((e / d.volume - 1.0).abs() < 0.05, "{}", e / d.volume);
    }

    #[test]
    fn constant_means() {
        let d = domain(ShapeSpec::square(1.0, 16.0));
        // a field constant on the whole closed domain, not Dirichlet
        let c = ScalarField { domain: d.clone(), values: vec![2.5; d.n_nodes()], dirichlet: false };
        for q in [1e-6, 0.1, 0.5, 1.0] {
            assert!((q_mean(&c, q).unwrap() - 2.5).abs() < 1e-12);
        }
        let m = log_mean(&c);
        assert!((m.log_value - 2.5f64.ln()).abs() < 1e-13);
        assert!((m.value - 2.5).abs() < 1e-12);
        assert!(q_mean(&c, 0.0).is_err());
        assert!(q_mean(&c, 1.5).is_err());
    }

    #[test]
    fn exact_boundary_integrals() {
        // for the cone field the P1 interpolant is exact on boundary triangles
        // only up to the mesh, so compare with a direct fine quadrature instead
        let d = domain(ShapeSpec::disk(1.0, 8.0));
        let v = bump(&d);
        let mut brute = 0.0;
        let m = 200;
        for t in &d.triangles {
            let vals: Vec<f64> = t.iter().map(|&k| v.values[k as usize]).collect();
            if t.iter().all(|&k| d.is_interior(k as usize)) {
                brute += d.triangle_area() / 3.0 * vals.iter().map(|x| x.ln()).sum::<f64>();
                continue;
            }
            // midpoint rule on an m×m subdivision of the reference triangle
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m - i {
                    for (a, b) in [(i as f64 + 1.0 / 3.0, j as f64 + 1.0 / 3.0), (i as f64 + 2.0 / 3.0, j as f64 + 2.0 / 3.0)] {
                        if a + b > m as f64 {
                            continue;
                        }
                        let (x, y) = (a / m as f64, b / m as f64);
                        let val = vals[0] * (1.0 - x - y) + vals[1] * x + vals[2] * y;
                        s += val.ln();
                    }
                }
            }
            brute += d.triangle_area() * s / (m * m) as f64;
        }
        let exact = kernel_integral(&d, &v.values, 0.0, None);
        assert!((exact - brute).abs() < 2e-3 * brute.abs(), "{exact} vs {brute}");
    }

    #[test]
    fn cone_moments_match_the_radial_formula() {
        let d = domain(ShapeSpec::disk(1.0, 128.0));
        let rho = cone_field(&d, [0.0, 0.0]).unwrap();
        let m = q_mean(&rho, 0.5).unwrap();
        assert!((m / (64.0 / 225.0) - 1.0).abs() < 0.03, "{m}");
        let theta = log_mean(&rho).value;
        assert!((theta - analysis::harmonic_limit(2).unwrap()).abs() < 2e-2, "{theta}");
    }

    #[test]
    fn interior_zero_kills_the_geometric_mean() {
        let d = domain(ShapeSpec::disk(1.0, 16.0));
        let mut v = bump(&d);
        let k = d.interior[d.n_interior() / 2] as usize;
        v.values[k] = 0.0;
        let m = log_mean(&v);
        assert_eq!(m.log_value, f64::NEG_INFINITY);
        assert_eq!(m.value, 0.0);
        assert_eq!(quotient_log(&v, 2.0), f64::INFINITY);
        assert_eq!(energy_j(&v, 2.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn quotients_are_scale_invariant() {
        let d = domain(ShapeSpec::disk(1.0, 24.0));
        let v = bump(&d);
        for c in [2.0, 1e-3, 7.5e4, -3.0] {
            let w = v.scaled(c);
            let a = quotient_q(&v, 2.0, 0.4).unwrap();
            assert!((quotient_q(&w, 2.0, 0.4).unwrap() / a - 1.0).abs() < 1e-12);
            let b = quotient_log(&v, 2.5);
            assert!((quotient_log(&w, 2.5) / b - 1.0).abs() < 1e-12);
        }
        assert!(matches!(quotient_q(&ScalarField::zeros(d.clone()), 2.0, 0.5), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn cone_quotient_bounds_lambda1() {
        let d = domain(ShapeSpec::disk(1.0, 64.0));
        let rho = cone_field(&d, [0.0, 0.0]).unwrap();
        assert!(quotient_q(&rho, 2.0, 1.0).unwrap() >= 8.0 * PI);
    }

    #[test]
    fn log_quotient_is_the_small_q_limit() {
        let d = domain(ShapeSpec::disk(1.0, 32.0));
        let v = bump(&d);
        let a = quotient_log(&v, 2.0);
        let b = quotient_q(&v, 2.0, 1e-3).unwrap();
        assert!((a / b - 1.0).abs() < 1e-3);
        let theta_lim = q_mean(&v, 1e-4).unwrap();
        assert!((log_mean(&v).value / theta_lim - 1.0).abs() < 1e-3);
    }

    #[test]
    fn j_scaling_minimum() {
        let d = domain(ShapeSpec::disk(1.0, 32.0));
        let v = bump(&d);
        let (p, lam) = (2.0, 0.7);
        let e = p_energy(&v, p);
        let beta = log_mean(&v).log_value;
        let mu = quotient_log(&v, p);
        // min over t of J(t v) in closed form
        let t_star = (lam * d.volume / e).powf(1.0 / p);
        let jmin = energy_j(&v.scaled(t_star), p, lam);
        let rhs = lam * d.volume / p * (1.0 - (lam * d.volume / mu).ln());
        assert!((jmin - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "{jmin} {rhs} {beta}");
        for t in [0.5, 0.9, 1.1, 2.0] {
            assert!(energy_j(&v.scaled(t * t_star), p, lam) > jmin);
        }
        assert!((j_lambda_minimum(mu, lam, d.volume, p) - rhs).abs() < 1e-12);
    }

    #[test]
    fn torsion_like_sup_norm() {
        let d = domain(ShapeSpec::disk(1.0, 32.0));
        let v = ScalarField::from_fn(d.clone(), |x, y| 0.25 * (1.0 - x * x - y * y));
        assert!((sup_norm(&v) - 0.25).abs() < 1e-12);
        assert_eq!(sup_norm(&ScalarField::zeros(d)), 0.0);
    }

    #[test]
    fn exact_integral_of_quadratic() {
        // ∫ (1 − r²) over the discrete disk is close to π/2
        let d = domain(ShapeSpec::disk(1.0, 128.0));
        let v = ScalarField::from_fn(d.clone(), |x, y| 1.0 - x * x - y * y);
        assert!((integral(&v) - PI / 2.0).abs() < 2e-3);
        let p1 = power_integral(&v, 1.0).unwrap();
        assert!((p1 - integral(&v)).abs() < 1e-10);
    }

    /// Finite differences of a scalar functional along node `k`.
    fn fd(f: &dyn Fn(&[f64]) -> f64, v: &[f64], k: usize) -> f64 {
        let h = 1e-6 * v[k].abs().max(1e-3);
        let mut a = v.to_vec();
        let mut b = v.to_vec();
        a[k] += h;
        b[k] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    }

    #[test]
    fn gradients_match_finite_differences() {
        let d = domain(ShapeSpec::disk(1.0, 12.0));
        let base = bump(&d);
        let v = random_positive_field(&base, 3, 2);
        for q in [0.0, 0.3, 1.0] {
            let mut g = vec![0.0; d.n_nodes()];
            kernel_integral(&d, &v.values, q, Some(&mut g));
            let f = |x: &[f64]| kernel_integral(&d, x, q, None);
            for &k in d.interior.iter().step_by(7) {
                let num = fd(&f, &v.values, k as usize);
                assert!((num - g[k as usize]).abs() <= 1e-6 * g[k as usize].abs().max(1e-4), "q={q}: {num} vs {}", g[k as usize]);
            }
        }
        for p in [1.5, 2.0, 3.0] {
            let mut g = vec![0.0; d.n_nodes()];
            energy_with_grad(&d, &v.values, p, 1e-8, Some(&mut g));
            let f = |x: &[f64]| energy_with_grad(&d, x, p, 1e-8, None);
            for &k in d.interior.iter().step_by(5) {
                let num = fd(&f, &v.values, k as usize);
                assert!((num - g[k as usize]).abs() <= 1e-5 * g[k as usize].abs().max(1e-3), "p={p}");
            }
        }
    }

    #[test]
    fn near_equal_branch_is_continuous() {
        let k = Kernel { q: 0.0 };
        for kern in [k, Kernel { q: 0.4 }] {
            let a = kern.mean_one_zero(1.0, 1.1 + 1e-9);
            let b = kern.mean_one_zero(1.0, 1.1 - 1e-9);
            assert!((a.0 - b.0).abs() < 1e-8);
            assert!((a.1 - b.1).abs() < 1e-6 && (a.2 - b.2).abs() < 1e-6);
        }
        // two-zero limit and the closed form for log
        let (m, _) = k.mean_two_zeros(2.0);
        assert!((m - (2f64.ln() - 1.5)).abs() < 1e-14);
        let kq = Kernel { q: 0.7 };
        let (m, _) = kq.mean_two_zeros(2.0);
        // mean of ((2s)^q − 1)/q with s having density 2(1 − s)... i.e. 2∫(1−s)g(2s)ds
        let direct = crate::quadrature::integrate(|s| 2.0 * (1.0 - s) * kq.g(2.0 * s), 0.0, 1.0, 1e-13).unwrap().0;
        assert!((m - direct).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn holder_monotone_means(seed in 0u64..1000, q1 in 0.01f64..1.0, q2 in 0.01f64..1.0) {
            let d = domain(ShapeSpec::disk(1.0, 10.0));
            let v = random_positive_field(&bump(&d), seed, 1);
            let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
            let a = q_mean(&v, lo).unwrap();
            let b = q_mean(&v, hi).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12));
            prop_assert!(log_mean(&v).value <= a * (1.0 + 1e-12));
        }

        #[test]
        fn membership_iff_zero_log_mean(seed in 0u64..1000) {
            let d = domain(ShapeSpec::square(1.0, 10.0));
            let base = ScalarField::from_fn(d.clone(), |x, y| x * (1.0 - x) * y * (1.0 - y));
            let v = random_positive_field(&base, seed, 2);
            let m = log_mean(&v);
            let u = v.scaled((-m.log_value).exp());
            let mu = log_mean(&u);
            prop_assert!(mu.log_value.abs() < 1e-12);
            prop_assert!((mu.value - 1.0).abs() < 1e-12);
            prop_assert_eq!(m.value, m.log_value.exp());
        }

        #[test]
        fn q_log_majorant(seed in 0u64..1000, q in 0.01f64..0.5) {
            let d = domain(ShapeSpec::disk(1.0, 10.0));
            let v = random_positive_field(&bump(&d), seed, 1).scaled(10.0);
            let w = d.lumped_weights();
            let lhs: f64 = d.interior.iter().map(|&k| { let x = v.values[k as usize]; w[k as usize] * x.powf(q) * x.ln() }).sum();
            let l1: f64 = d.interior.iter().map(|&k| w[k as usize] * v.values[k as usize]).sum();
            prop_assert!(lhs <= 2.0 / std::f64::consts::E * l1);
        }

        #[test]
        fn scale_invariance(c in 1e-3f64..1e3, q in 0.05f64..1.0) {
            let d = domain(ShapeSpec::disk(1.0, 10.0));
            let v = bump(&d);
            let a = quotient_q(&v, 2.0, q).unwrap();
            let b = quotient_q(&v.scaled(c), 2.0, q).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-11);
        }
    }
}
