use std::sync::Arc;

use proptest::prelude::*;
use singmin::experiments::{estimate_mu, geometric_q_grid, is_monotone, q_sweep, richardson, QSweepRecord};
use singmin::field_ops::{energy_j, j_lambda_minimum, quotient_log, quotient_q, random_positive_field};
use singmin::solver::{minimize_lambda_q, minimize_mu, rescale_to_lambda, solve_singular, solve_torsion, SolverConfig};
use singmin::{make_domain, scale_domain, GridDomain, ShapeSpec};

fn domain(spec: ShapeSpec) -> Arc<GridDomain> {
    Arc::new(make_domain(&spec).unwrap())
}

fn cfg() -> SolverConfig {
    SolverConfig { multistart: 2, ..SolverConfig::default() }
}

fn record(q: f64, lambda_big: f64) -> QSweepRecord {
    QSweepRecord {
        q,
        lambda_big,
        log_lambda_q: lambda_big.ln(),
        sup_norm_uq: 1.0,
        log_sup_norm_uq: 0.0,
        bound_x4b_ok: true,
        bound_a1_ok: true,
        cone_bound_ok: None,
        iterations: 0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotients_scale_with_the_domain(t in 0.2f64..5.0, p in 1.3f64..4.0, q in 0.1f64..1.0, seed in any::<u64>()) {
        let d = domain(ShapeSpec::lshape(1.0, 1.0, 0.5, 10.0));
        let dt = Arc::new(scale_domain(&d, t).unwrap());
        let base = solve_torsion(&d, 2.0, &cfg()).unwrap();
        let v = random_positive_field(&base, seed, 2);
        let vt = singmin::ScalarField::new(dt, v.values.clone()).unwrap();
        // the mean-normalized quotient scales like the energy; λ_q picks up |Ω|^{−p/q}
        let big = quotient_q(&v, p, q).unwrap();
        let big_t = quotient_q(&vt, p, q).unwrap();
        prop_assert!(rel(big_t, t.powf(2.0 - p) * big) < 1e-9);
        let lambda = |b: f64, vol: f64| b * vol.powf(-p / q);
        prop_assert!(rel(lambda(big_t, vt.domain.volume), t.powf(2.0 - p - 2.0 * p / q) * lambda(big, d.volume)) < 1e-9);
        prop_assert!(rel(quotient_log(&vt, p), t.powf(2.0 - p) * quotient_log(&v, p)) < 1e-9);
    }

    #[test]
    fn quotients_are_zero_homogeneous(c in 1e-3f64..1e3, p in 1.3f64..4.0, q in 0.1f64..1.0, seed in any::<u64>()) {
        let d = domain(ShapeSpec::disk(1.0, 8.0));
        let v = random_positive_field(&solve_torsion(&d, 2.0, &cfg()).unwrap(), seed, 1);
        prop_assert!(rel(quotient_q(&v.scaled(c), p, q).unwrap(), quotient_q(&v, p, q).unwrap()) < 1e-9);
        prop_assert!(rel(quotient_log(&v.scaled(-c), p), quotient_log(&v, p)) < 1e-9);
    }

    #[test]
    fn extrapolation_is_exact_on_quadratics(a in 1.0f64..100.0, b in -50.0f64..0.0, c in -50.0f64..0.0, q0 in 0.05f64..0.5, f in 0.2f64..0.8) {
        let qs = [q0, q0 * f, q0 * f * f];
        let recs: Vec<_> = qs.iter().map(|&q| record(q, a + b * q + c * q * q)).collect();
        prop_assume!(is_monotone(&recs));
        let est = estimate_mu(&recs).unwrap();
        prop_assert!((est.value - a).abs() < 1e-8 * a.max(1.0));
        prop_assert_eq!(est.smallest_q, qs[2]);
    }

    #[test]
    fn richardson_is_exact_on_first_order_errors(a in -10.0f64..10.0, b in -10.0f64..10.0, h in 0.001f64..0.1) {
        let r = richardson(a + 4.0 * b * h, a + 2.0 * b * h, a + b * h);
        prop_assert!((r.value - a).abs() < 1e-10);
        if b.abs() > 1e-3 {
            prop_assert!((r.observed_order - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn geometric_grids_descend_to_their_end(from in 0.1f64..1.0, to_frac in 1e-3f64..0.9, factor in 0.1f64..0.95) {
        let to = from * to_frac;
        let g = geometric_q_grid(from, to, factor).unwrap();
        prop_assert_eq!(g[0], from);
        prop_assert_eq!(*g.last().unwrap(), to);
        prop_assert!(g.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0] * factor * (1.0 - 1e-12)));
    }

    #[test]
    fn invalid_grids_are_rejected(from in 0.1f64..1.0, factor in 1.0f64..3.0) {
        prop_assert!(geometric_q_grid(from, from / 2.0, factor).is_err());
        prop_assert!(geometric_q_grid(from, from * 2.0, 0.5).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn minimizers_scale_with_the_domain(t in 0.3f64..3.0, p in 1.5f64..3.0, q in 0.2f64..0.9) {
        let d = domain(ShapeSpec::rect(1.0, 0.7, 10.0));
        let dt = Arc::new(scale_domain(&d, t).unwrap());
        let l = minimize_lambda_q(&d, p, q, &cfg()).unwrap().log_lambda_q.unwrap();
        let lt = minimize_lambda_q(&dt, p, q, &cfg()).unwrap().log_lambda_q.unwrap();
        prop_assert!((lt - l - (2.0 - p - 2.0 * p / q) * t.ln()).abs() < 1e-6);
        let mu = minimize_mu(&d, p, &cfg()).unwrap().objective;
        let mut_ = minimize_mu(&dt, p, &cfg()).unwrap().objective;
        prop_assert!(rel(mut_, t.powf(2.0 - p) * mu) < 1e-6);
    }

    #[test]
    fn minimizers_beat_random_fields(p in 1.5f64..3.0, q in 0.2f64..0.9, seed in any::<u64>()) {
        let d = domain(ShapeSpec::lshape(1.0, 1.0, 0.5, 10.0));
        let best = minimize_lambda_q(&d, p, q, &cfg()).unwrap();
        let lam = best.log_lambda_q.unwrap().exp() * d.volume.powf(p / q);
        prop_assert!(rel(quotient_q(&best.field, p, q).unwrap(), lam) < 1e-8);
        let mu = minimize_mu(&d, p, &cfg()).unwrap();
        for k in 0..8 {
            let v = random_positive_field(&best.field, seed.wrapping_add(k), 2);
            prop_assert!(quotient_q(&v, p, q).unwrap() >= lam * (1.0 - 1e-8));
            prop_assert!(quotient_log(&v, p) >= mu.objective * (1.0 - 1e-8));
        }
    }

    #[test]
    fn singular_solutions_are_homogeneous_in_lambda(lam in 0.1f64..10.0, s in 0.2f64..5.0) {
        let p = 2.0;
        let d = domain(ShapeSpec::square(1.0, 12.0));
        let a = solve_singular(&d, p, lam, &cfg()).unwrap().field;
        let b = solve_singular(&d, p, lam * s, &cfg()).unwrap().field;
        let k = s.powf(1.0 / p);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((k * x - y).abs() <= 1e-6 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn j_lambda_is_minimized_at_the_rescaled_minimizer(p in 1.5f64..3.0, lam in 0.1f64..10.0, t in 0.2f64..5.0) {
        let d = domain(ShapeSpec::disk(1.0, 10.0));
        let m = minimize_mu(&d, p, &cfg()).unwrap();
        let u = rescale_to_lambda(&m.field, m.objective, lam, d.volume, p).unwrap();
        let floor = j_lambda_minimum(m.objective, lam, d.volume, p);
        let scale = 1.0 + floor.abs();
        prop_assert!((energy_j(&u, p, lam) - floor).abs() < 1e-8 * scale);
        prop_assert!(energy_j(&u.scaled(t), p, lam) >= floor - 1e-8 * scale);
        prop_assert!((energy_j(&u.scaled(-1.0), p, lam) - floor).abs() < 1e-8 * scale);
    }

    #[test]
    fn sweeps_on_rectangles_are_monotone_and_bounded(w in 0.5f64..2.0, aspect in 0.4f64..1.0) {
        let d = domain(ShapeSpec::rect(w, w * aspect, 12.0 / w));
        let grid = geometric_q_grid(0.5, 0.02, 0.5).unwrap();
        let recs = q_sweep(&d, 2.0, &grid, &cfg()).unwrap();
        prop_assert!(is_monotone(&recs));
        prop_assert!(recs.iter().all(|r| r.bound_x4b_ok && r.bound_a1_ok));
        prop_assert!(recs.iter().all(|r| r.cone_bound_ok != Some(false)));
    }
}
