mod common;

use std::f64::consts::PI;

use common::adaptive;
use gbhe_harness::{CaseName, ManufacturedCase, ModelParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Hand-written `(g, g')` and spatial frequency for the 2D cases.
fn time_factor(case: CaseName, t: f64) -> (f64, f64) {
    match case {
        CaseName::Sol1 => (t.powi(3) - t * t + 1.0, 3.0 * t * t - 2.0 * t),
        CaseName::Sol2 => (t.powf(1.5), 1.5 * t.sqrt()),
        _ => unreachable!(),
    }
}

fn freq(case: CaseName) -> f64 {
    if case == CaseName::Sol2 {
        2.0 * PI
    } else {
        PI
    }
}

/// Continuous residual of the exact solution against the case forcing, with
/// the convolution and the Caputo derivative integrated numerically.
fn residual(case: CaseName, p: &ModelParams, x: [f64; 2], t: f64) -> (f64, f64) {
    let w = freq(case);
    let s = (w * x[0]).sin() * (w * x[1]).sin();
    let sx = w * (w * x[0]).cos() * (w * x[1]).sin();
    let sy = w * (w * x[0]).sin() * (w * x[1]).cos();
    let lap_s = -2.0 * w * w * s;
    let (g, dg) = time_factor(case, t);
    let u = g * s;
    // s = t - v^2 turns (t - s)^{-1/2} ds into 2 dv
    let root = t.sqrt();
    let conv = |h: &dyn Fn(f64) -> f64| adaptive(&|v: f64| 2.0 * h(t - v * v), 0.0, root, 1e-15, 40);
    let ut = if p.caputo_mu > 0.0 {
        conv(&|r| time_factor(case, r).1) / libm::tgamma(0.5) * s
    } else {
        dg * s
    };
    let memory = if p.eta != 0.0 { p.eta * lap_s * conv(&|r| time_factor(case, r).0) } else { 0.0 };
    let ud = u.powi(p.delta as i32);
    let lhs = ut + p.alpha * ud * g * (sx + sy) - p.nu * g * lap_s - memory - p.beta * u * (1.0 - ud) * (ud - p.gamma);
    let f = ManufacturedCase::new(case).forcing(p, x, t);
    (f - lhs, f.abs().max(1.0))
}

#[test]
fn exact_solutions_satisfy_the_equation() {
    let mut rng = StdRng::seed_from_u64(11);
    for case in [CaseName::Sol1, CaseName::Sol2] {
        for eta in [0.0, 1.0] {
            for mu in [0.0, 0.5] {
                for delta in [1, 2] {
                    let p = ModelParams {
                        alpha: 0.7,
                        beta: 1.3,
                        gamma: 0.4,
                        delta,
                        nu: 0.9,
                        eta,
                        caputo_mu: mu,
                    };
                    let tol = if eta != 0.0 || mu != 0.0 { 1e-8 } else { 1e-10 };
                    for _ in 0..20 {
                        let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                        let t = rng.random_range(0.01..1.0);
                        let (r, scale) = residual(case, &p, x, t);
                        assert!(r.abs() <= tol * scale, "{case} eta={eta} mu={mu} delta={delta} x={x:?} t={t}: {r:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn convolution_identities() {
    let s2 = ManufacturedCase::new(CaseName::Sol2);
    // B(1/2, 5/2) = 3 pi / 8
    assert!((s2.time_convolution(1.0) - 3.0 * PI / 8.0).abs() < 1e-14);
    // monomial m = 0 gives 2 sqrt(t)
    let s1 = ManufacturedCase::new(CaseName::Sol1);
    let t: f64 = 0.36;
    let direct = adaptive(&|v: f64| 2.0 * s1.time(t - v * v), 0.0, t.sqrt(), 1e-15, 40);
    assert!((s1.time_convolution(t) - direct).abs() < 1e-12);
    for c in [CaseName::Sol1, CaseName::Sol2] {
        assert_eq!(ManufacturedCase::new(c).time_convolution(0.0), 0.0);
    }
}

#[test]
fn caputo_identities() {
    let s2 = ManufacturedCase::new(CaseName::Sol2);
    for t in [0.25f64, 1.0, 3.0] {
        assert!((s2.time_caputo_half(t) - 0.75 * PI.sqrt() * t).abs() < 1e-13);
    }
    // d^{1/2} t = 2 sqrt(t) / sqrt(pi) through the monomial rule Gamma(2) / Gamma(3/2)
    let t: f64 = 0.49;
    let rule = libm::tgamma(2.0) / libm::tgamma(1.5) * t.sqrt();
    assert!((rule - 2.0 * t.sqrt() / PI.sqrt()).abs() < 1e-14);
    // constants are annihilated: g = t^3 - t^2 + 1 differs from t^3 - t^2 only by 1
    let s1 = ManufacturedCase::new(CaseName::Sol1);
    let no_const = libm::tgamma(4.0) / libm::tgamma(3.5) * t.powf(2.5) - libm::tgamma(3.0) / libm::tgamma(2.5) * t.powf(1.5);
    assert!((s1.time_caputo_half(t) - no_const).abs() < 1e-14);
}

#[test]
fn smooth_case_matches_quadrature() {
    let c = ManufacturedCase::new(CaseName::Smooth1d);
    for t in [0.1f64, 0.5, 1.0] {
        let root: f64 = t.sqrt();
        let conv = adaptive(&|v: f64| 2.0 * (t - v * v).exp(), 0.0, root, 1e-15, 40);
        assert!((c.time_convolution(t) - conv).abs() < 1e-12 * conv);
        let cap = conv / PI.sqrt();
        assert!((c.time_caputo_half(t) - cap).abs() < 1e-12 * cap);
    }
}
