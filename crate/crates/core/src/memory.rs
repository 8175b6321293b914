//! Weakly singular memory kernels and the space–time convolution weights of
//! the DG time discretization.
//!
//! Entries are computed by substituting `tau = t - s`, which turns the inner
//! integral into `c^{1-sigma} int_0^1 y^{-sigma} phi(t - c y) dy` and leaves an
//! outer integrand of the form `(t - c0)^{1-sigma} q(t)` with `q` polynomial.
//! Both are integrated by Gauss–Jacobi rules, exactly up to roundoff.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polybasis::{gauss_jacobi_singular, gauss_jacobi_unit, gauss_legendre, legendre_values};
use crate::timestepper::TimePartition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    None,
    /// `K(t) = t^{-sigma}`, `0 < sigma < 1`.
    Power { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Memory strength `eta >= 0`.
    pub eta: f64,
    /// Caputo order `mu` in `[0, 1)`; zero selects the classical derivative.
    pub caputo_order: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl KernelSpec {
    pub fn none() -> Self {
        Self {
            kind: KernelKind::None,
            eta: 0.0,
            caputo_order: 0.0,
        }
    }

    pub fn power(sigma: f64, eta: f64) -> Result<Self> {
        let k = Self {
            kind: KernelKind::Power { sigma },
            eta,
            caputo_order: 0.0,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn with_caputo(mut self, mu: f64) -> Result<Self> {
        self.caputo_order = mu;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelKind::Power { sigma } = self.kind {
            if !(sigma > 0.0 && sigma < 1.0) {
                return Err(Error::InvalidArgument(format!("kernel exponent {sigma} outside (0, 1)")));
            }
        }
        if !(self.eta >= 0.0) {
            return Err(Error::InvalidArgument(format!("memory strength must be >= 0, got {}", self.eta)));
        }
        if !(self.caputo_order >= 0.0 && self.caputo_order < 1.0) {
            return Err(Error::InvalidArgument(format!("Caputo order {} outside [0, 1)", self.caputo_order)));
        }
        Ok(())
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Power { sigma } => Some(sigma),
            KernelKind::None => None,
        }
    }

    /// True when the convolution term contributes.
    pub fn has_memory(&self) -> bool {
        self.eta > 0.0 && self.sigma().is_some()
    }

    pub fn is_caputo(&self) -> bool {
        self.caputo_order > 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Power { sigma } => t.powf(-sigma),
            KernelKind::None => 0.0,
        }
    }

    /// `C_K = (int_0^T |K(t)| dt)^2`.
    pub fn c_k(&self, t_final: f64) -> f64 {
        match self.kind {
            KernelKind::Power { sigma } => (t_final.powf(1.0 - sigma) / (1.0 - sigma)).powi(2),
            KernelKind::None => 0.0,
        }
    }
}

/// Dense `(p_n + 1) x (p_j + 1)` block coupling source interval `j` to
/// target interval `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBlock {
    pub target: usize,
    pub source: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MomentBlock {
    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.data[l * self.cols + m]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaputoBlock {
    /// Acts on the temporal coefficients of the source interval through
    /// their time derivative.
    pub smooth: MomentBlock,
    /// Multiplies the jump of the discrete solution at the start of the
    /// source interval.
    pub jump: Vec<f64>,
}

/// Points and weights for `int_lo^hi (t - c0)^e q(t) dt` with `c0 <= lo`
/// and `q` a polynomial of degree below `2n`.
fn power_weight_rule(c0: f64, lo: f64, hi: f64, e: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let len = hi - lo;
    let gap = lo - c0;
    let shifted = |from: f64, to: f64, sign: f64, rule: &crate::polybasis::QuadratureRule| {
        let l = to - from;
        let scale = sign * l.powf(e + 1.0);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(move |(p, w)| (from + l * p[0], scale * w))
            .collect::<Vec<_>>()
    };
    if gap <= 1e-14 * len {
        let rule = gauss_jacobi_unit(n, e)?;
        Ok(shifted(lo, hi, 1.0, &rule))
    } else if gap <= len {
        let rule = gauss_jacobi_unit(n, e)?;
        let mut pts = shifted(c0, hi, 1.0, &rule);
        pts.extend(shifted(c0, lo, -1.0, &rule));
        Ok(pts)
    } else {
        // the singularity sits at least one interval length away
        let rule = gauss_legendre(n + 10).mapped_to(lo, hi);
        Ok(rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| (p[0], w * (p[0] - c0).powf(e)))
            .collect())
    }
}

/// `int_{J_n} phi_l(t) int_{J_j cap [0,t]} (t - s)^{-sigma} phi_m(s) ds dt`.
fn raw_moments(part: &TimePartition, n: usize, j: usize, sigma: f64) -> Result<MomentBlock> {
    if j == 0 || j > n || n > part.n_intervals() {
        return Err(Error::InvalidArgument(format!("moment block needs 1 <= j <= n <= N, got n={n}, j={j}")));
    }
    let (an, bn) = part.interval(n);
    let (aj, bj) = part.interval(j);
    let (pn, pj) = (part.degree(n), part.degree(j));
    let inner = gauss_jacobi_singular(pj / 2 + 2, sigma)?;
    let n_outer = (pn + pj) / 2 + 2;
    let mut data = vec![0.0; (pn + 1) * (pj + 1)];
    let mut phi_n = vec![0.0; pn + 1];
    let mut phi_j = vec![0.0; pj + 1];
    let mut pm = vec![0.0; pj + 1];
    let ref_n = |t: f64| (2.0 * t - an - bn) / (bn - an);
    let ref_j = |s: f64| (2.0 * s - aj - bj) / (bj - aj);
    let mut term = |c0: f64, sign: f64| -> Result<()> {
        for (t, w) in power_weight_rule(c0, an, bn, 1.0 - sigma, n_outer)? {
            legendre_values(pn, ref_n(t), &mut phi_n);
            let c = t - c0;
            pm.iter_mut().for_each(|v| *v = 0.0);
            for (y, wy) in inner.points.iter().zip(&inner.weights) {
                legendre_values(pj, ref_j(t - c * y[0]), &mut phi_j);
                for (a, b) in pm.iter_mut().zip(&phi_j) {
                    *a += wy * b;
                }
            }
            for l in 0..=pn {
                for m in 0..=pj {
                    data[l * (pj + 1) + m] += sign * w * phi_n[l] * pm[m];
                }
            }
        }
        Ok(())
    };
    term(aj, 1.0)?;
    if j < n {
        term(bj, -1.0)?;
    }
    Ok(MomentBlock {
        target: n,
        source: j,
        rows: pn + 1,
        cols: pj + 1,
        data,
    })
}

/// Convolution block `W^{(n,j)}` of the kernel (without the factor `eta`).
pub fn moment_block(part: &TimePartition, n: usize, j: usize, kernel: &KernelSpec) -> Result<MomentBlock> {
    match kernel.kind {
        KernelKind::Power { sigma } => raw_moments(part, n, j, sigma),
        KernelKind::None => Err(Error::InvalidArgument("moment block requested for an absent kernel".into())),
    }
}

/// All blocks `W^{(n,j)}`, `j = 1..=n`, computed in parallel.
pub fn moment_row(part: &TimePartition, n: usize, kernel: &KernelSpec) -> Result<Vec<MomentBlock>> {
    (1..=n).into_par_iter().map(|j| moment_block(part, n, j, kernel)).collect()
}

/// Moments of the Caputo derivative of order `mu` of the discrete solution
/// on interval `j`, tested on interval `n`.
pub fn caputo_block(part: &TimePartition, n: usize, j: usize, mu: f64) -> Result<CaputoBlock> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("Caputo order {mu} outside (0, 1)")));
    }
    let raw = raw_moments(part, n, j, mu)?;
    let g = 1.0 / libm::tgamma(1.0 - mu);
    let kj = part.step(j);
    let (rows, cols) = (raw.rows, raw.cols);
    // P_m' = sum over i < m with m - i odd of (2i + 1) P_i
    let mut smooth = vec![0.0; rows * cols];
    for l in 0..rows {
        for m in 0..cols {
            let mut s = 0.0;
            for i in (0..m).rev().step_by(2) {
                s += (2 * i + 1) as f64 * raw.get(l, i);
            }
            smooth[l * cols + m] = g * 2.0 / kj * s;
        }
    }
    let (an, bn) = part.interval(n);
    let (aj, _) = part.interval(j);
    let mut jump = vec![0.0; rows];
    let mut phi = vec![0.0; rows];
    for (t, w) in power_weight_rule(aj, an, bn, -mu, rows / 2 + 2)? {
        legendre_values(rows - 1, (2.0 * t - an - bn) / (bn - an), &mut phi);
        for (a, b) in jump.iter_mut().zip(&phi) {
            *a += g * w * b;
        }
    }
    Ok(CaputoBlock {
        smooth: MomentBlock {
            target: n,
            source: j,
            rows,
            cols,
            data: smooth,
        },
        jump,
    })
}

/// `eta sum_j sum_m W^{(n,j)}_{lm} (A U_m^{(j)})` for every target index `l`.
///
/// `actions[j - 1][m]` holds `A U_m^{(j)}` for history interval `j`.
pub fn history_accumulate(
    rows: usize,
    blocks: &[MomentBlock],
    actions: &[Vec<Vec<f64>>],
    eta: f64,
    n_dof: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; n_dof]; rows];
    if eta == 0.0 {
        return Ok(out);
    }
    for b in blocks {
        let act = actions.get(b.source - 1).ok_or(Error::MissingHistory(b.source))?;
        if act.len() != b.cols {
            return Err(Error::MissingHistory(b.source));
        }
        for (l, o) in out.iter_mut().enumerate().take(b.rows) {
            for (m, am) in act.iter().enumerate() {
                let w = eta * b.get(l, m);
                for (x, y) in o.iter_mut().zip(am) {
                    *x += w * y;
                }
            }
        }
    }
    Ok(out)
}

/// `sum_n sum_{j <= n} u_n W^{(n,j)}_{00} u_j`, the kernel's quadratic form on
/// piecewise constants. Nonnegative for a positive kernel.
pub fn memory_quadratic_form(part: &TimePartition, kernel: &KernelSpec, u: &[f64]) -> Result<f64> {
    if u.len() != part.n_intervals() {
        return Err(Error::InvalidArgument("one value per interval expected".into()));
    }
    let mut s = 0.0;
    for n in 1..=part.n_intervals() {
        for j in 1..=n {
            s += u[n - 1] * moment_block(part, n, j, kernel)?.get(0, 0) * u[j - 1];
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: KernelSpec = KernelSpec {
        kind: KernelKind::Power { sigma: 0.5 },
        eta: 1.0,
        caputo_order: 0.0,
    };

    /// Adaptive 7/15-point Gauss–Kronrod.
    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        const XK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.0,
        ];
        const WK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut k = WK[7] * f(c);
        let mut g = WG[3] * f(c);
        for i in 0..7 {
            let s = f(c - h * XK[i]) + f(c + h * XK[i]);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        let (k, g) = (k * h, g * h);
        if (k - g).abs() <= tol || depth == 0 {
            k
        } else {
            adaptive(f, a, c, 0.5 * tol, depth - 1) + adaptive(f, c, b, 0.5 * tol, depth - 1)
        }
    }

    /// Oracle for one block entry: `tau = v^q` removes the singularity of
    /// the inner integral, both levels integrated adaptively.
    fn oracle(part: &TimePartition, n: usize, j: usize, l: usize, m: usize, sigma: f64) -> f64 {
        let (an, bn) = part.interval(n);
        let (aj, bj) = part.interval(j);
        let phi = |p: usize, d: usize, x: f64| {
            let mut v = vec![0.0; p + 1];
            legendre_values(p, x, &mut v);
            v[d]
        };
        let q = 1.0 / (1.0 - sigma);
        let outer = |t: f64| {
            let hi = (t - aj).max(0.0).powf(1.0 / q);
            let lo = (t - bj.min(t)).max(0.0).powf(1.0 / q);
            let inner = |v: f64| q * phi(part.degree(j), m, (2.0 * (t - v.powf(q)) - aj - bj) / (bj - aj));
            phi(part.degree(n), l, (2.0 * t - an - bn) / (bn - an)) * adaptive(&inner, lo, hi, 1e-14, 30)
        };
        adaptive(&outer, an, bn, 1e-13, 30)
    }

    #[test]
    fn degree_zero_weights() {
        let part = TimePartition::uniform(3.0, 3, 0).unwrap();
        let w11 = moment_block(&part, 1, 1, &HALF).unwrap();
        assert!((w11.get(0, 0) - 4.0 / 3.0).abs() < 1e-14);
        let w21 = moment_block(&part, 2, 1, &HALF).unwrap();
        assert!((w21.get(0, 0) - 4.0 / 3.0 * (2f64.powf(1.5) - 2.0)).abs() < 1e-14);
        // closed form on a non-uniform partition
        let part = TimePartition::new(vec![0.0, 0.1, 0.35, 0.5, 1.0], vec![0; 4]).unwrap();
        let t = part.nodes();
        let f = |x: f64| 4.0 / 3.0 * x.max(0.0).powf(1.5);
        for n in 1..=4 {
            for j in 1..=n {
                let exact = if j == n {
                    f(t[n] - t[n - 1])
                } else {
                    f(t[n] - t[j - 1]) - f(t[n] - t[j]) - f(t[n - 1] - t[j - 1]) + f(t[n - 1] - t[j])
                };
                let w = moment_block(&part, n, j, &HALF).unwrap().get(0, 0);
                assert!((w - exact).abs() < 1e-13 * exact.abs().max(1e-3), "n={n} j={j}: {w} vs {exact}");
            }
        }
    }

    #[test]
    fn blocks_match_adaptive_oracle() {
        let part = TimePartition::new(vec![0.0, 0.2, 0.3, 0.7, 0.75, 1.6], vec![2, 1, 3, 2, 1]).unwrap();
        for sigma in [0.5, 0.3, 0.8] {
            let k = KernelSpec::power(sigma, 1.0).unwrap();
            for (n, j) in [(1, 1), (2, 1), (3, 2), (3, 3), (4, 3), (5, 1), (5, 4), (5, 5)] {
                let b = moment_block(&part, n, j, &k).unwrap();
                for l in 0..b.rows {
                    for m in 0..b.cols {
                        let o = oracle(&part, n, j, l, m, sigma);
                        let scale = b.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                        assert!(
                            (b.get(l, m) - o).abs() <= 1e-8 * scale,
                            "sigma={sigma} n={n} j={j} l={l} m={m}: {} vs {o}",
                            b.get(l, m)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_are_pure_and_positive() {
        let part = TimePartition::uniform(1.0, 6, 2).unwrap();
        for n in 1..=6 {
            let a = moment_row(&part, n, &HALF).unwrap();
            let b = moment_row(&part, n, &HALF).unwrap();
            assert_eq!(a, b);
            assert!(a[n - 1].get(0, 0) > 0.0);
            assert!(a.iter().all(|blk| blk.data.iter().all(|v| v.is_finite())));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let part = TimePartition::uniform(1.0, 3, 1).unwrap();
        assert!(moment_block(&part, 1, 2, &HALF).is_err());
        assert!(moment_block(&part, 2, 0, &HALF).is_err());
        assert!(moment_block(&part, 1, 1, &KernelSpec::none()).is_err());
        assert!(caputo_block(&part, 1, 1, 1.0).is_err());
        assert!(caputo_block(&part, 1, 1, 0.0).is_err());
        assert!(KernelSpec::power(1.0, 1.0).is_err());
        assert!(KernelSpec::power(0.5, -1.0).is_err());
        assert!(KernelSpec::none().with_caputo(1.0).is_err());
    }

    #[test]
    fn positive_kernel_on_random_sequences() {
        let steps: Vec<f64> = (0..10).map(|i| 0.05 + 0.03 * ((i * 7) % 5) as f64).collect();
        let mut nodes = vec![0.0];
        for s in &steps {
            nodes.push(nodes.last().unwrap() + s);
        }
        let part = TimePartition::new(nodes, vec![0; 10]).unwrap();
        let mut x: u64 = 12345;
        for _ in 0..50 {
            let u: Vec<f64> = (0..10)
                .map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
                })
                .collect();
            let q = memory_quadratic_form(&part, &HALF, &u).unwrap();
            let norm: f64 = u.iter().map(|v| v * v).sum();
            assert!(q >= -1e-10 * norm);
        }
    }

    #[test]
    fn c_k_diagnostic() {
        assert!((HALF.c_k(1.0) - 4.0).abs() < 1e-15);
        assert_eq!(KernelSpec::none().c_k(1.0), 0.0);
    }

    #[test]
    fn caputo_of_linear_function() {
        let part = TimePartition::uniform(1.0, 1, 1).unwrap();
        let b = caputo_block(&part, 1, 1, 0.5).unwrap();
        // t = (1 + xi)/2 on [0, 1], continuous at t = 0
        let u = [0.5, 0.5];
        let got = b.smooth.get(0, 0) * u[0] + b.smooth.get(0, 1) * u[1];
        let exact = 4.0 / (3.0 * std::f64::consts::PI.sqrt());
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn caputo_of_quadratic_across_intervals() {
        // u = t^2, exactly represented with p = 2 and continuous in time
        let part = TimePartition::new(vec![0.0, 0.5, 1.2], vec![2, 2]).unwrap();
        let coeffs = |j: usize| {
            let (a, b) = part.interval(j);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            // (c + h xi)^2 = c^2 + h^2/3 + 2ch P1 + (2h^2/3) P2
            [c * c + h * h / 3.0, 2.0 * c * h, 2.0 * h * h / 3.0]
        };
        let mu = 0.5;
        let n = 2;
        let (an, bn) = part.interval(n);
        let rate = libm::tgamma(3.0) / libm::tgamma(3.0 - mu);
        for l in 0..3 {
            let mut got = 0.0;
            for j in 1..=n {
                let b = caputo_block(&part, n, j, mu).unwrap();
                let u = coeffs(j);
                for m in 0..3 {
                    got += b.smooth.get(l, m) * u[m];
                }
            }
            let f = |t: f64| {
                let mut v = [0.0; 3];
                legendre_values(2, (2.0 * t - an - bn) / (bn - an), &mut v);
                rate * t.powf(2.0 - mu) * v[l]
            };
            let exact = adaptive(&f, an, bn, 1e-15, 40);
            assert!((got - exact).abs() < 1e-12, "l={l}: {got} vs {exact}");
        }
    }

    #[test]
    fn caputo_jump_weights() {
        let part = TimePartition::new(vec![0.0, 0.4, 1.0], vec![1, 1]).unwrap();
        let mu = 0.3;
        for j in 1..=2 {
            let b = caputo_block(&part, 2, j, mu).unwrap();
            let (an, bn) = part.interval(2);
            let c0 = part.interval(j).0;
            for l in 0..2 {
                let f = |t: f64| {
                    let xi = (2.0 * t - an - bn) / (bn - an);
                    (t - c0).powf(-mu) * if l == 0 { 1.0 } else { xi } / libm::tgamma(1.0 - mu)
                };
                let exact = adaptive(&f, an, bn, 1e-15, 40);
                assert!((b.jump[l] - exact).abs() < 1e-10, "j={j} l={l}");
            }
        }
    }

    #[test]
    fn history_accumulation() {
        let part = TimePartition::uniform(2.0, 2, 0).unwrap();
        let out = history_accumulate(1, &[], &[], 1.0, 3).unwrap();
        assert_eq!(out, vec![vec![0.0; 3]]);
        let blocks = vec![moment_block(&part, 2, 1, &HALF).unwrap()];
        let au = vec![vec![vec![1.0, 2.0, -1.0]]];
        let out = history_accumulate(1, &blocks, &au, 1.0, 3).unwrap();
        let w = 4.0 / 3.0 * (2f64.powf(1.5) - 2.0);
        for (a, b) in out[0].iter().zip([1.0, 2.0, -1.0]) {
            assert!((a - w * b).abs() < 1e-14);
        }
        let zero = history_accumulate(1, &blocks, &au, 0.0, 3).unwrap();
        assert!(zero[0].iter().all(|v| *v == 0.0));
        assert!(matches!(history_accumulate(1, &blocks, &[], 1.0, 3), Err(Error::MissingHistory(1))));
    }
}
