//! Manufactured solutions `u = g(t) s(x)` with closed-form forcings,
//! including the weakly singular memory term and the order-1/2 Caputo
//! derivative.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use gbhe_core::analysis::ExactSolution;
use gbhe_core::mesh::Point;
use libm::{erf, tgamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    /// `(t^3 - t^2 + 1) sin(pi x) sin(pi y)` on the unit square.
    Sol1,
    /// `t^{3/2} sin(2 pi x) sin(2 pi y)` on the unit square.
    Sol2,
    /// `e^t sin(pi x)` on the unit interval; analytic in time.
    Smooth1d,
    /// Zero data, zero forcing.
    Zero,
}

impl CaseName {
    pub const ALL: [CaseName; 4] = [CaseName::Sol1, CaseName::Sol2, CaseName::Smooth1d, CaseName::Zero];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::Sol1 => "sol1",
            CaseName::Sol2 => "sol2",
            CaseName::Smooth1d => "smooth1d",
            CaseName::Zero => "zero",
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case '{s}' (expected sol1, sol2, smooth1d or zero)"))
    }
}

/// Coefficients of the model as seen by the forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: u32,
    pub nu: f64,
    pub eta: f64,
    /// Caputo order; only `0` and `1/2` have closed forms here.
    pub caputo_mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub name: CaseName,
}

impl ManufacturedCase {
    pub fn new(name: CaseName) -> Self {
        Self { name }
    }

    pub fn dim(&self) -> usize {
        match self.name {
            CaseName::Smooth1d => 1,
            _ => 2,
        }
    }

    pub fn time(&self, t: f64) -> f64 {
        match self.name {
            CaseName::Sol1 => t * t * t - t * t + 1.0,
            CaseName::Sol2 => t * t.sqrt(),
            CaseName::Smooth1d => t.exp(),
            CaseName::Zero => 0.0,
        }
    }

    pub fn time_derivative(&self, t: f64) -> f64 {
        match self.name {
            CaseName::Sol1 => 3.0 * t * t - 2.0 * t,
            CaseName::Sol2 => 1.5 * t.sqrt(),
            CaseName::Smooth1d => t.exp(),
            CaseName::Zero => 0.0,
        }
    }

    /// `int_0^t (t - s)^{-1/2} g(s) ds`.
    pub fn time_convolution(&self, t: f64) -> f64 {
        // int_0^t (t - s)^{-1/2} s^m ds = B(1/2, m + 1) t^{m + 1/2}
        let mono = |m: f64| tgamma(0.5) * tgamma(m + 1.0) / tgamma(m + 1.5) * t.powf(m + 0.5);
        match self.name {
            CaseName::Sol1 => mono(3.0) - mono(2.0) + mono(0.0),
            CaseName::Sol2 => mono(1.5),
            CaseName::Smooth1d => t.exp() * PI.sqrt() * erf(t.sqrt()),
            CaseName::Zero => 0.0,
        }
    }

    /// Caputo derivative of order `1/2` of `g`.
    pub fn time_caputo_half(&self, t: f64) -> f64 {
        // d^{1/2} t^m = Gamma(m + 1) / Gamma(m + 1/2) t^{m - 1/2}
        let mono = |m: f64| tgamma(m + 1.0) / tgamma(m + 0.5) * t.powf(m - 0.5);
        match self.name {
            CaseName::Sol1 => mono(3.0) - mono(2.0),
            CaseName::Sol2 => mono(1.5),
            CaseName::Smooth1d => t.exp() * erf(t.sqrt()),
            CaseName::Zero => 0.0,
        }
    }

    fn freq(&self) -> f64 {
        match self.name {
            CaseName::Sol2 => 2.0 * PI,
            _ => PI,
        }
    }

    pub fn space(&self, x: Point) -> f64 {
        let w = self.freq();
        match self.dim() {
            1 => (w * x[0]).sin(),
            _ => (w * x[0]).sin() * (w * x[1]).sin(),
        }
    }

    pub fn space_grad(&self, x: Point) -> Point {
        let w = self.freq();
        match self.dim() {
            1 => [w * (w * x[0]).cos(), 0.0],
            _ => [
                w * (w * x[0]).cos() * (w * x[1]).sin(),
                w * (w * x[0]).sin() * (w * x[1]).cos(),
            ],
        }
    }

    /// `lambda` with `Lap s = -lambda s`.
    pub fn laplace_factor(&self) -> f64 {
        let w = self.freq();
        w * w * self.dim() as f64
    }

    pub fn value(&self, x: Point, t: f64) -> f64 {
        self.time(t) * self.space(x)
    }

    pub fn gradient(&self, x: Point, t: f64) -> Point {
        let g = self.time(t);
        let s = self.space_grad(x);
        [g * s[0], g * s[1]]
    }

    /// `f = d_t u + alpha u^delta sum_i u_{x_i} - nu Lap u - eta K * Lap u - beta c(u)`,
    /// with `d_t` the Caputo derivative when `caputo_mu > 0`.
    pub fn forcing(&self, p: &ModelParams, x: Point, t: f64) -> f64 {
        if self.name == CaseName::Zero {
            return 0.0;
        }
        let g = self.time(t);
        let s = self.space(x);
        let gs = self.space_grad(x);
        let u = g * s;
        let lambda = self.laplace_factor();
        let dt = if p.caputo_mu > 0.0 { self.time_caputo_half(t) } else { self.time_derivative(t) };
        let sum_grad = g * (gs[0] + if self.dim() == 2 { gs[1] } else { 0.0 });
        let ud = u.powi(p.delta as i32);
        let reaction = u * (1.0 - ud) * (ud - p.gamma);
        let memory = if p.eta != 0.0 { p.eta * lambda * s * self.time_convolution(t) } else { 0.0 };
        dt * s + p.alpha * ud * sum_grad + p.nu * lambda * u + memory - p.beta * reaction
    }
}

impl ExactSolution for ManufacturedCase {
    fn value(&self, x: Point, t: f64) -> f64 {
        ManufacturedCase::value(self, x, t)
    }

    fn grad(&self, x: Point, t: f64) -> Point {
        self.gradient(x, t)
    }
}
