/// Legendre polynomials `P_0..=P_p` and their derivatives at `t`.
///
/// Three-term recurrence for the values; the derivatives use
/// `P'_{m+1} = P'_{m-1} + (2m+1) P_m`.
pub fn legendre_eval(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    v[0] = 1.0;
    if p >= 1 {
        v[1] = t;
        d[1] = 1.0;
    }
    for m in 1..p {
        let mf = m as f64;
        v[m + 1] = ((2.0 * mf + 1.0) * t * v[m] - mf * v[m - 1]) / (mf + 1.0);
        d[m + 1] = d[m - 1] + (2.0 * mf + 1.0) * v[m];
    }
    (v, d)
}

/// Values only; avoids the derivative recurrence in hot loops.
pub fn legendre_values(p: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if p >= 1 {
        out[1] = t;
    }
    for m in 1..p {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0) * t * out[m] - mf * out[m - 1]) / (mf + 1.0);
    }
}

/// Temporal basis of degree `p` on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalBasis {
    pub degree: usize,
}

impl TemporalBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self, t: f64) -> Vec<f64> {
        legendre_eval(self.degree, t).0
    }

    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        legendre_eval(self.degree, t).1
    }

    /// `int_{-1}^{1} P_m^2 dt`
    pub fn norm_sq(m: usize) -> f64 {
        2.0 / (2 * m + 1) as f64
    }
}
