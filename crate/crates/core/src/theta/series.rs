use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Modulus and rank. Periods of the small lattice are `1/r` and `tau/r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub tau: C64,
    pub r: usize,
    /// series runs over `|n| <= truncation` after reduction into the strip
    pub truncation: usize,
}

impl ThetaParams {
    pub fn new(tau: C64, r: usize) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(Error::InvalidInput(format!("Im tau must be positive, got {tau}")));
        }
        if tau.im < 0.05 {
            return Err(Error::TauDegenerate(tau.im));
        }
        if r == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        // after reduction |Im w| <= Im tau / 2, so term n is bounded by exp(-pi Im tau (n^2 - n))
        let mut n = 1usize;
        while (-PI * tau.im * ((n * n - n) as f64)).exp() >= 1e-18 {
            n += 1;
        }
        Ok(ThetaParams { tau, r, truncation: n })
    }

    pub fn q(&self) -> C64 {
        (2.0 * PI * I / self.r as f64).exp()
    }

    pub fn omega(&self) -> (C64, C64) {
        let r = self.r as f64;
        (C64::new(1.0 / r, 0.0), self.tau / r)
    }

    /// Skew coordinates `(u, v)` with `z = (u + v tau) / r`.
    pub fn skew(&self, z: C64) -> (f64, f64) {
        let r = self.r as f64;
        let v = r * z.im / self.tau.im;
        (r * z.re - v * self.tau.re, v)
    }

    pub fn from_skew(&self, u: f64, v: f64) -> C64 {
        (self.tau * v + u) / self.r as f64
    }
}

/// `theta(w) = exp(e) * v` with `w` reduced into `|Im w| <= Im tau / 2`, `|Re w| <= 1/2`.
pub fn theta_parts(w: C64, p: &ThetaParams) -> (C64, C64) {
    let tau = p.tau;
    let l = (w.im / tau.im).round();
    let w1 = w - tau * l;
    let w0 = w1 - w1.re.round();
    // theta(w0 + l tau) = exp(-pi i l^2 tau - 2 pi i l w0) theta(w0)
    let e = -PI * I * (l * l) * tau - 2.0 * PI * I * l * w0;
    let n = p.truncation as i64;
    let mut s = C64::new(1.0, 0.0);
    for k in 1..=n {
        let kf = k as f64;
        let a = (PI * I * kf * kf * tau).exp();
        let b = (2.0 * PI * I * kf * w0).exp();
        s += a * (b + 1.0 / b);
    }
    (e, s)
}

pub fn riemann_theta(z: C64, p: &ThetaParams) -> C64 {
    let (e, v) = theta_parts(z, p);
    e.exp() * v
}

/// Plain truncated sum, without reduction.
pub fn riemann_theta_series(z: C64, tau: C64, n: usize) -> C64 {
    (-(n as i64)..=n as i64)
        .map(|k| {
            let k = k as f64;
            (PI * I * k * k * tau + 2.0 * PI * I * k * z).exp()
        })
        .sum()
}

fn check(k: usize, j: usize, r: usize) -> Result<()> {
    if k >= r || j >= r {
        return Err(Error::IndexOutOfRange(format!("(k, j) = ({k}, {j}) with r = {r}")));
    }
    Ok(())
}

/// Shift of `theta_{k,j}`: `(k + j tau) / r`.
pub(crate) fn odd_shift(k: usize, j: usize, p: &ThetaParams) -> C64 {
    (p.tau * j as f64 + k as f64) / p.r as f64
}

/// Shift of `xi_{k,j}`: `(2k - 1 + 2j tau - tau) / 2r`.
pub(crate) fn even_shift(k: usize, j: usize, p: &ThetaParams) -> C64 {
    (p.tau * (2.0 * j as f64 - 1.0) + (2.0 * k as f64 - 1.0)) / (2.0 * p.r as f64)
}

pub fn theta_kj(z: C64, k: usize, j: usize, p: &ThetaParams) -> Result<C64> {
    check(k, j, p.r)?;
    Ok(riemann_theta(z + odd_shift(k, j, p), p))
}

pub fn xi_kj(z: C64, k: usize, j: usize, p: &ThetaParams) -> Result<C64> {
    check(k, j, p.r)?;
    Ok(riemann_theta(z + even_shift(k, j, p), p))
}

/// `theta'(w) / theta(w)`.
pub fn theta_log_derivative(w: C64, p: &ThetaParams) -> C64 {
    let tau = p.tau;
    let l = (w.im / tau.im).round();
    let w1 = w - tau * l;
    let w0 = w1 - w1.re.round();
    let mut s = C64::new(1.0, 0.0);
    let mut ds = C64::new(0.0, 0.0);
    for k in 1..=p.truncation as i64 {
        let kf = k as f64;
        let a = (PI * I * kf * kf * tau).exp();
        let b = (2.0 * PI * I * kf * w0).exp();
        s += a * (b + 1.0 / b);
        ds += a * (b - 1.0 / b) * (2.0 * PI * I * kf);
    }
    -2.0 * PI * I * l + ds / s
}
