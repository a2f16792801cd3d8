//! Adaptive Gauss-Legendre quadrature along piecewise-linear contours.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::C64;
use crate::config::Tolerances;
use crate::error::{Error, Result};

const ORDER: usize = 10;
const MAX_DEPTH: usize = 40;
const NOISE_DEPTH: usize = 16;

/// Piecewise-linear contour through the waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    waypoints: Vec<C64>,
}

impl PathSpec {
    pub fn new(waypoints: Vec<C64>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two waypoints".into()));
        }
        if waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("consecutive waypoints coincide".into()));
        }
        Ok(PathSpec { waypoints })
    }

    pub fn segment(a: C64, b: C64) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// Closed polygon; the first point is repeated at the end.
    pub fn closed(mut pts: Vec<C64>) -> Result<Self> {
        if let Some(&first) = pts.first() {
            pts.push(first);
        }
        Self::new(pts)
    }

    pub fn waypoints(&self) -> &[C64] {
        &self.waypoints
    }

    pub fn start(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().unwrap()
    }

    pub fn reversed(&self) -> PathSpec {
        let mut w = self.waypoints.clone();
        w.reverse();
        PathSpec { waypoints: w }
    }

    pub fn then(&self, other: &PathSpec) -> PathSpec {
        let mut w = self.waypoints.clone();
        let rest = if other.start() == self.end() {
            &other.waypoints[1..]
        } else {
            &other.waypoints[..]
        };
        w.extend_from_slice(rest);
        PathSpec { waypoints: w }
    }

    pub fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
}

/// Legendre nodes and weights on [0, 1].
fn gauss_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((0.5 * (1.0 - x), 0.5 * w));
        }
        out
    })
}

pub fn integrate_path(mut f: impl FnMut(C64) -> C64, path: &PathSpec) -> Result<QuadResult> {
    integrate_path_try(|_, _, z| Ok(f(z)), path, &Tolerances::default())
}

/// Integrand receives the segment index, the local parameter in [0, 1] and the point.
pub fn integrate_path_try(
    mut f: impl FnMut(usize, f64, C64) -> Result<C64>,
    path: &PathSpec,
    tol: &Tolerances,
) -> Result<QuadResult> {
    let total_len = path.length();
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    for (seg, (a, b)) in path.segments().enumerate() {
        let share = (b - a).norm() / total_len;
        let r = integrate_segment(&mut f, seg, a, b, tol.quad * share)?;
        value += r.value;
        error += r.error;
    }
    Ok(QuadResult { value, error })
}

fn panel(
    f: &mut impl FnMut(usize, f64, C64) -> Result<C64>,
    seg: usize,
    a: C64,
    b: C64,
    t0: f64,
    t1: f64,
) -> Result<(C64, f64)> {
    let dz = (b - a) * (t1 - t0);
    let mut s = C64::new(0.0, 0.0);
    let mut mag = 0.0;
    for &(x, w) in gauss_rule() {
        let t = t0 + (t1 - t0) * x;
        let v = f(seg, t, a + (b - a) * t)?;
        if !super::is_finite(v) {
            return Err(Error::SingularPath { at: a + (b - a) * t });
        }
        s += v * w;
        mag += v.norm() * w;
    }
    Ok((s * dz, mag * dz.norm()))
}

fn integrate_segment(
    f: &mut impl FnMut(usize, f64, C64) -> Result<C64>,
    seg: usize,
    a: C64,
    b: C64,
    tol: f64,
) -> Result<QuadResult> {
    let eps = f64::EPSILON;
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    // stack of (t0, t1, depth, whole-panel estimate)
    let first = panel(f, seg, a, b, 0.0, 1.0)?;
    let mut stack = vec![(0.0, 1.0, 0usize, first)];
    while let Some((t0, t1, depth, (whole, mag))) = stack.pop() {
        let tm = 0.5 * (t0 + t1);
        let left = panel(f, seg, a, b, t0, tm)?;
        let right = panel(f, seg, a, b, tm, t1)?;
        let halves = left.0 + right.0;
        let est = (halves - whole).norm();
        let mut allowed = (tol * (t1 - t0)).max(50.0 * eps * mag);
        if depth >= NOISE_DEPTH {
            allowed = allowed.max(1e3 * eps * mag);
        }
        if est <= allowed {
            value += halves;
            error += est;
        } else if depth >= MAX_DEPTH {
            return Err(Error::SingularPath {
                at: a + (b - a) * tm,
            });
        } else {
            stack.push((t0, tm, depth + 1, left));
            stack.push((tm, t1, depth + 1, right));
        }
    }
    Ok(QuadResult { value, error })
}
