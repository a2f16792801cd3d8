use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::series::{even_shift, odd_shift, theta_parts, ThetaParams};
use crate::error::{Error, Result};
use crate::kernel::{CMatrix, PathSpec, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Exclusion radius around punctures and zeros of the `f_j`.
pub const PUNCTURE_RADIUS: f64 = 1e-3;

pub fn rho(j: usize, r: usize) -> f64 {
    if r % 2 == 1 {
        (r as f64 - 1.0) / 2.0 - j as f64
    } else {
        r as f64 / 2.0 - j as f64
    }
}

/// `(I1, I2)`: `I1 = diag(q^j)`, `I2` the cyclic shift `(I2 F)_j = F_{j+1}`.
pub fn i_matrices(r: usize) -> (CMatrix, CMatrix) {
    let q = (2.0 * PI * I / r as f64).exp();
    let i1 = CMatrix::diag(&(0..r).map(|j| q.powu(j as u32)).collect::<Vec<_>>());
    let mut i2 = CMatrix::zeros(r);
    for j in 0..r {
        i2[(j, (j + 1) % r)] = C64::new(1.0, 0.0);
    }
    (i1, i2)
}

/// Punctures sit at `u, v in 1/2 + Z`; for even rank the `f_j` also vanish at `u in 1/2 + Z, v in Z`.
pub fn singular_points_near(p: &ThetaParams, a: C64, b: C64, radius: f64) -> Vec<C64> {
    let (ua, va) = p.skew(a);
    let (ub, vb) = p.skew(b);
    let step_v = if p.r % 2 == 0 { 0.5 } else { 1.0 };
    let offset_v = if p.r % 2 == 0 { 0.0 } else { 0.5 };
    let mut out = vec![];
    let u0 = (ua.min(ub) - 1.5).floor() as i64;
    let u1 = (ua.max(ub) + 1.5).ceil() as i64;
    let v0 = ((va.min(vb) - 1.5) / step_v).floor() as i64;
    let v1 = ((va.max(vb) + 1.5) / step_v).ceil() as i64;
    for iu in u0..=u1 {
        for iv in v0..=v1 {
            let c = p.from_skew(iu as f64 + 0.5, iv as f64 * step_v + offset_v);
            if segment_distance(a, b, c) < radius {
                out.push(c);
            }
        }
    }
    out
}

pub(crate) fn segment_distance(a: C64, b: C64, c: C64) -> f64 {
    let d = b - a;
    if d.norm() == 0.0 {
        return (c - a).norm();
    }
    let t = (((c - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - c).norm()
}

pub fn puncture_distance(p: &ThetaParams, z: C64) -> f64 {
    let (u, v) = p.skew(z);
    let (u0, v0) = ((u - 0.5).round() + 0.5, (v - 0.5).round() + 0.5);
    let mut best = f64::INFINITY;
    for du in -1..=1 {
        for dv in -1..=1 {
            best = best.min((z - p.from_skew(u0 + du as f64, v0 + dv as f64)).norm());
        }
    }
    best
}

/// `f_j = exp(e) * v`.
fn f_parts(z: C64, j: usize, p: &ThetaParams) -> (C64, C64) {
    let r = p.r;
    let tau = p.tau;
    let mut pre = C64::new(0.0, 0.0);
    let mut e = C64::new(0.0, 0.0);
    let mut v = C64::new(1.0, 0.0);
    let mut mul = |w: C64, power: i32| {
        let (a, b) = theta_parts(w, p);
        e += a * power as f64;
        v *= b.powi(power);
    };
    if r % 2 == 1 {
        let (jf, rf) = (j as f64, r as f64);
        pre = 2.0 * PI * I * tau * (-jf * rf * (rf - 1.0) / 2.0 + (rf - 1.0) * jf * (jf + 1.0) / 2.0);
        let rho_t = tau * rho(j, r);
        for k in 0..r {
            let s = odd_shift(k, j, p);
            mul(z + s, r as i32 - 2);
            mul(z + s + rho_t, 1);
            for l in (0..r).filter(|&l| l != j) {
                mul(z + odd_shift(k, l, p), -1);
            }
        }
    } else {
        // G_J with the numerator shifted by h = -tau/2r, J = j+1 mod r, scaled so
        // that G_J(z + tau/r) = G_{J+1}(z) along the whole cycle
        let jj = (j + 1) % r;
        let rf = r as f64;
        for i in 0..jj {
            let fi = i as f64;
            pre += -2.0 * PI * I * (-tau / 2.0 + tau * (rf * (rf / 2.0 - fi - 1.0)) + tau * (fi + 1.0));
        }
        let h = -tau / (2.0 * rf);
        let rho_t = tau * rho(jj, r);
        for k in 0..r {
            let s = even_shift(k, jj, p);
            mul(z + h + s, r as i32 - 1);
            mul(z + h + s + rho_t, 1);
            for l in 0..r {
                mul(z + even_shift(k, l, p), -1);
            }
        }
    }
    (e + pre, v)
}

pub fn f_component(z: C64, j: usize, p: &ThetaParams) -> Result<C64> {
    if j >= p.r {
        return Err(Error::IndexOutOfRange(format!("j = {j} with r = {}", p.r)));
    }
    if puncture_distance(p, z) < PUNCTURE_RADIUS {
        return Err(Error::Pole { at: z });
    }
    let (e, v) = f_parts(z, j, p);
    Ok(e.exp() * v)
}

/// Unchecked evaluation for local expansions near punctures.
pub fn f_component_raw(z: C64, j: usize, p: &ThetaParams) -> C64 {
    let (e, v) = f_parts(z, j, p);
    e.exp() * v
}

pub fn f_vector(z: C64, p: &ThetaParams) -> Result<Vec<C64>> {
    (0..p.r).map(|j| f_component(z, j, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchAnchor {
    pub base: C64,
    /// waypoints of the continuation path, starting at `base`
    pub path: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSample {
    pub z: C64,
    /// `s_i` with `s_i^r = f_i`
    pub values: Vec<C64>,
    pub branch_anchor: BranchAnchor,
}

impl SectionSample {
    pub fn root_residual(&self, p: &ThetaParams) -> Result<f64> {
        let f = f_vector(self.z, p)?;
        Ok(self
            .values
            .iter()
            .zip(&f)
            .map(|(s, f)| (s.powu(p.r as u32) - f).norm() / f.norm())
            .fold(0.0, f64::max))
    }
}

/// Basic section with branches fixed at the anchor `z = 0`: `s_0(0)` is the principal root and
/// `s_j(0)` is `s_0` continued along `u = 0` up to `j tau / r`.
#[derive(Debug, Clone)]
pub struct BasicSection {
    pub params: ThetaParams,
    anchor: Vec<C64>,
}

impl BasicSection {
    pub fn new(params: &ThetaParams) -> Result<Self> {
        let p = *params;
        let r = p.r;
        let root = |f: C64| f.powf(1.0 / r as f64);
        let f0 = f_component(C64::new(0.0, 0.0), 0, &p)?;
        let mut s0 = root(f0);
        let mut anchor = vec![s0];
        let mut z = C64::new(0.0, 0.0);
        for _ in 1..r {
            let next = z + p.tau / r as f64;
            s0 = continue_scalar(&p, 0, z, next, s0)?;
            anchor.push(s0);
            z = next;
        }
        Ok(BasicSection { params: p, anchor })
    }

    pub fn anchor_sample(&self) -> SectionSample {
        SectionSample {
            z: C64::new(0.0, 0.0),
            values: self.anchor.clone(),
            branch_anchor: BranchAnchor {
                base: C64::new(0.0, 0.0),
                path: vec![C64::new(0.0, 0.0)],
            },
        }
    }

    /// Route from the anchor: up `u = 0` to a row `v in Z/2 + 1/4`, across, then to `z`.
    pub fn route(&self, z: C64) -> Vec<C64> {
        let p = &self.params;
        let (u, v) = p.skew(z);
        let row = (2.0 * v).floor() / 2.0 + 0.25;
        let mut way = vec![C64::new(0.0, 0.0)];
        for w in [p.from_skew(0.0, row), p.from_skew(u, row), z] {
            if (w - *way.last().unwrap()).norm() > 1e-15 {
                way.push(w);
            }
        }
        way
    }

    pub fn at(&self, z: C64) -> Result<SectionSample> {
        let way = self.route(z);
        if way.len() == 1 {
            return Ok(self.anchor_sample());
        }
        self.along(&PathSpec::new(way)?)
    }

    /// Continuation along `path`, which must start at the anchor.
    pub fn along(&self, path: &PathSpec) -> Result<SectionSample> {
        if path.start().norm() > 1e-15 {
            return Err(Error::InvalidInput("continuation path must start at the anchor z = 0".into()));
        }
        self.continue_path(&self.anchor_sample(), path)
    }

    pub fn continue_path(&self, from: &SectionSample, path: &PathSpec) -> Result<SectionSample> {
        if (path.start() - from.z).norm() > 1e-12 * (1.0 + from.z.norm()) {
            return Err(Error::InvalidInput("path does not start at the sample point".into()));
        }
        let mut s = from.clone();
        for (_, b) in path.segments() {
            s = self.continue_to(&s, b)?;
        }
        Ok(s)
    }

    /// Straight-line continuation from a sample.
    pub fn continue_to(&self, from: &SectionSample, to: C64) -> Result<SectionSample> {
        let p = &self.params;
        if let Some(&c) = singular_points_near(p, from.z, to, PUNCTURE_RADIUS).first() {
            return Err(Error::BranchObstruction { at: c });
        }
        let values = continue_vector(p, from.z, to, &from.values)?;
        let mut path = from.branch_anchor.path.clone();
        path.push(to);
        Ok(SectionSample {
            z: to,
            values,
            branch_anchor: BranchAnchor {
                base: from.branch_anchor.base,
                path,
            },
        })
    }
}

fn continue_scalar(p: &ThetaParams, j: usize, a: C64, b: C64, s: C64) -> Result<C64> {
    Ok(continue_components(p, &[j], a, b, &[s])?[0])
}

fn continue_vector(p: &ThetaParams, a: C64, b: C64, s: &[C64]) -> Result<Vec<C64>> {
    let js: Vec<usize> = (0..p.r).collect();
    continue_components(p, &js, a, b, s)
}

/// Continues `s_j = f_j^{1/r}` from `a` to `b` in steps with `|f_new / f_old - 1| <= 1/2`.
fn continue_components(p: &ThetaParams, js: &[usize], a: C64, b: C64, s: &[C64]) -> Result<Vec<C64>> {
    let inv_r = 1.0 / p.r as f64;
    let parts = |z: C64| js.iter().map(|&j| f_parts(z, j, p)).collect::<Vec<_>>();
    let mut cur = parts(a);
    let mut vals = s.to_vec();
    let mut t = 0.0_f64;
    let mut h: f64 = 1.0 / 16.0;
    while t < 1.0 {
        h = h.min(1.0 - t);
        loop {
            let t1 = if h >= 1.0 - t { 1.0 } else { t + h };
            let z1 = a + (b - a) * t1;
            let next = parts(z1);
            let ratios: Vec<C64> = cur
                .iter()
                .zip(&next)
                .map(|(o, n)| (n.0 - o.0).exp() * (n.1 / o.1))
                .collect();
            if ratios.iter().all(|q| (q - 1.0).norm() <= 0.5) {
                for (v, q) in vals.iter_mut().zip(&ratios) {
                    *v *= q.powf(inv_r);
                }
                cur = next;
                t = t1;
                h *= 1.5;
                break;
            }
            h *= 0.5;
            if h < 1e-12 {
                return Err(Error::BranchObstruction { at: z1 });
            }
        }
    }
    Ok(vals)
}

pub fn basic_section(z: C64, params: &ThetaParams, path: &PathSpec) -> Result<SectionSample> {
    if (path.end() - z).norm() > 1e-12 * (1.0 + z.norm()) {
        return Err(Error::InvalidInput("path does not end at z".into()));
    }
    BasicSection::new(params)?.along(path)
}
