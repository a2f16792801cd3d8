use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::C64;
use crate::theta::{theta_log_derivative, theta_parts, ThetaParams};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub nu: C64,
    pub mult: usize,
}

/// `D = sum m_i nu_i` on `C / (Z/r + tau Z/r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticDivisor {
    pub points: Vec<DivisorPoint>,
}

/// Representative of `z` in `[0,1) w1 + [0,1) w2`.
pub fn reduce(z: C64, p: &ThetaParams) -> C64 {
    let (u, v) = p.skew(z);
    let fix = |x: f64| {
        let y = x - x.floor();
        if y >= 1.0 - 1e-14 {
            0.0
        } else {
            y
        }
    };
    p.from_skew(fix(u), fix(v))
}

/// Distance between `a` and `b` modulo the small lattice.
pub fn lattice_distance(a: C64, b: C64, p: &ThetaParams) -> f64 {
    let d = reduce(a - b, p);
    let mut best = f64::INFINITY;
    for i in -1..=1 {
        for j in -1..=1 {
            best = best.min((d + p.from_skew(i as f64, j as f64)).norm());
        }
    }
    best
}

impl EllipticDivisor {
    pub fn new(points: Vec<DivisorPoint>, p: &ThetaParams) -> Result<Self> {
        if points.is_empty() || points.iter().any(|x| x.mult == 0) {
            return Err(Error::InvalidInput("divisor needs at least one point of positive multiplicity".into()));
        }
        let points: Vec<DivisorPoint> = points
            .into_iter()
            .map(|x| DivisorPoint {
                nu: reduce(x.nu, p),
                mult: x.mult,
            })
            .collect();
        for i in 0..points.len() {
            for j in 0..i {
                if lattice_distance(points[i].nu, points[j].nu, p) < 1e-6 {
                    return Err(Error::Basis(format!(
                        "divisor points {} and {} coincide modulo the lattice; give a multiplicity instead",
                        points[j].nu, points[i].nu
                    )));
                }
            }
        }
        Ok(EllipticDivisor { points })
    }

    pub fn simple(nus: &[C64], p: &ThetaParams) -> Result<Self> {
        Self::new(nus.iter().map(|&nu| DivisorPoint { nu, mult: 1 }).collect(), p)
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|x| x.mult).sum()
    }
}

/// `vartheta1(u) = theta(r u + (1 + tau)/2 | tau)`: simple zeros exactly on the small lattice.
fn vt1_parts(u: C64, p: &ThetaParams) -> (C64, C64) {
    theta_parts(u * p.r as f64 + (p.tau + 1.0) * 0.5, p)
}

pub fn vartheta1(u: C64, p: &ThetaParams) -> C64 {
    let (e, v) = vt1_parts(u, p);
    e.exp() * v
}

/// `vartheta1' / vartheta1`; shifts by `-2 pi i r` under `u -> u + tau/r`.
pub fn zeta1(u: C64, p: &ThetaParams) -> C64 {
    theta_log_derivative(u * p.r as f64 + (p.tau + 1.0) * 0.5, p) * p.r as f64
}

/// `prod vartheta1(x + num_k) / vartheta1(x)^den`.
fn quotient(x: C64, num: &[C64], den: i32, p: &ThetaParams) -> C64 {
    let (e0, v0) = vt1_parts(x, p);
    let mut e = -e0 * den as f64;
    let mut v = v0.powi(-den);
    for &s in num {
        let (a, b) = vt1_parts(x + s, p);
        e += a;
        v *= b;
    }
    e.exp() * v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisFunction {
    Constant,
    /// `zeta1(l - nu_i) - zeta1(l - nu_0)`
    ZetaDifference { i: usize },
    /// `exp(-2 pi i b l) vartheta1(x + e - d delta) vartheta1(x + delta)^d / vartheta1(x)^(d+1)`, `x = l - nu_i`
    Quotient { i: usize, order: usize },
}

/// Functions of one character `(a, b)`: `w(l + w1) = q^-b w(l)`, `w(l + w2) = q^a w(l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub a: usize,
    pub b: usize,
    /// theta shift solved from the multiplier equations, `-(b tau + a) / r^2`
    pub shift: C64,
    /// exponential rate, `-2 pi i b`
    pub rate: C64,
    pub functions: Vec<BasisFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticBasis {
    pub params: ThetaParams,
    pub divisor: EllipticDivisor,
    pub delta: C64,
    pub sectors: Vec<Sector>,
}

impl EllipticBasis {
    pub fn sector(&self, a: usize, b: usize) -> &Sector {
        &self.sectors[a * self.params.r + b]
    }

    pub fn eval(&self, sector: &Sector, f: &BasisFunction, l: C64) -> C64 {
        let p = &self.params;
        let nu = |i: usize| self.divisor.points[i].nu;
        match *f {
            BasisFunction::Constant => C64::new(1.0, 0.0),
            BasisFunction::ZetaDifference { i } => zeta1(l - nu(i), p) - zeta1(l - nu(0), p),
            BasisFunction::Quotient { i, order } => {
                let mut num = vec![sector.shift - self.delta * order as f64];
                num.extend(std::iter::repeat_n(self.delta, order));
                (sector.rate * l).exp() * quotient(l - nu(i), &num, order as i32 + 1, p)
            }
        }
    }

    /// Values of every function of every sector at `l`.
    pub fn eval_all(&self, l: C64) -> Vec<Vec<C64>> {
        self.sectors
            .iter()
            .map(|s| s.functions.iter().map(|f| self.eval(s, f, l)).collect())
            .collect()
    }

    /// Largest relative multiplier defect over the probe points.
    pub fn multiplier_residual(&self, probes: &[C64]) -> f64 {
        let p = &self.params;
        let (w1, w2) = p.omega();
        let q = p.q();
        let mut worst = 0.0_f64;
        for s in &self.sectors {
            let m1 = q.powi(-(s.b as i32));
            let m2 = q.powu(s.a as u32);
            for f in &s.functions {
                for &l in probes {
                    let v = self.eval(s, f, l);
                    let scale = v.norm().max(1e-300);
                    worst = worst.max((self.eval(s, f, l + w1) - m1 * v).norm() / scale);
                    worst = worst.max((self.eval(s, f, l + w2) - m2 * v).norm() / scale);
                }
            }
        }
        worst
    }

    /// Numerical rank of each sector's interpolation matrix at the probe points.
    pub fn sector_ranks(&self, probes: &[C64]) -> Vec<usize> {
        self.sectors
            .iter()
            .map(|s| {
                let rows: Vec<Vec<C64>> = probes
                    .iter()
                    .map(|&l| s.functions.iter().map(|f| self.eval(s, f, l)).collect())
                    .collect();
                numerical_rank(rows, 1e-9)
            })
            .collect()
    }
}

/// Rank by Gaussian elimination with complete pivoting.
pub fn numerical_rank(mut a: Vec<Vec<C64>>, rel_tol: f64) -> usize {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    // normalise columns so that the threshold is scale free
    for j in 0..n {
        let s = a.iter().map(|r| r[j].norm()).fold(0.0, f64::max);
        if s > 0.0 {
            for r in a.iter_mut() {
                r[j] /= s;
            }
        }
    }
    let mut rank = 0;
    for k in 0..m.min(n) {
        let mut best = (0.0, k, k);
        for i in k..m {
            for j in k..n {
                if a[i][j].norm() > best.0 {
                    best = (a[i][j].norm(), i, j);
                }
            }
        }
        if best.0 <= rel_tol {
            break;
        }
        a.swap(k, best.1);
        for r in a.iter_mut() {
            r.swap(k, best.2);
        }
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
        rank += 1;
    }
    rank
}

/// Fixed generic shift for the higher-order pole functions.
fn default_delta(p: &ThetaParams) -> C64 {
    p.from_skew(std::f64::consts::FRAC_1_PI, 0.05_f64.sqrt())
}

pub fn build_basis(divisor: &EllipticDivisor, params: &ThetaParams) -> Result<EllipticBasis> {
    let p = params;
    let r = p.r;
    let rf = r as f64;
    let delta = default_delta(p);
    let on_lattice = |x: C64| lattice_distance(x, C64::new(0.0, 0.0), p) < 1e-8;
    let mut sectors = vec![];
    for a in 0..r {
        for b in 0..r {
            let shift = -(p.tau * b as f64 + a as f64) / (rf * rf);
            let rate = -2.0 * PI * I * b as f64;
            let mut functions = vec![];
            if a == 0 && b == 0 {
                functions.push(BasisFunction::Constant);
                for (i, x) in divisor.points.iter().enumerate() {
                    if i > 0 {
                        functions.push(BasisFunction::ZetaDifference { i });
                    }
                    for order in 1..x.mult {
                        functions.push(BasisFunction::Quotient { i, order });
                    }
                }
            } else {
                for (i, x) in divisor.points.iter().enumerate() {
                    for order in 0..x.mult {
                        functions.push(BasisFunction::Quotient { i, order });
                    }
                }
            }
            for f in &functions {
                if let BasisFunction::Quotient { order, .. } = *f {
                    if on_lattice(shift - delta * order as f64) || (order > 0 && on_lattice(delta)) {
                        return Err(Error::Basis(format!(
                            "numerator of sector ({a}, {b}) order {order} vanishes at the pole; shift {shift}, delta {delta}"
                        )));
                    }
                }
            }
            sectors.push(Sector {
                a,
                b,
                shift,
                rate,
                functions,
            });
        }
    }
    let basis = EllipticBasis {
        params: *p,
        divisor: divisor.clone(),
        delta,
        sectors,
    };
    let probes = probe_points(p, &divisor.points.iter().map(|x| x.nu).collect::<Vec<_>>(), 10);
    let res = basis.multiplier_residual(&probes);
    if !(res < 1e-10) {
        return Err(Error::Basis(format!("multiplier residual {res:e}")));
    }
    Ok(basis)
}

/// Deterministic probe points in the fundamental domain, away from punctures and `avoid`.
pub fn probe_points(p: &ThetaParams, avoid: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![];
    let mut i = 1u32;
    while out.len() < k {
        // additive recurrence with irrational steps
        let u = (0.5 + i as f64 * 0.6180339887498949).fract();
        let v = (0.5 + i as f64 * 0.4142135623730951).fract();
        let z = p.from_skew(u, v);
        i += 1;
        let far_puncture = crate::theta::puncture_distance(p, z) > 0.05 / p.r as f64;
        if far_puncture && avoid.iter().all(|&a| lattice_distance(a, z, p) > 0.05 / p.r as f64) {
            out.push(z);
        }
    }
    out
}
