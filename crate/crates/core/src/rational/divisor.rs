use rand::Rng;
use serde::{Deserialize, Serialize};

use super::curve::{adjugate_bipoly, curve_polynomial};
use super::tensor::structure_tensor;
use super::{BracketSpec, MatPoly};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::kernel::{norm2, poly_roots, resultant, BiPoly, Var, C64};

/// Points `(z_mu, xi_mu)` where `adj(phi(z) - xi I) s = 0` on the spectral curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorCoords {
    pub points: Vec<(C64, C64)>,
    pub s: Vec<C64>,
    pub count: usize,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

/// Relative `v` residual above which a root pair `(z, xi)` of `P` is not a common root.
const CANDIDATE: f64 = 1e-4;

struct System {
    p: BiPoly,
    v: Vec<BiPoly>,
}

impl System {
    fn new(phi: &MatPoly, s: &[C64]) -> System {
        let adj = adjugate_bipoly(phi);
        let r = phi.r();
        let v = (0..r)
            .map(|i| {
                (0..r).fold(BiPoly::zero(), |acc, j| &acc + &adj[i][j].scale(s[j]))
            })
            .collect();
        System {
            p: curve_polynomial(phi),
            v,
        }
    }

    fn residuals(&self, z: C64, xi: C64) -> (f64, f64) {
        let rp = self.p.eval(z, xi).norm() / self.p.eval_scale(z, xi).max(f64::MIN_POSITIVE);
        let rv = self
            .v
            .iter()
            .map(|v| {
                let sc = v.eval_scale(z, xi);
                if sc == 0.0 {
                    0.0
                } else {
                    v.eval(z, xi).norm() / sc
                }
            })
            .fold(0.0, f64::max);
        (rp, rv)
    }

    /// Newton on the pair `(P, v_0)`.
    fn refine(&self, z: C64, xi: C64) -> Option<(C64, C64)> {
        let (pz, px) = (self.p.d_z(), self.p.d_xi());
        let (vz, vx) = (self.v[0].d_z(), self.v[0].d_xi());
        let (mut z, mut xi) = (z, xi);
        for _ in 0..50 {
            let (f1, f2) = (self.p.eval(z, xi), self.v[0].eval(z, xi));
            let (a, b, c, d) = (pz.eval(z, xi), px.eval(z, xi), vz.eval(z, xi), vx.eval(z, xi));
            let det = a * d - b * c;
            if det.norm() == 0.0 {
                return None;
            }
            let dz = (d * f1 - b * f2) / det;
            let dx = (a * f2 - c * f1) / det;
            z -= dz;
            xi -= dx;
            if !(crate::kernel::is_finite(z) && crate::kernel::is_finite(xi)) {
                return None;
            }
            if dz.norm() + dx.norm() <= 1e-15 * (1.0 + z.norm() + xi.norm()) {
                return Some((z, xi));
            }
        }
        let (rp, rv) = self.residuals(z, xi);
        (rp < 1e-12 && rv < 1e-12).then_some((z, xi))
    }
}

/// Single attempt with the given auxiliary vector.
pub fn divisor_coords(phi: &MatPoly, s: &[C64]) -> Result<DivisorCoords> {
    divisor_coords_with(phi, s, &Tolerances::default())
}

pub fn divisor_coords_with(phi: &MatPoly, s: &[C64], tol: &Tolerances) -> Result<DivisorCoords> {
    let r = phi.r();
    if s.len() != r {
        return Err(Error::InvalidInput(format!("auxiliary vector has length {}, need {r}", s.len())));
    }
    let mut out = DivisorCoords {
        points: vec![],
        s: s.to_vec(),
        count: 0,
        degenerate: false,
        warnings: vec![],
    };
    if r == 1 {
        return Ok(out);
    }
    let sys = System::new(phi, s);
    if sys.v[0].deg_xi().unwrap_or(0) == 0 {
        return Err(Error::ResultantDegenerate);
    }
    let res = resultant(&sys.p, &sys.v[0], Var::Xi)?;
    if res.degree().unwrap_or(0) == 0 {
        return Ok(out);
    }
    let zroots = poly_roots(&res)?;
    for root in &zroots {
        let z = root.value;
        let xis = poly_roots(&sys.p.at_z(z))?;
        for xr in &xis {
            if sys.residuals(z, xr.value).1 > CANDIDATE {
                continue;
            }
            let Some((zz, xx)) = sys.refine(z, xr.value) else {
                out.warnings.push(format!("Newton failed near z = {z}"));
                continue;
            };
            if (zz - z).norm() > 1e-6 * (1.0 + z.norm()) {
                continue;
            }
            let (rp, rv) = sys.residuals(zz, xx);
            if rp > tol.div || rv > tol.div {
                continue;
            }
            if let Some(prev) = out.points.iter().find(|(a, b)| {
                (a - zz).norm() + (b - xx).norm() <= tol.cluster * (1.0 + zz.norm() + xx.norm())
            }) {
                // the same point reached from another sheet guess is not a new point
                let _ = prev;
                if root.multiplicity > 1 {
                    out.degenerate = true;
                }
                continue;
            }
            if root.multiplicity > 1 {
                out.degenerate = true;
            }
            out.points.push((zz, xx));
        }
    }
    out.points.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out.count = out.points.len();
    Ok(out)
}

/// Starts from `s0` and redraws `s` on the unit sphere on degeneracy.
pub fn divisor_coords_generic(phi: &MatPoly, s0: &[C64], rng: &mut impl Rng) -> Result<DivisorCoords> {
    let mut s = s0.to_vec();
    let mut last = Error::ResultantDegenerate;
    for _ in 0..8 {
        match divisor_coords(phi, &s) {
            Ok(d) if !d.degenerate && d.warnings.is_empty() => return Ok(d),
            Ok(_) => {}
            Err(e @ Error::ResultantDegenerate) => last = e,
            Err(e) => return Err(e),
        }
        let v: Vec<C64> = (0..phi.r())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nv = norm2(&v);
        s = v.iter().map(|x| x / nv).collect();
    }
    Err(last)
}

/// Brackets of divisor coordinates, from implicit gradients of the points and the Poisson tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    pub points: Vec<(C64, C64)>,
    /// `{z_mu, xi_nu}`
    pub z_xi: Vec<Vec<C64>>,
    pub z_z: Vec<Vec<C64>>,
    pub xi_xi: Vec<Vec<C64>>,
    /// `b xi_mu - a(z_mu)`
    pub target: Vec<C64>,
    pub max_z_xi_residual: f64,
    pub max_z_z: f64,
    pub max_xi_xi: f64,
}

impl CanonicalReport {
    pub fn max_residual(&self) -> f64 {
        self.max_z_xi_residual.max(self.max_z_z).max(self.max_xi_xi)
    }
}

pub fn verify_canonical(phi: &MatPoly, spec: &BracketSpec, s: &[C64]) -> Result<CanonicalReport> {
    verify_canonical_with(phi, spec, s, &Tolerances::default())
}

/// Relative coefficient step for differencing `P` and `v_0`.
const STEP: f64 = 1e-3;

pub fn verify_canonical_with(
    phi: &MatPoly,
    spec: &BracketSpec,
    s: &[C64],
    tol: &Tolerances,
) -> Result<CanonicalReport> {
    let tensor = structure_tensor(phi.r(), phi.n(), spec)?;
    let base = divisor_coords_with(phi, s, tol)?;
    let g = base.points.len();
    let x = phi.coords();
    let dim = x.len();
    // dz[mu][alpha], dxi[mu][alpha]
    let mut dz = vec![vec![C64::new(0.0, 0.0); dim]; g];
    let mut dxi = vec![vec![C64::new(0.0, 0.0); dim]; g];
    let sys = System::new(phi, s);
    let (pz, px) = (sys.p.d_z(), sys.p.d_xi());
    let (vz, vx) = (sys.v[0].d_z(), sys.v[0].d_xi());
    let jac: Vec<[C64; 4]> = base
        .points
        .iter()
        .map(|&(z, xi)| [pz.eval(z, xi), px.eval(z, xi), vz.eval(z, xi), vx.eval(z, xi)])
        .collect();
    // d(P, v_0)/dx at each point; Richardson on two central steps is exact up to degree 4 in x
    let mut xp = x.clone();
    for a in 0..dim {
        let h = STEP * x[a].norm().max(1.0);
        let mut at = |delta: f64| {
            xp[a] = x[a] + delta;
            let sd = System::new(&MatPoly::from_coords(phi.r(), phi.n(), &xp), s);
            xp[a] = x[a];
            base.points.iter().map(|&(z, xi)| (sd.p.eval(z, xi), sd.v[0].eval(z, xi))).collect::<Vec<_>>()
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        let diff = |f: fn(&(C64, C64)) -> C64, mu: usize| {
            (8.0 * (f(&p1[mu]) - f(&m1[mu])) - (f(&p2[mu]) - f(&m2[mu]))) / (12.0 * h)
        };
        for mu in 0..g {
            let (fp, fv) = (diff(|t| t.0, mu), diff(|t| t.1, mu));
            let [pa, pb, va, vb] = jac[mu];
            let det = pa * vb - pb * va;
            if det.norm() == 0.0 {
                return Err(Error::ResultantDegenerate);
            }
            dz[mu][a] = -(vb * fp - pb * fv) / det;
            dxi[mu][a] = -(pa * fv - va * fp) / det;
        }
    }
    let pair = |u: &[C64], v: &[C64]| -> C64 {
        let pv = tensor.pi_times(&x, v);
        u.iter().zip(&pv).map(|(p, q)| p * q).sum()
    };
    let grid = |a: &[Vec<C64>], b: &[Vec<C64>]| -> Vec<Vec<C64>> {
        (0..g).map(|m| (0..g).map(|n| pair(&a[m], &b[n])).collect()).collect()
    };
    let z_xi = grid(&dz, &dxi);
    let z_z = grid(&dz, &dz);
    let xi_xi = grid(&dxi, &dxi);
    let target: Vec<C64> = base.points.iter().map(|&(z, xi)| spec.surface(z, xi)).collect();
    let mut max_res = 0.0f64;
    for m in 0..g {
        for n in 0..g {
            let want = if m == n { target[m] } else { C64::new(0.0, 0.0) };
            max_res = max_res.max((z_xi[m][n] - want).norm());
        }
    }
    let mx = |a: &Vec<Vec<C64>>| a.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    Ok(CanonicalReport {
        points: base.points,
        max_z_xi_residual: max_res,
        max_z_z: mx(&z_z),
        max_xi_xi: mx(&xi_xi),
        z_xi,
        z_z,
        xi_xi,
        target,
    })
}
