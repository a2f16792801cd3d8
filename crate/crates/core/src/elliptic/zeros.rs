//! Zeros of a meromorphic function in a fundamental parallelogram by cell windings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::C64;
use crate::theta::ThetaParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSearch {
    pub zeros: Vec<C64>,
    /// zeros predicted by the argument principle: boundary winding plus pole orders
    pub argument_count: i64,
    pub boundary_winding: i64,
    /// `(pole, order)` with the order read off a small circle
    pub pole_orders: Vec<(C64, i64)>,
    /// skew offset of the searched parallelogram
    pub offset: (f64, f64),
}

struct Search<'a, F> {
    f: &'a F,
    p: ThetaParams,
    /// poles in skew coordinates of the searched domain with their orders
    poles: Vec<(f64, f64, i64)>,
    scale: f64,
}

fn frac_dist(x: f64, grid: usize) -> f64 {
    let y = x * grid as f64;
    (y - y.round()).abs() / grid as f64
}

impl<F: Fn(C64) -> Result<C64>> Search<'_, F> {
    fn z(&self, u: f64, v: f64) -> C64 {
        self.p.from_skew(u, v)
    }

    /// Total change of `arg f` along the segment.
    fn phase(&self, a: C64, b: C64) -> Result<f64> {
        let k = 8;
        let mut total = 0.0;
        let mut prev = (a, (self.f)(a)?);
        for i in 1..=k {
            let z = a + (b - a) * (i as f64 / k as f64);
            let next = (z, (self.f)(z)?);
            total += self.phase_rec(prev, next, 0)?;
            prev = next;
        }
        Ok(total)
    }

    fn phase_rec(&self, (za, fa): (C64, C64), (zb, fb): (C64, C64), depth: usize) -> Result<f64> {
        let zm = (za + zb) * 0.5;
        let fm = (self.f)(zm)?;
        let d = (fb / fa).arg();
        let d1 = (fm / fa).arg();
        let d2 = (fb / fm).arg();
        if d1.abs() < PI / 4.0 && d2.abs() < PI / 4.0 && (d1 + d2 - d).abs() < 1e-9 {
            return Ok(d);
        }
        if depth > 40 {
            return Err(Error::SingularPath { at: zm });
        }
        Ok(self.phase_rec((za, fa), (zm, fm), depth + 1)? + self.phase_rec((zm, fm), (zb, fb), depth + 1)?)
    }

    fn winding(&self, pts: &[C64]) -> Result<i64> {
        let mut total = 0.0;
        for k in 0..pts.len() {
            total += self.phase(pts[k], pts[(k + 1) % pts.len()])?;
        }
        let w = total / (2.0 * PI);
        if (w - w.round()).abs() > 0.05 {
            return Err(Error::SingularPath { at: pts[0] });
        }
        Ok(w.round() as i64)
    }

    fn cell_winding(&self, u: f64, v: f64, h: f64) -> Result<i64> {
        self.winding(&[self.z(u, v), self.z(u + h, v), self.z(u + h, v + h), self.z(u, v + h)])
    }

    fn poles_in(&self, u: f64, v: f64, h: f64) -> i64 {
        self.poles
            .iter()
            .filter(|&&(pu, pv, _)| pu >= u && pu < u + h && pv >= v && pv < v + h)
            .map(|&(_, _, o)| o)
            .sum()
    }

    fn secant(&self, z0: C64, step: f64) -> Option<C64> {
        let (mut a, mut b) = (z0, z0 + step);
        let mut fa = (self.f)(a).ok()?;
        let mut fb = (self.f)(b).ok()?;
        for _ in 0..80 {
            if fb == fa {
                break;
            }
            let c = b - fb * (b - a) / (fb - fa);
            if !(c.re.is_finite() && c.im.is_finite()) || (c - z0).norm() > 4.0 * self.scale {
                return None;
            }
            let fc = (self.f)(c).ok()?;
            let done = (c - b).norm() <= 1e-14 * (1.0 + c.norm()) || fc.norm() == 0.0;
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            if done {
                return Some(b);
            }
        }
        ((b - a).norm() <= 1e-11 * (1.0 + b.norm())).then_some(b)
    }

    /// Zeros inside the cell `[u, u+h) x [v, v+h)` holding `count` of them.
    fn refine(&self, u: f64, v: f64, h: f64, count: i64, depth: usize, out: &mut Vec<C64>) -> Result<()> {
        if count <= 0 {
            return Ok(());
        }
        if count == 1 {
            let centre = self.z(u + h / 2.0, v + h / 2.0);
            if let Some(z) = self.secant(centre, 0.01 * h * self.scale) {
                let (zu, zv) = self.p.skew(z);
                let pad = 0.05 * h;
                if zu >= u - pad && zu < u + h + pad && zv >= v - pad && zv < v + h + pad {
                    out.push(z);
                    return Ok(());
                }
            }
        }
        if depth > 12 {
            return Err(Error::MissedZeros {
                found: out.len(),
                expected: count,
            });
        }
        let g = h / 2.0;
        for (du, dv) in [(0.0, 0.0), (g, 0.0), (0.0, g), (g, g)] {
            let c = self.cell_winding(u + du, v + dv, g)? + self.poles_in(u + du, v + dv, g);
            self.refine(u + du, v + dv, g, c, depth + 1, out)?;
        }
        Ok(())
    }
}

/// Zeros of `f` in one fundamental parallelogram of the small lattice. `f` must have constant
/// multipliers, `poles` lists its poles modulo the lattice.
pub fn find_zeros<F: Fn(C64) -> Result<C64>>(f: &F, p: &ThetaParams, poles: &[C64], grid: usize) -> Result<ZeroSearch> {
    let grid = grid.max(2);
    let skew_poles: Vec<(f64, f64)> = poles
        .iter()
        .map(|&z| {
            let (u, v) = p.skew(z);
            (u - u.floor(), v - v.floor())
        })
        .collect();
    // offset keeping the poles far from the grid lines
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for k in 0..64 {
        let ou = (0.1 + k as f64 * 0.6180339887498949).fract() / grid as f64;
        let ov = (0.3 + k as f64 * 0.7548776662466927).fract() / grid as f64;
        let d = skew_poles
            .iter()
            .map(|&(u, v)| frac_dist(u - ou, grid).min(frac_dist(v - ov, grid)))
            .fold(f64::INFINITY, f64::min);
        if d > best.0 {
            best = (d, ou, ov);
        }
    }
    let (_, ou, ov) = best;
    let scale = p.omega().0.norm().max(p.omega().1.norm());
    let mut search = Search {
        f,
        p: *p,
        poles: vec![],
        scale,
    };
    // poles placed inside [ou, ou+1) x [ov, ov+1)
    let min_sep = skew_poles
        .iter()
        .enumerate()
        .flat_map(|(i, a)| skew_poles[..i].iter().map(move |b| ((a.0 - b.0).abs().min(1.0 - (a.0 - b.0).abs())).max((a.1 - b.1).abs().min(1.0 - (a.1 - b.1).abs()))))
        .fold(f64::INFINITY, f64::min);
    let radius = (0.4 * best.0).min(0.3 * min_sep);
    let mut pole_orders = vec![];
    for &(u, v) in &skew_poles {
        let u = if u < ou { u + 1.0 } else { u };
        let v = if v < ov { v + 1.0 } else { v };
        // shrink the circle until the winding is stable, so a nearby zero is not mistaken for the pole
        let mut order = None;
        let mut rho = radius;
        for _ in 0..10 {
            let pts: Vec<C64> = (0..16)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / 16.0;
                    search.z(u + rho * a.cos(), v + rho * a.sin())
                })
                .collect();
            let w = match search.winding(&pts) {
                Ok(w) => -w,
                Err(e) if order.is_none() => return Err(e),
                Err(_) => break,
            };
            if order == Some(w) {
                break;
            }
            order = Some(w);
            rho /= 3.0;
        }
        let order = order.unwrap();
        search.poles.push((u, v, order));
        pole_orders.push((search.z(u, v), order));
    }
    let h = 1.0 / grid as f64;
    // shared edge phases so that cell windings telescope to the boundary winding
    let mut hor = vec![vec![0.0; grid + 1]; grid];
    let mut ver = vec![vec![0.0; grid]; grid + 1];
    for i in 0..grid {
        for j in 0..=grid {
            let (u, v) = (ou + i as f64 * h, ov + j as f64 * h);
            hor[i][j] = search.phase(search.z(u, v), search.z(u + h, v))?;
        }
    }
    for i in 0..=grid {
        for j in 0..grid {
            let (u, v) = (ou + i as f64 * h, ov + j as f64 * h);
            ver[i][j] = search.phase(search.z(u, v), search.z(u, v + h))?;
        }
    }
    let mut boundary = 0.0;
    for i in 0..grid {
        boundary += hor[i][0] - hor[i][grid];
    }
    for j in 0..grid {
        boundary += ver[grid][j] - ver[0][j];
    }
    let boundary_winding = (boundary / (2.0 * PI)).round() as i64;
    let pole_total: i64 = search.poles.iter().map(|x| x.2).sum();
    let argument_count = boundary_winding + pole_total;
    let mut zeros = vec![];
    for i in 0..grid {
        for j in 0..grid {
            let (u, v) = (ou + i as f64 * h, ov + j as f64 * h);
            let w = (hor[i][j] + ver[i + 1][j] - hor[i][j + 1] - ver[i][j]) / (2.0 * PI);
            if (w - w.round()).abs() > 0.05 {
                return Err(Error::SingularPath { at: search.z(u, v) });
            }
            let count = w.round() as i64 + search.poles_in(u, v, h);
            search.refine(u, v, h, count, 0, &mut zeros)?;
        }
    }
    let mut unique: Vec<C64> = vec![];
    for z in zeros {
        if unique.iter().all(|&y| (y - z).norm() > 1e-7 * scale) {
            unique.push(z);
        }
    }
    if unique.len() as i64 != argument_count {
        return Err(Error::MissedZeros {
            found: unique.len(),
            expected: argument_count,
        });
    }
    Ok(ZeroSearch {
        zeros: unique,
        argument_count,
        boundary_winding,
        pole_orders,
        offset: (ou, ov),
    })
}
