//! Simultaneous Aberth-Ehrlich iteration with multiplicity detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Poly, C64};
use crate::config::Tolerances;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

pub fn poly_roots(p: &Poly) -> Result<Vec<Root>> {
    poly_roots_with(p, &Tolerances::default())
}

pub fn poly_roots_with(p: &Poly, tol: &Tolerances) -> Result<Vec<Root>> {
    let deg = p.degree().ok_or(Error::UndefinedRoots)?;
    if deg == 0 {
        return Ok(vec![]);
    }
    // exact zero roots are split off so the iteration never sees a zero constant term
    let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    let q = Poly::new(p.coeffs()[zeros..].to_vec());
    let mut values = vec![C64::new(0.0, 0.0); zeros];
    if q.degree().unwrap_or(0) > 0 {
        values.extend(aberth(&q, tol)?);
    }
    let roots = cluster(p, &values, tol);
    Ok(roots)
}

fn initial_guesses(p: &Poly, offset: f64) -> Vec<C64> {
    let n = p.degree().unwrap();
    let a = p.coeffs();
    let lead = a[n].norm();
    // radius from the geometric mean of the root moduli, bounded by the Fujiwara bound
    let gm = (a[0].norm() / lead).powf(1.0 / n as f64);
    let fuj = (0..n)
        .map(|k| (a[k].norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let rad = if gm > 0.0 { gm.min(fuj) } else { fuj.max(1e-3) };
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + offset;
            C64::from_polar(rad, th)
        })
        .collect()
}

fn aberth(p: &Poly, tol: &Tolerances) -> Result<Vec<C64>> {
    let n = p.degree().unwrap();
    if n == 1 {
        return Ok(vec![-p.coeff(0) / p.coeff(1)]);
    }
    let dp = p.derivative();
    let eps = f64::EPSILON;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut z = initial_guesses(p, 0.4);
    let mut best = z.clone();
    let mut best_res = f64::INFINITY;
    let mut iterations = 0;
    for attempt in 0..4 {
        let mut frozen = vec![false; n];
        for _ in 0..tol.max_iter {
            iterations += 1;
            let mut moved = false;
            for i in 0..n {
                if frozen[i] {
                    continue;
                }
                let pv = p.eval(z[i]);
                let bound = 4.0 * n as f64 * eps * p.eval_scale(z[i]);
                if pv.norm() <= bound {
                    frozen[i] = true;
                    continue;
                }
                let ratio = pv / dp.eval(z[i]);
                let mut s = C64::new(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        s += (z[i] - z[j]).inv();
                    }
                }
                let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
                if !super::is_finite(w) {
                    continue;
                }
                z[i] -= w;
                moved = true;
                if w.norm() <= 2.0 * eps * z[i].norm() {
                    frozen[i] = true;
                }
            }
            if frozen.iter().all(|&f| f) || !moved {
                break;
            }
        }
        let res = z
            .iter()
            .map(|&x| p.eval(x).norm() / p.eval_scale(x).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if res < best_res {
            best_res = res;
            best = z.clone();
        }
        if z.iter().all(|x| super::is_finite(*x)) && res <= tol.root.max(64.0 * n as f64 * eps) {
            return Ok(z);
        }
        // restart from a perturbed configuration
        let scale = z.iter().fold(1e-3_f64, |m, x| m.max(x.norm()));
        z = best
            .iter()
            .map(|&x| {
                let d = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let x = if super::is_finite(x) { x } else { C64::new(0.0, 0.0) };
                x + d * scale * 1e-3 * (attempt + 1) as f64
            })
            .collect();
    }
    Err(Error::NoConvergence { iterations, best })
}

fn scale_of(z: C64) -> f64 {
    z.norm().max(1.0)
}

/// Groups raw iterates into roots with multiplicities.
fn cluster(p: &Poly, values: &[C64], tol: &Tolerances) -> Vec<Root> {
    // first pass: tight clustering radius
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &v in values {
        match groups.iter_mut().find(|g| {
            g.iter()
                .any(|&w| (w - v).norm() <= tol.cluster * scale_of(v))
        }) {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    // second pass: an m-fold root perturbed by roundoff splits into a ring of radius ~ eps^(1/m)
    let mut pending = groups;
    let mut merged: Vec<Vec<C64>> = Vec::new();
    while !pending.is_empty() {
        let seed = pending.remove(0);
        let c0 = seed.iter().sum::<C64>() / seed.len() as f64;
        pending.sort_by(|a, b| dist(a, c0).total_cmp(&dist(b, c0)));
        let mut take = 0;
        for k in (1..=pending.len()).rev() {
            let mut cand = seed.clone();
            pending[..k].iter().for_each(|g| cand.extend_from_slice(g));
            if is_multiple_root(p, &cand) {
                take = k;
                break;
            }
        }
        let mut g = seed;
        for other in pending.drain(..take) {
            g.extend(other);
        }
        merged.push(g);
    }
    let groups = merged;
    let mut roots: Vec<Root> = groups
        .into_iter()
        .map(|g| {
            let m = g.len();
            let c = g.iter().sum::<C64>() / m as f64;
            Root {
                value: polish(p, c, m),
                multiplicity: m,
            }
        })
        .collect();
    roots.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    roots
}

fn is_multiple_root(p: &Poly, members: &[C64]) -> bool {
    let m = members.len();
    let eps = f64::EPSILON;
    let c = members.iter().sum::<C64>() / m as f64;
    let radius = 100.0 * eps.powf(1.0 / m as f64) * scale_of(c);
    if members.iter().any(|&w| (w - c).norm() > radius) {
        return false;
    }
    // the low Taylor coefficients at the centroid must be at noise level
    let t = p.taylor_at(c);
    let abs = Poly::new(p.coeffs().iter().map(|a| C64::new(a.norm(), 0.0)).collect());
    let ta = abs.taylor_at(C64::new(c.norm(), 0.0));
    (0..m).all(|k| t[k].norm() <= 1e3 * eps.powf((m - k) as f64 / m as f64) * ta[k].norm())
}

fn dist(g: &[C64], c: C64) -> f64 {
    g.iter().map(|w| (w - c).norm()).fold(f64::INFINITY, f64::min)
}

/// Newton on the (m-1)-th derivative, which has a simple root at an m-fold root.
fn polish(p: &Poly, z: C64, m: usize) -> C64 {
    let p = (1..m).fold(p.clone(), |q, _| q.derivative());
    let dp = p.derivative();
    let mut z = z;
    for _ in 0..3 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.eval(z) / d;
        let znew = z - step;
        if !super::is_finite(znew) || p.eval(znew).norm() > p.eval(z).norm() {
            break;
        }
        z = znew;
    }
    z
}
