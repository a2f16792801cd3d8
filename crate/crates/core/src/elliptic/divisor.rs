use serde::{Deserialize, Serialize};

use super::basis::{lattice_distance, reduce};
use super::lax::{spectral_discriminant, EllipticLax};
use super::zeros::{find_zeros, ZeroSearch};
use crate::error::{Error, Result};
use crate::kernel::{poly_roots, CMatrix, Poly, C64};
use crate::theta::BasicSection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomainPoint {
    pub z: C64,
    pub xi: C64,
    /// rank of `xi` among the eigenvalues of `phi(z)`, sorted by real then imaginary part
    pub sheet: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoords {
    pub points: Vec<FundamentalDomainPoint>,
    pub argument_count: i64,
    /// `1 + n r (r - 1) / 2`
    pub expected: usize,
    pub curve_residual: f64,
    pub adjugate_residual: f64,
    pub search: ZeroSearch,
}

/// Grid sizes of the coarse winding scan, tried in order until one resolves every zero.
pub const GRIDS: [usize; 5] = [6, 8, 10, 12, 14];

fn scan<F: Fn(C64) -> Result<C64>>(f: &F, lax: &EllipticLax, poles: &[C64]) -> Result<ZeroSearch> {
    let mut last = None;
    for grid in GRIDS {
        match find_zeros(f, &lax.params, poles, grid) {
            Err(e @ (Error::MissedZeros { .. } | Error::SingularPath { .. } | Error::BranchObstruction { .. })) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

/// `K(z) = det[s, phi s, ..., phi^(r-1) s]` with `phi` and `s` taken at `z + shift`.
pub fn section_determinant(lax: &EllipticLax, sec: &BasicSection, z: C64, shift: C64) -> Result<C64> {
    let r = lax.r();
    let w = z + shift;
    let s = sec.at(w)?.values;
    let phi = lax.phi(w);
    let mut cols = vec![s];
    for k in 1..r {
        let next = phi.mul_vec(&cols[k - 1]);
        cols.push(next);
    }
    let mut m = CMatrix::zeros(r);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..r {
            m[(i, j)] = col[i];
        }
    }
    Ok(m.det())
}

fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let c = m.charpoly_monic();
    let mut out: Vec<C64> = poly_roots(&Poly::new(c))?
        .iter()
        .flat_map(|x| std::iter::repeat_n(x.value, x.multiplicity))
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// `(xi, sheet, relative |adj(phi - xi) s|, relative |det(phi - xi)|)` minimising the adjugate residual.
fn pick_sheet(phi: &CMatrix, s: &[C64]) -> Result<(C64, usize, f64, f64)> {
    let r = phi.size();
    let ev = eigenvalues(phi)?;
    let s_norm = s.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut best: Option<(C64, usize, f64, f64)> = None;
    for (k, &xi) in ev.iter().enumerate() {
        let m = phi - &CMatrix::identity(r).scale(xi);
        let adj = m.adjugate();
        let v = adj.mul_vec(s);
        let scale = adj.max_abs().max(1e-300) * s_norm;
        let res = v.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale;
        let det_scale = (phi.max_abs() + xi.norm()).powi(r as i32).max(1e-300);
        let curve = m.det().norm() / det_scale;
        if best.is_none_or(|b| res < b.2) {
            best = Some((xi, k, res, curve));
        }
    }
    Ok(best.unwrap())
}

fn k_poles(lax: &EllipticLax, shift: C64) -> Vec<C64> {
    let p = &lax.params;
    let mut poles = vec![p.from_skew(0.5, 0.5) - shift];
    poles.extend(lax.poles().iter().map(|&nu| nu - shift));
    poles
}

fn search_points(lax: &EllipticLax, sec: &BasicSection, shift: C64) -> Result<(Vec<FundamentalDomainPoint>, ZeroSearch, f64, f64)> {
    let f = |z: C64| section_determinant(lax, sec, z, shift);
    let search = scan(&f, lax, &k_poles(lax, shift))?;
    let mut pts = vec![];
    let (mut worst_curve, mut worst_adj) = (0.0_f64, 0.0_f64);
    for &z in &search.zeros {
        let w = z + shift;
        let s = sec.at(w)?.values;
        let (xi, sheet, adj, curve) = pick_sheet(&lax.phi(w), &s)?;
        worst_adj = worst_adj.max(adj);
        worst_curve = worst_curve.max(curve);
        pts.push(FundamentalDomainPoint {
            z: reduce(z, &lax.params),
            xi,
            sheet,
        });
    }
    pts.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok((pts, search, worst_curve, worst_adj))
}

/// Points `(z_mu - z0, xi_mu)` with `adj(phi(z_mu) - xi_mu) s(z_mu) = 0`, reduced to the fundamental domain.
pub fn elliptic_divisor_coords(lax: &EllipticLax, sec: &BasicSection) -> Result<EllipticCoords> {
    let r = lax.r();
    let n = lax.divisor.degree();
    let expected = 1 + n * r * (r - 1) / 2;
    let (mut points, search, curve_residual, adjugate_residual) = search_points(lax, sec, C64::new(0.0, 0.0))?;
    if points.len() != expected || search.argument_count != expected as i64 {
        return Err(Error::MissedZeros {
            found: points.len(),
            expected: expected as i64,
        });
    }
    for pt in points.iter_mut() {
        pt.z = reduce(pt.z - lax.z0, &lax.params);
    }
    points.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok(EllipticCoords {
        points,
        argument_count: search.argument_count,
        expected,
        curve_residual,
        adjugate_residual,
        search,
    })
}

/// Solves the translated problem `adj(phi(z + z0) - xi) s(z + z0) = 0` by its own search and
/// returns the largest mismatch against the reported coordinates.
pub fn translation_check(lax: &EllipticLax, sec: &BasicSection, coords: &EllipticCoords) -> Result<f64> {
    let (pts, _, _, _) = search_points(lax, sec, lax.z0)?;
    if pts.len() != coords.points.len() {
        return Err(Error::MissedZeros {
            found: pts.len(),
            expected: coords.points.len() as i64,
        });
    }
    let mut worst = 0.0_f64;
    for a in &coords.points {
        let d = pts
            .iter()
            .map(|b| lattice_distance(a.z, b.z, &lax.params) + (a.xi - b.xi).norm() / (1.0 + a.xi.norm()))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Genus from the zeros of the spectral discriminant: `2g - 2 = B` over the elliptic base.
pub fn elliptic_genus(lax: &EllipticLax) -> Result<(usize, ZeroSearch)> {
    let f = |z: C64| Ok(spectral_discriminant(lax, z));
    let search = scan(&f, lax, &lax.poles())?;
    let b = search.zeros.len();
    if b % 2 != 0 {
        return Err(Error::NonGeneric(format!("odd number {b} of branch points")));
    }
    Ok((1 + b / 2, search))
}

/// Centre-of-mass shift `(z_mu - mean z, xi_mu / (prod xi)^(1/g))`.
pub fn slr_reduce(coords: &[(C64, C64)]) -> Result<Vec<(C64, C64)>> {
    if coords.is_empty() {
        return Ok(vec![]);
    }
    if coords.iter().any(|c| c.1.norm() == 0.0) {
        return Err(Error::ReductionUndefined);
    }
    let g = coords.len() as f64;
    let mean = coords.iter().map(|c| c.0).sum::<C64>() / g;
    // geometric mean through logs, so large g neither overflows nor underflows
    let log_mean = coords.iter().map(|c| c.1.ln()).sum::<C64>() / g;
    Ok(coords.iter().map(|&(z, xi)| (z - mean, (xi.ln() - log_mean).exp())).collect())
}
