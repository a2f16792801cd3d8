use serde::{Deserialize, Serialize};

use super::bracket::casimir_detect;
use super::{BracketSpec, MatPoly};
use crate::error::{Error, Result};
use crate::kernel::{faddeev_leverrier, poly_roots, resultant, BiPoly, Poly, Var, C64};

/// `P(z, xi) = det(phi(z) - xi I)` with the Hamiltonian/Casimir split of its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub r: usize,
    pub n: usize,
    pub p: BiPoly,
    pub hamiltonian_index: Vec<(usize, usize)>,
    pub casimir_index: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

impl SpectralCurve {
    pub fn coefficient(&self, k: usize, l: usize) -> C64 {
        self.p.coeff(k, l)
    }

    /// Coefficient values in the order of [`spectral_positions`].
    pub fn values(&self) -> Vec<C64> {
        spectral_positions(self.r, self.n)
            .into_iter()
            .map(|(k, l)| self.p.coeff(k, l))
            .collect()
    }
}

/// Positions `(k, l)` of the non-constant coefficients of `xi^k z^l`; `k < r`, `l <= n (r - k)`.
pub fn spectral_positions(r: usize, n: usize) -> Vec<(usize, usize)> {
    (0..r)
        .flat_map(|k| (0..=n * (r - k)).map(move |l| (k, l)))
        .collect()
}

fn sign(r: usize) -> C64 {
    C64::new(if r % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
}

/// Exact coefficient grid by polynomial arithmetic (no sampling).
pub fn curve_polynomial(phi: &MatPoly) -> BiPoly {
    let r = phi.r();
    let a: Vec<Vec<Poly>> = (0..r)
        .map(|i| (0..r).map(|j| phi.entry(i, j)).collect())
        .collect();
    let (c, _) = faddeev_leverrier(&a);
    let s = sign(r);
    BiPoly::new(c.iter().map(|ck| ck.coeffs().iter().map(|x| x * s).collect()).collect())
}

/// Spectral curve with the index split of the linear bracket `a = 1, b = 0`.
pub fn spectral_curve(phi: &MatPoly) -> SpectralCurve {
    spectral_curve_for(phi, &BracketSpec::linear())
}

pub fn spectral_curve_for(phi: &MatPoly, spec: &BracketSpec) -> SpectralCurve {
    let split = casimir_detect(phi, spec);
    SpectralCurve {
        r: phi.r(),
        n: phi.n(),
        p: curve_polynomial(phi),
        hamiltonian_index: split.hamiltonians,
        casimir_index: split.casimirs,
        warnings: split.warnings,
    }
}

/// `adj(phi(z) - xi I)` with bivariate polynomial entries.
pub fn adjugate_bipoly(phi: &MatPoly) -> Vec<Vec<BiPoly>> {
    let r = phi.r();
    let minus_xi = BiPoly::monomial(C64::new(-1.0, 0.0), 1, 0);
    let a: Vec<Vec<BiPoly>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let e = BiPoly::from_z_poly(&phi.entry(i, j));
                    if i == j {
                        &e + &minus_xi
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    if r == 1 {
        return vec![vec![BiPoly::constant(C64::new(1.0, 0.0))]];
    }
    let (_, m) = faddeev_leverrier(&a);
    let s = if r % 2 == 1 { 1.0 } else { -1.0 };
    m.into_iter()
        .map(|row| row.into_iter().map(|e| e.scale(C64::new(s, 0.0))).collect())
        .collect()
}

/// Gradients of every spectral coefficient with respect to the flat coordinates,
/// from `dP/dphi_ij(z) = adj(phi(z) - xi I)_ji`.
pub fn spectral_gradients(phi: &MatPoly) -> Vec<Vec<C64>> {
    let adj = adjugate_bipoly(phi);
    let (r, n) = (phi.r(), phi.n());
    spectral_positions(r, n)
        .into_iter()
        .map(|(k, l)| {
            let mut g = vec![C64::new(0.0, 0.0); phi.dim()];
            for m in 0..=n.min(l) {
                for i in 0..r {
                    for j in 0..r {
                        g[phi.index(m, i, j)] = adj[j][i].coeff(k, l - m);
                    }
                }
            }
            g
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenusInfo {
    pub genus: i64,
    pub branch_points: Vec<C64>,
    pub discriminant: Poly,
}

pub fn genus(phi: &MatPoly) -> Result<i64> {
    genus_info(phi).map(|g| g.genus)
}

/// Riemann-Hurwitz count `g = B/2 - r + 1` from the simple roots of the discriminant.
pub fn genus_info(phi: &MatPoly) -> Result<GenusInfo> {
    let (r, n) = (phi.r(), phi.n());
    if r == 1 {
        return Ok(GenusInfo {
            genus: 0,
            branch_points: vec![],
            discriminant: Poly::one(),
        });
    }
    if n == 0 {
        return Err(Error::NonGeneric("constant Lax matrix: reducible curve".into()));
    }
    let lead = poly_roots(&phi.leading().char_bipoly())?;
    if lead.iter().any(|x| x.multiplicity > 1) {
        return Err(Error::NonGeneric(
            "leading coefficient matrix has a repeated eigenvalue".into(),
        ));
    }
    let p = curve_polynomial(phi);
    let disc = match resultant(&p, &p.d_xi(), Var::Xi) {
        Ok(d) => d,
        Err(Error::ResultantDegenerate) => {
            return Err(Error::NonGeneric("discriminant vanishes identically (reducible curve)".into()))
        }
        Err(e) => return Err(e),
    };
    let expected = n * r * (r - 1);
    let disc = truncate_to(&disc, expected)?;
    let roots = poly_roots(&disc)?;
    if let Some(bad) = roots.iter().find(|x| x.multiplicity > 1) {
        return Err(Error::NonGeneric(format!(
            "clustered discriminant roots near z = {} (multiplicity {})",
            bad.value, bad.multiplicity
        )));
    }
    let b = roots.len() as i64;
    Ok(GenusInfo {
        genus: b / 2 - r as i64 + 1,
        branch_points: roots.iter().map(|x| x.value).collect(),
        discriminant: disc,
    })
}

/// Drops roundoff coefficients beyond the degree forced by the leading matrix.
fn truncate_to(p: &Poly, deg: usize) -> Result<Poly> {
    let m = p.max_coeff();
    let tail = p.coeffs().iter().skip(deg + 1).fold(0.0_f64, |a, c| a.max(c.norm()));
    if tail > 1e-9 * m {
        return Err(Error::NonGeneric("discriminant degree exceeds the generic bound".into()));
    }
    let q = Poly::new(p.coeffs().iter().take(deg + 1).copied().collect());
    if q.degree() != Some(deg) || q.leading().norm() < 1e-12 * m {
        return Err(Error::NonGeneric("branching over z = infinity".into()));
    }
    Ok(q)
}
