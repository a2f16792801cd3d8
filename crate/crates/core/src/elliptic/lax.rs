use serde::{Deserialize, Serialize};

use super::basis::{build_basis, probe_points, EllipticBasis, EllipticDivisor};
use crate::error::{Error, Result};
use crate::kernel::{CMatrix, PathSpec, C64};
use crate::theta::{i_matrices, ThetaParams};

/// `phi(l) = sum c_{ab,i} w_{ab,i}(l) I1^a I2^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticLax {
    pub params: ThetaParams,
    pub divisor: EllipticDivisor,
    pub basis: EllipticBasis,
    /// `coeffs[a * r + b][i]`, matching the basis sectors
    pub coeffs: Vec<Vec<C64>>,
    /// bundle modulus: coordinates of the translated data are shifted by `-z0`
    pub z0: C64,
    generators: Vec<CMatrix>,
}

pub fn assemble_lax(
    coeffs: Vec<Vec<C64>>,
    divisor: &EllipticDivisor,
    params: &ThetaParams,
    z0: C64,
) -> Result<EllipticLax> {
    let basis = build_basis(divisor, params)?;
    let r = params.r;
    if coeffs.len() != basis.sectors.len()
        || coeffs.iter().zip(&basis.sectors).any(|(c, s)| c.len() != s.functions.len())
    {
        return Err(Error::InvalidInput(format!(
            "coefficient table must have {} sectors of {} entries",
            basis.sectors.len(),
            divisor.degree()
        )));
    }
    let (i1, i2) = i_matrices(r);
    let generators = basis
        .sectors
        .iter()
        .map(|s| &i1.pow(s.a) * &i2.pow(s.b))
        .collect();
    let lax = EllipticLax {
        params: *params,
        divisor: divisor.clone(),
        basis,
        coeffs,
        z0,
        generators,
    };
    let res = lax.quasi_periodicity_residual(&lax.probes(10));
    if !(res < 1e-8) {
        return Err(Error::Construction(format!("quasi-periodicity residual {res:e}")));
    }
    Ok(lax)
}

/// Unit-disk coefficients from `rng`, one per basis function.
pub fn random_coeffs<R: rand::Rng>(divisor: &EllipticDivisor, r: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let n = divisor.degree();
    (0..r * r)
        .map(|_| (0..n).map(|_| crate::rational::unit_disk(rng)).collect())
        .collect()
}

impl EllipticLax {
    pub fn r(&self) -> usize {
        self.params.r
    }

    pub fn poles(&self) -> Vec<C64> {
        self.divisor.points.iter().map(|x| x.nu).collect()
    }

    pub fn probes(&self, k: usize) -> Vec<C64> {
        probe_points(&self.params, &self.poles(), k)
    }

    pub fn phi(&self, l: C64) -> CMatrix {
        let r = self.r();
        let mut m = CMatrix::zeros(r);
        for ((s, c), t) in self.basis.sectors.iter().zip(&self.coeffs).zip(&self.generators) {
            let mut w = C64::new(0.0, 0.0);
            for (f, ci) in s.functions.iter().zip(c) {
                if ci.norm() != 0.0 {
                    w += ci * self.basis.eval(s, f, l);
                }
            }
            if w.norm() != 0.0 {
                m = &m + &t.scale(w);
            }
        }
        m
    }

    /// `max |phi(l + w_i) - I_i phi(l) I_i^-1| / |phi(l)|`.
    pub fn quasi_periodicity_residual(&self, probes: &[C64]) -> f64 {
        let (w1, w2) = self.params.omega();
        let (i1, i2) = i_matrices(self.r());
        let (j1, j2) = (i1.inverse().unwrap(), i2.inverse().unwrap());
        let mut worst = 0.0_f64;
        for &l in probes {
            let m = self.phi(l);
            let scale = m.max_abs().max(1e-300);
            let a = &(&i1 * &m) * &j1;
            let b = &(&i2 * &m) * &j2;
            worst = worst.max((&self.phi(l + w1) - &a).max_abs() / scale);
            worst = worst.max((&self.phi(l + w2) - &b).max_abs() / scale);
        }
        worst
    }

    /// Laurent coefficient of `(l - nu)^-k` by a circle of radius `rho`.
    pub fn laurent_coefficient(&self, nu: C64, k: i32, rho: f64) -> Result<CMatrix> {
        let r = self.r();
        let pts: Vec<C64> = (0..=64)
            .map(|j| nu + C64::from_polar(rho, 2.0 * std::f64::consts::PI * j as f64 / 64.0))
            .collect();
        let path = PathSpec::new(pts)?;
        let mut out = CMatrix::zeros(r);
        for i in 0..r {
            for j in 0..r {
                let v = crate::kernel::integrate_path(|l| self.phi(l)[(i, j)] * (l - nu).powi(k - 1), &path)?;
                out[(i, j)] = v.value / C64::new(0.0, 2.0 * std::f64::consts::PI);
            }
        }
        Ok(out)
    }
}

/// `t_k(l)`: coefficient of `xi^(r-k)` in `det(phi(l) - xi I)`, `k = 1..r`.
pub fn spectral_invariants(lax: &EllipticLax, l: C64) -> Vec<C64> {
    let r = lax.r();
    let c = lax.phi(l).charpoly_monic();
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    (1..=r).map(|k| c[r - k] * sign).collect()
}

/// Discriminant of `det(xi I - phi(l))` as a polynomial in `xi`.
pub fn spectral_discriminant(lax: &EllipticLax, l: C64) -> C64 {
    let c = lax.phi(l).charpoly_monic();
    discriminant_monic(&c)
}

/// `prod_{i<j} (x_i - x_j)^2` of a monic polynomial with ascending coefficients, via the
/// Sylvester matrix of `p` and `p'`.
pub fn discriminant_monic(c: &[C64]) -> C64 {
    let r = c.len() - 1;
    if r < 2 {
        return C64::new(1.0, 0.0);
    }
    let d: Vec<C64> = (1..=r).map(|k| c[k] * k as f64).collect();
    let size = 2 * r - 1;
    let mut s = CMatrix::zeros(size);
    for row in 0..r - 1 {
        for k in 0..=r {
            s[(row, row + k)] = c[r - k];
        }
    }
    for row in 0..r {
        for k in 0..r {
            s[(r - 1 + row, row + k)] = d[r - 1 - k];
        }
    }
    let sign = if (r * (r - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    s.det() * sign
}
