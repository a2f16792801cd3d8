use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::{Poly, C64};

const TRIM: f64 = 1e-13;

/// Bivariate polynomial; `coeffs[k][l]` multiplies `xi^k z^l`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BiPoly {
    coeffs: Vec<Vec<C64>>,
}

impl BiPoly {
    pub fn new(grid: Vec<Vec<C64>>) -> Self {
        let mut b = BiPoly { coeffs: grid };
        b.normalize();
        b
    }

    pub fn zero() -> Self {
        BiPoly { coeffs: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        BiPoly::new(vec![vec![c]])
    }

    /// `p(z)` viewed as a polynomial of xi-degree 0.
    pub fn from_z_poly(p: &Poly) -> Self {
        BiPoly::new(vec![p.coeffs().to_vec()])
    }

    /// `p(xi)` viewed as a polynomial of z-degree 0.
    pub fn from_xi_poly(p: &Poly) -> Self {
        BiPoly::new(p.coeffs().iter().map(|&c| vec![c]).collect())
    }

    /// The monomial `c xi^k z^l`.
    pub fn monomial(c: C64, k: usize, l: usize) -> Self {
        let mut g = vec![vec![]; k + 1];
        g[k] = vec![C64::new(0.0, 0.0); l + 1];
        g[k][l] = c;
        BiPoly::new(g)
    }

    fn normalize(&mut self) {
        let m = self.max_coeff();
        let thresh = TRIM * m;
        for row in &mut self.coeffs {
            while row.last().is_some_and(|c| c.norm() <= thresh) {
                row.pop();
            }
        }
        while self.coeffs.last().is_some_and(|r| r.is_empty()) {
            self.coeffs.pop();
        }
    }

    pub fn grid(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize, l: usize) -> C64 {
        self.coeffs
            .get(k)
            .and_then(|row| row.get(l))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg_xi(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg_z(&self) -> Option<usize> {
        self.coeffs.iter().map(|r| r.len()).max().and_then(|l| l.checked_sub(1))
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Row of xi-degree `k` as a polynomial in z.
    pub fn xi_coeff(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.get(k).cloned().unwrap_or_default())
    }

    pub fn eval(&self, z: C64, xi: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, row| {
                acc * xi + row.iter().rev().fold(C64::new(0.0, 0.0), |a, &c| a * z + c)
            })
    }

    /// Rounding scale `sum |c_kl| |xi|^k |z|^l`.
    pub fn eval_scale(&self, z: C64, xi: C64) -> f64 {
        let (rz, rx) = (z.norm(), xi.norm());
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * rx + row.iter().rev().fold(0.0, |a, c| a * rz + c.norm())
        })
    }

    /// Polynomial in xi obtained by fixing z.
    pub fn at_z(&self, z: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|row| Poly::new(row.clone()).eval(z)).collect())
    }

    /// Polynomial in z obtained by fixing xi.
    pub fn at_xi(&self, xi: C64) -> Poly {
        let n = self.deg_z().map_or(0, |d| d + 1);
        let mut out = vec![C64::new(0.0, 0.0); n];
        let mut pw = C64::new(1.0, 0.0);
        for row in &self.coeffs {
            for (l, c) in row.iter().enumerate() {
                out[l] += c * pw;
            }
            pw *= xi;
        }
        Poly::new(out)
    }

    pub fn d_xi(&self) -> BiPoly {
        BiPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, row)| row.iter().map(|c| c * k as f64).collect())
                .collect(),
        )
    }

    pub fn d_z(&self) -> BiPoly {
        BiPoly::new(
            self.coeffs
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(l, c)| c * l as f64)
                        .collect()
                })
                .collect(),
        )
    }

    /// Exchanges the roles of z and xi.
    pub fn swap(&self) -> BiPoly {
        let dz = self.deg_z().map_or(0, |d| d + 1);
        let mut g = vec![vec![C64::new(0.0, 0.0); self.coeffs.len()]; dz];
        for (k, row) in self.coeffs.iter().enumerate() {
            for (l, c) in row.iter().enumerate() {
                g[l][k] = *c;
            }
        }
        BiPoly::new(g)
    }

    pub fn scale(&self, c: C64) -> BiPoly {
        BiPoly::new(
            self.coeffs
                .iter()
                .map(|row| row.iter().map(|x| x * c).collect())
                .collect(),
        )
    }

    fn combine(&self, o: &BiPoly, sign: f64) -> BiPoly {
        let nk = self.coeffs.len().max(o.coeffs.len());
        let mut g = Vec::with_capacity(nk);
        for k in 0..nk {
            let a = self.coeffs.get(k).map(|r| r.as_slice()).unwrap_or(&[]);
            let b = o.coeffs.get(k).map(|r| r.as_slice()).unwrap_or(&[]);
            let nl = a.len().max(b.len());
            g.push(
                (0..nl)
                    .map(|l| {
                        a.get(l).copied().unwrap_or_default()
                            + b.get(l).copied().unwrap_or_default() * sign
                    })
                    .collect(),
            );
        }
        BiPoly::new(g)
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, o: &BiPoly) -> BiPoly {
        self.combine(o, 1.0)
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, o: &BiPoly) -> BiPoly {
        self.combine(o, -1.0)
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, o: &BiPoly) -> BiPoly {
        if self.is_zero() || o.is_zero() {
            return BiPoly::zero();
        }
        let nk = self.coeffs.len() + o.coeffs.len() - 1;
        let nl = self.deg_z().unwrap_or(0) + o.deg_z().unwrap_or(0) + 1;
        let mut g = vec![vec![C64::new(0.0, 0.0); nl]; nk];
        for (k1, r1) in self.coeffs.iter().enumerate() {
            for (k2, r2) in o.coeffs.iter().enumerate() {
                for (l1, a) in r1.iter().enumerate() {
                    for (l2, b) in r2.iter().enumerate() {
                        g[k1 + k2][l1 + l2] += a * b;
                    }
                }
            }
        }
        BiPoly::new(g)
    }
}
