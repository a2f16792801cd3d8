use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{max_abs, C64};

const TRIM: f64 = 1e-13;

/// Univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<C64>", into = "Vec<C64>")]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl From<Vec<C64>> for Poly {
    fn from(v: Vec<C64>) -> Self {
        Poly::new(v)
    }
}

impl From<Poly> for Vec<C64> {
    fn from(p: Poly) -> Self {
        p.coeffs
    }
}

impl Poly {
    /// Normalizes by trimming trailing coefficients below `1e-13 * max|c|`.
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self::with_trim(coeffs, TRIM)
    }

    pub fn with_trim(mut coeffs: Vec<C64>, trim: f64) -> Self {
        let thresh = trim * max_abs(&coeffs);
        while let Some(last) = coeffs.last() {
            if last.norm() <= thresh {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(C64::new(1.0, 0.0))
    }

    /// `c * z^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Poly::one();
        for &r in roots {
            p = &p * &Poly::new(vec![-r, C64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// Rounding scale `sum |a_k| |z|^k` of an evaluation at `z`.
    pub fn eval_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Taylor coefficients `p^(k)(z0)/k!` for k = 0..=deg.
    pub fn taylor_at(&self, z0: C64) -> Vec<C64> {
        // repeated synthetic division
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let t = work[i + 1] * z0;
                work[i] += t;
            }
            out.push(work[k]);
        }
        out
    }
}

fn add_vec(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default() * sign
        })
        .collect()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        Poly::new(add_vec(&self.coeffs, &o.coeffs, 1.0))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        Poly::new(add_vec(&self.coeffs, &o.coeffs, -1.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![C64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}
