use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::{BiPoly, Poly, C64};

/// Commutative ring operations needed by the division-free determinant scheme.
pub trait Ring: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: C64) -> Self;
}

impl Ring for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: C64) -> Self {
        self * c
    }
}

impl Ring for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
}

impl Ring for BiPoly {
    fn zero() -> Self {
        BiPoly::zero()
    }
    fn one() -> Self {
        BiPoly::constant(C64::new(1.0, 0.0))
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
}

fn mat_mul<R: Ring>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(R::zero(), |acc, k| acc.plus(&a[i][k].times(&b[k][j])))
                })
                .collect()
        })
        .collect()
}

/// Faddeev-LeVerrier over any commutative ring containing the rationals.
///
/// Returns `(c, m)` where `det(x I - A) = sum_k c[k] x^k` (so `c[r] = 1`) and
/// `adj(A) = (-1)^(r-1) m`.
pub fn faddeev_leverrier<R: Ring>(a: &[Vec<R>]) -> (Vec<R>, Vec<Vec<R>>) {
    let r = a.len();
    let mut c = vec![R::zero(); r + 1];
    c[r] = R::one();
    let ident = |s: &R| -> Vec<Vec<R>> {
        (0..r)
            .map(|i| (0..r).map(|j| if i == j { s.clone() } else { R::zero() }).collect())
            .collect()
    };
    let mut m = ident(&R::one());
    for k in 1..=r {
        if k > 1 {
            m = mat_mul(a, &m);
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = row[i].plus(&c[r - k + 1]);
            }
        }
        let am = mat_mul(a, &m);
        let tr = (0..r).fold(R::zero(), |acc, i| acc.plus(&am[i][i]));
        c[r - k] = tr.scaled(C64::new(-1.0 / k as f64, 0.0));
    }
    (c, m)
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    r: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(r: usize) -> Self {
        CMatrix {
            r,
            data: vec![C64::new(0.0, 0.0); r * r],
        }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zeros(r);
        for i in 0..r {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Panics unless the rows form a square array.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        assert!(rows.iter().all(|row| row.len() == r), "matrix must be square");
        CMatrix {
            r,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_flat(r: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), r * r);
        CMatrix { r, data }
    }

    pub fn size(&self) -> usize {
        self.r
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.r.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix {
            r: self.r,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.r).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = Self::zeros(self.r);
        for i in 0..self.r {
            for j in 0..self.r {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        super::max_abs(&self.data)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.r)
            .map(|i| (0..self.r).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn pow(&self, k: usize) -> CMatrix {
        (0..k).fold(Self::identity(self.r), |acc, _| &acc * self)
    }

    fn nested(&self) -> Vec<Vec<C64>> {
        self.rows()
    }

    /// Coefficients of `det(xI - M)` in ascending order (monic).
    pub fn charpoly_monic(&self) -> Vec<C64> {
        faddeev_leverrier(&self.nested()).0
    }

    /// `det(M - xi I)` as a polynomial in `xi`; leading coefficient `(-1)^r`.
    pub fn char_bipoly(&self) -> Poly {
        let sign = if self.r % 2 == 0 { 1.0 } else { -1.0 };
        Poly::new(self.charpoly_monic().into_iter().map(|c| c * sign).collect())
    }

    pub fn det(&self) -> C64 {
        let c0 = self.charpoly_monic()[0];
        if self.r % 2 == 0 {
            c0
        } else {
            -c0
        }
    }

    pub fn adjugate(&self) -> CMatrix {
        if self.r == 1 {
            return Self::identity(1);
        }
        let (_, m) = faddeev_leverrier(&self.nested());
        let sign = if self.r % 2 == 1 { 1.0 } else { -1.0 };
        CMatrix::from_rows(&m).scale(C64::new(sign, 0.0))
    }

    /// Inverse through the adjugate; fine for the small sizes used here.
    pub fn inverse(&self) -> Option<CMatrix> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    /// Solves `M x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let n = self.r;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| {
                a[p * n + col].norm().total_cmp(&a[q * n + col].norm())
            })?;
            if a[piv * n + col].norm() == 0.0 {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                }
                x.swap(piv, col);
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f.norm() == 0.0 {
                    continue;
                }
                for k in col..n {
                    let t = a[col * n + k] * f;
                    a[row * n + k] -= t;
                }
                let t = x[col] * f;
                x[row] -= t;
            }
        }
        for row in (0..n).rev() {
            let mut s = x[row];
            for k in row + 1..n {
                s -= a[row * n + k] * x[k];
            }
            x[row] = s / a[row * n + row];
        }
        Some(x)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.r + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.r + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, o: &CMatrix) -> CMatrix {
        let r = self.r;
        let mut m = CMatrix::zeros(r);
        for i in 0..r {
            for k in 0..r {
                let a = self[(i, k)];
                for j in 0..r {
                    m.data[i * r + j] += a * o[(k, j)];
                }
            }
        }
        m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, o: &CMatrix) -> CMatrix {
        CMatrix {
            r: self.r,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, o: &CMatrix) -> CMatrix {
        CMatrix {
            r: self.r,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }
}
