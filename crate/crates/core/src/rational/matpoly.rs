use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{poly_roots, CMatrix, Poly, C64};

/// `phi(z) = sum_k phi^(k) z^k`, r x r, degree at most n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatPoly {
    r: usize,
    n: usize,
    coeffs: Vec<CMatrix>,
}

impl MatPoly {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let r = coeffs
            .first()
            .map(|m| m.size())
            .ok_or_else(|| Error::InvalidInput("need at least one coefficient matrix".into()))?;
        if r == 0 || coeffs.iter().any(|m| m.size() != r) {
            return Err(Error::InvalidInput("coefficient matrices must share a size r >= 1".into()));
        }
        Ok(MatPoly {
            r,
            n: coeffs.len() - 1,
            coeffs,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff_mats(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Dimension of coefficient space, `(n+1) r^2`.
    pub fn dim(&self) -> usize {
        (self.n + 1) * self.r * self.r
    }

    /// Flat coordinate index of `phi^(k)_ij`.
    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.r + i) * self.r + j
    }

    pub fn coords(&self) -> Vec<C64> {
        self.coeffs.iter().flat_map(|m| m.as_slice().to_vec()).collect()
    }

    pub fn from_coords(r: usize, n: usize, x: &[C64]) -> Self {
        assert_eq!(x.len(), (n + 1) * r * r);
        MatPoly {
            r,
            n,
            coeffs: x.chunks(r * r).map(|c| CMatrix::from_flat(r, c.to_vec())).collect(),
        }
    }

    pub fn eval(&self, z: C64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.r);
        for m in self.coeffs.iter().rev() {
            acc = &acc.scale(z) + m;
        }
        acc
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|m| m[(i, j)]).collect())
    }

    pub fn leading(&self) -> &CMatrix {
        self.coeffs.last().unwrap()
    }

    /// Entries uniform in the unit disk.
    pub fn random(r: usize, n: usize, rng: &mut impl Rng) -> Self {
        let x: Vec<C64> = (0..(n + 1) * r * r).map(|_| unit_disk(rng)).collect();
        Self::from_coords(r, n, &x)
    }
}

pub(crate) fn unit_disk(rng: &mut impl Rng) -> C64 {
    loop {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    }
}

/// Selects the bracket `a(lambda)`, `b` in the multi-Hamiltonian family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub a: Poly,
    pub b: C64,
}

impl BracketSpec {
    pub fn new(a: Poly, b: C64) -> Self {
        BracketSpec { a, b }
    }

    /// `a = 1, b = 0`.
    pub fn linear() -> Self {
        BracketSpec::new(Poly::one(), C64::new(0.0, 0.0))
    }

    /// `a = 0, b = 1`.
    pub fn quadratic() -> Self {
        BracketSpec::new(Poly::zero(), C64::new(1.0, 0.0))
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let a = Poly::new((0..n + 2).map(|_| unit_disk(rng)).collect());
        BracketSpec::new(a, unit_disk(rng))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.a.degree() {
            Some(d) if d > n + 1 => Err(Error::InvalidInput(format!(
                "deg a = {d} exceeds n + 1 = {}",
                n + 1
            ))),
            _ => Ok(()),
        }
    }

    /// Coefficient of `d/dz ^ d/dxi` induced on divisor coordinates: `b xi - a(z)`.
    ///
    /// The b-part carries the sign of the quadratic case `xi d/dz ^ d/dxi`; the a-part
    /// enters with the opposite sign under `r(l - m) = P/(l - m)`.
    pub fn surface(&self, z: C64, xi: C64) -> C64 {
        self.b * xi - self.a.eval(z)
    }
}

impl std::ops::Add for &BracketSpec {
    type Output = BracketSpec;
    fn add(self, o: &BracketSpec) -> BracketSpec {
        BracketSpec::new(&self.a + &o.a, self.b + o.b)
    }
}

fn min_gap(v: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            g = g.min((v[i] - v[j]).norm());
        }
    }
    g
}

/// Whether the instance lies in the generic stratum used by the tests:
/// leading eigenvalue gap and discriminant root separation at least `1e-3`.
pub fn is_generic(phi: &MatPoly) -> bool {
    let Ok(lead) = poly_roots(&phi.leading().char_bipoly()) else {
        return false;
    };
    if lead.iter().any(|r| r.multiplicity > 1) {
        return false;
    }
    let ev: Vec<C64> = lead.iter().map(|r| r.value).collect();
    if min_gap(&ev) < 1e-3 {
        return false;
    }
    match super::curve::genus_info(phi) {
        Ok(info) => min_gap(&info.branch_points) >= 1e-3,
        Err(_) => false,
    }
}

/// Draws unit-disk instances until one is generic.
pub fn random_generic_instance(r: usize, n: usize, rng: &mut impl Rng) -> MatPoly {
    loop {
        let phi = MatPoly::random(r, n, rng);
        if is_generic(&phi) {
            return phi;
        }
    }
}
