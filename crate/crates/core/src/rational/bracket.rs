use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curve::{genus, spectral_gradients, spectral_positions};
use super::tensor::{structure_tensor, StructureTensor};
use super::{BracketSpec, MatPoly};
use crate::error::Result;
use crate::kernel::{fd_gradient_with, norm2, C64};

/// Scalar function on coefficient space, optionally with an analytic gradient.
pub trait Observable {
    fn value(&self, x: &[C64]) -> C64;
    fn gradient(&self, _x: &[C64]) -> Option<Vec<C64>> {
        None
    }
}

impl<F: Fn(&[C64]) -> C64> Observable for F {
    fn value(&self, x: &[C64]) -> C64 {
        self(x)
    }
}

/// The flat coordinate `x_index`.
#[derive(Debug, Clone, Copy)]
pub struct Coordinate(pub usize);

impl Observable for Coordinate {
    fn value(&self, x: &[C64]) -> C64 {
        x[self.0]
    }
    fn gradient(&self, x: &[C64]) -> Option<Vec<C64>> {
        let mut g = vec![C64::new(0.0, 0.0); x.len()];
        g[self.0] = C64::new(1.0, 0.0);
        Some(g)
    }
}

/// Coefficient of `xi^k z^l` in `det(phi(z) - xi I)`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralCoefficient {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
}

impl SpectralCoefficient {
    fn position(&self) -> usize {
        spectral_positions(self.r, self.n)
            .iter()
            .position(|&p| p == (self.k, self.l))
            .expect("position inside the spectral grid")
    }
}

impl Observable for SpectralCoefficient {
    fn value(&self, x: &[C64]) -> C64 {
        let phi = MatPoly::from_coords(self.r, self.n, x);
        super::curve::curve_polynomial(&phi).coeff(self.k, self.l)
    }
    fn gradient(&self, x: &[C64]) -> Option<Vec<C64>> {
        let phi = MatPoly::from_coords(self.r, self.n, x);
        Some(spectral_gradients(&phi).swap_remove(self.position()))
    }
}

fn gradient_of(f: &dyn Observable, x: &[C64], h_rel: f64) -> Vec<C64> {
    f.gradient(x)
        .unwrap_or_else(|| fd_gradient_with(|y| f.value(y), x, h_rel))
}

/// `{F, G}(phi) = grad F . Pi(phi) . grad G`
pub fn bracket(
    f: &dyn Observable,
    g: &dyn Observable,
    phi: &MatPoly,
    spec: &BracketSpec,
) -> Result<C64> {
    let t = structure_tensor(phi.r(), phi.n(), spec)?;
    Ok(bracket_with(f, g, &phi.coords(), &t, 1e-6))
}

pub fn bracket_with(
    f: &dyn Observable,
    g: &dyn Observable,
    x: &[C64],
    tensor: &StructureTensor,
    h_rel: f64,
) -> C64 {
    let gf = gradient_of(f, x, h_rel);
    let gg = gradient_of(g, x, h_rel);
    let pg = tensor.pi_times(x, &gg);
    gf.iter().zip(&pg).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasimirSplit {
    pub hamiltonians: Vec<(usize, usize)>,
    pub casimirs: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

/// Relative size of the Hamiltonian vector field `Pi grad H`.
pub fn hamiltonian_field_ratio(tensor: &StructureTensor, x: &[C64], grad: &[C64]) -> f64 {
    let d = tensor.dim;
    let pi = tensor.pi(x);
    let pi_max = pi.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    let v: Vec<C64> = (0..d)
        .map(|a| (0..d).map(|b| pi[a * d + b] * grad[b]).sum())
        .collect();
    let scale = pi_max * norm2(grad);
    if scale == 0.0 {
        0.0
    } else {
        norm2(&v) / scale
    }
}

/// Casimir iff the Hamiltonian vector field is negligible at `phi` and four seeded random points.
pub fn casimir_detect(phi: &MatPoly, spec: &BracketSpec) -> CasimirSplit {
    let (r, n) = (phi.r(), phi.n());
    let positions = spectral_positions(r, n);
    let mut warnings = vec![];
    let tensor = match structure_tensor(r, n, spec) {
        Ok(t) => t,
        Err(e) => {
            return CasimirSplit {
                hamiltonians: positions,
                casimirs: vec![],
                warnings: vec![format!("structure tensor unavailable: {e}")],
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xca51_0001);
    let mut points = vec![phi.clone()];
    points.extend((0..4).map(|_| MatPoly::random(r, n, &mut rng)));
    let mut is_casimir = vec![true; positions.len()];
    for p in &points {
        let x = p.coords();
        for (slot, g) in spectral_gradients(p).iter().enumerate() {
            if is_casimir[slot] && hamiltonian_field_ratio(&tensor, &x, g) >= 1e-8 {
                is_casimir[slot] = false;
            }
        }
    }
    let (mut hamiltonians, mut casimirs) = (vec![], vec![]);
    for (pos, cas) in positions.into_iter().zip(is_casimir) {
        if cas {
            casimirs.push(pos);
        } else {
            hamiltonians.push(pos);
        }
    }
    match genus(phi) {
        Ok(g) if g != hamiltonians.len() as i64 => warnings.push(format!(
            "{} non-Casimir spectral coefficients, genus {g}",
            hamiltonians.len()
        )),
        Ok(_) => {}
        Err(e) => warnings.push(format!("genus unavailable: {e}")),
    }
    CasimirSplit {
        hamiltonians,
        casimirs,
        warnings,
    }
}
