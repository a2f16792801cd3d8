//! Complex polynomial and matrix algebra, root finding, quadrature and ODE integration.

pub mod bipoly;
pub mod fd;
pub mod matrix;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod resultant;
pub mod roots;

pub use num_complex::Complex64 as C64;

pub use bipoly::BiPoly;
pub use fd::{fd_gradient, fd_gradient_with};
pub use matrix::{faddeev_leverrier, CMatrix, Ring};
pub use ode::{ode_solve, ode_solve_tracked, ode_solve_with, rk_fixed_step, OdeOptions};
pub use poly::Poly;
pub use quad::{integrate_path, integrate_path_try, PathSpec, QuadResult};
pub use resultant::{resultant, Var};
pub use roots::{poly_roots, poly_roots_with, Root};


/// Largest modulus in a slice, 0 for an empty slice.
pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
