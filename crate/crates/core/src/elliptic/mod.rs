//! Elliptic Lax matrices `phi(l + w_i) = I_i phi(l) I_i^-1` with poles on a divisor, their
//! spectral invariants and separating coordinates.

mod basis;
mod divisor;
mod lax;
mod zeros;

pub use basis::{
    build_basis, lattice_distance, numerical_rank, probe_points, reduce, vartheta1, zeta1, BasisFunction, DivisorPoint,
    EllipticBasis, EllipticDivisor, Sector,
};
pub use divisor::{
    elliptic_divisor_coords, elliptic_genus, section_determinant, slr_reduce, translation_check, EllipticCoords,
    FundamentalDomainPoint, GRIDS,
};
pub use lax::{assemble_lax, discriminant_monic, random_coeffs, spectral_discriminant, spectral_invariants, EllipticLax};
pub use zeros::{find_zeros, ZeroSearch};
