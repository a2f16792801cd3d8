//! Rational Lax matrices: spectral curves, the (a,b) bracket family, divisor
//! coordinates, Hamiltonian flows and linearizing Abelian integrals.

pub mod bracket;
pub mod curve;
pub mod divisor;
pub mod flow;
pub mod linearize;
pub mod matpoly;
pub mod tensor;

pub use bracket::{bracket, casimir_detect, CasimirSplit, Coordinate, Observable, SpectralCoefficient};
pub use curve::{genus, genus_info, spectral_curve, spectral_positions, GenusInfo, SpectralCurve};
pub use divisor::{divisor_coords, divisor_coords_generic, verify_canonical, CanonicalReport, DivisorCoords};
pub use flow::{flow, flow_with, hamiltonian_field};
pub use linearize::{affine_fit, generating_function, linearize, linearize_flow, q_along_paths, route, AbelianContext, LinearizationTable, SheetTrack};
pub use matpoly::{is_generic, random_generic_instance, BracketSpec, MatPoly};
pub use tensor::{structure_tensor, Form, StructureTensor};
pub(crate) use matpoly::unit_disk;
