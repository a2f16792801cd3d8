//! Theta functions of `C / (Z + tau Z)` and the basic section of the degree-one bundle on
//! `C / (Z/r + tau Z/r)`.

mod section;
mod series;

pub use section::{
    basic_section, f_component, f_component_raw, f_vector, i_matrices, puncture_distance, rho, singular_points_near,
    BasicSection, BranchAnchor, SectionSample, PUNCTURE_RADIUS,
};
pub use series::{riemann_theta, riemann_theta_series, theta_log_derivative, theta_kj, theta_parts, xi_kj, ThetaParams};
