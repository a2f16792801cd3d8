use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library, in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Root residual bound relative to the rounding scale of the polynomial.
    pub root: f64,
    /// Radius (relative to max(1,|z|)) under which roots are merged.
    pub cluster: f64,
    /// Relative threshold for trimming polynomial coefficients.
    pub trim: f64,
    /// Absolute quadrature error target per path.
    pub quad: f64,
    /// Per-step tolerance of the embedded Runge-Kutta integrator.
    pub ode: f64,
    /// Relative finite-difference step.
    pub h_rel: f64,
    /// Divisor validation threshold, relative to the evaluation scale.
    pub div: f64,
    /// Branch-point avoidance radius, relative to the z-scale.
    pub r_branch: f64,
    /// Puncture exclusion radius for theta-section evaluation.
    pub puncture: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            cluster: 1e-7,
            trim: 1e-13,
            quad: 1e-13,
            ode: 1e-12,
            h_rel: 1e-6,
            div: 1e-9,
            r_branch: 1e-2,
            puncture: 1e-3,
            max_iter: 500,
        }
    }
}
