use super::curve::{adjugate_bipoly, spectral_positions};
use super::tensor::{structure_tensor, StructureTensor};
use super::{BracketSpec, MatPoly};
use crate::error::{Error, Result};
use crate::kernel::{ode_solve_tracked, OdeOptions, C64};

/// Gradient of the coefficient of `xi^k z^l` from the bivariate adjugate.
pub(crate) fn coefficient_gradient(phi: &MatPoly, (k, l): (usize, usize)) -> Vec<C64> {
    let adj = adjugate_bipoly(phi);
    let (r, n) = (phi.r(), phi.n());
    let mut g = vec![C64::new(0.0, 0.0); phi.dim()];
    for m in 0..=n.min(l) {
        for i in 0..r {
            for j in 0..r {
                g[phi.index(m, i, j)] = adj[j][i].coeff(k, l - m);
            }
        }
    }
    g
}

/// `x' = Pi(x) grad H(x)` for the spectral coefficient `h = (k, l)`.
pub fn hamiltonian_field(
    tensor: &StructureTensor,
    h: (usize, usize),
) -> impl Fn(f64, &[C64]) -> Vec<C64> + '_ {
    move |_, x: &[C64]| {
        let phi = MatPoly::from_coords(tensor.r, tensor.n, x);
        tensor.pi_times(x, &coefficient_gradient(&phi, h))
    }
}

pub fn flow(phi0: &MatPoly, h: (usize, usize), spec: &BracketSpec, t_grid: &[f64]) -> Result<Vec<MatPoly>> {
    flow_with(phi0, h, spec, t_grid, &OdeOptions::default())
}

pub fn flow_with(
    phi0: &MatPoly,
    h: (usize, usize),
    spec: &BracketSpec,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<MatPoly>> {
    let (r, n) = (phi0.r(), phi0.n());
    if !spectral_positions(r, n).contains(&h) {
        return Err(Error::IndexOutOfRange(format!("({}, {}) is not a spectral coefficient", h.0, h.1)));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be ascending".into()));
    }
    let tensor = structure_tensor(r, n, spec)?;
    let mut x = phi0.coords();
    let mut out = vec![];
    for (k, &t) in t_grid.iter().enumerate() {
        if k > 0 {
            x = interval(&tensor, h, &x, t_grid[k - 1], t, opts)?;
        }
        out.push(MatPoly::from_coords(r, n, &x));
    }
    Ok(out)
}

/// Ratio of the peak inside an interval to the larger endpoint state at which complex-time
/// detours are tried.
const GROWTH: f64 = 8.0;

/// Integrates from `a` to `b`. When the state spikes inside the interval, detours through complex
/// time are tried and the route with the smallest peak is kept.
fn interval(tensor: &StructureTensor, h: (usize, usize), x: &[C64], a: f64, b: f64, opts: &OdeOptions) -> Result<Vec<C64>> {
    let (ta, tb) = (C64::new(a, 0.0), C64::new(b, 0.0));
    let direct = along(tensor, h, x, &[ta, tb], opts);
    if let Ok((y, peak)) = &direct {
        let ends = sup_norm(x).max(sup_norm(y));
        if *peak <= GROWTH * (1.0 + ends) {
            return Ok(y.clone());
        }
    }
    let mut best = direct.as_ref().ok().cloned();
    for height in [0.5, 1.0, -0.5, -1.0] {
        let up = C64::new(0.0, height * (b - a));
        if let Ok((y, peak)) = along(tensor, h, x, &[ta, ta + up, tb + up, tb], opts) {
            if best.as_ref().is_none_or(|bst| peak < bst.1) {
                best = Some((y, peak));
            }
        }
    }
    match best {
        Some((y, _)) => Ok(y),
        None => direct.map(|d| d.0),
    }
}

fn sup_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// State at the end of the complex-time polyline `corners`, and its peak modulus on the way.
fn along(tensor: &StructureTensor, h: (usize, usize), x: &[C64], corners: &[C64], opts: &OdeOptions) -> Result<(Vec<C64>, f64)> {
    let field = hamiltonian_field(tensor, h);
    let mut x = x.to_vec();
    let mut peak = 0.0_f64;
    for w in corners.windows(2) {
        let dt = w[1] - w[0];
        let scaled = |s: f64, y: &[C64]| field(s, y).into_iter().map(|v| v * dt).collect::<Vec<_>>();
        let (states, p) = ode_solve_tracked(scaled, &x, &[0.0, 1.0], opts)?;
        x = states.into_iter().next_back().expect("two grid points");
        peak = peak.max(p);
    }
    Ok((x, peak))
}
