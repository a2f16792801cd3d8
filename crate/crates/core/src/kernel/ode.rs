//! Dormand-Prince 5(4) over complex state vectors.

use super::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-12,
            h_init: 1e-2,
            h_min: 1e-13,
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step; returns (5th-order solution, error vector).
fn step<F>(field: &F, t: f64, x: &[C64], h: f64) -> (Vec<C64>, Vec<C64>)
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let n = x.len();
    let mut k: Vec<Vec<C64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let xs: Vec<C64> = (0..n)
            .map(|i| x[i] + (0..s).map(|j| k[j][i] * (h * A[s][j])).sum::<C64>())
            .collect();
        k.push(field(t + C[s] * h, &xs));
    }
    let x5: Vec<C64> = (0..n)
        .map(|i| x[i] + (0..7).map(|s| k[s][i] * (h * B5[s])).sum::<C64>())
        .collect();
    let err: Vec<C64> = (0..n)
        .map(|i| (0..7).map(|s| k[s][i] * (h * (B5[s] - B4[s]))).sum::<C64>())
        .collect();
    (x5, err)
}

pub fn ode_solve<F>(field: F, x0: &[C64], t_grid: &[f64]) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    ode_solve_with(field, x0, t_grid, &OdeOptions::default())
}

/// States at every time of `t_grid` (ascending; `x0` is the state at `t_grid[0]`).
pub fn ode_solve_with<F>(
    field: F,
    x0: &[C64],
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    Ok(ode_solve_tracked(field, x0, t_grid, opts)?.0)
}

/// As [`ode_solve_with`], also returning the largest component modulus over all accepted steps.
pub fn ode_solve_tracked<F>(
    field: F,
    x0: &[C64],
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<C64>>, f64)>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be ascending".into()));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let Some(&t_start) = t_grid.first() else {
        return Ok((out, 0.0));
    };
    let mut t = t_start;
    let mut x = x0.to_vec();
    let mut h = opts.h_init;
    let mut steps = 0;
    let mut peak = sup_norm(&x);
    out.push(x.clone());
    for &target in &t_grid[1..] {
        while t < target {
            let span = target - t;
            let last = h >= span;
            let hh = if last { span } else { h };
            let (xn, err) = step(&field, t, &x, hh);
            steps += 1;
            let enorm = err
                .iter()
                .zip(x.iter().zip(&xn))
                .map(|(e, (a, b))| e.norm() / (opts.tol * (1.0 + a.norm().max(b.norm()))))
                .fold(0.0, f64::max);
            if !enorm.is_finite() || xn.iter().any(|v| !super::is_finite(*v)) {
                h = hh * 0.1;
            } else if enorm <= 1.0 {
                t = if last { target } else { t + hh };
                x = xn;
                peak = peak.max(sup_norm(&x));
                let fac = if enorm == 0.0 { 5.0 } else { 0.9 * enorm.powf(-0.2) };
                h = hh * fac.clamp(0.2, 5.0);
            } else {
                h = hh * (0.9 * enorm.powf(-0.2)).max(0.1);
            }
            if h < opts.h_min * (1.0 + t.abs()) || steps > opts.max_steps {
                return Err(Error::StiffFlow { t });
            }
        }
        out.push(x.clone());
    }
    Ok((out, peak))
}

fn sup_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Fixed-step 5th-order integration, used for convergence-order checks.
pub fn rk_fixed_step<F>(field: F, x0: &[C64], t0: f64, t1: f64, steps: usize) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let h = (t1 - t0) / steps as f64;
    let mut x = x0.to_vec();
    for s in 0..steps {
        x = step(&field, t0 + s as f64 * h, &x, h).0;
    }
    x
}
