use serde::{Deserialize, Serialize};

use super::{faddeev_leverrier, BiPoly, Poly, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Var {
    Z,
    Xi,
}

/// Sylvester resultant eliminating `eliminate`; a polynomial in the other variable.
pub fn resultant(p: &BiPoly, q: &BiPoly, eliminate: Var) -> Result<Poly> {
    let (p, q) = match eliminate {
        Var::Xi => (p.clone(), q.clone()),
        Var::Z => (p.swap(), q.swap()),
    };
    let (m, n) = match (p.deg_xi(), q.deg_xi()) {
        (Some(m), Some(n)) if m > 0 && n > 0 => (m, n),
        _ => return Err(Error::ResultantDegenerate),
    };
    let pc: Vec<Poly> = (0..=m).map(|k| p.xi_coeff(k)).collect();
    let qc: Vec<Poly> = (0..=n).map(|k| q.xi_coeff(k)).collect();
    let scale = p.max_coeff().max(q.max_coeff());
    if pc[m].max_coeff() <= 1e-13 * scale && qc[n].max_coeff() <= 1e-13 * scale {
        return Err(Error::ResultantDegenerate);
    }
    let size = m + n;
    let mut syl = vec![vec![Poly::zero(); size]; size];
    for i in 0..n {
        for k in 0..=m {
            syl[i][i + k] = pc[m - k].clone();
        }
    }
    for i in 0..m {
        for k in 0..=n {
            syl[n + i][i + k] = qc[n - k].clone();
        }
    }
    let (c, _) = faddeev_leverrier(&syl);
    let det = if size % 2 == 0 {
        c[0].clone()
    } else {
        c[0].scale(C64::new(-1.0, 0.0))
    };
    if det.is_zero() {
        return Err(Error::ResultantDegenerate);
    }
    // identically vanishing resultant (common factor) shows up as pure roundoff
    let bound = pc.iter().map(|x| x.max_coeff()).fold(0.0, f64::max).powi(n as i32)
        * qc.iter().map(|x| x.max_coeff()).fold(0.0, f64::max).powi(m as i32);
    if det.max_coeff() <= 1e-11 * bound {
        return Err(Error::ResultantDegenerate);
    }
    Ok(det)
}
