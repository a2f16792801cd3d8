use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::elliptic::{assemble_lax, random_coeffs, DivisorPoint, EllipticDivisor, EllipticLax};
use crate::kernel::{CMatrix, Poly, C64};
use crate::rational::{BracketSpec, MatPoly};
use crate::theta::ThetaParams;

/// Rational Lax matrix `phi(z) = sum_k phi_k z^k`; `coeffs[k]` is `phi_k` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaxDocument {
    pub r: usize,
    pub n: usize,
    pub coeffs: Vec<Vec<Vec<C64>>>,
    /// auxiliary vector of the divisor; drawn from the seed when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<C64>>,
}

impl LaxDocument {
    pub fn from_matpoly(phi: &MatPoly) -> Self {
        LaxDocument {
            r: phi.r(),
            n: phi.n(),
            coeffs: phi.coeff_mats().iter().map(|m| m.rows()).collect(),
            s: None,
        }
    }

    pub fn to_matpoly(&self) -> Result<MatPoly, HarnessError> {
        if self.r == 0 {
            return Err(HarnessError::schema("r", "must be at least 1"));
        }
        if self.coeffs.len() != self.n + 1 {
            return Err(HarnessError::schema(
                "coeffs",
                format!("expected n + 1 = {} matrices, found {}", self.n + 1, self.coeffs.len()),
            ));
        }
        for (k, m) in self.coeffs.iter().enumerate() {
            if m.len() != self.r {
                return Err(HarnessError::schema(format!("coeffs[{k}]"), format!("expected {} rows", self.r)));
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != self.r {
                    return Err(HarnessError::schema(format!("coeffs[{k}][{i}]"), format!("expected {} entries", self.r)));
                }
                if let Some(j) = row.iter().position(|x| !crate::kernel::is_finite(*x)) {
                    return Err(HarnessError::schema(format!("coeffs[{k}][{i}][{j}]"), "not a finite number"));
                }
            }
        }
        if let Some(s) = &self.s {
            if s.len() != self.r {
                return Err(HarnessError::schema("s", format!("expected {} entries", self.r)));
            }
        }
        MatPoly::new(self.coeffs.iter().map(|m| CMatrix::from_rows(m)).collect()).map_err(HarnessError::from)
    }
}

/// `{"a": [[re, im], ...], "b": [re, im]}`, the bracket with parameters `a(lambda)`, `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDocument {
    pub a: Vec<C64>,
    pub b: C64,
}

impl BracketDocument {
    pub fn to_spec(&self) -> BracketSpec {
        BracketSpec::new(Poly::new(self.a.clone()), self.b)
    }

    pub fn from_spec(spec: &BracketSpec) -> Self {
        BracketDocument {
            a: spec.a.coeffs().to_vec(),
            b: spec.b,
        }
    }
}

/// `linear`, `quadratic`, inline JSON or a path to a JSON file.
pub fn parse_bracket(arg: &str) -> Result<BracketSpec, HarnessError> {
    match arg.trim() {
        "linear" => Ok(BracketSpec::linear()),
        "quadratic" => Ok(BracketSpec::quadratic()),
        s if s.starts_with('{') => Ok(parse_json::<BracketDocument>(s, "--bracket")?.to_spec()),
        s => Ok(load_json::<BracketDocument>(Path::new(s))?.to_spec()),
    }
}

/// Theta suite parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaDocument {
    pub taus: Vec<C64>,
    pub ranks: Vec<usize>,
}

impl Default for ThetaDocument {
    fn default() -> Self {
        ThetaDocument {
            taus: vec![C64::new(0.0, 1.0), C64::new(0.2, 1.1)],
            ranks: vec![2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorPointDocument {
    pub nu: C64,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

/// Elliptic instance; `coeffs[a r + b]` holds the basis coefficients of sector `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticDocument {
    pub tau: C64,
    pub r: usize,
    pub divisor: Vec<DivisorPointDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<C64>>>,
    #[serde(default)]
    pub z0: C64,
}

impl EllipticDocument {
    pub fn params(&self) -> Result<ThetaParams, HarnessError> {
        if self.r == 0 {
            return Err(HarnessError::schema("r", "must be at least 1"));
        }
        Ok(ThetaParams::new(self.tau, self.r)?)
    }

    pub fn divisor(&self, p: &ThetaParams) -> Result<EllipticDivisor, HarnessError> {
        if let Some(k) = self.divisor.iter().position(|d| d.mult == 0) {
            return Err(HarnessError::schema(format!("divisor[{k}].mult"), "must be at least 1"));
        }
        let pts = self.divisor.iter().map(|d| DivisorPoint { nu: d.nu, mult: d.mult }).collect();
        EllipticDivisor::new(pts, p).map_err(|e| HarnessError::schema("divisor", e.to_string()))
    }

    /// Assembles the Lax matrix, drawing missing coefficients from `rng`.
    pub fn assemble(&self, rng: &mut impl rand::Rng) -> Result<EllipticLax, HarnessError> {
        let p = self.params()?;
        let d = self.divisor(&p)?;
        let coeffs = match &self.coeffs {
            Some(c) => {
                if c.len() != self.r * self.r {
                    return Err(HarnessError::schema("coeffs", format!("expected r^2 = {} sectors", self.r * self.r)));
                }
                c.clone()
            }
            None => random_coeffs(&d, self.r, rng),
        };
        Ok(assemble_lax(coeffs, &d, &p, self.z0)?)
    }
}

/// Where an experiment takes its instance from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    Inline(LaxDocument),
    Path(PathBuf),
}

impl InstanceSource {
    pub fn load(&self) -> Result<LaxDocument, HarnessError> {
        match self {
            InstanceSource::Inline(d) => Ok(d.clone()),
            InstanceSource::Path(p) => load_json(p),
        }
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Schema(format!("{origin}: {e}")))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_json(&text, &path.display().to_string())
}
