//! Exact expansion of `{phi(l) (x) phi(m)} = [P/(l-m), phi(l)(x)(a(m) - b/2 phi(m)) + (a(l) - b/2 phi(l))(x)phi(m)]`
//! into coordinate brackets that are linear plus quadratic in the coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BracketSpec;
use crate::error::{Error, Result};
use crate::kernel::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Mono {
    One,
    Lin(usize),
    Quad(usize, usize),
}

impl Mono {
    fn times(self, o: Mono) -> Mono {
        match (self, o) {
            (Mono::One, m) | (m, Mono::One) => m,
            (Mono::Lin(a), Mono::Lin(b)) => Mono::Quad(a.min(b), a.max(b)),
            _ => unreachable!("bracket expansion never exceeds degree two"),
        }
    }
}

type Expr = BTreeMap<Mono, C64>;
/// Polynomial in (lambda, mu) with form-valued coefficients.
type LamMu = BTreeMap<(usize, usize), Expr>;

fn expr_add(into: &mut Expr, e: &Expr, s: C64) {
    for (m, c) in e {
        *into.entry(*m).or_default() += c * s;
    }
}

fn expr_mul(a: &Expr, b: &Expr) -> Expr {
    let mut out = Expr::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(ma.times(*mb)).or_default() += ca * cb;
        }
    }
    out
}

fn lm_add(into: &mut LamMu, e: &LamMu, s: C64) {
    for (k, ex) in e {
        expr_add(into.entry(*k).or_default(), ex, s);
    }
}

fn lm_mul(a: &LamMu, b: &LamMu) -> LamMu {
    let mut out = LamMu::new();
    for ((p1, q1), e1) in a {
        for ((p2, q2), e2) in b {
            expr_add(out.entry((p1 + p2, q1 + q2)).or_default(), &expr_mul(e1, e2), C64::new(1.0, 0.0));
        }
    }
    out
}

fn expr_norm(e: &Expr) -> f64 {
    e.values().fold(0.0, |m, c| m.max(c.norm()))
}

/// Linear plus quadratic polynomial in the flat coordinates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Form {
    pub linear: Vec<(usize, C64)>,
    /// Entries `(a, b, c)` with `a <= b`, meaning `c x_a x_b`.
    pub quadratic: Vec<(usize, usize, C64)>,
}

impl Form {
    fn from_expr(e: &Expr, cutoff: f64) -> Result<Form> {
        let mut f = Form::default();
        for (m, c) in e {
            if c.norm() <= cutoff {
                continue;
            }
            match *m {
                Mono::One => return Err(Error::ExpansionInconsistency(c.norm())),
                Mono::Lin(a) => f.linear.push((a, *c)),
                Mono::Quad(a, b) => f.quadratic.push((a, b, *c)),
            }
        }
        Ok(f)
    }

    pub fn is_zero(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty()
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.linear.iter().map(|&(a, c)| c * x[a]).sum::<C64>()
            + self
                .quadratic
                .iter()
                .map(|&(a, b, c)| c * x[a] * x[b])
                .sum::<C64>()
    }

    /// Sparse gradient at `x`, accumulated into `out`.
    pub fn add_gradient(&self, x: &[C64], out: &mut [C64]) {
        for &(a, c) in &self.linear {
            out[a] += c;
        }
        for &(a, b, c) in &self.quadratic {
            out[a] += c * x[b];
            out[b] += c * x[a];
        }
    }

    fn to_map(&self) -> BTreeMap<(usize, usize), C64> {
        let mut m = BTreeMap::new();
        for &(a, c) in &self.linear {
            *m.entry((a, usize::MAX)).or_default() += c;
        }
        for &(a, b, c) in &self.quadratic {
            *m.entry((a, b)).or_default() += c;
        }
        m
    }

    /// Largest coefficient difference against another form.
    pub fn distance(&self, o: &Form) -> f64 {
        let mut m = self.to_map();
        for (k, c) in o.to_map() {
            *m.entry(k).or_default() -= c;
        }
        m.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn max_coeff(&self) -> f64 {
        self.to_map().values().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn sum(&self, o: &Form) -> Form {
        let mut m = self.to_map();
        for (k, c) in o.to_map() {
            *m.entry(k).or_default() += c;
        }
        let mut f = Form::default();
        for ((a, b), c) in m {
            if b == usize::MAX {
                f.linear.push((a, c));
            } else {
                f.quadratic.push((a, b, c));
            }
        }
        f
    }
}

/// Coordinate brackets `{x_alpha, x_beta}` for one member of the (a,b) family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTensor {
    pub r: usize,
    pub n: usize,
    pub dim: usize,
    forms: Vec<Form>,
}

impl StructureTensor {
    pub fn entry(&self, alpha: usize, beta: usize) -> &Form {
        &self.forms[alpha * self.dim + beta]
    }

    /// Linear (a-proportional) part of `{x_alpha, x_beta}`.
    pub fn linear_part(&self, alpha: usize, beta: usize) -> &[(usize, C64)] {
        &self.entry(alpha, beta).linear
    }

    /// Quadratic (b-proportional) part of `{x_alpha, x_beta}`.
    pub fn quadratic_part(&self, alpha: usize, beta: usize) -> &[(usize, usize, C64)] {
        &self.entry(alpha, beta).quadratic
    }

    /// Poisson matrix at `x`, row-major `dim x dim`.
    pub fn pi(&self, x: &[C64]) -> Vec<C64> {
        self.forms.iter().map(|f| f.eval(x)).collect()
    }

    /// `Pi(x) v`
    pub fn pi_times(&self, x: &[C64], v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let pi = self.pi(x);
        (0..d)
            .map(|a| (0..d).map(|b| pi[a * d + b] * v[b]).sum())
            .collect()
    }

    /// `{x_a, {x_b, x_c}} + cyclic`, evaluated analytically.
    pub fn jacobi(&self, x: &[C64], a: usize, b: usize, c: usize) -> C64 {
        let d = self.dim;
        let pi = self.pi(x);
        let term = |a: usize, b: usize, c: usize| {
            let mut g = vec![C64::new(0.0, 0.0); d];
            self.entry(b, c).add_gradient(x, &mut g);
            (0..d).map(|k| pi[a * d + k] * g[k]).sum::<C64>()
        };
        term(a, b, c) + term(b, c, a) + term(c, a, b)
    }

    pub fn max_distance(&self, o: &StructureTensor) -> f64 {
        self.forms
            .iter()
            .zip(&o.forms)
            .map(|(f, g)| f.distance(g))
            .fold(0.0, f64::max)
    }

    pub fn sum(&self, o: &StructureTensor) -> StructureTensor {
        StructureTensor {
            forms: self.forms.iter().zip(&o.forms).map(|(f, g)| f.sum(g)).collect(),
            ..*self
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.forms.iter().map(Form::max_coeff).fold(0.0, f64::max)
    }
}

type Tensor = Vec<Vec<LamMu>>;

/// Sparse matrix product `S T` with `S` given by its nonzero entries.
fn sparse_left(s: &[(usize, usize, C64)], t: &Tensor) -> Tensor {
    let n = t.len();
    let mut out = vec![vec![LamMu::new(); n]; n];
    for &(i, k, v) in s {
        for j in 0..n {
            lm_add(&mut out[i][j], &t[k][j], v);
        }
    }
    out
}

fn sparse_right(t: &Tensor, s: &[(usize, usize, C64)]) -> Tensor {
    let n = t.len();
    let mut out = vec![vec![LamMu::new(); n]; n];
    for &(k, j, v) in s {
        for i in 0..n {
            lm_add(&mut out[i][j], &t[i][k], v);
        }
    }
    out
}

pub fn structure_tensor(r: usize, n: usize, spec: &BracketSpec) -> Result<StructureTensor> {
    spec.validate(n)?;
    let one = C64::new(1.0, 0.0);
    let idx = |k: usize, i: usize, j: usize| (k * r + i) * r + j;
    let var = |k: usize, i: usize, j: usize| -> Expr { [(Mono::Lin(idx(k, i, j)), one)].into() };
    // phi_ij in lambda (first slot) or mu (second slot)
    let phi = |i: usize, j: usize, slot: usize| -> LamMu {
        (0..=n)
            .map(|k| {
                let key = if slot == 0 { (k, 0) } else { (0, k) };
                (key, var(k, i, j))
            })
            .collect()
    };
    // a(.) delta_ij - b/2 phi_ij(.)
    let shifted = |i: usize, j: usize, slot: usize| -> LamMu {
        let mut out = LamMu::new();
        lm_add(&mut out, &phi(i, j, slot), -spec.b * 0.5);
        if i == j {
            for (k, c) in spec.a.coeffs().iter().enumerate() {
                let key = if slot == 0 { (k, 0) } else { (0, k) };
                expr_add(out.entry(key).or_default(), &[(Mono::One, *c)].into(), one);
            }
        }
        out
    };
    let rr = r * r;
    let pair = |i: usize, m: usize| i * r + m;
    let mut x: Tensor = vec![vec![LamMu::new(); rr]; rr];
    for i in 0..r {
        for j in 0..r {
            for m in 0..r {
                for nn in 0..r {
                    let mut e = lm_mul(&phi(i, j, 0), &shifted(m, nn, 1));
                    lm_add(&mut e, &lm_mul(&shifted(i, j, 0), &phi(m, nn, 1)), one);
                    x[pair(i, m)][pair(j, nn)] = e;
                }
            }
        }
    }
    // permutation operator: P_{(i,m),(j,n)} = delta_in delta_mj
    let perm: Vec<(usize, usize, C64)> = (0..r)
        .flat_map(|i| (0..r).map(move |m| (pair(i, m), pair(m, i), one)))
        .collect();
    let px = sparse_left(&perm, &x);
    let xp = sparse_right(&x, &perm);
    let scale = 1.0 + spec.a.max_coeff() + spec.b.norm();
    let mut forms = vec![Form::default(); (n + 1) * rr * (n + 1) * rr];
    let dim = (n + 1) * rr;
    for row in 0..rr {
        for col in 0..rr {
            let mut num = px[row][col].clone();
            lm_add(&mut num, &xp[row][col], -one);
            let quotient = divide_lambda_minus_mu(&num, scale)?;
            let (i, m) = (row / r, row % r);
            let (j, nn) = (col / r, col % r);
            for ((p, q), e) in quotient {
                if expr_norm(&e) <= 1e-14 * scale {
                    continue;
                }
                if p > n || q > n {
                    return Err(Error::ExpansionInconsistency(expr_norm(&e)));
                }
                let f = Form::from_expr(&e, 1e-15 * scale)?;
                forms[idx(p, i, j) * dim + idx(q, m, nn)] = f;
            }
        }
    }
    Ok(StructureTensor { r, n, dim, forms })
}

/// Exact division by `(lambda - mu)`; a remainder above roundoff is an error.
fn divide_lambda_minus_mu(num: &LamMu, scale: f64) -> Result<LamMu> {
    let top = match num.keys().map(|(p, _)| *p).max() {
        Some(t) => t,
        None => return Ok(LamMu::new()),
    };
    // rows[p] : polynomial in mu with form coefficients
    let mut rows: Vec<BTreeMap<usize, Expr>> = vec![BTreeMap::new(); top + 1];
    for ((p, q), e) in num {
        rows[*p].insert(*q, e.clone());
    }
    let one = C64::new(1.0, 0.0);
    let times_mu = |row: &BTreeMap<usize, Expr>| -> BTreeMap<usize, Expr> {
        row.iter().map(|(q, e)| (q + 1, e.clone())).collect()
    };
    let mut quot: Vec<BTreeMap<usize, Expr>> = vec![BTreeMap::new(); top];
    let mut carry = BTreeMap::new();
    for p in (1..=top).rev() {
        let mut qrow = rows[p].clone();
        for (q, e) in times_mu(&carry) {
            expr_add(qrow.entry(q).or_default(), &e, one);
        }
        quot[p - 1] = qrow.clone();
        carry = qrow;
    }
    let mut rem = rows[0].clone();
    for (q, e) in times_mu(&carry) {
        expr_add(rem.entry(q).or_default(), &e, one);
    }
    let rnorm = rem.values().map(expr_norm).fold(0.0, f64::max);
    if rnorm > 1e-12 * scale * scale {
        return Err(Error::ExpansionInconsistency(rnorm));
    }
    let mut out = LamMu::new();
    for (p, row) in quot.into_iter().enumerate() {
        for (q, e) in row {
            out.insert((p, q), e);
        }
    }
    Ok(out)
}
