//! Abelian integrals on the spectral curve with sheet tracking, and the linearizing
//! coordinates `Q_i = sum_mu int_{z0}^{z_mu} dp/dH_i dz`.

use serde::{Deserialize, Serialize};

use super::curve::{curve_polynomial, genus_info};
use super::flow::hamiltonian_field;
use super::tensor::structure_tensor;
use super::divisor::divisor_coords;
use super::{BracketSpec, MatPoly};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::kernel::{integrate_path_try, ode_solve, poly_roots, resultant, BiPoly, PathSpec, Var, C64};

#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    xi: C64,
    dxi: C64,
    /// continuous logarithm of the surface coefficient
    log_s: C64,
}

/// Continuation of one root `xi(z)` of `P(z, xi) = 0` along a contour.
#[derive(Debug, Clone)]
pub struct SheetTrack {
    p: BiPoly,
    pz: BiPoly,
    px: BiPoly,
    spec: BracketSpec,
    path: PathSpec,
    segs: Vec<Vec<Sample>>,
}

fn flat_roots(p: &crate::kernel::Poly) -> Result<Vec<C64>> {
    Ok(poly_roots(p)?
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect())
}

impl SheetTrack {
    pub fn new(p: &BiPoly, spec: &BracketSpec, path: PathSpec, xi_start: C64) -> Result<Self> {
        let mut tr = SheetTrack {
            p: p.clone(),
            pz: p.d_z(),
            px: p.d_xi(),
            spec: spec.clone(),
            path,
            segs: vec![],
        };
        let mut xi = xi_start;
        let mut log_s = spec.surface(tr.path.start(), xi).ln();
        let segments: Vec<(C64, C64)> = tr.path.segments().collect();
        for (a, b) in segments {
            let s = tr.track_segment(a, b, xi, log_s)?;
            let last = *s.last().unwrap();
            xi = last.xi;
            log_s = last.log_s;
            tr.segs.push(s);
        }
        Ok(tr)
    }

    fn newton(&self, z: C64, xi: C64) -> C64 {
        let mut xi = xi;
        for _ in 0..4 {
            let d = self.px.eval(z, xi);
            if d.norm() == 0.0 {
                break;
            }
            let step = self.p.eval(z, xi) / d;
            xi -= step;
            if step.norm() <= 1e-16 * (1.0 + xi.norm()) {
                break;
            }
        }
        xi
    }

    fn slope(&self, z: C64, xi: C64, dz: C64) -> C64 {
        -self.pz.eval(z, xi) / self.px.eval(z, xi) * dz
    }

    fn track_segment(&self, za: C64, zb: C64, xi0: C64, log0: C64) -> Result<Vec<Sample>> {
        let dz = zb - za;
        let xi = self.newton(za, xi0);
        let mut out = vec![Sample {
            t: 0.0,
            xi,
            dxi: self.slope(za, xi, dz),
            log_s: log0,
        }];
        let mut h: f64 = 0.125;
        let mut cur = out[0];
        while cur.t < 1.0 {
            h = h.min(1.0 - cur.t);
            loop {
                let t1 = if h >= 1.0 - cur.t { 1.0 } else { cur.t + h };
                let z1 = za + dz * t1;
                let pred = cur.xi + cur.dxi * (t1 - cur.t);
                let roots = flat_roots(&self.p.at_z(z1))?;
                let mut dists: Vec<(f64, C64)> = roots.iter().map(|&x| ((x - pred).norm(), x)).collect();
                dists.sort_by(|a, b| a.0.total_cmp(&b.0));
                let second = dists.get(1).map_or(f64::INFINITY, |d| d.0);
                let (d0, x1) = dists[0];
                let s_old = self.spec.surface(za + dz * cur.t, cur.xi);
                let s_new = self.spec.surface(z1, x1);
                let rotation_ok = (s_new / s_old - 1.0).norm() <= 0.5;
                if d0 < 0.25 * second && rotation_ok {
                    let x1 = self.newton(z1, x1);
                    if !self.resolves(za, dz, &cur, t1, x1)? {
                        h *= 0.5;
                        if h < 1e-10 {
                            return Err(Error::BranchObstruction { at: z1 });
                        }
                        continue;
                    }
                    let log_s = cur.log_s + (self.spec.surface(z1, x1) / s_old).ln();
                    cur = Sample {
                        t: t1,
                        xi: x1,
                        dxi: self.slope(z1, x1, dz),
                        log_s,
                    };
                    out.push(cur);
                    h = (h * 1.5).min(0.125);
                    break;
                }
                h *= 0.5;
                if h < 1e-10 {
                    return Err(Error::BranchObstruction { at: z1 });
                }
            }
        }
        Ok(out)
    }

    /// Whether the Hermite interpolant between two samples stays deep inside one root's basin at the midpoint.
    fn resolves(&self, za: C64, dz: C64, a: &Sample, t1: f64, x1: C64) -> Result<bool> {
        let h = t1 - a.t;
        let z1 = za + dz * t1;
        let d1 = self.slope(z1, x1, dz);
        let guess = (a.xi + x1) * 0.5 + (a.dxi - d1) * (h / 8.0);
        let zm = za + dz * (a.t + 0.5 * h);
        let roots = flat_roots(&self.p.at_z(zm))?;
        let mut d: Vec<f64> = roots.iter().map(|x| (x - guess).norm()).collect();
        d.sort_by(f64::total_cmp);
        Ok(d.len() < 2 || d[0] < 0.05 * d[1])
    }

    pub fn path(&self) -> &PathSpec {
        &self.path
    }

    pub fn end_value(&self) -> C64 {
        self.segs.last().unwrap().last().unwrap().xi
    }

    /// `xi` on segment `seg` at local parameter `t`, plus the continuous log of the surface coefficient.
    pub fn at(&self, seg: usize, t: f64) -> (C64, C64) {
        let s = &self.segs[seg];
        let k = s.partition_point(|x| x.t <= t).clamp(1, s.len() - 1);
        let (a, b) = (s[k - 1], s[k]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        // cubic Hermite predictor, then Newton
        let (h00, h10, h01, h11) = (
            2.0 * u * u * u - 3.0 * u * u + 1.0,
            u * u * u - 2.0 * u * u + u,
            -2.0 * u * u * u + 3.0 * u * u,
            u * u * u - u * u,
        );
        let guess = a.xi * h00 + a.dxi * (h10 * h) + b.xi * h01 + b.dxi * (h11 * h);
        let (za, zb) = self.path.segments().nth(seg).unwrap();
        let z = za + (zb - za) * t;
        let xi = self.newton(z, guess);
        let s_here = self.spec.surface(z, xi);
        let s_a = self.spec.surface(za + (zb - za) * a.t, a.xi);
        (xi, a.log_s + (s_here / s_a).ln())
    }
}

/// Straight segment, detoured around obstacles closer than `radius`; at most three re-routes.
pub fn route(za: C64, zb: C64, obstacles: &[C64], radius: f64) -> Result<PathSpec> {
    for &c in obstacles {
        if (c - za).norm() < radius || (c - zb).norm() < radius {
            return Err(Error::Reroute { at: c });
        }
    }
    let mut way = vec![za, zb];
    for attempt in 0..=3 {
        let hit = way.windows(2).enumerate().find_map(|(i, w)| {
            obstacles
                .iter()
                .find(|&&c| segment_distance(w[0], w[1], c) < radius)
                .map(|&c| (i, c))
        });
        let Some((i, c)) = hit else {
            return PathSpec::new(way);
        };
        if attempt == 3 {
            return Err(Error::Reroute { at: c });
        }
        let (a, b) = (way[i], way[i + 1]);
        let d = (b - a) / (b - a).norm();
        let normal = d * C64::new(0.0, 1.0);
        let side = if ((c - a) * d.conj()).im > 0.0 { -1.0 } else { 1.0 };
        way.insert(i + 1, c + normal * (side * 3.0 * radius));
    }
    unreachable!()
}

fn segment_distance(a: C64, b: C64, c: C64) -> f64 {
    let d = b - a;
    let t = (((c - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - c).norm()
}

/// Curve, bracket and the points the contours must avoid.
#[derive(Debug, Clone)]
pub struct AbelianContext {
    pub p: BiPoly,
    pub spec: BracketSpec,
    pub obstacles: Vec<C64>,
    pub tol: Tolerances,
}

impl AbelianContext {
    pub fn new(phi: &MatPoly, spec: &BracketSpec) -> Result<Self> {
        let p = curve_polynomial(phi);
        let mut obstacles = genus_info(phi)?.branch_points;
        // poles of 1/(b xi - a(z)) on the curve
        if spec.b.norm() == 0.0 {
            if spec.a.degree().unwrap_or(0) > 0 {
                obstacles.extend(poly_roots(&spec.a)?.iter().map(|r| r.value));
            } else if spec.a.is_zero() {
                return Err(Error::InvalidInput("bracket with a = 0, b = 0 is trivial".into()));
            }
        } else {
            let s = &BiPoly::monomial(spec.b, 1, 0) - &BiPoly::from_z_poly(&spec.a);
            let res = resultant(&p, &s, Var::Xi)?;
            if res.degree().unwrap_or(0) > 0 {
                obstacles.extend(poly_roots(&res)?.iter().map(|r| r.value));
            }
        }
        Ok(AbelianContext {
            p,
            spec: spec.clone(),
            obstacles,
            tol: Tolerances::default(),
        })
    }

    pub fn radius(&self, za: C64, zb: C64) -> f64 {
        self.tol.r_branch * za.norm().max(zb.norm()).max(1.0)
    }

    /// Contour from `za` to `zb`; the detour radius shrinks when an endpoint sits close to an obstacle.
    pub fn route(&self, za: C64, zb: C64) -> Result<PathSpec> {
        let near = self.obstacle_distance(za).min(self.obstacle_distance(zb));
        route(za, zb, &self.obstacles, self.radius(za, zb).min(0.3 * near))
    }

    /// `(dp/dH) = -z^l xi^k / (P_xi (b xi - a(z)))` for `H = c_{k,l}`.
    fn integrand(&self, px: &BiPoly, z: C64, xi: C64, (k, l): (usize, usize)) -> C64 {
        -(z.powu(l as u32) * xi.powu(k as u32)) / (px.eval(z, xi) * self.spec.surface(z, xi))
    }

    /// Integrals of every `dp/dH_i` along `path`, starting on the sheet through `xi_start`;
    /// returns the values and the sheet reached at the end.
    pub fn q_on_path(&self, path: &PathSpec, xi_start: C64, hams: &[(usize, usize)]) -> Result<(Vec<C64>, C64)> {
        let track = SheetTrack::new(&self.p, &self.spec, path.clone(), xi_start)?;
        let px = self.p.d_xi();
        let mut out = Vec::with_capacity(hams.len());
        for &h in hams {
            let v = integrate_path_try(
                |seg, t, z| {
                    let (xi, _) = track.at(seg, t);
                    Ok(self.integrand(&px, z, xi, h))
                },
                path,
                &self.tol,
            )?;
            out.push(v.value);
        }
        Ok((out, track.end_value()))
    }

    /// `sum_i int_{z0}^{z} dp/dH_i` ending on the sheet through `(z, xi)`.
    pub fn q_point(&self, z0: C64, z: C64, xi: C64, hams: &[(usize, usize)]) -> Result<Vec<C64>> {
        let path = self.route(z0, z)?;
        let (v, _) = self.q_on_path(&path.reversed(), xi, hams)?;
        Ok(v.into_iter().map(|x| -x).collect())
    }

    /// Primitive `p(z, xi)` with `dp/dxi = 1/(b xi - a(z))` along a tracked path.
    pub fn primitive_integral(&self, path: &PathSpec, xi_start: C64) -> Result<C64> {
        let track = SheetTrack::new(&self.p, &self.spec, path.clone(), xi_start)?;
        let b = self.spec.b;
        let v = integrate_path_try(
            |seg, t, z| {
                let (xi, log_s) = track.at(seg, t);
                Ok(if b.norm() == 0.0 {
                    -xi / self.spec.a.eval(z)
                } else {
                    log_s / b
                })
            },
            path,
            &self.tol,
        )?;
        Ok(v.value)
    }
}

/// Generating function `F = sum_mu int_{z0}^{z_mu} p(z, xi(z)) dz` on the curve `p`.
pub fn generating_function(
    p: &BiPoly,
    spec: &BracketSpec,
    obstacles: &[C64],
    z0: C64,
    points: &[(C64, C64)],
) -> Result<C64> {
    let ctx = AbelianContext {
        p: p.clone(),
        spec: spec.clone(),
        obstacles: obstacles.to_vec(),
        tol: Tolerances::default(),
    };
    let mut f = C64::new(0.0, 0.0);
    for &(z, xi) in points {
        let path = ctx.route(z0, z)?;
        f -= ctx.primitive_integral(&path.reversed(), xi)?;
    }
    Ok(f)
}

/// `Q_i` with explicitly given contours from `z0` to each divisor point.
pub fn q_along_paths(
    phi: &MatPoly,
    spec: &BracketSpec,
    points: &[(C64, C64)],
    paths: &[PathSpec],
    hams: &[(usize, usize)],
) -> Result<Vec<C64>> {
    let ctx = AbelianContext::new(phi, spec)?;
    let mut q = vec![C64::new(0.0, 0.0); hams.len()];
    for (&(_, xi), path) in points.iter().zip(paths) {
        let (v, _) = ctx.q_on_path(&path.reversed(), xi, hams)?;
        for (a, b) in q.iter_mut().zip(v) {
            *a -= b;
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationTable {
    pub times: Vec<f64>,
    pub hamiltonians: Vec<(usize, usize)>,
    /// `q[t][i]`
    pub q: Vec<Vec<C64>>,
    /// least-squares slope of each `Q_i(t)`
    pub slopes: Vec<C64>,
    /// max deviation from the affine fit, relative to the largest displacement `|slope| * T`
    pub fit_residual: Vec<f64>,
}

impl AbelianContext {
    fn obstacle_distance(&self, z: C64) -> f64 {
        self.obstacles.iter().map(|c| (c - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Continues every divisor point from `pts` to `next`. Fails when the matching is ambiguous
    /// or a step is long compared with the distance to the nearest obstacle.
    fn advance(&self, pts: &[(C64, C64)], next: &[(C64, C64)], hams: &[(usize, usize)]) -> Result<Vec<C64>> {
        if next.len() != pts.len() {
            return Err(Error::MatchingFailed);
        }
        let dist = |a: (C64, C64), b: (C64, C64)| (a.0 - b.0).norm() + (a.1 - b.1).norm();
        let mut used = vec![false; next.len()];
        let mut out = vec![C64::new(0.0, 0.0); hams.len()];
        for &p in pts {
            let mut order: Vec<usize> = (0..next.len()).collect();
            order.sort_by(|&a, &b| dist(p, next[a]).total_cmp(&dist(p, next[b])));
            let k = order[0];
            let second = order.get(1).map_or(f64::INFINITY, |&m| dist(p, next[m]));
            if used[k] || dist(p, next[k]) >= 0.25 * second {
                return Err(Error::MatchingFailed);
            }
            used[k] = true;
            let (zn, xn) = next[k];
            if (zn - p.0).norm() > 0.5 * self.obstacle_distance(p.0) {
                return Err(Error::MatchingFailed);
            }
            if (zn - p.0).norm() <= 1e-15 * (1.0 + zn.norm()) {
                continue;
            }
            let path = self.route(p.0, zn)?;
            let (v, end) = self.q_on_path(&path, p.1, hams)?;
            if (end - xn).norm() > 1e-6 * (1.0 + xn.norm()) {
                return Err(Error::MatchingFailed);
            }
            for (a, b) in out.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(out)
    }

    fn q_divisor(&self, z0: C64, pts: &[(C64, C64)], hams: &[(usize, usize)]) -> Result<Vec<C64>> {
        let mut q = vec![C64::new(0.0, 0.0); hams.len()];
        for &(z, xi) in pts {
            for (a, b) in q.iter_mut().zip(self.q_point(z0, z, xi, hams)?) {
                *a += b;
            }
        }
        Ok(q)
    }
}

fn table(times: &[f64], hams: &[(usize, usize)], q: Vec<Vec<C64>>) -> LinearizationTable {
    let (slopes, fit_residual) = affine_fit(times, &q);
    LinearizationTable {
        times: times.to_vec(),
        hamiltonians: hams.to_vec(),
        q,
        slopes,
        fit_residual,
    }
}

/// `Q(t)` along a given trajectory: `Q(t_0)` by contours from `z0`, later values by continuing
/// each divisor point along its own motion. The samples must be dense enough for the motion
/// to be matched unambiguously; `linearize_flow` refines on its own.
pub fn linearize(
    traj: &[MatPoly],
    times: &[f64],
    spec: &BracketSpec,
    z0: C64,
    s: &[C64],
    hams: &[(usize, usize)],
) -> Result<LinearizationTable> {
    if traj.len() != times.len() || traj.is_empty() {
        return Err(Error::InvalidInput("trajectory and times differ in length".into()));
    }
    let ctx = AbelianContext::new(&traj[0], spec)?;
    let mut pts = divisor_coords(&traj[0], s)?.points;
    let mut q = vec![ctx.q_divisor(z0, &pts, hams)?];
    for phi in &traj[1..] {
        let next = divisor_coords(phi, s)?.points;
        let inc = ctx.advance(&pts, &next, hams)?;
        let row = q.last().unwrap().iter().zip(inc).map(|(a, b)| a + b).collect();
        q.push(row);
        pts = next;
    }
    Ok(table(times, hams, q))
}

/// Flow of `h` with `Q(t)` accumulated on adaptively refined sub-steps.
pub fn linearize_flow(
    phi0: &MatPoly,
    h: (usize, usize),
    spec: &BracketSpec,
    times: &[f64],
    z0: C64,
    s: &[C64],
    hams: &[(usize, usize)],
) -> Result<(Vec<MatPoly>, LinearizationTable)> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("times must be increasing".into()));
    }
    let (r, n) = (phi0.r(), phi0.n());
    let tensor = structure_tensor(r, n, spec)?;
    let field = hamiltonian_field(&tensor, h);
    let ctx = AbelianContext::new(phi0, spec)?;
    let span = times.last().unwrap() - times[0];
    let max_dt = if span > 0.0 { span / 16.0 } else { 1.0 };
    let mut x = phi0.coords();
    let mut t = times[0];
    let mut pts = divisor_coords(phi0, s)?.points;
    let mut cur = ctx.q_divisor(z0, &pts, hams)?;
    let mut q = vec![cur.clone()];
    let mut traj = vec![phi0.clone()];
    let mut dt = max_dt;
    for &target in &times[1..] {
        while t < target {
            let step = dt.min(target - t);
            let t1 = if step >= target - t { target } else { t + step };
            let x1 = ode_solve(&field, &x, &[t, t1])?.pop().unwrap();
            let phi1 = MatPoly::from_coords(r, n, &x1);
            let attempt = divisor_coords(&phi1, s).and_then(|d| {
                let inc = ctx.advance(&pts, &d.points, hams)?;
                Ok((d.points, inc))
            });
            match attempt {
                Ok((next, inc)) => {
                    for (a, b) in cur.iter_mut().zip(inc) {
                        *a += b;
                    }
                    pts = next;
                    x = x1;
                    t = t1;
                    dt = (dt * 1.5).min(max_dt);
                }
                Err(Error::MatchingFailed | Error::Reroute { .. } | Error::BranchObstruction { .. }) => {
                    dt *= 0.5;
                    if dt < 1e-9 * max_dt {
                        return Err(Error::MatchingFailed);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        q.push(cur.clone());
        traj.push(MatPoly::from_coords(r, n, &x));
    }
    Ok((traj, table(times, hams, q)))
}

/// Least-squares `Q_i(t) ~ alpha + beta t` per column.
pub fn affine_fit(times: &[f64], q: &[Vec<C64>]) -> (Vec<C64>, Vec<f64>) {
    let m = times.len() as f64;
    let tm = times.iter().sum::<f64>() / m;
    let var: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    let span = times.last().unwrap() - times.first().unwrap();
    let ncol = q.first().map_or(0, |r| r.len());
    let mut slopes = vec![];
    let mut dev = vec![];
    for i in 0..ncol {
        let qm = q.iter().map(|r| r[i]).sum::<C64>() / m;
        let beta = if var > 0.0 {
            times.iter().zip(q).map(|(t, r)| (r[i] - qm) * (t - tm)).sum::<C64>() / var
        } else {
            C64::new(0.0, 0.0)
        };
        let d = times
            .iter()
            .zip(q)
            .map(|(t, r)| (r[i] - qm - beta * (t - tm)).norm())
            .fold(0.0, f64::max);
        slopes.push(beta);
        dev.push(d);
    }
    let motion = slopes.iter().map(|b| b.norm() * span).fold(0.0, f64::max);
    let rel = dev.iter().map(|d| if motion > 0.0 { d / motion } else { *d }).collect();
    (slopes, rel)
}
