use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::doc::{DivisorPointDocument, EllipticDocument, LaxDocument, ThetaDocument};
use super::report::{digest, CheckRecord, ExperimentConfig, Report};
use super::{commands, HarnessError};
use crate::elliptic::{
    elliptic_divisor_coords, elliptic_genus, lattice_distance, slr_reduce, spectral_invariants, translation_check,
    EllipticCoords, EllipticLax,
};
use crate::error::{Error, Result};
use crate::kernel::{norm2, PathSpec, C64};
use crate::rational::curve::spectral_gradients;
use crate::rational::{
    casimir_detect, divisor_coords, divisor_coords_generic, flow, genus, linearize_flow, q_along_paths,
    random_generic_instance, spectral_curve, structure_tensor, unit_disk, verify_canonical, AbelianContext,
    BracketSpec, MatPoly,
};
use crate::theta::{
    f_vector, i_matrices, puncture_distance, riemann_theta, singular_points_near, theta_kj, xi_kj, BasicSection,
    ThetaParams,
};

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    /// wall-clock budget in seconds
    pub budget: f64,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, title: "involution of spectral Hamiltonians", budget: 60.0 },
    Criterion { id: 2, title: "Jacobi identity", budget: 30.0 },
    Criterion { id: 3, title: "isospectrality of flows", budget: 60.0 },
    Criterion { id: 4, title: "canonical divisor brackets", budget: 120.0 },
    Criterion { id: 5, title: "linearization and path independence", budget: 120.0 },
    Criterion { id: 6, title: "genus and divisor count", budget: 30.0 },
    Criterion { id: 7, title: "theta relations", budget: 30.0 },
    Criterion { id: 8, title: "elliptic engine", budget: 120.0 },
    Criterion { id: 9, title: "determinism and robustness", budget: 240.0 },
];

const RATIONAL_SHAPES: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 1)];

pub struct AcceptanceRun {
    pub report: Report,
    /// summed task time per criterion, in seconds
    pub seconds: BTreeMap<u8, f64>,
}

type Check = Box<dyn Fn(&ExperimentConfig, &mut ChaCha8Rng) -> Vec<CheckRecord> + Send + Sync>;

struct Task {
    criterion: u8,
    label: String,
    run: Check,
}

fn task(criterion: u8, label: String, run: impl Fn(&ExperimentConfig, &mut ChaCha8Rng) -> Vec<CheckRecord> + Send + Sync + 'static) -> Task {
    Task {
        criterion,
        label,
        run: Box::new(run),
    }
}

fn stream(label: &str) -> u64 {
    u64::from_str_radix(&digest(label), 16).expect("hex digest")
}

/// Runs every selected criterion on a pool of `workers` threads.
pub fn run_acceptance(config: &ExperimentConfig, workers: usize) -> std::result::Result<AcceptanceRun, HarnessError> {
    config.validate()?;
    let extra = match &config.instance {
        Some(src) => Some(src.load()?.to_matpoly()?),
        None => None,
    };
    let tasks: Vec<Task> = tasks(config, extra).into_iter().filter(|t| config.runs(t.criterion)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Schema(format!("--workers: {e}")))?;
    let results: Vec<(u8, f64, Vec<CheckRecord>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let mut g = ChaCha8Rng::seed_from_u64(config.seed);
                g.set_stream(stream(&t.label));
                let start = Instant::now();
                let recs = (t.run)(config, &mut g);
                (t.criterion, start.elapsed().as_secs_f64(), recs)
            })
            .collect()
    });
    let mut seconds = BTreeMap::new();
    let mut records = vec![];
    for (k, s, recs) in results {
        *seconds.entry(k).or_insert(0.0) += s;
        records.extend(recs);
    }
    Ok(AcceptanceRun {
        report: Report::new(config.clone(), records),
        seconds,
    })
}

fn tasks(config: &ExperimentConfig, extra: Option<MatPoly>) -> Vec<Task> {
    let mut out = vec![];
    let user_specs: Vec<BracketSpec> = config.brackets.iter().map(|b| b.to_spec()).collect();
    for (r, n) in RATIONAL_SHAPES {
        let specs = user_specs.clone();
        out.push(task(1, format!("c1.r{r}n{n}"), move |cfg, g| vec![involution(cfg, g, r, n, &specs)]));
        let specs = user_specs.clone();
        out.push(task(2, format!("c2.r{r}n{n}"), move |cfg, g| vec![jacobi(cfg, g, r, n, &specs)]));
        out.push(task(3, format!("c3.r{r}n{n}"), move |cfg, g| vec![isospectral(cfg, g, r, n, None)]));
        out.push(task(6, format!("c6.r{r}n{n}"), move |cfg, g| genus_count(cfg, g, r, n)));
    }
    if let Some(phi) = extra {
        let phi2 = phi.clone();
        let specs = user_specs.clone();
        out.push(task(1, "c1.user".into(), move |cfg, g| {
            vec![involution_on(cfg, g, "c1.involution.user", std::slice::from_ref(&phi), &specs, 5)]
        }));
        out.push(task(3, "c3.user".into(), move |cfg, g| {
            vec![isospectral(cfg, g, phi2.r(), phi2.n(), Some(phi2.clone()))]
        }));
    }
    for n in [2, 3] {
        out.push(task(4, format!("c4.n{n}"), move |cfg, g| canonical(cfg, g, n)));
    }
    out.push(task(5, "c5".into(), linearization));
    for (k, tau) in ThetaDocument::default().taus.into_iter().enumerate() {
        for r in 2..=5 {
            out.push(task(7, format!("c7.r{r}.tau{k}"), move |cfg, g| theta_records(cfg, g, r, tau, k)));
        }
    }
    for n in [1, 2] {
        out.push(task(8, format!("c8.n{n}"), move |cfg, g| elliptic_records(cfg, g, n)));
    }
    out.push(task(9, "c9".into(), |cfg, _| vec![malformed_inputs(cfg)]));
    out
}

fn record(cfg: &ExperimentConfig, name: String, k: u8, inputs: String, res: Result<f64>, base: f64) -> CheckRecord {
    let tol = cfg.tolerance(&name, base);
    match res {
        Ok(x) => CheckRecord::measured(name, k, inputs, x, tol),
        Err(e) => CheckRecord::failed(name, k, inputs, tol, e.to_string()),
    }
}

fn instances(g: &mut ChaCha8Rng, r: usize, n: usize, k: usize) -> Vec<MatPoly> {
    (0..k).map(|_| random_generic_instance(r, n, g)).collect()
}

fn coords_digest(phis: &[MatPoly], specs: &[BracketSpec]) -> String {
    let docs: Vec<LaxDocument> = phis.iter().map(LaxDocument::from_matpoly).collect();
    digest(&(docs, specs))
}

fn involution(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, r: usize, n: usize, extra: &[BracketSpec]) -> CheckRecord {
    let phis = instances(g, r, n, 20);
    involution_on(cfg, g, &format!("c1.involution.r{r}n{n}"), &phis, extra, 5)
}

/// `max |{H_a, H_b}| / (|grad H_a| |grad H_b| max|Pi|)` over all pairs of spectral coefficients.
fn involution_on(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, name: &str, phis: &[MatPoly], extra: &[BracketSpec], k: usize) -> CheckRecord {
    let (r, n) = (phis[0].r(), phis[0].n());
    let mut specs: Vec<BracketSpec> = (0..k).map(|_| BracketSpec::random(n, g)).collect();
    specs.extend(extra.iter().cloned());
    let inputs = coords_digest(phis, &specs);
    let res = (|| {
        let mut worst = 0.0_f64;
        for spec in &specs {
            let t = structure_tensor(r, n, spec)?;
            for phi in phis {
                let x = phi.coords();
                let grads = spectral_gradients(phi);
                let pg: Vec<Vec<C64>> = grads.iter().map(|gb| t.pi_times(&x, gb)).collect();
                for a in 0..grads.len() {
                    for b in a + 1..grads.len() {
                        let v: C64 = grads[a].iter().zip(&pg[b]).map(|(p, q)| p * q).sum();
                        let scale = (norm2(&grads[a]) * norm2(&grads[b]) * t.max_coeff()).max(1.0);
                        worst = worst.max(v.norm() / scale);
                    }
                }
            }
        }
        Ok(worst)
    })();
    record(cfg, name.into(), 1, inputs, res, 1e-6)
}

/// Cyclic sums `{{x_a, x_b}, x_c} + ...` of coordinate functions.
fn jacobi(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, r: usize, n: usize, extra: &[BracketSpec]) -> CheckRecord {
    let mut specs: Vec<BracketSpec> = (0..5).map(|_| BracketSpec::random(n, g)).collect();
    specs.extend(extra.iter().cloned());
    let phis = instances(g, r, n, specs.len());
    let inputs = coords_digest(&phis, &specs);
    let res = (|| {
        let mut worst = 0.0_f64;
        for (spec, phi) in specs.iter().zip(&phis) {
            let t = structure_tensor(r, n, spec)?;
            let x = phi.coords();
            let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
            let scale = t.max_coeff().powi(2) * (1.0 + xmax).powi(3);
            for _ in 0..10 {
                let (a, b, c) = (g.gen_range(0..t.dim), g.gen_range(0..t.dim), g.gen_range(0..t.dim));
                worst = worst.max(t.jacobi(&x, a, b, c).norm() / scale.max(1e-300));
            }
        }
        Ok(worst)
    })();
    record(cfg, format!("c2.jacobi.r{r}n{n}"), 2, inputs, res, 1e-10)
}

fn rel_drift(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().map(|x| x.norm()).fold(1e-300_f64, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn linspace(t_max: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| t_max * i as f64 / (k - 1) as f64).collect()
}

/// Spectral-coefficient drift along every Hamiltonian flow on `t in [0, 1]`.
fn isospectral(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, r: usize, n: usize, given: Option<MatPoly>) -> CheckRecord {
    let (phis, name) = match given {
        Some(phi) => (vec![phi], "c3.isospectral.user".to_string()),
        None => (instances(g, r, n, 2), format!("c3.isospectral.r{r}n{n}")),
    };
    let specs = vec![BracketSpec::linear(), BracketSpec::random(n, g)];
    let inputs = coords_digest(&phis, &specs);
    let times = linspace(1.0, 11);
    let res = (|| {
        let mut worst = 0.0_f64;
        for phi in &phis {
            let c0 = spectral_curve(phi).values();
            for spec in &specs {
                for h in casimir_detect(phi, spec).hamiltonians {
                    for p in flow(phi, h, spec, &times)? {
                        worst = worst.max(rel_drift(&c0, &spectral_curve(&p).values()));
                    }
                }
            }
        }
        Ok(worst)
    })();
    record(cfg, name, 3, inputs, res, 1e-8)
}

fn unit_vector(g: &mut ChaCha8Rng, r: usize) -> Vec<C64> {
    (0..r).map(|_| unit_disk(g)).collect()
}

/// Brackets of divisor coordinates against `b xi - a(z)` for the linear, quadratic and a random bracket.
fn canonical(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, n: usize) -> Vec<CheckRecord> {
    let mut out = vec![];
    for k in 0..2 {
        let phi = random_generic_instance(2, n, g);
        let s = unit_vector(g, 2);
        let specs = [
            ("linear", BracketSpec::linear()),
            ("quadratic", BracketSpec::quadratic()),
            ("random", BracketSpec::random(n, g)),
        ];
        for (label, spec) in specs {
            let inputs = digest(&(LaxDocument::from_matpoly(&phi), &s, &spec));
            let rep = verify_canonical(&phi, &spec, &s);
            let name = format!("c4.canonical.n{n}.i{k}.{label}");
            let detail = match &rep {
                Ok(rep) => format!("{} points", rep.points.len()),
                Err(_) => String::new(),
            };
            let res = rep.and_then(|rep| {
                if rep.points.len() != n {
                    return Err(Error::MissedZeros {
                        found: rep.points.len(),
                        expected: n as i64,
                    });
                }
                Ok(rep.max_residual())
            });
            out.push(record(cfg, name, 4, inputs, res, 1e-4).with_detail(detail));
        }
    }
    out
}

fn inside(poly: &[C64], p: C64) -> bool {
    let mut wind = false;
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        if (a.im > p.im) != (b.im > p.im) && p.re < a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re) {
            wind = !wind;
        }
    }
    wind
}

/// Largest difference of `Q` between two homotopic contour families bulging to either side of the chords.
pub fn path_independence(phi: &MatPoly, spec: &BracketSpec, s: &[C64], hams: &[(usize, usize)]) -> Result<f64> {
    let ctx = AbelianContext::new(phi, spec)?;
    let pts = divisor_coords(phi, s)?.points;
    let near = pts
        .iter()
        .flat_map(|&(z, _)| ctx.obstacles.iter().map(move |&o| (z - o).norm()))
        .fold(f64::INFINITY, f64::min);
    let margin = (0.5 * near).min(0.02);
    let clear = |a: C64, b: C64| {
        ctx.obstacles
            .iter()
            .all(|&o| (0..=200).all(|k| (a + (b - a) * (k as f64 / 200.0) - o).norm() > margin))
    };
    let z0 = [3.0, 4.0, 2.5]
        .iter()
        .flat_map(|&rad| (0..32).map(move |k| C64::from_polar(rad, k as f64 * PI / 16.0)))
        .find(|&z0| pts.iter().all(|&(z, _)| clear(z0, z)))
        .ok_or(Error::Reroute { at: C64::new(0.0, 0.0) })?;
    let mut paths = [vec![], vec![]];
    for &(z, _) in &pts {
        let normal = (z - z0) / (z - z0).norm() * C64::new(0.0, 1.0);
        let mid = (z + z0) * 0.5;
        let mut w = 0.5;
        loop {
            let quad = [z0, mid + normal * w, z, mid - normal * w];
            let ok = ctx
                .obstacles
                .iter()
                .all(|&o| !inside(&quad, o) && quad.iter().all(|&q| (q - o).norm() > margin));
            if ok {
                break;
            }
            w *= 0.5;
            if w < 1e-3 {
                return Err(Error::Reroute { at: z });
            }
        }
        paths[0].push(PathSpec::new(vec![z0, mid + normal * w, z])?);
        paths[1].push(PathSpec::new(vec![z0, mid - normal * w, z])?);
    }
    let qa = q_along_paths(phi, spec, &pts, &paths[0], hams)?;
    let qb = q_along_paths(phi, spec, &pts, &paths[1], hams)?;
    Ok(qa.iter().zip(&qb).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Draws `(phi, s)` until every divisor point is at least `1e-2` from the branch points.
fn clear_instance(g: &mut ChaCha8Rng, spec: &BracketSpec) -> (MatPoly, Vec<C64>, usize) {
    let mut rejected = 0;
    loop {
        let phi = random_generic_instance(2, 3, g);
        let s = unit_vector(g, 2);
        let ok = AbelianContext::new(&phi, spec).ok().zip(divisor_coords(&phi, &s).ok()).is_some_and(|(ctx, d)| {
            d.points
                .iter()
                .all(|&(z, _)| ctx.obstacles.iter().all(|&o| (z - o).norm() >= 1e-2))
        });
        if ok {
            return (phi, s, rejected);
        }
        rejected += 1;
    }
}

fn linearization(cfg: &ExperimentConfig, g: &mut ChaCha8Rng) -> Vec<CheckRecord> {
    let spec = BracketSpec::linear();
    let (phi, s, rejected) = clear_instance(g, &spec);
    let z0 = C64::new(2.5, 2.5);
    let inputs = digest(&(LaxDocument::from_matpoly(&phi), &s, z0));
    let hams = casimir_detect(&phi, &spec).hamiltonians;
    let times = linspace(1.0, 9);
    let mut out = vec![];
    for &h in &hams {
        let name = format!("c5.linear_fit.h{}_{}", h.0, h.1);
        let res = linearize_flow(&phi, h, &spec, &times, z0, &s, &hams).map(|(_, tab)| {
            let worst = tab.fit_residual.iter().fold(0.0_f64, |m, x| m.max(*x));
            let slopes: Vec<String> = tab.slopes.iter().map(|x| format!("{:.3e}", x.norm())).collect();
            (worst, format!("|slopes| = [{}]", slopes.join(", ")))
        });
        let detail = res.as_ref().map(|x| x.1.clone()).unwrap_or_default();
        out.push(record(cfg, name, 5, inputs.clone(), res.map(|x| x.0), 1e-5).with_detail(detail));
    }
    let res = path_independence(&phi, &spec, &s, &hams);
    out.push(record(cfg, "c5.path_independence".into(), 5, inputs, res, 1e-8).with_detail(format!("{rejected} draws rejected")));
    out
}

/// Riemann-Hurwitz genus `r(r-1)n/2 - r + 1` of a generic rational instance.
pub fn rational_genus(r: usize, n: usize) -> i64 {
    (r * (r - 1) * n / 2) as i64 - r as i64 + 1
}

fn genus_count(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, r: usize, n: usize) -> Vec<CheckRecord> {
    let phis = instances(g, r, n, 20);
    let inputs = coords_digest(&phis, &[]);
    let want = rational_genus(r, n);
    let mut genus_err: Result<f64> = Ok(0.0);
    let mut counts = vec![];
    let mut count_err = None;
    for phi in &phis {
        match genus(phi) {
            Ok(gg) => {
                if let Ok(w) = genus_err.as_mut() {
                    *w = w.max((gg - want).abs() as f64);
                }
            }
            Err(e) => genus_err = Err(e),
        }
        let s0 = unit_vector(g, r);
        match divisor_coords_generic(phi, &s0, g) {
            Ok(d) => counts.push(d.count),
            Err(e) => count_err = Some(e),
        }
    }
    let spread = match count_err {
        Some(e) => Err(e),
        None => Ok((counts.iter().max().unwrap() - counts.iter().min().unwrap()) as f64),
    };
    let count = counts.first().copied().unwrap_or(0);
    vec![
        record(cfg, format!("c6.genus.r{r}n{n}"), 6, inputs.clone(), genus_err, 0.5).with_detail(format!("g = {want}")),
        record(cfg, format!("c6.divisor_count.r{r}n{n}"), 6, inputs, spread, 0.5).with_detail(format!("count = {count}")),
    ]
}

fn e(x: C64) -> C64 {
    (2.0 * PI * C64::new(0.0, 1.0) * x).exp()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn theta_probe(g: &mut ChaCha8Rng, p: &ThetaParams) -> C64 {
    loop {
        let z = p.from_skew(g.gen_range(-0.5..0.5), g.gen_range(-0.5..0.5));
        if puncture_distance(p, z) > 0.05 && singular_points_near(p, z, z, 0.05).is_empty() {
            return z;
        }
    }
}

/// `(relation, residual, tolerance)` rows for one `(r, tau)`.
pub fn theta_residuals(p: &ThetaParams, g: &mut ChaCha8Rng) -> Result<Vec<(&'static str, f64, f64)>> {
    let (r, tau) = (p.r, p.tau);
    let rf = r as f64;
    let p1 = ThetaParams::new(tau, 1)?;
    let zero = riemann_theta((tau + 1.0) * 0.5, &p1).norm();

    let mut translation = 0.0_f64;
    for _ in 0..3 {
        let z = C64::new(g.gen_range(-0.5..0.5), g.gen_range(-0.3..0.3));
        for k in 0..r {
            for j in 0..r {
                let t = theta_kj(z, k, j, p)?;
                let x = xi_kj(z, k, j, p)?;
                translation = translation.max(rel(theta_kj(z + 1.0, k, j, p)?, t));
                translation = translation.max(rel(xi_kj(z + 1.0, k, j, p)?, x));
                let st = (C64::new(k as f64, 0.0) + tau * j as f64) / rf;
                translation = translation.max(rel(theta_kj(z + tau, k, j, p)?, e(-tau / 2.0 - (z + st)) * t));
                let sx = (C64::new(2.0 * k as f64 - 1.0, 0.0) + tau * (2.0 * j as f64 - 1.0)) / (2.0 * rf);
                translation = translation.max(rel(xi_kj(z + tau, k, j, p)?, e(-tau / 2.0 - (z + sx)) * x));
                if k + 1 < r {
                    translation = translation.max(rel(theta_kj(z + 1.0 / rf, k, j, p)?, theta_kj(z, k + 1, j, p)?));
                    translation = translation.max(rel(xi_kj(z + 1.0 / rf, k, j, p)?, xi_kj(z, k + 1, j, p)?));
                }
                if j + 1 < r {
                    translation = translation.max(rel(theta_kj(z + tau / rf, k, j, p)?, theta_kj(z, k, j + 1, p)?));
                    translation = translation.max(rel(xi_kj(z + tau / rf, k, j, p)?, xi_kj(z, k, j + 1, p)?));
                } else {
                    let want = theta_kj(z, k, 0, p)? * e(-tau / 2.0 - z - k as f64 / rf);
                    translation = translation.max(rel(theta_kj(z + tau / rf, k, j, p)?, want));
                    let want = xi_kj(z, k, 0, p)? * e(-tau / 2.0 - z - (2.0 * k as f64 - 1.0 - tau) / (2.0 * rf));
                    translation = translation.max(rel(xi_kj(z + tau / rf, k, j, p)?, want));
                }
            }
        }
    }

    let (_, i2) = i_matrices(r);
    let mut period = 0.0_f64;
    for _ in 0..10 {
        let z = theta_probe(g, p);
        let f = f_vector(z, p)?;
        let f1 = f_vector(z + 1.0 / rf, p)?;
        let ft = f_vector(z + tau / rf, p)?;
        let shifted = i2.mul_vec(&f);
        for j in 0..r {
            period = period.max(rel(f1[j], f[j])).max(rel(ft[j], shifted[j]));
        }
    }

    let sec = BasicSection::new(p)?;
    let q = p.q();
    let mut roots = 0.0_f64;
    let row = if r % 2 == 0 { 0.25 } else { 0.0 };
    for u in [-0.3, 0.1, 0.45] {
        let z = p.from_skew(u, row);
        let s = sec.at(z)?;
        let end = sec.continue_to(&s, z + 1.0 / rf)?;
        for i in 0..r {
            roots = roots.max((end.values[i] / s.values[i] - q.powu(i as u32)).norm());
        }
    }
    for (u, v) in [(0.0, 0.0), (0.2, 0.3), (-0.4, 0.1)] {
        let z = p.from_skew(u, v);
        let s = sec.at(z)?;
        let up = sec.continue_to(&s, z + tau / rf)?;
        for i in 0..r {
            let want = s.values[(i + 1) % r];
            roots = roots.max((up.values[i] - want).norm() / want.norm());
        }
    }
    Ok(vec![
        ("theta_zero", zero, 1e-12),
        ("translations", translation, 1e-12),
        ("period", period, 1e-10),
        ("roots", roots, 1e-8),
    ])
}

fn theta_records(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, r: usize, tau: C64, k: usize) -> Vec<CheckRecord> {
    let inputs = digest(&(r, tau));
    let prefix = format!("c7.r{r}.tau{k}");
    match ThetaParams::new(tau, r).and_then(|p| theta_residuals(&p, g)) {
        Ok(rows) => rows
            .into_iter()
            .map(|(rel, x, tol)| record(cfg, format!("{prefix}.{rel}"), 7, inputs.clone(), Ok(x), tol))
            .collect(),
        Err(e) => vec![record(cfg, prefix, 7, inputs, Err(e), 1e-8)],
    }
}

/// Seeded elliptic instance: `tau = 0.1 + i`, simple divisor points kept apart from each other,
/// from the origin and from the half period.
pub fn random_elliptic_document(r: usize, n: usize, g: &mut ChaCha8Rng) -> EllipticDocument {
    let tau = C64::new(0.1, 1.0);
    let p = ThetaParams::new(tau, r).expect("fixed tau is valid");
    let mut divisor: Vec<DivisorPointDocument> = vec![];
    let avoid = [p.from_skew(0.0, 0.0), p.from_skew(0.5, 0.5)];
    while divisor.len() < n {
        let nu = p.from_skew(g.gen_range(0.0..1.0), g.gen_range(0.0..1.0));
        let near = avoid
            .iter()
            .chain(divisor.iter().map(|d| &d.nu))
            .any(|&a| lattice_distance(a, nu, &p) < 0.15);
        if !near {
            divisor.push(DivisorPointDocument { nu, mult: 1 });
        }
    }
    EllipticDocument {
        tau,
        r,
        divisor,
        coeffs: None,
        z0: C64::new(0.0, 0.0),
    }
}

/// `(name, residual, tolerance)` rows for an elliptic instance and its translate by `z0`.
pub fn elliptic_residuals(base: &EllipticLax, moved: &EllipticLax) -> Result<(EllipticCoords, Vec<(&'static str, f64, f64, String)>)> {
    let p = base.params;
    let r = base.r();
    let probes = base.probes(10);
    let quasi = base.quasi_periodicity_residual(&probes).max(moved.quasi_periodicity_residual(&probes));
    let (w1, w2) = p.omega();
    let mut inv = 0.0_f64;
    for &z in &probes {
        let t = spectral_invariants(base, z);
        for w in [w1, w2] {
            let u = spectral_invariants(base, z + w);
            for k in 0..r {
                inv = inv.max((u[k] - t[k]).norm() / (1.0 + t[k].norm()));
            }
        }
    }
    let sec = BasicSection::new(&p)?;
    let a = elliptic_divisor_coords(base, &sec)?;
    let (genus, _) = elliptic_genus(base)?;
    let count = (a.points.len() as i64 - a.argument_count).abs()
        + (a.points.len() as i64 - a.expected as i64).abs()
        + (genus as i64 - a.expected as i64).abs();
    let count_detail = format!(
        "points = {}, argument principle = {}, genus = {}",
        a.points.len(),
        a.argument_count,
        genus
    );
    let b = elliptic_divisor_coords(moved, &sec)?;
    let z0 = moved.z0;
    let mut shift = 0.0_f64;
    for pa in &a.points {
        let d = b
            .points
            .iter()
            .map(|pb| lattice_distance(pa.z - z0, pb.z, &p) + (pa.xi - pb.xi).norm() / (1.0 + pa.xi.norm()))
            .fold(f64::INFINITY, f64::min);
        shift = shift.max(d);
    }
    if a.points.len() != b.points.len() {
        shift = f64::INFINITY;
    }
    shift = shift.max(translation_check(moved, &sec, &b)?);
    let red = slr_reduce(&b.points.iter().map(|x| (x.z, x.xi)).collect::<Vec<_>>())?;
    let slr = red
        .iter()
        .map(|x| x.0)
        .sum::<C64>()
        .norm()
        .max((red.iter().map(|x| x.1).product::<C64>() - 1.0).norm());
    let rows = vec![
        ("quasi_periodicity", quasi, 1e-8, String::new()),
        ("invariants", inv, 1e-8, String::new()),
        ("count", count as f64, 0.5, count_detail),
        ("translation", shift, 1e-8, format!("z0 = {z0}")),
        ("slr_reduce", slr, 1e-12, String::new()),
    ];
    Ok((a, rows))
}

fn elliptic_records(cfg: &ExperimentConfig, g: &mut ChaCha8Rng, n: usize) -> Vec<CheckRecord> {
    let doc = random_elliptic_document(2, n, g);
    let z0 = C64::from_polar(g.gen_range(0.05..0.15), g.gen_range(0.0..2.0 * PI));
    let coeffs = crate::elliptic::random_coeffs(&doc.divisor(&doc.params().unwrap()).unwrap(), 2, g);
    let base_doc = EllipticDocument {
        coeffs: Some(coeffs),
        ..doc
    };
    let moved_doc = EllipticDocument { z0, ..base_doc.clone() };
    let inputs = digest(&moved_doc);
    let prefix = format!("c8.n{n}");
    let res = (|| {
        let base = base_doc.assemble(g).map_err(numeric)?;
        let moved = moved_doc.assemble(g).map_err(numeric)?;
        elliptic_residuals(&base, &moved)
    })();
    match res {
        Ok((_, rows)) => rows
            .into_iter()
            .map(|(k, x, tol, detail)| record(cfg, format!("{prefix}.{k}"), 8, inputs.clone(), Ok(x), tol).with_detail(detail))
            .collect(),
        Err(e) => vec![record(cfg, prefix, 8, inputs, Err(e), 1e-8)],
    }
}

fn numeric(e: HarnessError) -> Error {
    match e {
        HarnessError::Numeric(e) => e,
        other => Error::InvalidInput(other.to_string()),
    }
}

/// Malformed and degenerate inputs must map to their documented exit codes.
fn malformed_inputs(cfg: &ExperimentConfig) -> CheckRecord {
    let cases = commands::malformed_cases();
    let mut wrong = vec![];
    for (label, want, got) in &cases {
        if want != got {
            wrong.push(format!("{label}: expected {want}, got {got}"));
        }
    }
    let inputs = digest(&cases.iter().map(|c| c.0).collect::<Vec<_>>());
    let name = "c9.malformed_inputs".to_string();
    let tol = cfg.tolerance(&name, 0.5);
    CheckRecord::measured(name, 9, inputs, wrong.len() as f64, tol)
        .with_detail(if wrong.is_empty() { format!("{} cases", cases.len()) } else { wrong.join("; ") })
}
