mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use sovkit::kernel::{CMatrix, PathSpec, C64};
use sovkit::theta::*;

const TAUS: [C64; 3] = [C64 { re: 0.0, im: 1.0 }, C64 { re: 0.2, im: 1.1 }, C64 { re: 0.3, im: 0.9 }];

fn params(tau: C64, r: usize) -> ThetaParams {
    ThetaParams::new(tau, r).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn random_z(g: &mut rand_chacha::ChaCha8Rng, p: &ThetaParams) -> C64 {
    // generic point in the small cell, away from punctures
    loop {
        let z = p.from_skew(g.gen_range(-0.5..0.5), g.gen_range(-0.5..0.5));
        if puncture_distance(p, z) > 0.05 && singular_points_near(p, z, z, 0.05).is_empty() {
            return z;
        }
    }
}

fn e(x: C64) -> C64 {
    (2.0 * PI * c(0.0, 1.0) * x).exp()
}

#[test]
fn theta_vanishes_at_half_period() {
    for tau in TAUS {
        let p = params(tau, 1);
        assert!(riemann_theta((tau + 1.0) * 0.5, &p).norm() < 1e-12);
        // simple zero: derivative does not vanish
        let h = 1e-6;
        let d = (riemann_theta((tau + 1.0) * 0.5 + h, &p) - riemann_theta((tau + 1.0) * 0.5 - h, &p)) / (2.0 * h);
        assert!(d.norm() > 1e-3);
    }
}

#[test]
fn theta_quasi_periodicity_and_parity() {
    let mut g = rng(70);
    for tau in TAUS {
        let p = params(tau, 1);
        for _ in 0..10 {
            let z = c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let t = riemann_theta(z, &p);
            assert!(rel(riemann_theta(z + 1.0, &p), t) < 1e-12);
            let shifted = (-PI * c(0.0, 1.0) * tau - 2.0 * PI * c(0.0, 1.0) * z).exp() * t;
            assert!(rel(riemann_theta(z + tau, &p), shifted) < 1e-12);
            assert!(rel(riemann_theta(-z, &p), t) < 1e-12);
        }
    }
}

#[test]
fn reduced_theta_matches_long_series() {
    let mut g = rng(71);
    for tau in TAUS {
        let p = params(tau, 1);
        for _ in 0..10 {
            let z = c(g.gen_range(-2.0..2.0), g.gen_range(-1.5..1.5));
            let a = riemann_theta(z, &p);
            let b = riemann_theta_series(z, tau, 40);
            let b2 = riemann_theta_series(z, tau, 80);
            assert!(rel(b, b2) < 1e-15);
            assert!(rel(a, b) < 1e-12, "{z}: {a} vs {b}");
        }
    }
}

#[test]
fn degenerate_tau_is_rejected() {
    assert!(matches!(ThetaParams::new(c(0.0, 0.01), 2), Err(sovkit::Error::TauDegenerate(_))));
    assert!(ThetaParams::new(c(0.0, -1.0), 2).is_err());
    assert!(theta_kj(c(0.0, 0.0), 3, 0, &params(TAUS[0], 3)).is_err());
    assert!(xi_kj(c(0.0, 0.0), 0, 2, &params(TAUS[0], 2)).is_err());
}

#[test]
fn shifted_theta_families_translate() {
    let mut g = rng(72);
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            let rf = r as f64;
            for _ in 0..4 {
                let z = c(g.gen_range(-0.5..0.5), g.gen_range(-0.3..0.3));
                for k in 0..r {
                    for j in 0..r {
                        let t = theta_kj(z, k, j, &p).unwrap();
                        let x = xi_kj(z, k, j, &p).unwrap();
                        for m in [-1.0, 2.0] {
                            assert!(rel(theta_kj(z + m, k, j, &p).unwrap(), t) < 1e-12);
                            assert!(rel(xi_kj(z + m, k, j, &p).unwrap(), x) < 1e-12);
                        }
                        let shift_t = (c(k as f64, 0.0) + tau * j as f64) / rf;
                        let want = e(-tau / 2.0 - (z + shift_t)) * t;
                        assert!(rel(theta_kj(z + tau, k, j, &p).unwrap(), want) < 1e-12);
                        let shift_x = (c(2.0 * k as f64 - 1.0, 0.0) + tau * (2.0 * j as f64 - 1.0)) / (2.0 * rf);
                        let want = e(-tau / 2.0 - (z + shift_x)) * x;
                        assert!(rel(xi_kj(z + tau, k, j, &p).unwrap(), want) < 1e-12);
                        if k + 1 < r {
                            assert!(rel(theta_kj(z + 1.0 / rf, k, j, &p).unwrap(), theta_kj(z, k + 1, j, &p).unwrap()) < 1e-12);
                            assert!(rel(xi_kj(z + 1.0 / rf, k, j, &p).unwrap(), xi_kj(z, k + 1, j, &p).unwrap()) < 1e-12);
                        }
                        if j + 1 < r {
                            assert!(rel(theta_kj(z + tau / rf, k, j, &p).unwrap(), theta_kj(z, k, j + 1, &p).unwrap()) < 1e-12);
                            assert!(rel(xi_kj(z + tau / rf, k, j, &p).unwrap(), xi_kj(z, k, j + 1, &p).unwrap()) < 1e-12);
                        } else {
                            let want = theta_kj(z, k, 0, &p).unwrap() * e(-tau / 2.0 - z - k as f64 / rf);
                            assert!(rel(theta_kj(z + tau / rf, k, j, &p).unwrap(), want) < 1e-12);
                            let want = xi_kj(z, k, 0, &p).unwrap() * e(-tau / 2.0 - z - (2.0 * k as f64 - 1.0 - tau) / (2.0 * rf));
                            assert!(rel(xi_kj(z + tau / rf, k, j, &p).unwrap(), want) < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn rho_examples() {
    assert_eq!((0..3).map(|j| rho(j, 3)).collect::<Vec<_>>(), vec![1.0, 0.0, -1.0]);
    assert_eq!((0..4).map(|j| rho(j, 4)).collect::<Vec<_>>(), vec![2.0, 1.0, 0.0, -1.0]);
}

#[test]
fn i_matrix_examples_and_relations() {
    let (i1, i2) = i_matrices(2);
    assert!((&i1 - &CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).max_abs() < 1e-15);
    assert!((&i2 - &CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])).max_abs() < 1e-15);
    let (i1, i2) = i_matrices(1);
    assert!((i1[(0, 0)] - 1.0).norm() < 1e-15 && (i2[(0, 0)] - 1.0).norm() < 1e-15);
    for r in 2..=6 {
        let (i1, i2) = i_matrices(r);
        let q = e(c(1.0 / r as f64, 0.0));
        let comm = &(&(&i1 * &i2) * &i1.inverse().unwrap()) * &i2.inverse().unwrap();
        // I1 I2 I1^-1 I2^-1 = q^-1 for I1 = diag(q^j) and (I2)_{j,j+1} = 1
        assert!((&comm - &CMatrix::identity(r).scale(q.inv())).max_abs() < 1e-12);
        assert!((&i1.pow(r) - &CMatrix::identity(r)).max_abs() < 1e-12);
        assert!((&i2.pow(r) - &CMatrix::identity(r)).max_abs() < 1e-12);
    }
}

#[test]
fn f_vector_satisfies_period_relations() {
    let mut g = rng(73);
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            let (_, i2) = i_matrices(r);
            for _ in 0..10 {
                let z = random_z(&mut g, &p);
                let f = f_vector(z, &p).unwrap();
                let f1 = f_vector(z + 1.0 / r as f64, &p).unwrap();
                let ft = f_vector(z + tau / r as f64, &p).unwrap();
                let shifted = i2.mul_vec(&f);
                for j in 0..r {
                    assert!(rel(f1[j], f[j]) < 1e-10, "r={r} tau={tau} j={j}: {}", rel(f1[j], f[j]));
                    assert!(rel(ft[j], shifted[j]) < 1e-10, "r={r} tau={tau} j={j}: {}", rel(ft[j], shifted[j]));
                }
            }
        }
    }
}

#[test]
fn f_has_simple_poles_at_punctures() {
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            for j in 0..r {
                // a puncture lift where f_j has a pole: try the lifts of one cell
                let mut checked = 0;
                for a in 0..r {
                    for b in 0..r {
                        let pc = p.from_skew(a as f64 + 0.5, b as f64 + 0.5);
                        let limits: Vec<Vec<C64>> = (0..4)
                            .map(|d| {
                                let dir = e(c(d as f64 / 4.0 + 0.1, 0.0));
                                [1e-4, 1e-5, 1e-6].iter().map(|&eps| dir * eps * f_component_raw(pc + dir * eps, j, &p)).collect()
                            })
                            .collect();
                        let l = limits[0][2];
                        if l.norm() < 1e-6 {
                            // zero of order r - 1 (odd rank), not a pole
                            assert!(r % 2 == 1);
                            continue;
                        }
                        for d in &limits {
                            assert!(rel(d[2], l) < 1e-4, "r={r} j={j} ({a},{b})");
                            assert!(rel(d[1], d[2]) < 1e-3);
                        }
                        checked += 1;
                    }
                }
                let expected = if r % 2 == 0 { r * r } else { r * (r - 1) };
                assert_eq!(checked, expected, "r={r} tau={tau} j={j}");
                assert!(matches!(f_component(p.from_skew(0.5, 0.5), j, &p), Err(sovkit::Error::Pole { .. })));
            }
        }
    }
}

#[test]
fn even_rank_zeros_lie_on_integer_rows() {
    for r in [2, 4] {
        let p = params(TAUS[1], r);
        for j in 0..r {
            let zeros: Vec<(usize, usize)> = (0..r)
                .flat_map(|a| (0..r).map(move |b| (a, b)))
                .filter(|&(a, b)| f_component(p.from_skew(a as f64 + 0.5, b as f64), j, &p).unwrap().norm() < 1e-10)
                .collect();
            assert_eq!(zeros.len(), r, "r={r} j={j}: {zeros:?}");
            assert!(zeros.iter().all(|z| z.1 == zeros[0].1));
        }
    }
}

#[test]
fn section_roots_and_anchor() {
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            let sec = BasicSection::new(&p).unwrap();
            let a = sec.anchor_sample();
            let f = f_vector(c(0.0, 0.0), &p).unwrap();
            assert!(rel(a.values[0], f[0].powf(1.0 / r as f64)) < 1e-14);
            assert!(a.root_residual(&p).unwrap() < 1e-10);
            let z = p.from_skew(0.37, 0.61);
            let s = sec.at(z).unwrap();
            assert!(s.root_residual(&p).unwrap() < 1e-10);
        }
    }
}

fn horizontal_ratio(sec: &BasicSection, z: C64) -> Vec<C64> {
    let p = &sec.params;
    let s = sec.at(z).unwrap();
    let end = sec.continue_to(&s, z + 1.0 / p.r as f64).unwrap();
    end.values.iter().zip(&s.values).map(|(a, b)| a / b).collect()
}

#[test]
fn section_roots_relation_horizontal() {
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            let sec = BasicSection::new(&p).unwrap();
            let q = p.q();
            let row = if r % 2 == 0 { 0.25 } else { 0.0 };
            for u in [-0.3, 0.1, 0.45] {
                let ratio = horizontal_ratio(&sec, p.from_skew(u, row));
                for (i, x) in ratio.iter().enumerate() {
                    assert!((x - q.powu(i as u32)).norm() < 1e-8, "r={r} tau={tau} i={i}: {x}");
                }
            }
        }
    }
}

#[test]
fn section_roots_relation_vertical() {
    for r in 2..=5 {
        for tau in TAUS {
            let p = params(tau, r);
            let sec = BasicSection::new(&p).unwrap();
            for z in [p.from_skew(0.0, 0.0), p.from_skew(0.2, 0.3), p.from_skew(-0.4, 0.1)] {
                let s = sec.at(z).unwrap();
                let up = sec.continue_to(&s, z + tau / r as f64).unwrap();
                for i in 0..r {
                    let want = s.values[(i + 1) % r];
                    assert!((up.values[i] - want).norm() < 1e-8 * want.norm(), "r={r} tau={tau} i={i}: {} vs {want}", up.values[i]);
                }
            }
        }
    }
}

#[test]
fn section_automorphy_under_lattice_shifts() {
    for r in [2, 3, 4] {
        let p = params(TAUS[2], r);
        let sec = BasicSection::new(&p).unwrap();
        let (i1, i2) = i_matrices(r);
        let row = if r % 2 == 0 { 0.25 } else { 0.0 };
        let z = p.from_skew(0.15, row);
        let s = sec.at(z).unwrap();
        let right = sec.continue_to(&s, z + p.omega().0).unwrap();
        let up = sec.continue_to(&s, z + p.omega().1).unwrap();
        let (a, b) = (i1.mul_vec(&s.values), i2.mul_vec(&s.values));
        for i in 0..r {
            assert!((right.values[i] - a[i]).norm() < 1e-8 * a[i].norm());
            assert!((up.values[i] - b[i]).norm() < 1e-8 * b[i].norm());
        }
    }
}

#[test]
fn monodromy_around_a_puncture_is_a_common_root_of_unity() {
    for r in [2, 3, 4] {
        let p = params(TAUS[1], r);
        let sec = BasicSection::new(&p).unwrap();
        let pc = p.from_skew(0.5, 0.5);
        let mut seen = vec![];
        for radius in [0.05, 0.1] {
            let start = pc - radius;
            let loop_pts: Vec<C64> = (0..=16).map(|k| pc - e(c(k as f64 / 16.0, 0.0)) * radius).collect();
            let s = sec.at(start).unwrap();
            let end = sec.continue_path(&s, &PathSpec::new(loop_pts).unwrap()).unwrap();
            let ratios: Vec<C64> = end.values.iter().zip(&s.values).map(|(a, b)| a / b).collect();
            for x in &ratios {
                assert!((x - ratios[0]).norm() < 1e-8);
            }
            assert!((ratios[0].powu(r as u32) - 1.0).norm() < 1e-8);
            assert!((ratios[0] - 1.0).norm() > 1e-3);
            seen.push(ratios[0]);
        }
        assert!((seen[0] - seen[1]).norm() < 1e-8);
    }
}

#[test]
fn continuation_through_a_puncture_is_an_obstruction() {
    let p = params(TAUS[0], 3);
    let sec = BasicSection::new(&p).unwrap();
    let s = sec.anchor_sample();
    let pc = p.from_skew(0.5, 0.5);
    assert!(matches!(sec.continue_to(&s, pc * 2.0), Err(sovkit::Error::BranchObstruction { .. })));
    let path = PathSpec::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(sec.along(&path).is_err());
    assert!(basic_section(c(0.1, 0.0), &p, &PathSpec::new(vec![c(0.0, 0.0), c(0.1, 0.0)]).unwrap()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn theta_translation_property(x in -1.0f64..1.0, y in -0.6f64..0.6, m in -3i32..3) {
        let p = params(TAUS[1], 1);
        let z = c(x, y);
        let t = riemann_theta(z, &p);
        prop_assert!(rel(riemann_theta(z + m as f64, &p), t) < 1e-12);
        prop_assert!(rel(riemann_theta(-z, &p), t) < 1e-12);
    }
}
