mod common;

use common::*;
use sovkit::elliptic::*;
use sovkit::kernel::{integrate_path, CMatrix, PathSpec, C64};
use sovkit::theta::*;

fn params(r: usize) -> ThetaParams {
    ThetaParams::new(c(0.1, 1.0), r).unwrap()
}

fn divisor(p: &ThetaParams, n: usize) -> EllipticDivisor {
    let nus: Vec<C64> = (0..n).map(|k| p.from_skew(0.2 + 0.37 * k as f64, 0.15 + 0.41 * k as f64)).collect();
    EllipticDivisor::simple(&nus, p).unwrap()
}

fn lax(r: usize, n: usize, seed: u64, z0: C64) -> EllipticLax {
    let p = params(r);
    let d = divisor(&p, n);
    let coeffs = random_coeffs(&d, r, &mut rng(seed));
    assemble_lax(coeffs, &d, &p, z0).unwrap()
}

#[test]
fn rank_one_basis_is_elliptic_functions() {
    let p = params(1);
    let b = build_basis(&divisor(&p, 1), &p).unwrap();
    assert_eq!(b.sectors.len(), 1);
    assert_eq!(b.sectors[0].functions, vec![BasisFunction::Constant]);
    let b = build_basis(&divisor(&p, 3), &p).unwrap();
    assert_eq!(b.sectors[0].functions.len(), 3);
    let probes = probe_points(&p, &[], 10);
    assert!(b.multiplier_residual(&probes) < 1e-10);
}

#[test]
fn basis_multipliers_and_dimensions() {
    for r in [2, 3] {
        for n in [1, 2] {
            let p = params(r);
            let d = divisor(&p, n);
            let b = build_basis(&d, &p).unwrap();
            let probes = probe_points(&p, &d.points.iter().map(|x| x.nu).collect::<Vec<_>>(), 10);
            assert!(b.multiplier_residual(&probes) < 1e-10);
            assert_eq!(b.sector_ranks(&probes), vec![n; r * r], "r={r} n={n}");
            // rate and shift solve the two multiplier equations
            for s in &b.sectors {
                let q = p.q();
                let (w1, w2) = p.omega();
                let m1 = (s.rate * w1).exp();
                let m2 = (s.rate * w2).exp() * (-2.0 * std::f64::consts::PI * c(0.0, 1.0) * s.shift * r as f64).exp();
                assert!((m1 - q.powi(-(s.b as i32))).norm() < 1e-12);
                assert!((m2 - q.powu(s.a as u32)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn repeated_divisor_points_raise_the_pole_order() {
    let p = params(2);
    let d = EllipticDivisor::new(vec![DivisorPoint { nu: p.from_skew(0.3, 0.2), mult: 2 }], &p).unwrap();
    let b = build_basis(&d, &p).unwrap();
    let probes = probe_points(&p, &[d.points[0].nu], 12);
    assert_eq!(b.sector_ranks(&probes), vec![2; 4]);
    let l = assemble_lax(random_coeffs(&d, 2, &mut rng(81)), &d, &p, c(0.0, 0.0)).unwrap();
    let nu = d.points[0].nu;
    let c2 = l.laurent_coefficient(nu, 2, 0.02).unwrap();
    let c3 = l.laurent_coefficient(nu, 3, 0.02).unwrap();
    assert!(c2.max_abs() > 1e-3);
    assert!(c3.max_abs() < 1e-8 * c2.max_abs().max(1.0));
}

#[test]
fn coinciding_divisor_points_are_rejected() {
    let p = params(2);
    let nu = p.from_skew(0.3, 0.2);
    assert!(EllipticDivisor::simple(&[nu, nu + p.omega().0], &p).is_err());
    assert!(EllipticDivisor::simple(&[], &p).is_err());
}

#[test]
fn zero_coefficients_give_zero_lax() {
    let p = params(2);
    let d = divisor(&p, 2);
    let l = assemble_lax(vec![vec![c(0.0, 0.0); 2]; 4], &d, &p, c(0.0, 0.0)).unwrap();
    for z in probe_points(&p, &[], 5) {
        assert_eq!(l.phi(z).max_abs(), 0.0);
    }
    assert!(assemble_lax(vec![vec![c(0.0, 0.0); 1]; 4], &d, &p, c(0.0, 0.0)).is_err());
}

#[test]
fn assembled_lax_is_quasi_periodic_with_simple_poles() {
    let l = lax(2, 2, 82, c(0.0, 0.0));
    let mut g = rng(83);
    let probes: Vec<C64> = (0..10).map(|_| unit_disk(&mut g) * 0.5).collect();
    assert!(l.quasi_periodicity_residual(&probes) < 1e-8);
    for nu in l.poles() {
        let c1 = l.laurent_coefficient(nu, 1, 0.02).unwrap();
        let c2 = l.laurent_coefficient(nu, 2, 0.02).unwrap();
        assert!(c1.max_abs() > 1e-3);
        assert!(c2.max_abs() < 1e-8 * c1.max_abs(), "{}", c2.max_abs());
    }
}

#[test]
fn spectral_invariants_are_elliptic() {
    let p1 = params(1);
    let d1 = divisor(&p1, 2);
    let l1 = assemble_lax(random_coeffs(&d1, 1, &mut rng(84)), &d1, &p1, c(0.0, 0.0)).unwrap();
    for z in probe_points(&p1, &l1.poles(), 4) {
        assert!((spectral_invariants(&l1, z)[0] - l1.phi(z)[(0, 0)]).norm() < 1e-14);
    }
    for r in [2, 3] {
        let l = lax(r, 2, 85, c(0.0, 0.0));
        let (w1, w2) = l.params.omega();
        for z in l.probes(6) {
            let t = spectral_invariants(&l, z);
            // trace and determinant oracles
            let m = l.phi(z);
            // det(phi - xi) = (-xi)^r + (-xi)^(r-1) tr phi + ... + det phi
            let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
            assert!((t[0] - m.trace() * sign).norm() < 1e-10 * (1.0 + t[0].norm()));
            assert!((t[r - 1] - m.det()).norm() < 1e-9 * (1.0 + t[r - 1].norm()));
            for w in [w1, w2] {
                let u = spectral_invariants(&l, z + w);
                for k in 0..r {
                    assert!((u[k] - t[k]).norm() < 1e-8 * (1.0 + t[k].norm()));
                }
            }
        }
    }
}

#[test]
fn residues_of_the_trace_sum_to_zero() {
    let l = lax(2, 2, 86, c(0.0, 0.0));
    let p = l.params;
    let (ou, ov) = (0.013, 0.021);
    let corners = vec![
        p.from_skew(ou, ov),
        p.from_skew(ou + 1.0, ov),
        p.from_skew(ou + 1.0, ov + 1.0),
        p.from_skew(ou, ov + 1.0),
        p.from_skew(ou, ov),
    ];
    let path = PathSpec::new(corners).unwrap();
    let total = integrate_path(|z| spectral_invariants(&l, z)[0], &path).unwrap().value;
    // the residue at one pole sets the scale
    let nu = l.poles()[0];
    let circle = PathSpec::new((0..=32).map(|k| nu + C64::from_polar(0.02, k as f64 * std::f64::consts::PI / 16.0)).collect()).unwrap();
    let one = integrate_path(|z| spectral_invariants(&l, z)[0], &circle).unwrap().value;
    assert!(one.norm() > 1e-3);
    assert!(total.norm() < 1e-6 * one.norm().max(1.0), "{total}");
}

#[test]
fn discriminant_matches_root_products() {
    let roots = [c(1.0, 0.5), c(-0.3, 2.0), c(0.7, -1.1)];
    let poly = sovkit::kernel::Poly::from_roots(&roots);
    let want = (roots[0] - roots[1]).powi(2) * (roots[0] - roots[2]).powi(2) * (roots[1] - roots[2]).powi(2);
    assert!((discriminant_monic(poly.coeffs()) - want).norm() < 1e-12 * want.norm());
    let quad = sovkit::kernel::Poly::from_roots(&roots[..2]);
    let want = (roots[0] - roots[1]).powi(2);
    assert!((discriminant_monic(quad.coeffs()) - want).norm() < 1e-12 * want.norm());
}

#[test]
fn divisor_count_matches_genus_and_argument_principle() {
    for n in [1, 2] {
        let l = lax(2, n, 87 + n as u64, c(0.0, 0.0));
        let sec = BasicSection::new(&l.params).unwrap();
        let coords = elliptic_divisor_coords(&l, &sec).unwrap();
        let (genus, disc) = elliptic_genus(&l).unwrap();
        assert_eq!(disc.zeros.len(), 2 * n);
        assert_eq!(genus, 1 + n);
        assert_eq!(coords.points.len(), genus);
        assert_eq!(coords.argument_count, genus as i64);
        assert!(coords.curve_residual < 1e-8 && coords.adjugate_residual < 1e-8);
        // the puncture contributes a simple pole, each divisor point r(r-1)/2
        let orders: Vec<i64> = coords.search.pole_orders.iter().map(|x| x.1).collect();
        assert_eq!(orders, vec![1; n + 1]);
        for pt in &coords.points {
            let (u, v) = l.params.skew(pt.z);
            assert!((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v));
            let s = sec.at(pt.z).unwrap().values;
            let m = &l.phi(pt.z) - &CMatrix::identity(2).scale(pt.xi);
            assert!(m.det().norm() < 1e-8 * (1.0 + pt.xi.norm()).powi(2));
            let v = m.adjugate().mul_vec(&s);
            assert!(v.iter().all(|x| x.norm() < 1e-8 * (1.0 + pt.xi.norm())));
        }
    }
}

#[test]
fn rank_three_divisor_count() {
    let l = lax(3, 1, 90, c(0.0, 0.0));
    let sec = BasicSection::new(&l.params).unwrap();
    let coords = elliptic_divisor_coords(&l, &sec).unwrap();
    assert_eq!(coords.points.len(), 4);
    assert_eq!(elliptic_genus(&l).unwrap().0, 4);
}

#[test]
fn translated_bundle_shifts_the_coordinates() {
    let z0 = c(0.07, 0.03);
    let base = lax(2, 2, 91, c(0.0, 0.0));
    let moved = lax(2, 2, 91, z0);
    let sec = BasicSection::new(&base.params).unwrap();
    let a = elliptic_divisor_coords(&base, &sec).unwrap();
    let b = elliptic_divisor_coords(&moved, &sec).unwrap();
    for pa in &a.points {
        let d = b
            .points
            .iter()
            .map(|pb| lattice_distance(pa.z - z0, pb.z, &base.params) + (pa.xi - pb.xi).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9);
    }
    assert!(translation_check(&moved, &sec, &b).unwrap() < 1e-9);
}

#[test]
fn slr_reduce_examples() {
    let one = slr_reduce(&[(c(0.3, 0.1), c(2.0, -1.0))]).unwrap();
    assert!(one[0].0.norm() < 1e-15 && (one[0].1 - 1.0).norm() < 1e-15);
    // the displayed map xi / prod xi coincides at g = 1
    let (z, xi) = (c(0.3, 0.1), c(2.0, -1.0));
    assert!((one[0].1 - xi / xi).norm() < 1e-15 && (one[0].0 - (z - z)).norm() < 1e-15);
    let mut g = rng(92);
    let pts: Vec<(C64, C64)> = (0..4).map(|_| (unit_disk(&mut g), unit_disk(&mut g) * 3.0 + 0.1)).collect();
    let out = slr_reduce(&pts).unwrap();
    assert!(out.iter().map(|x| x.0).sum::<C64>().norm() < 1e-12);
    assert!((out.iter().map(|x| x.1).product::<C64>() - 1.0).norm() < 1e-12);
    let literal: C64 = pts.iter().map(|x| x.1 / pts.iter().map(|y| y.1).product::<C64>()).product();
    assert!((literal - 1.0).norm() > 1e-3);
    assert!(matches!(slr_reduce(&[(c(0.0, 0.0), c(0.0, 0.0))]), Err(sovkit::Error::ReductionUndefined)));
    assert!(slr_reduce(&[]).unwrap().is_empty());
}

#[test]
fn zero_finder_locates_theta_zeros() {
    // vartheta1 has one simple zero per cell, at the lattice points
    let p = params(2);
    let f = |z: C64| Ok(vartheta1(z, &p));
    let s = find_zeros(&f, &p, &[], 4).unwrap();
    assert_eq!(s.zeros.len(), 1);
    assert!(lattice_distance(s.zeros[0], c(0.0, 0.0), &p) < 1e-12);
    // vartheta1(z - a) vartheta1(z - b) / vartheta1(z - c)^2 has constant multipliers when a + b = 2c
    let (a, b) = (p.from_skew(0.2, 0.3), p.from_skew(0.6, 0.1));
    let cc = (a + b) * 0.5;
    let f = |z: C64| Ok(vartheta1(z - a, &p) * vartheta1(z - b, &p) / vartheta1(z - cc, &p).powi(2));
    let s = find_zeros(&f, &p, &[cc], 4).unwrap();
    assert_eq!(s.argument_count, 2);
    assert_eq!(s.pole_orders[0].1, 2);
    for t in [a, b] {
        assert!(s.zeros.iter().any(|&z| lattice_distance(z, t, &p) < 1e-10));
    }
}
