mod common;

use common::*;
use proptest::prelude::*;
use sovkit::kernel::*;
use sovkit::Error;

fn poly(v: &[(f64, f64)]) -> Poly {
    Poly::new(v.iter().map(|&(a, b)| c(a, b)).collect())
}

#[test]
fn roots_of_xi_squared_plus_one() {
    let r = poly_roots(&poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)])).unwrap();
    assert_eq!(r.len(), 2);
    assert!((r[0].value - c(0.0, -1.0)).norm() < 1e-14 || (r[0].value - c(0.0, 1.0)).norm() < 1e-14);
    let mut ims: Vec<f64> = r.iter().map(|x| x.value.im).collect();
    ims.sort_by(f64::total_cmp);
    assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
    assert!(r.iter().all(|x| x.multiplicity == 1 && x.value.re.abs() < 1e-14));
}

#[test]
fn triple_root_is_detected() {
    let p = Poly::from_roots(&[c(2.0, 0.0); 3]);
    let r = poly_roots(&p).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].multiplicity, 3);
    assert!((r[0].value - c(2.0, 0.0)).norm() < 1e-8);
}

#[test]
fn mixed_multiplicities() {
    let p = Poly::from_roots(&[c(1.0, 1.0), c(1.0, 1.0), c(-0.5, 0.0), c(3.0, -2.0)]);
    let r = poly_roots(&p).unwrap();
    let mults: Vec<usize> = r.iter().map(|x| x.multiplicity).collect();
    assert_eq!(mults.iter().sum::<usize>(), 4);
    assert_eq!(r.len(), 3);
    let double = r.iter().find(|x| x.multiplicity == 2).unwrap();
    assert!((double.value - c(1.0, 1.0)).norm() < 1e-7);
}

#[test]
fn zero_polynomial_has_undefined_roots() {
    assert_eq!(poly_roots(&Poly::zero()), Err(Error::UndefinedRoots));
}

#[test]
fn random_degree_ten_residuals() {
    let mut g = rng(10);
    for _ in 0..50 {
        let p = Poly::new(unit_disk_vec(&mut g, 11));
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 10);
        for r in &roots {
            assert!(p.eval(r.value).norm() < 1e-10, "residual {}", p.eval(r.value).norm());
        }
    }
}

#[test]
fn zero_roots_are_split_off() {
    let p = poly(&[(0.0, 0.0), (0.0, 0.0), (-1.0, 0.0), (1.0, 0.0)]);
    let r = poly_roots(&p).unwrap();
    assert_eq!(r.iter().map(|x| x.multiplicity).sum::<usize>(), 3);
    assert!(r.iter().any(|x| x.value.norm() < 1e-14 && x.multiplicity == 2));
}

#[test]
fn char_poly_examples() {
    let p = CMatrix::identity(3).char_bipoly();
    // (1 - xi)^3 = 1 - 3 xi + 3 xi^2 - xi^3
    let want = [1.0, -3.0, 3.0, -1.0];
    for (k, w) in want.iter().enumerate() {
        assert!((p.coeff(k) - c(*w, 0.0)).norm() < 1e-15);
    }
    let p = CMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]).char_bipoly();
    let want = [2.0, -3.0, 1.0];
    for (k, w) in want.iter().enumerate() {
        assert!((p.coeff(k) - c(*w, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn char_poly_random_four_by_four() {
    let mut g = rng(4);
    for _ in 0..20 {
        let rows: Vec<Vec<C64>> = (0..4).map(|_| unit_disk_vec(&mut g, 4)).collect();
        let m = CMatrix::from_rows(&rows);
        let p = m.char_bipoly();
        assert!((p.leading() - c(1.0, 0.0)).norm() < 1e-15);
        let roots: Vec<C64> = poly_roots(&p)
            .unwrap()
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect();
        // prod (lambda_i - xi) expanded
        let prod = roots
            .iter()
            .fold(Poly::one(), |acc, &l| &acc * &Poly::new(vec![l, c(-1.0, 0.0)]));
        for k in 0..=4 {
            assert!((prod.coeff(k) - p.coeff(k)).norm() < 1e-10 * p.max_coeff());
        }
        for _ in 0..5 {
            let xi = unit_disk(&mut g) * 2.0;
            let shifted: Vec<Vec<C64>> = (0..4)
                .map(|i| (0..4).map(|j| rows[i][j] - if i == j { xi } else { c(0.0, 0.0) }).collect())
                .collect();
            let d = det_gauss(&shifted);
            assert!((p.eval(xi) - d).norm() < 1e-10 * d.norm().max(1.0));
        }
        for &l in &roots {
            assert!(p.eval(l).norm() < 1e-10);
        }
    }
}

#[test]
fn adjugate_examples() {
    assert_eq!(CMatrix::identity(3).adjugate(), CMatrix::identity(3));
    let (a, b, cc, d) = (c(1.0, 2.0), c(-3.0, 0.5), c(0.25, -1.0), c(4.0, 0.0));
    let m = CMatrix::from_rows(&[vec![a, b], vec![cc, d]]);
    let adj = m.adjugate();
    let want = CMatrix::from_rows(&[vec![d, -b], vec![-cc, a]]);
    assert!((&adj - &want).max_abs() < 1e-15);
}

#[test]
fn adjugate_against_cofactors() {
    let mut g = rng(5);
    for n in 2..=5 {
        for _ in 0..20 {
            let rows: Vec<Vec<C64>> = (0..n).map(|_| unit_disk_vec(&mut g, n)).collect();
            let m = CMatrix::from_rows(&rows);
            let adj = m.adjugate();
            for i in 0..n {
                for j in 0..n {
                    let minor: Vec<Vec<C64>> = (0..n)
                        .filter(|&k| k != j)
                        .map(|k| (0..n).filter(|&l| l != i).map(|l| rows[k][l]).collect())
                        .collect();
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let want = det_cofactor(&minor) * sign;
                    assert!((adj[(i, j)] - want).norm() < 1e-12);
                }
            }
            let det = det_gauss(&rows);
            assert!((m.det() - det).norm() < 1e-12 * det.norm().max(1.0));
        }
    }
}

#[test]
fn adjugate_identity_hundred_random() {
    let mut g = rng(6);
    for k in 0..100 {
        let n = 2 + k % 4;
        let rows: Vec<Vec<C64>> = (0..n).map(|_| unit_disk_vec(&mut g, n)).collect();
        let m = CMatrix::from_rows(&rows);
        let lhs = &m.adjugate() * &m;
        let rhs = CMatrix::identity(n).scale(m.det());
        let norm = m.norm();
        assert!((&lhs - &rhs).max_abs() < 1e-10 * norm.powi(3).max(1.0));
    }
}

#[test]
fn adjugate_rank_one_on_singular_matrix() {
    let mut g = rng(7);
    let rows: Vec<Vec<C64>> = (0..3).map(|_| unit_disk_vec(&mut g, 3)).collect();
    let m = CMatrix::from_rows(&rows);
    let lam = poly_roots(&m.char_bipoly()).unwrap()[0].value;
    let s = &m - &CMatrix::identity(3).scale(lam);
    let adj = s.adjugate();
    // all 2x2 minors of a rank-one matrix vanish
    for (i, k) in [(0, 1), (0, 2), (1, 2)] {
        for (j, l) in [(0, 1), (0, 2), (1, 2)] {
            let minor = adj[(i, j)] * adj[(k, l)] - adj[(i, l)] * adj[(k, j)];
            assert!(minor.norm() < 1e-10 * adj.max_abs().powi(2));
        }
    }
    assert!(adj.max_abs() > 1e-6);
}

fn bp(rows: &[&[(f64, f64)]]) -> BiPoly {
    BiPoly::new(rows.iter().map(|r| r.iter().map(|&(a, b)| c(a, b)).collect()).collect())
}

#[test]
fn resultant_linear_case() {
    // xi - a(z), xi - b(z) with a = 1 + 2z, b = -z + z^2
    let p = bp(&[&[(-1.0, 0.0), (-2.0, 0.0)], &[(1.0, 0.0)]]);
    let q = bp(&[&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)], &[(1.0, 0.0)]]);
    let r = resultant(&p, &q, Var::Xi).unwrap();
    let diff = poly(&[(1.0, 0.0), (3.0, 0.0), (-1.0, 0.0)]);
    let plus = (0..3).all(|k| (r.coeff(k) - diff.coeff(k)).norm() < 1e-14);
    let minus = (0..3).all(|k| (r.coeff(k) + diff.coeff(k)).norm() < 1e-14);
    assert!(plus || minus, "{r:?}");
}

#[test]
fn resultant_vanishes_at_constructed_common_root() {
    let mut g = rng(8);
    for _ in 0..10 {
        let (z0, x0) = (unit_disk(&mut g), unit_disk(&mut g));
        let mk = |g: &mut rand_chacha::ChaCha8Rng| {
            let grid: Vec<Vec<C64>> = (0..3).map(|_| unit_disk_vec(g, 3)).collect();
            let b = BiPoly::new(grid);
            let v = b.eval(z0, x0);
            &b - &BiPoly::constant(v)
        };
        let p = mk(&mut g);
        let q = mk(&mut g);
        let r = resultant(&p, &q, Var::Xi).unwrap();
        assert!(r.eval(z0).norm() < 1e-10 * r.eval_scale(z0));
        let r = resultant(&p, &q, Var::Z).unwrap();
        assert!(r.eval(x0).norm() < 1e-10 * r.eval_scale(x0));
    }
}

#[test]
fn resultant_degenerate_on_common_factor() {
    let f = bp(&[&[(0.5, 0.0), (1.0, 0.0)], &[(1.0, 0.0)]]);
    let p = &f * &bp(&[&[(1.0, 0.0)], &[(0.0, 0.0), (2.0, 0.0)]]);
    let q = &f * &bp(&[&[(-1.0, 0.0), (1.0, 0.0)], &[(3.0, 0.0)]]);
    assert_eq!(resultant(&p, &q, Var::Xi), Err(Error::ResultantDegenerate));
    let z_only = bp(&[&[(1.0, 0.0), (1.0, 0.0)]]);
    assert_eq!(resultant(&z_only, &q, Var::Xi), Err(Error::ResultantDegenerate));
}

/// Brute force: Newton on the pair from a grid of starts, deduplicated.
fn common_roots_brute(p: &BiPoly, q: &BiPoly, box_r: f64) -> Vec<(C64, C64)> {
    let (pz, px, qz, qx) = (p.d_z(), p.d_xi(), q.d_z(), q.d_xi());
    let mut out: Vec<(C64, C64)> = vec![];
    let m = 12;
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                for d in 0..m {
                    let f = |i: usize| -box_r + 2.0 * box_r * (i as f64 + 0.5) / m as f64;
                    let (mut z, mut x) = (c(f(a), f(b)), c(f(cc), f(d)));
                    let mut ok = false;
                    for _ in 0..60 {
                        let (f1, f2) = (p.eval(z, x), q.eval(z, x));
                        let (a11, a12, a21, a22) = (pz.eval(z, x), px.eval(z, x), qz.eval(z, x), qx.eval(z, x));
                        let det = a11 * a22 - a12 * a21;
                        let dz = (a22 * f1 - a12 * f2) / det;
                        let dx = (a11 * f2 - a21 * f1) / det;
                        z -= dz;
                        x -= dx;
                        if !(z.norm() < 1e3 && x.norm() < 1e3) {
                            break;
                        }
                        if dz.norm() + dx.norm() < 1e-14 {
                            ok = true;
                            break;
                        }
                    }
                    if ok && out.iter().all(|(z2, x2)| (z - z2).norm() + (x - x2).norm() > 1e-7) {
                        out.push((z, x));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn resultant_matches_brute_force_search() {
    let mut g = rng(9);
    for _ in 0..3 {
        let p = BiPoly::new((0..3).map(|_| unit_disk_vec(&mut g, 2)).collect());
        let q = BiPoly::new((0..2).map(|_| unit_disk_vec(&mut g, 3)).collect());
        let res = resultant(&p, &q, Var::Xi).unwrap();
        let zs: Vec<C64> = poly_roots(&res).unwrap().iter().map(|r| r.value).collect();
        let brute = common_roots_brute(&p, &q, 2.0);
        assert!(!brute.is_empty());
        for (z, _) in &brute {
            let d = zs.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "brute root {z} not a resultant root (dist {d})");
        }
        // resultant roots inside the box whose fiber has a bounded common root
        for &z in zs.iter().filter(|z| z.re.abs() < 1.5 && z.im.abs() < 1.5) {
            let xs = poly_roots(&p.at_z(z)).unwrap();
            let shared = xs.iter().any(|x| q.eval(z, x.value).norm() < 1e-8 * q.eval_scale(z, x.value));
            if shared && xs.iter().all(|x| x.value.norm() < 1.5) {
                assert!(brute.iter().any(|(w, _)| (w - z).norm() < 1e-8), "resultant root {z} missed");
            }
        }
    }
}

#[test]
fn quadrature_examples() {
    let r = integrate_path(|z| z, &PathSpec::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap()).unwrap();
    assert!((r.value - c(0.5, 0.0)).norm() < 1e-15);
    let square = PathSpec::closed(vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0)]).unwrap();
    let r = integrate_path(|z| z.inv(), &square).unwrap();
    assert!((r.value - c(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-13);
    assert!(r.error <= 1e-12);
}

#[test]
fn quadrature_random_polynomials_against_antiderivative() {
    let mut g = rng(11);
    for _ in 0..20 {
        let p = Poly::new(unit_disk_vec(&mut g, 7));
        let anti = Poly::new(
            std::iter::once(c(0.0, 0.0))
                .chain(p.coeffs().iter().enumerate().map(|(k, a)| a / (k + 1) as f64))
                .collect(),
        );
        let (a, b) = (unit_disk(&mut g) * 2.0, unit_disk(&mut g) * 2.0);
        let r = integrate_path(|z| p.eval(z), &PathSpec::segment(a, b).unwrap()).unwrap();
        let want = anti.eval(b) - anti.eval(a);
        assert!((r.value - want).norm() < 1e-12 * want.norm().max(1.0));
    }
}

#[test]
fn quadrature_flags_singular_path() {
    let path = PathSpec::segment(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
    let r = integrate_path(|z| (z - c(0.1, 0.0)).inv().powi(2), &path);
    assert!(matches!(r, Err(Error::SingularPath { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn roots_count_equals_degree(coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9)) {
        let p = Poly::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
        prop_assume!(p.degree().unwrap_or(0) > 0 && p.leading().norm() > 1e-3);
        let roots = poly_roots(&p).unwrap();
        prop_assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), p.degree().unwrap());
        for r in &roots {
            prop_assert!(p.eval(r.value).norm() <= 1e-10 * p.eval_scale(r.value).max(1.0));
        }
    }

    #[test]
    fn quadrature_additive_and_antisymmetric(
        k in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        w in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
    ) {
        let f = |z: C64| (z * c(k[0].0, k[0].1)).exp() + c(k[1].0, k[1].1) / (z - c(5.0, 5.0)) + z * z * c(k[2].0, k[2].1);
        let (a, b, m) = (c(w[0].0, w[0].1), c(w[1].0, w[1].1), c(w[2].0, w[2].1));
        prop_assume!((a - m).norm() > 1e-3 && (m - b).norm() > 1e-3);
        let ab = PathSpec::new(vec![a, m, b]).unwrap();
        let whole = integrate_path(f, &ab).unwrap().value;
        let parts = integrate_path(f, &PathSpec::segment(a, m).unwrap()).unwrap().value
            + integrate_path(f, &PathSpec::segment(m, b).unwrap()).unwrap().value;
        let back = integrate_path(f, &ab.reversed()).unwrap().value;
        prop_assert!((whole - parts).norm() < 1e-12 * whole.norm().max(1.0));
        prop_assert!((whole + back).norm() < 1e-12 * whole.norm().max(1.0));
    }

    #[test]
    fn adjugate_identity_property(n in 2usize..6, seed in 0u64..1000) {
        let mut g = rng(seed);
        let rows: Vec<Vec<C64>> = (0..n).map(|_| unit_disk_vec(&mut g, n)).collect();
        let m = CMatrix::from_rows(&rows);
        let lhs = &m.adjugate() * &m;
        let rhs = CMatrix::identity(n).scale(m.det());
        prop_assert!((&lhs - &rhs).max_abs() < 1e-10 * m.norm().powi(3).max(1.0));
    }

    #[test]
    fn char_poly_vanishes_at_own_roots(n in 1usize..6, seed in 0u64..1000) {
        let mut g = rng(seed);
        let rows: Vec<Vec<C64>> = (0..n).map(|_| unit_disk_vec(&mut g, n)).collect();
        let p = CMatrix::from_rows(&rows).char_bipoly();
        for r in poly_roots(&p).unwrap() {
            prop_assert!(p.eval(r.value).norm() < 1e-10 * p.eval_scale(r.value));
        }
    }
}

#[test]
fn ode_exponential_decay() {
    let xs = ode_solve(|_, x| vec![-x[0]], &[c(1.0, 0.0)], &[0.0, 1.0]).unwrap();
    assert!((xs[1][0] - c((-1.0f64).exp(), 0.0)).norm() < 1e-9);
}

#[test]
fn ode_harmonic_oscillator_energy() {
    let grid: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let xs = ode_solve(|_, x| vec![x[1], -x[0]], &[c(1.0, 0.0), c(0.0, 0.0)], &grid).unwrap();
    for x in &xs {
        let e = x[0] * x[0] + x[1] * x[1];
        assert!((e - c(1.0, 0.0)).norm() < 1e-8);
    }
    assert!((xs[10][0] - c(10f64.cos(), 0.0)).norm() < 1e-8);
}

#[test]
fn ode_convergence_order() {
    let field = |_: f64, x: &[C64]| vec![x[1], -x[0]];
    let exact = c(2f64.cos(), 0.0);
    let err = |n| (rk_fixed_step(field, &[c(1.0, 0.0), c(0.0, 0.0)], 0.0, 2.0, n)[0] - exact).norm();
    let (e1, e2, e3) = (err(20), err(40), err(80));
    let p1 = (e1 / e2).log2();
    let p2 = (e2 / e3).log2();
    assert!(p1 > 4.5 && p2 > 4.5, "observed orders {p1} {p2}");
    // adaptive: with local extrapolation the global error is proportional to the tolerance
    let adaptive = |tol| {
        let o = OdeOptions { tol, ..Default::default() };
        let x = ode_solve_with(field, &[c(1.0, 0.0), c(0.0, 0.0)], &[0.0, 20.0], &o).unwrap();
        (x[1][0] - c(20f64.cos(), 0.0)).norm()
    };
    let errs: Vec<f64> = [1e-6, 5e-7, 1e-8, 5e-9].iter().map(|&t| adaptive(t)).collect();
    for pair in errs.chunks(2) {
        let ratio = pair[0] / pair[1];
        assert!(ratio > 1.5 && ratio < 3.0, "halving tol changed error by {ratio}");
    }
}

#[test]
fn ode_tracks_the_peak_between_grid_points() {
    let field = |_: f64, x: &[C64]| vec![c(0.0, 1.0) * x[0] * x[0]];
    let (xs, peak) = ode_solve_tracked(field, &[c(1.0, 0.0)], &[0.0, 2.0], &OdeOptions::default()).unwrap();
    // 1 / (1 - i t) peaks at t = 0 and ends at modulus 1/sqrt(5)
    assert!((xs[1][0] - c(1.0, 0.0) / c(1.0, -2.0)).norm() < 1e-10);
    assert!((peak - 1.0).abs() < 1e-12);
    let (_, peak) = ode_solve_tracked(|_, x| vec![x[0] * x[0]], &[c(1.0, 0.0)], &[0.0, 0.9], &OdeOptions::default()).unwrap();
    assert!((peak - 10.0).abs() < 1e-8);
}

#[test]
fn ode_reports_blow_up() {
    let r = ode_solve(|_, x| vec![x[0] * x[0]], &[c(1.0, 0.0)], &[0.0, 2.0]);
    assert!(matches!(r, Err(Error::StiffFlow { .. })));
}

#[test]
fn fd_gradient_examples() {
    let x = vec![c(0.3, -0.2), c(1.5, 0.0), c(-2.0, 0.7)];
    let g = fd_gradient(|v| v.iter().map(|a| a * a).sum(), &x);
    for (gi, xi) in g.iter().zip(&x) {
        assert!((gi - xi * 2.0).norm() < 1e-9);
    }
    let g = fd_gradient(|_| c(3.0, 1.0), &x);
    assert!(g.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn fd_gradient_random_polynomial() {
    let mut g = rng(12);
    for _ in 0..10 {
        let k = unit_disk_vec(&mut g, 4);
        let x = unit_disk_vec(&mut g, 3);
        // f = k0 x0^3 + k1 x0 x1 x2 + k2 x2^2 x1 + k3 x1
        let f = |v: &[C64]| k[0] * v[0].powi(3) + k[1] * v[0] * v[1] * v[2] + k[2] * v[2] * v[2] * v[1] + k[3] * v[1];
        let want = [
            k[0] * 3.0 * x[0] * x[0] + k[1] * x[1] * x[2],
            k[1] * x[0] * x[2] + k[2] * x[2] * x[2] + k[3],
            k[1] * x[0] * x[1] + k[2] * 2.0 * x[2] * x[1],
        ];
        let got = fd_gradient(f, &x);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-6 * b.norm().max(1.0));
        }
    }
}
