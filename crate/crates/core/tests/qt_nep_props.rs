mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qteig::factor::{wiener_hopf, wiener_hopf_with_p, FactorMethod};
use qteig::linalg::{det, DenseMatrix};
use qteig::nep::{basis_frobenius, basis_vandermonde, basis_vandermonde_with_p, build_w, newton_correction, phi, NEPContext};
use qteig::poly::{self, char_poly};
use qteig::qt::{Correction, QTMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_qt(rng: &mut impl Rng) -> QTMatrix {
    let sym = random_symbol(rng, 4);
    let k1 = rng.gen_range(0..6);
    let k2 = rng.gen_range(1..8);
    let e = if k1 == 0 {
        Correction::zero()
    } else {
        Correction::from_triplets((1..=k1).flat_map(|i| (1..=k2).map(move |j| (i, j))).map(|(i, j)| (i, j, rand_c(rng, 1.0))).collect::<Vec<_>>()).unwrap()
    };
    QTMatrix::new(sym, e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_section_agrees_with_apply_prefix(seed in any::<u64>(), extra in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qt(&mut rng);
        let n_sec = a.min_section() + a.n() + extra;
        let support = n_sec - a.n();
        let mut v: Vec<Complex64> = (0..support).map(|_| rand_c(&mut rng, 1.0)).collect();
        v.resize(n_sec + a.n(), c(0.0, 0.0));
        let dense = a.finite_section(n_sec).unwrap().matvec(&v[..n_sec]);
        let prefix = a.apply_prefix(&v, n_sec).unwrap();
        for (x, y) in dense.iter().zip(&prefix) {
            prop_assert!((x - y).norm() <= 1e-13 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn norm_inf_bounds_finite_sections(seed in any::<u64>(), extra in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qt(&mut rng);
        let sec = a.finite_section(a.min_section() + extra).unwrap();
        prop_assert!(sec.norm_inf() <= a.norm_inf() * (1.0 + 1e-14));
    }
}

#[test]
fn symbol_curve_separates_winding_components() {
    let a = QTMatrix::new(fig2_symbol(), Correction::zero());
    let sym = a.symbol();
    let da = poly::deriv(sym);
    let samples = 512;
    let curve = a.symbol_curve(samples).unwrap();
    let (mut crossings, mut usable) = (0, 0);
    for (k, &pt) in curve.iter().enumerate() {
        let z = Complex64::from_polar(1.0, k as f64 * std::f64::consts::TAU / samples as f64);
        let tangent = da.eval(z).unwrap() * Complex64::i() * z;
        if tangent.norm() < 1e-6 {
            continue;
        }
        let normal = Complex64::i() * tangent / tangent.norm();
        let (w_in, w_out) = match (poly::winding(sym, pt - 1e-2 * normal), poly::winding(sym, pt + 1e-2 * normal)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => continue,
        };
        usable += 1;
        if w_in != w_out {
            crossings += 1;
        }
    }
    // only samples within 1e-2 of a self-intersection can see both sides agree
    assert!(usable > samples * 9 / 10);
    assert!(crossings as f64 >= 0.95 * usable as f64, "{crossings}/{usable}");
}

/// Fixtures with a random λ in a component where `1 ≤ p ≤ q`.
fn fixture_points(seed: u64, per: usize) -> Vec<(QTMatrix, NEPContext, Complex64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for a in [fix_a(), test1_case1(), test2_case1(), test3()] {
        let ctx = build_w(&a);
        let mut got = 0;
        let radius = a.norm_inf();
        while got < per {
            let lambda = rand_c(&mut rng, radius);
            if lambda.norm() > radius {
                continue;
            }
            let Some(roots) = char_roots(a.symbol(), lambda) else { continue };
            if !well_separated(&roots, 1e-3) {
                continue;
            }
            let Ok(w) = poly::winding(a.symbol(), lambda) else { continue };
            let p = (a.m() as i64 + w) as usize;
            if p == 0 || p > ctx.q {
                continue;
            }
            out.push((a.clone(), ctx.clone(), lambda, p));
            got += 1;
        }
    }
    out
}

fn det_phi(a: &QTMatrix, ctx: &NEPContext, lambda: Complex64, p: usize) -> Complex64 {
    let f = wiener_hopf_with_p(a.symbol(), lambda, p, FactorMethod::Roots).unwrap();
    let b = basis_frobenius(&f, ctx.width()).unwrap();
    det(&phi(ctx, &b, p).unwrap().0).unwrap()
}

/// Compared as `f'/f = 1/correction`: where `det Φ` is nearly flat the step is
/// huge and only its reciprocal is resolvable by differences.
#[test]
fn trace_correction_matches_finite_difference_newton_step() {
    for (a, ctx, lambda, p) in fixture_points(300, 20) {
        let f = wiener_hopf_with_p(a.symbol(), lambda, p, FactorMethod::Roots).unwrap();
        let b = basis_frobenius(&f, ctx.width()).unwrap();
        let (ph, php) = phi(&ctx, &b, p).unwrap();
        let t = newton_correction(&ph, &php).unwrap().inv();
        let h = 1e-6 * lambda.norm().max(1.0);
        let d = (det_phi(&a, &ctx, lambda + h, p) - det_phi(&a, &ctx, lambda - h, p)) / (2.0 * h);
        let t_fd = d / det(&ph).unwrap();
        assert!((t - t_fd).norm() <= 1e-5 * t.norm().max(1.0), "λ = {lambda}: {t} vs {t_fd}");
    }
}

#[test]
fn vandermonde_and_frobenius_determinants_differ_by_det_vp() {
    for (a, ctx, lambda, p) in fixture_points(301, 20) {
        let Ok(bv) = basis_vandermonde_with_p(a.symbol(), lambda, p, ctx.width()) else { continue };
        let f = wiener_hopf_with_p(a.symbol(), lambda, p, FactorMethod::Roots).unwrap();
        let bf = basis_frobenius(&f, ctx.width()).unwrap();
        let dv = det(&phi(&ctx, &bv, p).unwrap().0).unwrap();
        let df = det(&phi(&ctx, &bf, p).unwrap().0).unwrap();
        let vp = det(&bv.v.top_left(p, p)).unwrap();
        assert!((dv - df * vp).norm() <= 1e-8 * dv.norm().max((df * vp).norm()), "λ = {lambda}");
    }
}

#[test]
fn newton_correction_is_invariant_under_row_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for (a, ctx, lambda, p) in fixture_points(303, 5) {
        let f = wiener_hopf_with_p(a.symbol(), lambda, p, FactorMethod::Roots).unwrap();
        let b = basis_frobenius(&f, ctx.width()).unwrap();
        let (ph, php) = phi(&ctx, &b, p).unwrap();
        let row = rng.gen_range(0..p);
        let mut scaled = ctx.clone();
        for x in scaled.w.row_mut(row) {
            *x *= 10.0;
        }
        let (sh, shp) = phi(&scaled, &b, p).unwrap();
        let (d0, d1) = (det(&ph).unwrap(), det(&sh).unwrap());
        assert!((d1 - 10.0 * d0).norm() <= 1e-10 * d1.norm(), "{d0} {d1}");
        let (c0, c1) = (newton_correction(&ph, &php).unwrap(), newton_correction(&sh, &shp).unwrap());
        assert!((c0 - c1).norm() <= 1e-10 * c0.norm().max(1e-12), "{c0} {c1}");
    }
}

#[test]
fn trace_product_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    for _ in 0..50 {
        let n = rng.gen_range(1..8);
        let well = |rng: &mut ChaCha8Rng| {
            DenseMatrix::from_fn(n, n, |i, j| rand_c(rng, 1.0) + if i == j { c(n as f64 + 1.0, 0.0) } else { c(0.0, 0.0) })
        };
        let (p, q) = (well(&mut rng), well(&mut rng));
        let pp = DenseMatrix::from_fn(n, n, |_, _| rand_c(&mut rng, 1.0));
        let qp = DenseMatrix::from_fn(n, n, |_, _| rand_c(&mut rng, 1.0));
        let f = p.matmul(&q);
        let fp = pp.matmul(&q).add(&p.matmul(&qp));
        let whole = newton_correction(&f, &fp).unwrap().inv();
        let parts = newton_correction(&p, &pp).unwrap().inv() + newton_correction(&q, &qp).unwrap().inv();
        assert!((whole - parts).norm() <= 1e-8 * whole.norm().max(1.0));
    }
}

#[test]
fn basis_columns_solve_the_difference_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    let mut checked = 0;
    while checked < 60 {
        let sym = random_symbol(&mut rng, 4);
        let lambda = rand_c(&mut rng, 2.0);
        let Some(roots) = char_roots(&sym, lambda) else { continue };
        if !well_separated(&roots, 0.05) {
            continue;
        }
        let Ok(w) = poly::winding(&sym, lambda) else { continue };
        if sym.m() as i64 + w == 0 {
            continue;
        }
        let b = char_poly(&sym, lambda);
        let deg = b.degree();
        let k = 3 * deg + 2;
        let fr = basis_frobenius(&wiener_hopf(&sym, lambda, FactorMethod::Roots).unwrap(), k).unwrap();
        let va = basis_vandermonde(&sym, lambda, k).unwrap();
        for v in [&fr.v, &va.v] {
            for j in 0..v.cols() {
                for r in 0..k - deg {
                    let terms: Vec<Complex64> = (0..=deg).map(|i| b.coeffs()[i] * v[(r + i, j)]).collect();
                    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
                    let sum: Complex64 = terms.iter().sum();
                    assert!(sum.norm() <= 1e-8 * scale.max(1e-300), "column {j}, row {r}");
                }
            }
        }
        checked += 1;
    }
}

