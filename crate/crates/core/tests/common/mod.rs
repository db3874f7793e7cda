//! Fixtures shared by the integration test targets.
#![allow(dead_code)]

use num_complex::Complex64;
use qteig::poly::{self, LaurentSymbol, Poly};
use qteig::qt::{qt_new, Correction, QTMatrix};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

/// T(-2z⁻¹ + 5 - 2z) - 4e₁e₁ᵀ; its only isolated eigenvalue is 0 with vᵢ = 2⁻ⁱ.
pub fn fix_a() -> QTMatrix {
    let e = Correction::from_triplets([(1, 1, c(-4.0, 0.0))]).unwrap();
    qt_new(re(&[5.0, -2.0]), re(&[5.0, -2.0]), e).unwrap()
}

/// 20×100 correction, zero except the last column (1, 2, …, 20).
pub fn last_column_20() -> Correction {
    Correction::from_triplets((1..=20).map(|i| (i, 100, c(i as f64, 0.0)))).unwrap()
}

/// `rows`×100 correction, zero except the last column 8·(1, …, rows).
pub fn last_column_scaled(rows: usize) -> Correction {
    Correction::from_triplets((1..=rows).map(|i| (i, 100, c(8.0 * i as f64, 0.0)))).unwrap()
}

pub const TEST1_AM: [f64; 4] = [0.0, -1.0, 1.0, -1.0];
pub const TEST2_AM: [f64; 8] = [0.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 1.0];
pub const TEST12_AP: [f64; 3] = [0.0, -1.0, -1.0];

pub fn test1_case1() -> QTMatrix {
    qt_new(re(&TEST1_AM), re(&TEST12_AP), last_column_20()).unwrap()
}

pub fn test1_case2() -> QTMatrix {
    qt_new(re(&TEST1_AM), re(&TEST12_AP), last_column_scaled(3)).unwrap()
}

pub fn test2_case1() -> QTMatrix {
    qt_new(re(&TEST2_AM), re(&TEST12_AP), last_column_20()).unwrap()
}

/// a(z) = z⁻¹⁰(1/10 + z)³ + 10z², E = 1e-5·[0₁₂ I₁₂].
pub fn test3() -> QTMatrix {
    let mut am = vec![0.0; 11];
    am[7] = 1.0;
    am[8] = 0.3;
    am[9] = 3e-2;
    am[10] = 1e-3;
    let e = Correction::from_triplets((1..=12).map(|i| (i, 12 + i, c(1e-5, 0.0)))).unwrap();
    qt_new(re(&am), re(&[0.0, 0.0, 10.0]), e).unwrap()
}

/// a(z) = 3z⁻³ − 2z⁻² + z⁻¹ − z − 4z² − 3z³.
pub fn fig2_symbol() -> LaurentSymbol {
    LaurentSymbol::from_real(&[0.0, 1.0, -2.0, 3.0], &[0.0, -1.0, -4.0, -3.0]).unwrap()
}

pub fn rand_c(rng: &mut impl Rng, r: f64) -> Complex64 {
    c(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Random symbol with 1 ≤ m, n ≤ `max_deg` and extreme coefficients bounded away from 0.
pub fn random_symbol(rng: &mut impl Rng, max_deg: usize) -> LaurentSymbol {
    let m = rng.gen_range(1..=max_deg);
    let n = rng.gen_range(1..=max_deg);
    let mut neg: Vec<Complex64> = (0..=m).map(|_| rand_c(rng, 1.0)).collect();
    let mut pos: Vec<Complex64> = (0..=n).map(|_| rand_c(rng, 1.0)).collect();
    pos[0] = neg[0];
    for z in [&mut neg[m], &mut pos[n]] {
        if z.norm() < 0.2 {
            *z += c(0.5, 0.0);
        }
    }
    LaurentSymbol::new(neg, pos).unwrap()
}

/// Roots of z^m(a(z) − λ), or `None` if the root finder failed.
pub fn char_roots(sym: &LaurentSymbol, lambda: Complex64) -> Option<Vec<Complex64>> {
    qteig::linalg::roots_companion(&poly::char_poly(sym, lambda)).ok()
}

/// True when every root is at least `gap` from the unit circle and from every other root.
pub fn well_separated(roots: &[Complex64], gap: f64) -> bool {
    roots.iter().all(|r| (r.norm() - 1.0).abs() >= gap)
        && roots
            .iter()
            .enumerate()
            .all(|(i, a)| roots[i + 1..].iter().all(|b| (a - b).norm() >= gap))
}

/// Explicit `F = Z - e_p·(s₀, …, s_{p-1})` for a monic `s`.
pub fn companion_upper(s: &Poly) -> qteig::linalg::DenseMatrix {
    let p = s.degree();
    let co = s.coeffs();
    qteig::linalg::DenseMatrix::from_fn(p, p, |i, j| {
        if i + 1 == p {
            -co[j]
        } else if j == i + 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}
