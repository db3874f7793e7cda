//! The finite nonlinear eigenvalue problem `W·V(λ)·β = 0`.

use num_complex::Complex64;

use crate::error::{QtError, Result};
use crate::factor::{GPair, WienerHopfFactors};
use crate::linalg::{qr_rank_revealing, roots_companion, DenseMatrix, Lu};
use crate::poly::{self, char_poly, LaurentSymbol};
use crate::qt::QTMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two inner roots closer than this are treated as a cluster.
pub const TOL_CLUSTER: f64 = 1e-10;

/// `W = [-B, E₁; 0, R̃]`, restricted to its `m + k2` possibly nonzero columns.
#[derive(Clone, Debug, PartialEq)]
pub struct NEPContext {
    pub w: DenseMatrix,
    pub m: usize,
    pub q: usize,
    pub r2: usize,
    /// Row support of `E`; rows past `max(m, k1)` of `(A - λI)v` vanish identically.
    pub k1: usize,
}

impl NEPContext {
    pub fn width(&self) -> usize {
        self.w.cols()
    }
}

pub fn build_w(a: &QTMatrix) -> NEPContext {
    let m = a.m();
    let sym = a.symbol();
    let e = a.correction();
    let (k1, k2) = (e.k1(), e.k2());
    let width = m + k2;

    let mut top = DenseMatrix::zeros(m, width);
    for i in 0..m {
        for j in i..m {
            top[(i, j)] = -sym.coeff(j as isize - i as isize - m as isize);
        }
    }
    let mut e2 = DenseMatrix::zeros(k1.saturating_sub(m), k2);
    for &(i, j, v) in e.entries() {
        if i <= m {
            top[(i - 1, m + j - 1)] = v;
        } else {
            e2[(i - 1 - m, j - 1)] = v;
        }
    }

    let (r2, tilde) = if e2.rows() == 0 {
        (0, DenseMatrix::zeros(0, k2))
    } else {
        let tol = 1e-12 * e2.rows().max(e2.cols()) as f64;
        let qr = qr_rank_revealing(&e2, tol);
        let r = qr.r_unpermuted();
        (qr.rank, DenseMatrix::from_fn(qr.rank, k2, |i, j| r[(i, j)]))
    };

    let q = m + r2;
    let mut w = DenseMatrix::zeros(q, width);
    for i in 0..m {
        w.row_mut(i).copy_from_slice(top.row(i));
    }
    for i in 0..r2 {
        for j in 0..k2 {
            w[(m + i, m + j)] = tilde[(i, j)];
        }
    }
    NEPContext { w, m, q, r2, k1 }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Vandermonde,
    #[default]
    Frobenius,
}

/// A basis of the ℓ² solutions of the difference equation, truncated to `K` rows,
/// with its λ-derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisPair {
    pub v: DenseMatrix,
    pub v_prime: DenseMatrix,
    pub kind: BasisKind,
    /// Inner roots, Vandermonde only.
    pub xi: Vec<Complex64>,
    /// Frobenius only.
    pub g: Option<GPair>,
}

impl BasisPair {
    pub fn p(&self) -> usize {
        self.v.cols()
    }
}

/// Vandermonde basis on the inner roots, `p` taken from the winding number.
pub fn basis_vandermonde(sym: &LaurentSymbol, lambda: Complex64, k: usize) -> Result<BasisPair> {
    let p = (sym.m() as i64 + poly::winding(sym, lambda)?) as usize;
    basis_vandermonde_with_p(sym, lambda, p, k)
}

/// Vandermonde basis on the `p` smallest-modulus roots of `z^m (a(z) - λ)`.
pub fn basis_vandermonde_with_p(sym: &LaurentSymbol, lambda: Complex64, p: usize, k: usize) -> Result<BasisPair> {
    let mut roots = roots_companion(&char_poly(sym, lambda))?;
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    if p > roots.len() {
        return Err(QtError::InvalidInput(format!("p = {p} exceeds the number of roots")));
    }
    let mut xi = roots[..p].to_vec();
    xi.sort_by(|x, y| x.norm().total_cmp(&y.norm()).then(x.arg().total_cmp(&y.arg())));
    for i in 0..p {
        for j in i + 1..p {
            if (xi[i] - xi[j]).norm() < TOL_CLUSTER {
                return Err(QtError::ClusteredRoots);
            }
        }
    }
    let da = poly::deriv(sym);
    let mut dxi = Vec::with_capacity(p);
    for &x in &xi {
        let d = da.eval(x)?;
        if d == ZERO {
            return Err(QtError::ClusteredRoots);
        }
        dxi.push(d.inv());
    }
    let v = DenseMatrix::from_fn(k, p, |i, j| xi[j].powi(i as i32));
    let v_prime = DenseMatrix::from_fn(k, p, |i, j| {
        if i == 0 {
            ZERO
        } else {
            xi[j].powi(i as i32 - 1) * i as f64 * dxi[j]
        }
    });
    Ok(BasisPair {
        v,
        v_prime,
        kind: BasisKind::Vandermonde,
        xi,
        g: None,
    })
}

/// `U = [I; G; G²; …]` and `U'` truncated to `K` rows.
pub fn basis_frobenius(factors: &WienerHopfFactors, k: usize) -> Result<BasisPair> {
    let p = factors.p;
    if p == 0 || k < p {
        return Err(QtError::InvalidInput(format!(
            "Frobenius basis needs 1 ≤ p ≤ K, got p = {p}, K = {k}"
        )));
    }
    let gp = GPair::from_factors(factors)?;
    let mut v = DenseMatrix::zeros(k, p);
    let mut v_prime = DenseMatrix::zeros(k, p);
    let mut pow = DenseMatrix::identity(p);
    let mut dpow = DenseMatrix::zeros(p, p);
    let mut row = 0;
    while row < k {
        for i in 0..p.min(k - row) {
            v.row_mut(row + i).copy_from_slice(pow.row(i));
            v_prime.row_mut(row + i).copy_from_slice(dpow.row(i));
        }
        row += p;
        if row < k {
            // (G^j)' = (G^{j-1})'G + G^{j-1}G'
            dpow = dpow.matmul(&gp.g).add(&pow.matmul(&gp.g_prime));
            pow = pow.matmul(&gp.g);
        }
    }
    Ok(BasisPair {
        v,
        v_prime,
        kind: BasisKind::Frobenius,
        xi: Vec::new(),
        g: Some(gp),
    })
}

/// Top `rows` rows of `W·V` and `W·V'`.
pub fn phi(ctx: &NEPContext, basis: &BasisPair, rows: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    if basis.v.rows() != ctx.width() {
        return Err(QtError::DimensionMismatch(format!(
            "basis has {} rows, W has {} columns",
            basis.v.rows(),
            ctx.width()
        )));
    }
    if rows > ctx.q {
        return Err(QtError::DimensionMismatch(format!("{rows} rows requested, q = {}", ctx.q)));
    }
    let w = ctx.w.top_left(rows, ctx.width());
    Ok((w.matmul(&basis.v), w.matmul(&basis.v_prime)))
}

/// `f/f' = 1 / trace(Φ⁻¹Φ')` for `f = det Φ`; zero when `Φ` is exactly singular.
pub fn newton_correction(phi: &DenseMatrix, phi_prime: &DenseMatrix) -> Result<Complex64> {
    if !phi.is_square() || phi.rows() != phi_prime.rows() || phi.cols() != phi_prime.cols() {
        return Err(QtError::DimensionMismatch("Φ and Φ' must be square of equal size".into()));
    }
    // Φ is nearly singular close to an eigenvalue and may be badly scaled
    // everywhere, so no relative pivot threshold here.
    let lu = Lu::factor_unchecked(phi)?;
    if lu.has_zero_pivot() {
        return Ok(ZERO);
    }
    let t = lu.solve(phi_prime)?.trace();
    if !t.is_finite() {
        return Ok(ZERO);
    }
    if t.norm() < 1e-300 {
        return Err(QtError::DerivativeVanishes);
    }
    Ok(t.inv())
}

/// `v_i = (row i+m of the basis)·β`, `i = 1..=length`, continuing the basis past `K` rows.
pub fn eigvec_prefix(basis: &BasisPair, beta: &[Complex64], length: usize, m: usize) -> Result<Vec<Complex64>> {
    let p = basis.p();
    if beta.len() != p {
        return Err(QtError::DimensionMismatch(format!("β has length {}, expected {p}", beta.len())));
    }
    if beta.iter().all(|b| *b == ZERO) {
        return Err(QtError::InvalidInput("β must be nonzero".into()));
    }
    match basis.kind {
        BasisKind::Vandermonde => Ok((m..m + length)
            .map(|r| basis.xi.iter().zip(beta).map(|(x, b)| x.powi(r as i32) * b).sum())
            .collect()),
        BasisKind::Frobenius => {
            let g = &basis.g.as_ref().expect("Frobenius basis carries G").g;
            let mut out = Vec::with_capacity(length);
            let mut w = beta.to_vec();
            let mut block = 0;
            let end = m + length;
            while block * p < end {
                for i in 0..p {
                    let r = block * p + i;
                    if r >= m && r < end {
                        out.push(w[i]);
                    }
                }
                w = g.matvec(&w);
                block += 1;
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{wiener_hopf, FactorMethod};
    use crate::linalg::det;
    use crate::poly::Poly;
    use crate::qt::{qt_new, Correction};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn fix_a() -> QTMatrix {
        let e = Correction::from_triplets([(1, 1, c(-4.0, 0.0))]).unwrap();
        qt_new(re(&[5.0, -2.0]), re(&[5.0, -2.0]), e).unwrap()
    }

    fn test1(case1: bool) -> QTMatrix {
        let e = if case1 {
            Correction::from_triplets((1..=20).map(|i| (i, 100, c(i as f64, 0.0)))).unwrap()
        } else {
            Correction::from_triplets((1..=3).map(|i| (i, 100, c(8.0 * i as f64, 0.0)))).unwrap()
        };
        qt_new(re(&[0.0, -1.0, 1.0, -1.0]), re(&[0.0, -1.0, -1.0]), e).unwrap()
    }

    fn fixture_bases(a: &QTMatrix, lam: Complex64) -> (NEPContext, BasisPair, BasisPair) {
        let ctx = build_w(a);
        let f = wiener_hopf(a.symbol(), lam, FactorMethod::Roots).unwrap();
        let fr = basis_frobenius(&f, ctx.width()).unwrap();
        let va = basis_vandermonde(a.symbol(), lam, ctx.width()).unwrap();
        (ctx, va, fr)
    }

    #[test]
    fn build_w_examples() {
        let ctx = build_w(&fix_a());
        assert_eq!(ctx.w, DenseMatrix::from_real_rows(&[&[2.0, -4.0]]));
        assert_eq!((ctx.q, ctx.r2, ctx.width()), (1, 0, 2));

        let ctx = build_w(&test1(false));
        assert_eq!((ctx.q, ctx.r2, ctx.width()), (3, 0, 103));
        // -B is upper triangular with diagonal -a_{-m}
        for i in 0..3 {
            assert_eq!(ctx.w[(i, i)], c(1.0, 0.0));
            for j in 0..i {
                assert_eq!(ctx.w[(i, j)], ZERO);
            }
        }

        let ctx = build_w(&test1(true));
        assert_eq!((ctx.q, ctx.r2, ctx.width()), (4, 1, 103));
    }

    #[test]
    fn vandermonde_examples() {
        let a = fix_a();
        let b = basis_vandermonde(a.symbol(), ZERO, 3).unwrap();
        let want_v = [1.0, 0.5, 0.25];
        let want_d = [0.0, 1.0 / 6.0, 1.0 / 6.0];
        for i in 0..3 {
            assert!((b.v[(i, 0)] - c(want_v[i], 0.0)).norm() < 1e-14);
            assert!((b.v_prime[(i, 0)] - c(want_d[i], 0.0)).norm() < 1e-14);
        }

        let sym = LaurentSymbol::from_real(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        let b = basis_vandermonde(&sym, ZERO, 2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((b.v[(1, 0)] - c(0.0, -r)).norm() < 1e-14);
        assert!((b.v[(1, 1)] - c(0.0, r)).norm() < 1e-14);
        assert_eq!(b.v[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn frobenius_examples() {
        let a = fix_a();
        let f = wiener_hopf(a.symbol(), ZERO, FactorMethod::Roots).unwrap();
        let b = basis_frobenius(&f, 3).unwrap();
        let want_v = [1.0, 0.5, 0.25];
        let want_d = [0.0, 1.0 / 6.0, 1.0 / 6.0];
        for i in 0..3 {
            assert!((b.v[(i, 0)] - c(want_v[i], 0.0)).norm() < 1e-14);
            assert!((b.v_prime[(i, 0)] - c(want_d[i], 0.0)).norm() < 1e-14);
        }

        let s = Poly::from_real(&[-0.12, 0.1, 1.0]);
        let f = WienerHopfFactors {
            p: 2,
            s,
            u: Poly::one(),
            s_prime: vec![ZERO; 2],
            u_prime: Vec::new(),
        };
        let b = basis_frobenius(&f, 5).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [0.12, -0.1], [-0.012, 0.13]];
        for (i, row) in want.iter().enumerate() {
            for j in 0..2 {
                assert!((b.v[(i, j)] - c(row[j], 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(b.v_prime.max_abs(), 0.0);
    }

    #[test]
    fn phi_and_correction_fix_a() {
        let a = fix_a();
        let (ctx, va, fr) = fixture_bases(&a, ZERO);
        for basis in [&va, &fr] {
            let (f, fp) = phi(&ctx, basis, 1).unwrap();
            assert!(f[(0, 0)].norm() < 1e-14);
            assert!((fp[(0, 0)] - c(-2.0 / 3.0, 0.0)).norm() < 1e-14);
            assert_eq!(newton_correction(&f, &fp).unwrap(), ZERO);
        }
        let s = newton_correction(
            &DenseMatrix::from_real_rows(&[&[3.0]]),
            &DenseMatrix::from_real_rows(&[&[4.0]]),
        )
        .unwrap();
        assert!((s - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn correction_matches_finite_difference_fix_a() {
        let a = fix_a();
        let ctx = build_w(&a);
        let f = |lam: Complex64| {
            let b = basis_vandermonde(a.symbol(), lam, ctx.width()).unwrap();
            let (p, _) = phi(&ctx, &b, 1).unwrap();
            det(&p).unwrap()
        };
        let lam = c(0.1, 0.0);
        let h = 1e-7;
        let fd = f(lam) / ((f(lam + h) - f(lam - h)) / (2.0 * h));
        let b = basis_vandermonde(a.symbol(), lam, ctx.width()).unwrap();
        let (p, pp) = phi(&ctx, &b, 1).unwrap();
        let nc = newton_correction(&p, &pp).unwrap();
        assert!((nc - fd).norm() < 1e-5);
    }

    #[test]
    fn determinant_relation() {
        let a = test1(false);
        let lam = [c(-1.0, 0.5), c(0.3, -1.4), c(2.0, 2.0), c(-3.0, 0.0)]
            .into_iter()
            .find(|&l| poly::winding(a.symbol(), l).unwrap() <= 0)
            .unwrap();
        let (ctx, va, fr) = fixture_bases(&a, lam);
        let p = va.p();
        assert!(p <= ctx.q);
        let (fv, _) = phi(&ctx, &va, p).unwrap();
        let (ff, _) = phi(&ctx, &fr, p).unwrap();
        let vp = va.v.top_left(p, p);
        let lhs = det(&fv).unwrap();
        let rhs = det(&ff).unwrap() * det(&vp).unwrap();
        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm());
    }

    #[test]
    fn eigvec_prefix_examples() {
        let a = fix_a();
        let (_, va, fr) = fixture_bases(&a, ZERO);
        let one = [c(1.0, 0.0)];
        let want = [0.5, 0.25, 0.125, 0.0625];
        for basis in [&va, &fr] {
            let v = eigvec_prefix(basis, &one, 4, 1).unwrap();
            for (x, w) in v.iter().zip(want) {
                assert!((x - c(w, 0.0)).norm() < 1e-15);
            }
            let v3 = eigvec_prefix(basis, &[c(0.0, 3.0)], 4, 1).unwrap();
            for (x, w) in v3.iter().zip(want) {
                assert!((x - c(0.0, 3.0 * w)).norm() < 1e-14);
            }
        }
        assert!(eigvec_prefix(&va, &[ZERO], 4, 1).is_err());
    }

    #[test]
    fn frobenius_prefix_matches_vandermonde_for_p_greater_than_one() {
        let a = test1(false);
        let lam = c(-1.0, 0.5);
        let (_, va, fr) = fixture_bases(&a, lam);
        let p = va.p();
        // β_F = V_p β_V gives the same vector
        let beta_v: Vec<Complex64> = (0..p).map(|j| c(1.0 + j as f64, -0.5)).collect();
        let beta_f = va.v.top_left(p, p).matvec(&beta_v);
        let x = eigvec_prefix(&va, &beta_v, 30, 3).unwrap();
        let y = eigvec_prefix(&fr, &beta_f, 30, 3).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn vandermonde_detects_clusters() {
        // a(z) - λ with a double root inside: z⁻¹(z - 0.5)² = z - 1 + 0.25 z⁻¹
        let sym = LaurentSymbol::from_real(&[-1.0, 0.25], &[-1.0, 1.0]).unwrap();
        // a numerically double root either trips the cluster check or gives
        // nearly parallel columns
        match basis_vandermonde_with_p(&sym, ZERO, 2, 3) {
            Err(QtError::ClusteredRoots) => {}
            Ok(b) => assert!((b.xi[0] - b.xi[1]).norm() < 1e-6),
            Err(e) => panic!("{e:?}"),
        }
    }
}
