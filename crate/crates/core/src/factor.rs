//! Wiener–Hopf factorisation of `b(z) = z^m (a(z) - λ)`, the matrix `G = F^p`
//! of minimal spectral radius and λ-derivatives of both.

use num_complex::Complex64;

use crate::error::{QtError, Result};
use crate::linalg::{roots_companion, DenseMatrix, Lu};
use crate::poly::{self, char_poly, convolve, LaurentSymbol, Poly};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Roots this close to 𝕋 make the inside/outside split meaningless.
pub const TOL_ON_CURVE: f64 = 1e-10;
/// Relative deconvolution residual above which the split is rejected.
pub const TOL_DECONV: f64 = 1e-6;

const CR_MAXIT: usize = 64;

/// How the inner factor `s` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FactorMethod {
    /// Companion roots, split by modulus.
    #[default]
    Roots,
    /// Cyclic reduction on the matrix equation for `G`.
    CyclicReduction,
}

/// `b = s·u` with `s` monic of degree `p` (roots in the open unit disk) and
/// `u` of degree `m + n - p` with leading coefficient `aₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerHopfFactors {
    pub p: usize,
    pub s: Poly,
    pub u: Poly,
    /// `ds_i/dλ` for `i < p`.
    pub s_prime: Vec<Complex64>,
    /// `du_i/dλ` for `i < m + n - p`.
    pub u_prime: Vec<Complex64>,
}

impl WienerHopfFactors {
    pub fn p_hat(&self) -> usize {
        self.u.degree()
    }
}

/// `G` together with `dG/dλ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GPair {
    pub g: DenseMatrix,
    pub g_prime: DenseMatrix,
}

impl GPair {
    pub fn from_factors(f: &WienerHopfFactors) -> Result<Self> {
        Ok(Self {
            g: barnett_g(&f.s)?,
            g_prime: barnett_g_prime(&f.s, &f.s_prime)?,
        })
    }
}

/// Factorisation with `p` taken from the Graeffe winding number.
pub fn wiener_hopf(sym: &LaurentSymbol, lambda: Complex64, method: FactorMethod) -> Result<WienerHopfFactors> {
    let w = poly::winding(sym, lambda)?;
    let p = (sym.m() as i64 + w) as usize;
    wiener_hopf_with_p(sym, lambda, p, method)
}

/// Factorisation with a caller-supplied inner degree `p`.
pub fn wiener_hopf_with_p(
    sym: &LaurentSymbol,
    lambda: Complex64,
    p: usize,
    method: FactorMethod,
) -> Result<WienerHopfFactors> {
    let b = char_poly(sym, lambda);
    let d = b.degree();
    if p > d {
        return Err(QtError::InvalidInput(format!("inner degree {p} exceeds degree {d}")));
    }
    if p == 0 {
        return Ok(WienerHopfFactors {
            p,
            s: Poly::one(),
            u: b,
            s_prime: Vec::new(),
            u_prime: Vec::new(),
        });
    }
    let s = match method {
        FactorMethod::Roots => inner_factor_roots(&b, p)?,
        FactorMethod::CyclicReduction => {
            let g = g_cyclic_reduction(sym, lambda, p)?;
            let mut c: Vec<Complex64> = g.row(0).iter().map(|&x| -x).collect();
            c.push(ONE);
            Poly::new(c)
        }
    };
    let u = deconvolve(&b, &s)?;
    let (s_prime, u_prime) = factor_derivatives(&s, &u, sym.m())?;
    Ok(WienerHopfFactors {
        p,
        s,
        u,
        s_prime,
        u_prime,
    })
}

fn inner_factor_roots(b: &Poly, p: usize) -> Result<Poly> {
    let mut roots = roots_companion(b)?;
    if let Some(r) = roots.iter().find(|r| (r.norm() - 1.0).abs() < TOL_ON_CURVE) {
        return Err(QtError::OnCurve { modulus: r.norm() });
    }
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    // multiply in increasing modulus order
    let mut s = vec![ONE];
    for r in &roots[..p] {
        let mut next = vec![ZERO; s.len() + 1];
        for (i, &c) in s.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        s = next;
    }
    Ok(Poly::new(s))
}

/// `u = b / s`, leading terms first; stable because the roots of `s` lie inside 𝕋.
fn deconvolve(b: &Poly, s: &Poly) -> Result<Poly> {
    let (u, _) = b.div_rem(s)?;
    let diff = convolve(s, &u).sub(b);
    let resid = diff.norm1();
    if resid > TOL_DECONV * b.norm1() {
        return Err(QtError::FactorizationUnstable(resid / b.norm1()));
    }
    Ok(u)
}

/// Solves `s'·u + s·u' = -z^m` for the free coefficients of `s'` and `u'`.
fn factor_derivatives(s: &Poly, u: &Poly, m: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let p = s.degree();
    let ph = u.degree();
    let d = p + ph;
    let mut mat = DenseMatrix::zeros(d, d);
    for j in 0..p {
        for (i, &c) in u.coeffs().iter().enumerate() {
            if i + j < d {
                mat[(i + j, j)] = c;
            }
        }
    }
    for j in 0..ph {
        for (i, &c) in s.coeffs().iter().enumerate() {
            if i + j < d {
                mat[(i + j, p + j)] = c;
            }
        }
    }
    let mut rhs = DenseMatrix::zeros(d, 1);
    rhs[(m, 0)] = -ONE;
    let x = Lu::new(&mat)?.solve(&rhs)?;
    let x = x.column(0);
    Ok((x[..p].to_vec(), x[p..].to_vec()))
}

fn check_monic(s: &Poly) -> Result<usize> {
    let p = s.degree();
    if p == 0 || s.leading() != ONE {
        return Err(QtError::InvalidInput("inner factor must be monic of degree ≥ 1".into()));
    }
    Ok(p)
}

/// `X ← L⁻¹X` for unit lower-triangular Toeplitz `L` with first column `col`.
fn solve_unit_lower_toeplitz(col: &[Complex64], x: &mut DenseMatrix) {
    let (p, k) = (x.rows(), x.cols());
    for i in 1..p {
        for t in 1..=i {
            let l = col[t];
            if l == ZERO {
                continue;
            }
            for j in 0..k {
                let v = x[(i - t, j)];
                x[(i, j)] -= l * v;
            }
        }
    }
}

/// `(1, s_{p-1}, …, s_1)`.
fn barnett_l_column(c: &[Complex64], p: usize) -> Vec<Complex64> {
    (0..p).map(|i| if i == 0 { ONE } else { c[p - i] }).collect()
}

fn upper_toeplitz(row: &[Complex64]) -> DenseMatrix {
    let p = row.len();
    DenseMatrix::from_fn(p, p, |i, j| if j >= i { row[j - i] } else { ZERO })
}

/// `G = F^p = -L⁻¹U` for the companion matrix `F` of the monic `s`.
pub fn barnett_g(s: &Poly) -> Result<DenseMatrix> {
    let p = check_monic(s)?;
    let c = s.coeffs();
    let mut g = upper_toeplitz(&c[..p]).scale(-ONE);
    solve_unit_lower_toeplitz(&barnett_l_column(c, p), &mut g);
    Ok(g)
}

/// `G' = -L⁻¹(U' + L'G)`.
pub fn barnett_g_prime(s: &Poly, s_prime: &[Complex64]) -> Result<DenseMatrix> {
    let p = check_monic(s)?;
    if s_prime.len() != p {
        return Err(QtError::DimensionMismatch(format!(
            "s' has length {}, expected {p}",
            s_prime.len()
        )));
    }
    let c = s.coeffs();
    let g = barnett_g(s)?;
    let up = upper_toeplitz(s_prime);
    let lp = DenseMatrix::from_fn(p, p, |i, j| if i > j { s_prime[p - (i - j)] } else { ZERO });
    let mut rhs = up.add(&lp.matmul(&g)).scale(-ONE);
    solve_unit_lower_toeplitz(&barnett_l_column(c, p), &mut rhs);
    Ok(rhs)
}

/// Blocks `A_{-1}, …, A_K` of `∑ A_k X^{k+1} = 0`, `(A_k)_{ij} = a_{j-i+kp-m+p}` with `λ`
/// removed from `a₀`.
fn mateq_blocks(sym: &LaurentSymbol, lambda: Complex64, p: usize) -> Vec<DenseMatrix> {
    let (m, n) = (sym.m() as isize, sym.n() as isize);
    let pi = p as isize;
    let coeff = |k: isize| {
        if k == 0 {
            sym.coeff(0) - lambda
        } else {
            sym.coeff(k)
        }
    };
    let mut blocks = Vec::new();
    let mut k = -1isize;
    // smallest index in block k is (k+1)p - m - (p-1)
    while (k + 1) * pi - m - (pi - 1) <= n {
        blocks.push(DenseMatrix::from_fn(p, p, |i, j| {
            coeff(j as isize - i as isize + k * pi - m + pi)
        }));
        k += 1;
    }
    blocks
}

/// `‖∑_{k≥-1} A_k G^{k+1}‖∞`.
pub fn residual_mateq(sym: &LaurentSymbol, lambda: Complex64, g: &DenseMatrix) -> Result<f64> {
    if !g.is_square() || g.rows() == 0 {
        return Err(QtError::DimensionMismatch("G must be square and nonempty".into()));
    }
    let p = g.rows();
    let mut power = DenseMatrix::identity(p);
    let mut acc = DenseMatrix::zeros(p, p);
    for a in mateq_blocks(sym, lambda, p) {
        acc = acc.add(&a.matmul(&power));
        power = power.matmul(g);
    }
    Ok(acc.norm_inf())
}

/// Minimal solution of the matrix equation by cyclic reduction after
/// reblocking it into a quadratic one with blocks of size `pK`.
fn g_cyclic_reduction(sym: &LaurentSymbol, lambda: Complex64, p: usize) -> Result<DenseMatrix> {
    let blocks = mateq_blocks(sym, lambda, p);
    let kk = blocks.len() - 2;
    let kk = kk.max(1);
    let dim = p * kk;
    let block = |k: isize| -> Option<&DenseMatrix> {
        if k < -1 {
            None
        } else {
            blocks.get((k + 1) as usize)
        }
    };
    let assemble = |shift: isize| {
        let mut out = DenseMatrix::zeros(dim, dim);
        for r in 0..kk {
            for c in 0..kk {
                let k = shift * kk as isize + c as isize - r as isize;
                if let Some(a) = block(k) {
                    for i in 0..p {
                        for j in 0..p {
                            out[(r * p + i, c * p + j)] = a[(i, j)];
                        }
                    }
                }
            }
        }
        out
    };
    let am1 = assemble(-1);
    let mut bm1 = am1.clone();
    let mut b0 = assemble(0);
    let mut b1 = assemble(1);
    let mut hat = b0.clone();
    let mut converged = false;
    for _ in 0..CR_MAXIT {
        let lu = Lu::new(&b0)?;
        let k_bm1 = lu.solve(&bm1)?;
        let k_b1 = lu.solve(&b1)?;
        let b1_k_bm1 = b1.matmul(&k_bm1);
        let bm1_k_b1 = bm1.matmul(&k_b1);
        hat = hat.sub(&b1_k_bm1);
        b0 = b0.sub(&bm1_k_b1).sub(&b1_k_bm1);
        bm1 = bm1.matmul(&k_bm1).scale(-ONE);
        b1 = b1.matmul(&k_b1).scale(-ONE);
        if b1_k_bm1.norm_inf() <= f64::EPSILON * hat.norm_inf() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(QtError::ConvergenceFailure);
    }
    let big = Lu::new(&hat)?.solve(&am1)?.scale(-ONE);
    // top-right p×p block
    Ok(DenseMatrix::from_fn(p, p, |i, j| big[(i, (kk - 1) * p + j)]))
}
