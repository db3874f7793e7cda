//! Dense complex linear algebra.
//!
//! Everything here works on [`DenseMatrix`], a row-major matrix of
//! `Complex64`. The eigensolver follows the classical route: diagonal
//! balancing, Householder reduction to upper Hessenberg form, then implicit
//! single-shift QR sweeps with a Wilkinson shift. Only eigenvalues are
//! computed, so each sweep touches the active window and nothing else.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::abs1;
use crate::error::{QtError, Result};
use crate::poly::Poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest dimension accepted by [`eig_dense`].
pub const EIG_MAX_DIM: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn column_vector(v: &[Complex64]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Leading `rows × cols` block.
    pub fn top_left(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Self::from_vec(self.rows, self.cols, data)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Self::from_vec(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_vec(self.rows, self.cols, self.data.iter().map(|a| a * s).collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Permutes columns so that column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, perm[j])])
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorisation with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Factors a square matrix. Fails with [`QtError::Singular`] when a pivot
    /// falls below `1e-14 · max|A|`.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let lu = Self::factor_unchecked(a)?;
        let scale = a.max_abs();
        let tiny = 1e-14 * scale;
        let n = a.rows();
        if scale == 0.0 || (0..n).any(|i| lu.lu[(i, i)].norm() < tiny) {
            return Err(QtError::Singular);
        }
        Ok(lu)
    }

    /// Factors without the relative pivot test; only an exactly zero pivot
    /// makes later solves meaningless.
    pub fn factor_unchecked(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(QtError::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (piv, _) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            if d == ZERO {
                continue;
            }
            for i in k + 1..n {
                let l = lu[(i, k)] / d;
                lu[(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                let (upper, lower) = lu.data.split_at_mut(i * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                let irow = &mut lower[k + 1..n];
                for (x, &u) in irow.iter_mut().zip(krow) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn has_zero_pivot(&self) -> bool {
        (0..self.lu.rows()).any(|i| self.lu[(i, i)] == ZERO)
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.rows();
        (0..n).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(QtError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows()
            )));
        }
        let nrhs = b.cols();
        let mut x = DenseMatrix::from_fn(n, nrhs, |i, j| b[(self.perm[i], j)]);
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == ZERO {
                    continue;
                }
                for j in 0..nrhs {
                    let t = x[(k, j)];
                    x[(i, j)] -= l * t;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u == ZERO {
                    continue;
                }
                for j in 0..nrhs {
                    let t = x[(k, j)];
                    x[(i, j)] -= u * t;
                }
            }
            let d = self.lu[(i, i)];
            for j in 0..nrhs {
                x[(i, j)] /= d;
            }
        }
        Ok(x)
    }
}

/// Solves `A·X = B` with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Lu::new(a)?.solve(b)
}

/// Determinant via LU; exactly singular matrices give zero instead of an error.
pub fn det(a: &DenseMatrix) -> Result<Complex64> {
    if a.rows() == 0 {
        return Ok(ONE);
    }
    Ok(Lu::factor_unchecked(a)?.det())
}

/// Column-pivoted Householder QR, `A·P = Q·R`.
#[derive(Clone, Debug)]
pub struct RankRevealingQR {
    /// Unitary, `rows × rows`.
    pub q: DenseMatrix,
    /// Upper trapezoidal, `rows × cols`.
    pub r: DenseMatrix,
    /// Column `j` of `A·P` is column `permutation[j]` of `A`.
    pub permutation: Vec<usize>,
    pub rank: usize,
}

impl RankRevealingQR {
    /// `R` with its columns put back in the original order, so that `A = Q·(R·Pᵀ)`.
    pub fn r_unpermuted(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.r.rows(), self.r.cols());
        for (j, &orig) in self.permutation.iter().enumerate() {
            for i in 0..self.r.rows() {
                out[(i, orig)] = self.r[(i, j)];
            }
        }
        out
    }
}

/// Rank is the number of diagonal entries of `R` exceeding `tol · |R₁₁|`.
pub fn qr_rank_revealing(a: &DenseMatrix, tol: f64) -> RankRevealingQR {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);

    for k in 0..steps {
        // pivot on the largest remaining column norm
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let s: f64 = (k..m).map(|i| r[(i, j)].norm_sqr()).sum();
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                r.data.swap(i * n + k, i * n + best);
            }
            perm.swap(k, best);
        }
        let norm = best_norm.sqrt();
        if norm == 0.0 {
            break;
        }
        let x0 = r[(k, k)];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // R ← H·R on rows k.., columns k..
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            let f = dot * tau;
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * f;
            }
        }
        // Q ← Q·H on columns k..
        for i in 0..m {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| q[(i, k + t)] * vi).sum();
            let f = dot * tau;
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] -= f * vi.conj();
            }
        }
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = ZERO;
        }
    }

    let r11 = if steps > 0 { r[(0, 0)].norm() } else { 0.0 };
    let rank = if r11 == 0.0 {
        0
    } else {
        (0..steps).filter(|&i| r[(i, i)].norm() > tol * r11).count()
    };
    RankRevealingQR {
        q,
        r,
        permutation: perm,
        rank,
    }
}

/// Default rank tolerance `1e-12 · max(rows, cols)` relative to `|R₁₁|`.
pub fn default_rank_tol(a: &DenseMatrix) -> f64 {
    1e-12 * a.rows().max(a.cols()) as f64
}

/// All eigenvalues of a square matrix, with multiplicity.
pub fn eig_dense(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() || a.rows() == 0 {
        return Err(QtError::DimensionMismatch(format!(
            "eigenvalues need a nonempty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > EIG_MAX_DIM {
        return Err(QtError::InvalidInput(format!(
            "dimension {n} exceeds the eigensolver cap {EIG_MAX_DIM}"
        )));
    }
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QtError::InvalidInput("matrix has non-finite entries".into()));
    }
    if a.is_real() {
        let mut h: Vec<f64> = a.data.iter().map(|z| z.re).collect();
        real::balance(&mut h, n);
        real::hessenberg(&mut h, n);
        return real::francis_qr(&mut h, n);
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Real counterparts of the eigenvalue pipeline, on row-major `n×n` slices.
/// Conjugate pairs come out of a Francis double-shift step, which keeps the
/// arithmetic real and is several times cheaper than the complex sweep.
mod real {
    use super::*;

    pub(super) fn balance(a: &mut [f64], n: usize) {
        const RADIX: f64 = 2.0;
        let mut converged = false;
        while !converged {
            converged = true;
            for i in 0..n {
                let mut c = 0.0;
                let mut r = 0.0;
                for j in 0..n {
                    if j != i {
                        c += a[j * n + i].abs();
                        r += a[i * n + j].abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= RADIX * RADIX;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= RADIX * RADIX;
                }
                if (c + r) / f < 0.95 * s {
                    converged = false;
                    let inv = 1.0 / f;
                    a[i * n..(i + 1) * n].iter_mut().for_each(|x| *x *= inv);
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
    }

    pub(super) fn hessenberg(a: &mut [f64], n: usize) {
        if n < 3 {
            return;
        }
        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];
        for k in 0..n - 2 {
            let len = n - k - 1;
            let norm = (k + 1..n).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[(k + 1) * n + k];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            for t in 0..len {
                v[t] = a[(k + 1 + t) * n + k];
            }
            v[0] -= alpha;
            let vnorm2: f64 = v[..len].iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let tau = 2.0 / vnorm2;
            w[k..n].iter_mut().for_each(|x| *x = 0.0);
            for t in 0..len {
                let vt = v[t];
                let row = &a[(k + 1 + t) * n + k..(k + 2 + t) * n];
                for (x, &y) in w[k..n].iter_mut().zip(row) {
                    *x += vt * y;
                }
            }
            for t in 0..len {
                let vt = v[t] * tau;
                let row = &mut a[(k + 1 + t) * n + k..(k + 2 + t) * n];
                for (x, &y) in row.iter_mut().zip(&w[k..n]) {
                    *x -= vt * y;
                }
            }
            for i in 0..n {
                let row = &mut a[i * n..(i + 1) * n];
                let dot: f64 = row[k + 1..n].iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
                let f = dot * tau;
                for (x, y) in row[k + 1..n].iter_mut().zip(&v[..len]) {
                    *x -= f * y;
                }
            }
            a[(k + 1) * n + k] = alpha;
            for i in k + 2..n {
                a[i * n + k] = 0.0;
            }
        }
    }

    fn sign(a: f64, b: f64) -> f64 {
        if b >= 0.0 {
            a.abs()
        } else {
            -a.abs()
        }
    }

    /// Double-shift QR on an upper Hessenberg matrix, eigenvalues only.
    pub(super) fn francis_qr(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
        const MAX_ITS: usize = 60;
        let at = |a: &[f64], i: usize, j: usize| a[i * n + j];
        let mut eig = vec![ZERO; n];
        let mut anorm = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                anorm += a[i * n + j].abs();
            }
        }
        let mut t = 0.0;
        let mut nn = n as isize - 1;
        let mut its = 0;
        while nn >= 0 {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() + s == s {
                    a[l * n + l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nu, nu);
            if l == nu {
                eig[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                its = 0;
                continue;
            }
            let mut y = at(a, nu - 1, nu - 1);
            let mut w = at(a, nu, nu - 1) * at(a, nu - 1, nu);
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    let lo = x + z;
                    let hi = if z != 0.0 { x - w / z } else { lo };
                    eig[nu - 1] = Complex64::new(lo, 0.0);
                    eig[nu] = Complex64::new(hi, 0.0);
                } else {
                    eig[nu - 1] = Complex64::new(x + p, -z);
                    eig[nu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                its = 0;
                continue;
            }
            if its == MAX_ITS {
                return Err(QtError::ConvergenceFailure);
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[i * n + i] -= x;
                }
                let s = at(a, nu, nu - 1).abs() + at(a, nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let (mut p, mut q, mut r);
            let mut m = nu - 2;
            loop {
                let z = at(a, m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - rr - ss;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i * n + i - 2] = 0.0;
                if i != m + 2 {
                    a[i * n + i - 3] = 0.0;
                }
            }
            let mut xs = 0.0;
            for k in m..nu {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = if k != nu - 1 { at(a, k + 2, k - 1) } else { 0.0 };
                    xs = p.abs() + q.abs() + r.abs();
                    if xs != 0.0 {
                        p /= xs;
                        q /= xs;
                        r /= xs;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k * n + k - 1] = -a[k * n + k - 1];
                    }
                } else {
                    a[k * n + k - 1] = -s * xs;
                }
                p += s;
                let (hx, hy, hz) = (p / s, q / s, r / s);
                let (hq, hr) = (q / p, r / p);
                let (r0, rest) = a[k * n..].split_at_mut(n);
                let (r1, rest) = rest.split_at_mut(n);
                let (r0, r1) = (&mut r0[k..=nu], &mut r1[k..=nu]);
                if k != nu - 1 {
                    let r2 = &mut rest[k..=nu];
                    for ((x0, x1), x2) in r0.iter_mut().zip(r1.iter_mut()).zip(r2.iter_mut()) {
                        let pp = *x0 + hq * *x1 + hr * *x2;
                        *x2 -= pp * hz;
                        *x1 -= pp * hy;
                        *x0 -= pp * hx;
                    }
                } else {
                    for (x0, x1) in r0.iter_mut().zip(r1.iter_mut()) {
                        let pp = *x0 + hq * *x1;
                        *x1 -= pp * hy;
                        *x0 -= pp * hx;
                    }
                }
                let mmin = nu.min(k + 3);
                for i in l..=mmin {
                    let row = &mut a[i * n..(i + 1) * n];
                    let mut pp = hx * row[k] + hy * row[k + 1];
                    if k != nu - 1 {
                        pp += hz * row[k + 2];
                        row[k + 2] -= pp * hr;
                    }
                    row[k + 1] -= pp * hq;
                    row[k] -= pp;
                }
            }
        }
        Ok(eig)
    }
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for x in a.row_mut(i) {
                    *x *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for t in 0..len {
            v[t] = a[(k + 1 + t, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // left: rows k+1.., columns k..; w = vᴴ·A
        for x in w[k..n].iter_mut() {
            *x = ZERO;
        }
        for t in 0..len {
            let vc = v[t].conj();
            let row = &a.data[(k + 1 + t) * n..(k + 2 + t) * n];
            for j in k..n {
                w[j] += vc * row[j];
            }
        }
        for t in 0..len {
            let vt = v[t] * tau;
            let row = &mut a.data[(k + 1 + t) * n..(k + 2 + t) * n];
            for j in k..n {
                row[j] -= vt * w[j];
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a.data[i * n..(i + 1) * n];
            let dot: Complex64 = row[k + 1..n].iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
            let f = dot * tau;
            for (x, y) in row[k + 1..n].iter_mut().zip(&v[..len]) {
                *x -= f * y.conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Complex Givens rotation `[c s; -s̄ c]` mapping `(x, y)` to `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y.conj() / ny);
    }
    let nrm = nx.hypot(ny);
    let c = nx / nrm;
    let s = (x / nx) * y.conj() / nrm;
    (c, s)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR iteration on an upper Hessenberg matrix, eigenvalues only.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut eig = vec![ZERO; n];
    if n == 1 {
        eig[0] = h[(0, 0)];
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let max_sweeps = 30 * n;
    let mut sweeps = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;

    loop {
        // locate the active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = hnorm;
            }
            if sub <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            since_deflation = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(QtError::ConvergenceFailure);
        }
        since_deflation += 1;

        let shift = if since_deflation % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else if since_deflation % 17 == 0 {
            h[(hi, hi)] + Complex64::new(0.0, 0.75 * abs1(h[(hi, hi - 1)]))
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let sc = s.conj();
            // rows k, k+1
            let jstart = if k > lo { k - 1 } else { lo };
            {
                let (top, bottom) = h.data.split_at_mut((k + 1) * n);
                let rk = &mut top[k * n + jstart..k * n + hi + 1];
                let rk1 = &mut bottom[jstart..hi + 1];
                for (p, q) in rk.iter_mut().zip(rk1.iter_mut()) {
                    let a = *p;
                    let b = *q;
                    *p = a * c + s * b;
                    *q = b * c - sc * a;
                }
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            // columns k, k+1
            let iend = (k + 2).min(hi);
            for i in lo..=iend {
                let base = i * n;
                let a = h.data[base + k];
                let b = h.data[base + k + 1];
                h.data[base + k] = a * c + b * sc;
                h.data[base + k + 1] = b * c - a * s;
            }
        }
    }
    Ok(eig)
}

/// Monic companion matrix of a polynomial of degree ≥ 1.
pub fn companion(b: &Poly) -> Result<DenseMatrix> {
    let d = b.degree();
    if d == 0 || b.is_zero() {
        return Err(QtError::Domain("companion matrix needs degree ≥ 1".into()));
    }
    let c = b.coeffs();
    let lead = c[d];
    let mut m = DenseMatrix::zeros(d, d);
    for j in 0..d {
        m[(0, j)] = -c[d - 1 - j] / lead;
    }
    for i in 1..d {
        m[(i, i - 1)] = ONE;
    }
    Ok(m)
}

/// All roots of `b` as eigenvalues of its companion matrix.
pub fn roots_companion(b: &Poly) -> Result<Vec<Complex64>> {
    let d = b.degree();
    if d == 0 || b.is_zero() {
        return Err(QtError::Domain("root finding needs degree ≥ 1".into()));
    }
    if d == 1 {
        let c = b.coeffs();
        return Ok(vec![-c[0] / c[1]]);
    }
    eig_dense(&companion(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn lu_identity_returns_rhs() {
        let b = DenseMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let x = lu_solve(&DenseMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn lu_resultant_system() {
        let a = DenseMatrix::from_real_rows(&[&[4.0, -0.5], &[-2.0, 1.0]]);
        let b = DenseMatrix::column_vector(&[c(0.0, 0.0), c(-1.0, 0.0)]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - c(-1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(-4.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lu_zero_matrix_is_singular() {
        let a = DenseMatrix::zeros(2, 2);
        let b = DenseMatrix::column_vector(&[ONE, ONE]);
        assert_eq!(lu_solve(&a, &b), Err(QtError::Singular));
    }

    #[test]
    fn det_of_permutation_and_scaling() {
        let a = DenseMatrix::from_real_rows(&[&[0.0, 2.0], &[3.0, 0.0]]);
        assert!((det(&a).unwrap() - c(-6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qr_rank_examples() {
        let z = qr_rank_revealing(&DenseMatrix::zeros(3, 2), 1e-12);
        assert_eq!(z.rank, 0);

        let i2 = qr_rank_revealing(&DenseMatrix::identity(2), 1e-12);
        assert_eq!(i2.rank, 2);
        assert!((i2.r[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((i2.r[(1, 1)].norm() - 1.0).abs() < 1e-15);

        let outer = DenseMatrix::from_real_rows(&[&[3.0, 4.0], &[6.0, 8.0]]);
        let qr = qr_rank_revealing(&outer, 1e-12);
        assert_eq!(qr.rank, 1);
        let rec = qr.q.matmul(&qr.r);
        let ap = outer.permute_columns(&qr.permutation);
        assert!(rec.sub(&ap).norm_fro() <= 1e-12 * outer.norm_fro());
        let back = qr.q.matmul(&qr.r_unpermuted());
        assert!(back.sub(&outer).norm_fro() <= 1e-12 * outer.norm_fro());
    }

    #[test]
    fn eig_diagonal() {
        let a = DenseMatrix::from_rows(&[vec![c(2.0, 0.0), ZERO], vec![ZERO, c(0.0, 3.0)]]);
        let e = sorted_by_re(eig_dense(&a).unwrap());
        assert!((e[0] - c(0.0, 3.0)).norm() < 1e-14);
        assert!((e[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eig_tridiagonal_toeplitz() {
        let a = DenseMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let e = sorted_by_re(eig_dense(&a).unwrap());
        let s = 2f64.sqrt();
        for (got, want) in e.iter().zip([-s, 0.0, s]) {
            assert!((got - c(want, 0.0)).norm() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn eig_companion_of_z2_minus_1() {
        let p = Poly::new(vec![c(-1.0, 0.0), ZERO, ONE]);
        let e = sorted_by_re(eig_dense(&companion(&p).unwrap()).unwrap());
        assert!((e[0] + ONE).norm() < 1e-14);
        assert!((e[1] - ONE).norm() < 1e-14);
    }

    #[test]
    fn roots_of_quadratic_and_cube() {
        let p = Poly::from_real(&[-2.0, 5.0, -2.0]);
        let r = sorted_by_re(roots_companion(&p).unwrap());
        assert!((r[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(2.0, 0.0)).norm() < 1e-12);

        let cube = Poly::from_real(&[0.0, 0.0, 0.0, 1.0]);
        let r = roots_companion(&cube).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn eig_rejects_rectangular() {
        assert!(eig_dense(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn real_double_shift_matches_complex_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..40 {
            let n = 3 + trial % 23;
            let a = DenseMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), 0.0));
            let fast = eig_dense(&a).unwrap();
            let mut h = a.clone();
            balance(&mut h);
            hessenberg(&mut h);
            let mut slow = hessenberg_qr(&mut h).unwrap();
            assert_eq!(fast.len(), n);
            for z in &fast {
                let (k, d) = slow
                    .iter()
                    .enumerate()
                    .map(|(k, w)| (k, (w - z).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .unwrap();
                assert!(d < 1e-9, "trial {trial}: {z} off by {d:e}");
                slow.swap_remove(k);
                // nonreal eigenvalues of a real matrix come in conjugate pairs
                assert!(fast.iter().any(|w| (w - z.conj()).norm() < 1e-9));
            }
        }
    }
}
