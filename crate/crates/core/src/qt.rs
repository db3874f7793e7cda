//! The operator `A = T(a) + E`, its finite sections and residual evaluation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QtError, Result};
use crate::linalg::DenseMatrix;
use crate::poly::{self, LaurentSymbol};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finitely supported correction `E`, stored as 1-based triplets.
///
/// `k1`/`k2` are the tight row/column support; both are 0 when `E = 0`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Correction {
    k1: usize,
    k2: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl Correction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Zero values are dropped; duplicate positions and 0 indices are rejected.
    pub fn from_triplets(triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, j, v) in triplets {
            if i == 0 || j == 0 {
                return Err(QtError::InvalidInput(format!(
                    "correction indices are 1-based, got ({i}, {j})"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(QtError::InvalidInput(format!("non-finite correction entry at ({i}, {j})")));
            }
            if map.insert((i, j), v).is_some() {
                return Err(QtError::InvalidInput(format!("duplicate correction entry at ({i}, {j})")));
            }
        }
        let entries: Vec<_> = map
            .into_iter()
            .filter(|(_, v)| *v != ZERO)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        let k1 = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let k2 = entries.iter().map(|e| e.1).max().unwrap_or(0);
        Ok(Self { k1, k2, entries })
    }

    /// From a dense `rows × cols` block in row-major order, placed at the top-left corner.
    pub fn from_dense(rows: usize, cols: usize, values: &[Complex64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(QtError::InvalidInput(format!(
                "dense correction has {} values, expected {rows}x{cols}",
                values.len()
            )));
        }
        Self::from_triplets(
            values
                .iter()
                .enumerate()
                .map(|(idx, &v)| (idx / cols + 1, idx % cols + 1, v)),
        )
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dense `k1 × k2` block.
    pub fn dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.k1, self.k2);
        for &(i, j, v) in &self.entries {
            d[(i - 1, j - 1)] = v;
        }
        d
    }
}

/// `A = T(a) + E` with `(T(a))_{ij} = a_{j-i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTMatrix {
    symbol: LaurentSymbol,
    correction: Correction,
}

/// Validates the symbol given as `am = (a₀, a₋₁, …)` and `ap = (a₀, a₁, …)`.
pub fn qt_new(neg: Vec<Complex64>, pos: Vec<Complex64>, correction: Correction) -> Result<QTMatrix> {
    Ok(QTMatrix {
        symbol: LaurentSymbol::new(neg, pos)?,
        correction,
    })
}

impl QTMatrix {
    pub fn new(symbol: LaurentSymbol, correction: Correction) -> Self {
        Self { symbol, correction }
    }

    pub fn symbol(&self) -> &LaurentSymbol {
        &self.symbol
    }

    pub fn correction(&self) -> &Correction {
        &self.correction
    }

    pub fn m(&self) -> usize {
        self.symbol.m()
    }

    pub fn n(&self) -> usize {
        self.symbol.n()
    }

    /// Entry `(i, j)` of `T(a)`, 1-based.
    fn toeplitz(&self, i: usize, j: usize) -> Complex64 {
        self.symbol.coeff(j as isize - i as isize)
    }

    /// Smallest admissible finite-section size.
    pub fn min_section(&self) -> usize {
        self.m()
            .max(self.n())
            .max(self.correction.k1())
            .max(self.correction.k2())
    }

    /// `N × N` leading principal submatrix.
    pub fn finite_section(&self, size: usize) -> Result<DenseMatrix> {
        let min = self.min_section();
        if size < min || size == 0 {
            return Err(QtError::SectionTooSmall { size, min: min.max(1) });
        }
        let (m, n) = (self.m(), self.n());
        let mut a = DenseMatrix::zeros(size, size);
        for i in 0..size {
            let lo = i.saturating_sub(m);
            let hi = (i + n).min(size - 1);
            for j in lo..=hi {
                a[(i, j)] = self.toeplitz(i + 1, j + 1);
            }
        }
        for &(i, j, v) in self.correction.entries() {
            a[(i - 1, j - 1)] += v;
        }
        Ok(a)
    }

    /// First `out_len` entries of `A·v`, where `v` is a prefix of an ℓ² vector.
    pub fn apply_prefix(&self, v: &[Complex64], out_len: usize) -> Result<Vec<Complex64>> {
        let needed = out_len + self.n();
        if v.len() < needed {
            return Err(QtError::PrefixTooShort { len: v.len(), needed });
        }
        let (m, n) = (self.m(), self.n());
        let mut out = vec![ZERO; out_len];
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(m);
            *o = (lo..=i + n).map(|j| self.toeplitz(i + 1, j + 1) * v[j]).sum();
        }
        for &(i, j, e) in self.correction.entries() {
            if i <= out_len && j <= v.len() {
                out[i - 1] += e * v[j - 1];
            }
        }
        Ok(out)
    }

    /// Operator ∞-norm: the larger of the corrected row sums and `Σ |a_i|`.
    pub fn norm_inf(&self) -> f64 {
        let generic = self.symbol.norm1();
        let k1 = self.correction.k1();
        if k1 == 0 {
            return generic;
        }
        let width = self.correction.k2().max(k1 + self.n());
        let mut rows = DenseMatrix::zeros(k1, width);
        for i in 0..k1 {
            let lo = i.saturating_sub(self.m());
            for j in lo..=(i + self.n()) {
                rows[(i, j)] = self.toeplitz(i + 1, j + 1);
            }
        }
        for &(i, j, v) in self.correction.entries() {
            rows[(i - 1, j - 1)] += v;
        }
        rows.norm_inf().max(generic)
    }

    /// `a(e^{2πik/N})`, `k = 0..N`.
    pub fn symbol_curve(&self, nsamples: usize) -> Result<Vec<Complex64>> {
        if nsamples < 8 {
            return Err(QtError::InvalidInput(format!(
                "symbol curve needs at least 8 samples, got {nsamples}"
            )));
        }
        Ok(self.symbol_samples(nsamples))
    }

    fn symbol_samples(&self, nsamples: usize) -> Vec<Complex64> {
        (0..nsamples)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nsamples as f64);
                poly::eval(&self.symbol, z).expect("unit-circle point is nonzero")
            })
            .collect()
    }
}

/// Classification of one Newton run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EigStatus {
    /// Converged with `p = q`.
    IsolatedPQ,
    /// Converged with `p < q` and `W·V` rank deficient.
    IsolatedPltQ,
    /// `p > q`: every point of the component is an eigenvalue.
    ContinuousSet,
    /// The iterate left the winding-number component of the start.
    OutOfComponent,
    /// `p < q` and the limit does not solve the full system.
    NoConvergencePltQ,
    MaxIterations,
    /// `|λ|` exceeded `‖A‖∞`.
    Diverged,
    OnCurve,
}

impl EigStatus {
    pub fn is_isolated(self) -> bool {
        matches!(self, EigStatus::IsolatedPQ | EigStatus::IsolatedPltQ)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EigStatus::IsolatedPQ => "isolated_pq",
            EigStatus::IsolatedPltQ => "isolated_pltq",
            EigStatus::ContinuousSet => "continuous_set",
            EigStatus::OutOfComponent => "out_of_component",
            EigStatus::NoConvergencePltQ => "no_convergence_pltq",
            EigStatus::MaxIterations => "max_iterations",
            EigStatus::Diverged => "diverged",
            EigStatus::OnCurve => "on_curve",
        }
    }
}

/// Result of one Newton run.
#[derive(Clone, Debug, PartialEq)]
pub struct EigRecord {
    pub lambda: Complex64,
    /// Coefficients of the eigenvector in the basis; empty unless isolated.
    pub beta: Vec<Complex64>,
    /// Leading components of the eigenvector; empty unless isolated.
    pub vec_prefix: Vec<Complex64>,
    /// `|v_L|` for the last reported component, a proxy for the truncated tail.
    pub tail: f64,
    pub residual: f64,
    pub iterations: usize,
    pub status: EigStatus,
}

impl EigRecord {
    pub(crate) fn failed(lambda: Complex64, iterations: usize, status: EigStatus) -> Self {
        Self {
            lambda,
            beta: Vec::new(),
            vec_prefix: Vec::new(),
            tail: 0.0,
            residual: f64::INFINITY,
            iterations,
            status,
        }
    }
}
