//! Laurent symbols, ordinary polynomials, Graeffe root counting and winding numbers.

use num_complex::Complex64;

use crate::error::{QtError, Result};
use crate::linalg::roots_companion;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default cap on Graeffe squarings before falling back to explicit roots.
pub const GRAEFFE_MAXIT: usize = 30;

/// Roots whose modulus is within this distance of 1 are treated as lying on 𝕋.
pub const TOL_CIRCLE: f64 = 1e-8;

/// Laurent polynomial `a(z) = Σ_{i=-m}^{n} a_i z^i` with `a_{-m} ≠ 0`, `a_n ≠ 0`.
///
/// Stored as the two coefficient lists `neg = (a₀, a₋₁, …, a₋ₘ)` and
/// `pos = (a₀, a₁, …, aₙ)`, which both carry `a₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSymbol {
    neg: Vec<Complex64>,
    pos: Vec<Complex64>,
}

impl LaurentSymbol {
    pub fn new(neg: Vec<Complex64>, pos: Vec<Complex64>) -> Result<Self> {
        if neg.len() < 2 {
            return Err(QtError::InvalidSymbol("need m ≥ 1 (am has fewer than 2 entries)".into()));
        }
        if pos.len() < 2 {
            return Err(QtError::InvalidSymbol("need n ≥ 1 (ap has fewer than 2 entries)".into()));
        }
        if neg[0] != pos[0] {
            return Err(QtError::InconsistentConstant);
        }
        if *neg.last().unwrap() == ZERO {
            return Err(QtError::InvalidSymbol(format!("a_-{} is zero", neg.len() - 1)));
        }
        if *pos.last().unwrap() == ZERO {
            return Err(QtError::InvalidSymbol(format!("a_{} is zero", pos.len() - 1)));
        }
        if neg.iter().chain(&pos).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QtError::InvalidSymbol("non-finite coefficient".into()));
        }
        Ok(Self { neg, pos })
    }

    pub fn from_real(neg: &[f64], pos: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(c(neg), c(pos))
    }

    pub fn m(&self) -> usize {
        self.neg.len() - 1
    }

    pub fn n(&self) -> usize {
        self.pos.len() - 1
    }

    pub fn neg(&self) -> &[Complex64] {
        &self.neg
    }

    pub fn pos(&self) -> &[Complex64] {
        &self.pos
    }

    /// `a_k`, zero outside `[-m, n]`.
    pub fn coeff(&self, k: isize) -> Complex64 {
        if k >= 0 {
            self.pos.get(k as usize).copied().unwrap_or(ZERO)
        } else {
            self.neg.get((-k) as usize).copied().unwrap_or(ZERO)
        }
    }

    /// `Σ |a_i|`.
    pub fn norm1(&self) -> f64 {
        self.pos.iter().map(|z| z.norm()).sum::<f64>() + self.neg[1..].iter().map(|z| z.norm()).sum::<f64>()
    }

    pub fn is_real(&self) -> bool {
        self.neg.iter().chain(&self.pos).all(|z| z.im == 0.0)
    }

    pub fn as_laurent(&self) -> Laurent {
        let m = self.m() as isize;
        let coeffs = (-m..=self.n() as isize).map(|k| self.coeff(k)).collect();
        Laurent { low: -m, coeffs }
    }
}

/// A general Laurent polynomial `Σ coeffs[i] z^{low+i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub low: isize,
    pub coeffs: Vec<Complex64>,
}

impl Laurent {
    pub fn coeff(&self, k: isize) -> Complex64 {
        let idx = k - self.low;
        if idx < 0 {
            return ZERO;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z == ZERO && self.low < 0 {
            return Err(QtError::Domain("Laurent polynomial evaluated at z = 0".into()));
        }
        // Horner on the ordinary part, then scale by z^low
        let acc = self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        Ok(acc * z.powi(self.low as i32))
    }
}

/// Evaluates `a(z)` for `z ≠ 0`.
pub fn eval(sym: &LaurentSymbol, z: Complex64) -> Result<Complex64> {
    if z == ZERO {
        return Err(QtError::Domain("symbol evaluated at z = 0".into()));
    }
    sym.as_laurent().eval(z)
}

/// `a'(z) = Σ j a_j z^{j-1}`.
pub fn deriv(sym: &LaurentSymbol) -> Laurent {
    let m = sym.m() as isize;
    let coeffs = (-m..=sym.n() as isize)
        .map(|j| sym.coeff(j) * j as f64)
        .collect();
    Laurent { low: -m - 1, coeffs }
}

/// Ordinary polynomial with ascending coefficients. The zero polynomial is `[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(c: &[f64]) -> Self {
        Self::new(c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn one() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0)])
    }

    /// `∏ (z - r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            convolve(&acc, &Self::new(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or(ZERO);
        Poly::new((0..len).map(|i| get(self, i) - get(other, i)).collect())
    }

    /// Quotient and remainder of Euclidean division by `d`, leading terms first.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        if d.is_zero() {
            return Err(QtError::Domain("division by the zero polynomial".into()));
        }
        let dd = d.degree();
        if self.degree() < dd {
            return Ok((Poly::new(vec![ZERO]), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let lead = d.leading();
        let qlen = self.degree() - dd + 1;
        let mut quot = vec![ZERO; qlen];
        for k in (0..qlen).rev() {
            let t = rem[k + dd] / lead;
            quot[k] = t;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= t * dc;
            }
        }
        rem.truncate(dd.max(1));
        Ok((Poly::new(quot), Poly::new(rem)))
    }
}

/// Coefficient convolution (polynomial product).
pub fn convolve(p: &Poly, q: &Poly) -> Poly {
    let mut out = vec![ZERO; p.coeffs.len() + q.coeffs.len() - 1];
    for (i, &a) in p.coeffs.iter().enumerate() {
        for (j, &b) in q.coeffs.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Poly::new(out)
}

/// `b(z) = z^m (a(z) - λ)`, degree `m + n`.
pub fn char_poly(sym: &LaurentSymbol, lambda: Complex64) -> Poly {
    let m = sym.m() as isize;
    let mut c: Vec<Complex64> = (-m..=sym.n() as isize).map(|k| sym.coeff(k)).collect();
    c[sym.m()] -= lambda;
    Poly::new(c)
}

/// One normalised Graeffe step on a raw coefficient vector.
///
/// Returns `c / c_h` where `c(z²) = b(z)·b(-z)` and `h` is the smallest
/// index attaining `max |c_i|`, together with `h`. The length is preserved.
fn graeffe_raw(b: &[Complex64]) -> (Vec<Complex64>, usize) {
    let d = b.len() - 1;
    // b(z) = e(z²) + z·o(z²)  ⇒  b(z)b(-z) = e(y)² - y·o(y)² with y = z²
    let even: Vec<Complex64> = b.iter().step_by(2).copied().collect();
    let odd: Vec<Complex64> = b.iter().skip(1).step_by(2).copied().collect();
    let mut c = vec![ZERO; d + 1];
    for (i, &x) in even.iter().enumerate() {
        for (j, &y) in even.iter().enumerate() {
            if i + j <= d {
                c[i + j] += x * y;
            }
        }
    }
    for (i, &x) in odd.iter().enumerate() {
        for (j, &y) in odd.iter().enumerate() {
            if i + j < d {
                c[i + j + 1] -= x * y;
            }
        }
    }
    let max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let h = c.iter().position(|z| z.norm() == max).unwrap_or(0);
    let ch = c[h];
    if ch != ZERO {
        for x in c.iter_mut() {
            *x /= ch;
        }
    }
    (c, h)
}

/// One Graeffe root-squaring step, normalised by its largest coefficient.
pub fn graeffe_step(b: &Poly) -> Result<Poly> {
    if b.is_zero() {
        return Err(QtError::Domain("Graeffe step of the zero polynomial".into()));
    }
    Ok(Poly::new(graeffe_raw(b.coeffs()).0))
}

/// Outcome of [`count_inside`].
#[derive(Clone, Debug, PartialEq)]
pub struct RootCount {
    /// Number of roots strictly inside the unit disk; `None` when the
    /// fallback root finder itself failed.
    pub count: Option<usize>,
    pub iterations_used: usize,
    pub fallback_used: bool,
    /// Fallback only: number of roots with `||r| - 1| ≤ TOL_CIRCLE`.
    pub on_circle: usize,
    /// Fallback only: modulus of the root closest to the unit circle.
    pub closest_modulus: Option<f64>,
}

/// Counts the roots of `b` inside the unit disk by Graeffe iteration, falling
/// back to companion-matrix root finding after `maxit` squarings.
pub fn count_inside(b: &Poly, maxit: usize) -> Result<RootCount> {
    if b.is_zero() {
        return Err(QtError::Domain("root count of the zero polynomial".into()));
    }
    if maxit == 0 {
        return Err(QtError::InvalidInput("Graeffe maxit must be ≥ 1".into()));
    }
    let mut cur = b.coeffs().to_vec();
    for it in 1..=maxit {
        let (next, h) = graeffe_raw(&cur);
        let norm1: f64 = next.iter().map(|z| z.norm()).sum();
        if norm1 < 2.0 {
            return Ok(RootCount {
                count: Some(h),
                iterations_used: it,
                fallback_used: false,
                on_circle: 0,
                closest_modulus: None,
            });
        }
        cur = next;
    }
    // The last iterate has squared roots with a degraded dynamic range, so the
    // classification uses the roots of the input instead.
    let roots = match roots_companion(b) {
        Ok(r) => r,
        Err(QtError::ConvergenceFailure) => {
            return Ok(RootCount {
                count: None,
                iterations_used: maxit,
                fallback_used: true,
                on_circle: 0,
                closest_modulus: None,
            })
        }
        Err(e) => return Err(e),
    };
    let count = roots.iter().filter(|r| r.norm() < 1.0 - TOL_CIRCLE).count();
    let on_circle = roots.iter().filter(|r| (r.norm() - 1.0).abs() <= TOL_CIRCLE).count();
    let closest = roots
        .iter()
        .map(|r| r.norm())
        .min_by(|a, b| (a - 1.0).abs().partial_cmp(&(b - 1.0).abs()).unwrap());
    Ok(RootCount {
        count: Some(count),
        iterations_used: maxit,
        fallback_used: true,
        on_circle,
        closest_modulus: closest,
    })
}

/// `wind(a - λ) = p - m`, where `p` counts the roots of `z^m (a(z) - λ)` inside 𝕋.
pub fn winding(sym: &LaurentSymbol, lambda: Complex64) -> Result<i64> {
    let b = char_poly(sym, lambda);
    let rc = count_inside(&b, GRAEFFE_MAXIT)?;
    if rc.on_circle > 0 {
        return Err(QtError::OnCurve {
            modulus: rc.closest_modulus.unwrap_or(1.0),
        });
    }
    let p = rc.count.ok_or(QtError::ConvergenceFailure)?;
    Ok(p as i64 - sym.m() as i64)
}
