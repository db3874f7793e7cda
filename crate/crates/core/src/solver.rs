//! Newton's iteration on `det Φ(λ)` with classification, the all-eigenvalue
//! driver seeded by a finite section, and raster maps over the λ-plane.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{QtError, Result};
use crate::factor::{wiener_hopf_with_p, FactorMethod};
use crate::linalg::{eig_dense, qr_rank_revealing};
use crate::nep::{
    basis_frobenius, basis_vandermonde_with_p, build_w, eigvec_prefix, newton_correction, phi, BasisKind,
    BasisPair, NEPContext,
};
use crate::poly;
use crate::qt::{EigRecord, EigStatus, QTMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sentinel for raster cells whose centre lies on `a(𝕋)`.
pub const WINDING_ON_CURVE: i64 = -128;
/// Basin label for runs that did not reach an isolated eigenvalue.
pub const LABEL_NONCONV: i64 = 0;
/// Basin label for points of a component made entirely of eigenvalues.
pub const LABEL_CONTINUOUS: i64 = -1;

const RANK_TOL: f64 = 1e-8;
/// Ill-conditioned eigenvalues leave Newton bouncing at a noise floor above
/// `tol_step`; a step that stops shrinking below this is stagnation too.
/// The residual test still decides acceptance.
const STAGNATION: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// A step that stops shrinking counts as stagnated when below
    /// `max(tol_step, 1e-8) · max(1, |λ|)`.
    pub tol_step: f64,
    pub maxit: usize,
    pub method: BasisKind,
    pub factor_method: FactorMethod,
    /// Finite-section size factor used by [`eig_all`].
    pub gamma: f64,
    pub residual_tol: f64,
    pub dedupe_tol: f64,
    /// Number of eigenvector components kept in each record.
    pub vec_len: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_step: 1e3 * f64::EPSILON / 2.0,
            maxit: 20,
            method: BasisKind::Frobenius,
            factor_method: FactorMethod::Roots,
            gamma: 3.0,
            residual_tol: 1e-10,
            dedupe_tol: 1e-8,
            vec_len: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !(positive(self.tol_step) && positive(self.residual_tol) && positive(self.dedupe_tol)) {
            return Err(QtError::InvalidInput("tolerances must be positive and finite".into()));
        }
        if self.maxit == 0 {
            return Err(QtError::InvalidInput("maxit must be ≥ 1".into()));
        }
        if !positive(self.gamma) {
            return Err(QtError::InvalidInput("gamma must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolveReport {
    /// Distinct isolated eigenvalues, sorted by real then imaginary part.
    pub records: Vec<EigRecord>,
    pub section_size: usize,
    pub raw_starts: usize,
    pub converged: usize,
    /// Some start fell in a component where every point is an eigenvalue.
    pub continuous_detected: bool,
}

/// Per-operator data shared by all Newton runs.
struct Prepared<'a> {
    a: &'a QTMatrix,
    ctx: NEPContext,
    norm: f64,
    /// Rows of `(A - λI)v` that can be nonzero for `v` in the basis span.
    q_res: usize,
    /// Entries of `v` read by those rows.
    q_cols: usize,
}

impl<'a> Prepared<'a> {
    fn new(a: &'a QTMatrix) -> Self {
        let ctx = build_w(a);
        let q_res = a.m().max(a.correction().k1());
        let q_cols = (q_res + a.n()).max(a.correction().k2());
        Self {
            a,
            norm: a.norm_inf(),
            q_res,
            q_cols,
            ctx,
        }
    }

    fn basis(&self, lambda: Complex64, p: usize, cfg: &SolverConfig) -> Result<BasisPair> {
        let sym = self.a.symbol();
        let k = self.ctx.width();
        let frob = || basis_frobenius(&wiener_hopf_with_p(sym, lambda, p, cfg.factor_method)?, k);
        match cfg.method {
            BasisKind::Frobenius => frob(),
            BasisKind::Vandermonde => match basis_vandermonde_with_p(sym, lambda, p, k) {
                Err(QtError::ClusteredRoots) => frob(),
                r => r,
            },
        }
    }

    /// `None` when the point is not accepted and Newton should continue.
    fn finalize(
        &self,
        lambda: Complex64,
        p: usize,
        iterations: usize,
        cfg: &SolverConfig,
    ) -> Result<Option<EigRecord>> {
        let basis = self.basis(lambda, p, cfg)?;
        let (f, _) = phi(&self.ctx, &basis, p)?;
        let qr = qr_rank_revealing(&f.conj_transpose(), 0.0);
        let mut beta = qr.q.column(p - 1);

        if p < self.ctx.q {
            let (full, _) = phi(&self.ctx, &basis, self.ctx.q)?;
            if qr_rank_revealing(&full, RANK_TOL).rank >= p {
                return Ok(Some(EigRecord::failed(lambda, iterations, EigStatus::NoConvergencePltQ)));
            }
        }

        let m = self.ctx.m;
        let len = cfg.vec_len.max(self.q_cols);
        // the m leading entries are the virtual part acted on by -B in W
        let mut ext = eigvec_prefix(&basis, &beta, m + len, 0)?;
        if let Some(big) = ext[m..].iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())) {
            if big != ZERO {
                let phase = big.conj() / big.norm();
                ext.iter_mut().for_each(|x| *x *= phase);
                beta.iter_mut().for_each(|x| *x *= phase);
            }
        }
        let scale = ext[..m + self.q_cols].iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
        let mut v = ext.split_off(m);
        let residual = residual_of(self.a, lambda, &v, self.q_res, scale)?;
        if !(residual <= cfg.residual_tol) {
            return Ok(None);
        }
        v.truncate(cfg.vec_len);
        let tail = v.last().map_or(0.0, |x| x.norm());
        let status = if p == self.ctx.q {
            EigStatus::IsolatedPQ
        } else {
            EigStatus::IsolatedPltQ
        };
        Ok(Some(EigRecord {
            lambda,
            beta,
            vec_prefix: v,
            tail,
            residual,
            iterations,
            status,
        }))
    }

    fn run(&self, lambda0: Complex64, cfg: &SolverConfig, trace: &mut Vec<Complex64>) -> EigRecord {
        match self.run_inner(lambda0, cfg, trace) {
            Ok(r) => r,
            Err(QtError::OnCurve { .. }) => {
                EigRecord::failed(*trace.last().unwrap_or(&lambda0), trace.len().saturating_sub(1), EigStatus::OnCurve)
            }
            Err(_) => EigRecord::failed(
                *trace.last().unwrap_or(&lambda0),
                trace.len().saturating_sub(1),
                EigStatus::MaxIterations,
            ),
        }
    }

    fn run_inner(&self, lambda0: Complex64, cfg: &SolverConfig, trace: &mut Vec<Complex64>) -> Result<EigRecord> {
        let sym = self.a.symbol();
        let m = self.a.m() as i64;
        let w0 = poly::winding(sym, lambda0)?;
        let mut lambda = lambda0;
        trace.push(lambda);
        let mut prev_step = f64::INFINITY;
        let mut refining = false;
        let mut retried = false;
        let mut iterations = 0;

        while iterations < cfg.maxit {
            let w = poly::winding(sym, lambda)?;
            if w != w0 {
                return Ok(EigRecord::failed(lambda, iterations, EigStatus::OutOfComponent));
            }
            let p = (m + w) as usize;
            if p > self.ctx.q {
                return Ok(EigRecord::failed(lambda, iterations, EigStatus::ContinuousSet));
            }
            if p == 0 {
                // no ℓ² solutions of the difference equation at all
                return Ok(EigRecord::failed(lambda, iterations, EigStatus::NoConvergencePltQ));
            }
            if lambda.norm() > self.norm {
                return Ok(EigRecord::failed(lambda, iterations, EigStatus::Diverged));
            }

            let basis = self.basis(lambda, p, cfg)?;
            let (f, fp) = phi(&self.ctx, &basis, p)?;
            let corr = match newton_correction(&f, &fp) {
                Ok(c) => c,
                Err(QtError::DerivativeVanishes) if !retried => {
                    retried = true;
                    lambda = lambda * (1.0 + 1e-8) + Complex64::new(0.0, 1e-8);
                    trace.push(lambda);
                    refining = false;
                    prev_step = f64::INFINITY;
                    continue;
                }
                Err(e) => return Err(e),
            };
            lambda -= corr;
            iterations += 1;
            trace.push(lambda);
            let step = corr.norm();

            if refining {
                if let Some(rec) = self.finalize(lambda, p, iterations, cfg)? {
                    return Ok(rec);
                }
                refining = false;
            } else if step >= prev_step && step < STAGNATION.max(cfg.tol_step) * lambda.norm().max(1.0) {
                refining = true;
            }
            prev_step = step;
        }
        Ok(EigRecord::failed(lambda, iterations, EigStatus::MaxIterations))
    }
}

/// `‖((A - λI)v)_{1..q}‖₂ / scale`.
///
/// `scale` is the norm of the basis combination including its virtual
/// leading entries. When those dominate, `v` itself comes out of a
/// cancellation and `‖v‖` is the wrong yardstick for rounding error.
fn residual_of(a: &QTMatrix, lambda: Complex64, v: &[Complex64], q: usize, scale: f64) -> Result<f64> {
    let av = a.apply_prefix(v, q)?;
    let num: f64 = av.iter().zip(v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum();
    Ok(num.sqrt() / scale)
}

/// Newton's iteration from `lambda0`, classifying the limit or the reason it stopped.
pub fn eig_single(a: &QTMatrix, lambda0: Complex64, cfg: &SolverConfig) -> EigRecord {
    eig_single_traced(a, lambda0, cfg).0
}

/// Like [`eig_single`], also returning every iterate starting with `lambda0`.
pub fn eig_single_traced(a: &QTMatrix, lambda0: Complex64, cfg: &SolverConfig) -> (EigRecord, Vec<Complex64>) {
    let mut trace = Vec::new();
    if !(lambda0.re.is_finite() && lambda0.im.is_finite()) {
        return (EigRecord::failed(lambda0, 0, EigStatus::Diverged), trace);
    }
    let rec = Prepared::new(a).run(lambda0, cfg, &mut trace);
    (rec, trace)
}

/// `N = ⌈γ · max(k1, k2, m + n)⌉`, never below the smallest valid section.
pub fn section_size(a: &QTMatrix, gamma: f64) -> usize {
    let e = a.correction();
    let base = e.k1().max(e.k2()).max(a.m() + a.n());
    ((gamma * base as f64).ceil() as usize).max(a.min_section())
}

/// Keeps the smallest-residual representative of each cluster, then sorts by (re, im).
fn dedupe(mut recs: Vec<EigRecord>, tol: f64) -> Vec<EigRecord> {
    recs.sort_by(|x, y| x.residual.total_cmp(&y.residual));
    let mut kept: Vec<EigRecord> = Vec::new();
    for r in recs {
        let near = kept
            .iter()
            .any(|k| (k.lambda - r.lambda).norm() <= tol * r.lambda.norm().max(1.0));
        if !near {
            kept.push(r);
        }
    }
    kept.sort_by(|x, y| cmp_complex(x.lambda, y.lambda));
    kept
}

fn cmp_complex(x: Complex64, y: Complex64) -> std::cmp::Ordering {
    x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
}

/// Isolated eigenvalues reachable from the eigenvalues of a finite section.
pub fn eig_all(a: &QTMatrix, cfg: &SolverConfig) -> Result<EigenSolveReport> {
    cfg.validate()?;
    let n = section_size(a, cfg.gamma);
    let starts = eig_dense(&a.finite_section(n)?)?;
    let prep = Prepared::new(a);
    let limit = 1.1 * prep.norm;
    let runs: Vec<EigRecord> = starts
        .par_iter()
        .filter(|z| z.norm() <= limit)
        .map(|&z| prep.run(z, cfg, &mut Vec::new()))
        .collect();
    let continuous_detected = runs.iter().any(|r| r.status == EigStatus::ContinuousSet);
    let isolated: Vec<EigRecord> = runs.into_iter().filter(|r| r.status.is_isolated()).collect();
    let records = dedupe(isolated, cfg.dedupe_tol);
    Ok(EigenSolveReport {
        converged: records.len(),
        records,
        section_size: n,
        raw_starts: starts.len(),
        continuous_detected,
    })
}

/// Rectangular sampling window in the λ-plane; values are taken at cell centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Raster {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Raster {
    pub fn new(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
        if !ok(re) || !ok(im) {
            return Err(QtError::InvalidInput("box must satisfy re0 < re1 and im0 < im1".into()));
        }
        if nx < 2 || ny < 2 {
            return Err(QtError::InvalidInput("resolution must be at least 2 per axis".into()));
        }
        Ok(Self { re, im, nx, ny })
    }

    /// Centre of cell `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        let x = self.re.0 + (ix as f64 + 0.5) * (self.re.1 - self.re.0) / self.nx as f64;
        let y = self.im.0 + (iy as f64 + 0.5) * (self.im.1 - self.im.0) / self.ny as f64;
        Complex64::new(x, y)
    }

    /// All cell centres, `iy` major.
    pub fn points(&self) -> Vec<Complex64> {
        (0..self.ny)
            .flat_map(|iy| (0..self.nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| self.point(ix, iy))
            .collect()
    }
}

/// Values over a [`Raster`], stored `iy` major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub raster: Raster,
    pub values: Vec<i64>,
}

impl Grid {
    pub fn get(&self, ix: usize, iy: usize) -> i64 {
        self.values[iy * self.raster.nx + ix]
    }
}

/// `wind(a - λ)` at every cell centre; [`WINDING_ON_CURVE`] where that fails.
pub fn winding_map(a: &QTMatrix, raster: &Raster) -> Grid {
    let sym = a.symbol();
    let values = raster
        .points()
        .par_iter()
        .map(|&z| poly::winding(sym, z).unwrap_or(WINDING_ON_CURVE))
        .collect();
    Grid {
        raster: *raster,
        values,
    }
}

/// Newton basins: label `k ≥ 1` is the limit `eigenvalues[k-1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasinMap {
    pub grid: Grid,
    pub eigenvalues: Vec<Complex64>,
}

pub fn basins(a: &QTMatrix, raster: &Raster, cfg: &SolverConfig) -> Result<BasinMap> {
    cfg.validate()?;
    let prep = Prepared::new(a);
    let runs: Vec<EigRecord> = raster
        .points()
        .par_iter()
        .map(|&z| prep.run(z, cfg, &mut Vec::new()))
        .collect();

    let limits = dedupe(runs.iter().filter(|r| r.status.is_isolated()).cloned().collect(), cfg.dedupe_tol);
    let eigenvalues: Vec<Complex64> = limits.iter().map(|r| r.lambda).collect();
    let values = runs
        .iter()
        .map(|r| match r.status {
            s if s.is_isolated() => eigenvalues
                .iter()
                .position(|e| (e - r.lambda).norm() <= cfg.dedupe_tol * e.norm().max(1.0))
                .map_or(LABEL_NONCONV, |k| k as i64 + 1),
            EigStatus::ContinuousSet => LABEL_CONTINUOUS,
            _ => LABEL_NONCONV,
        })
        .collect();
    Ok(BasinMap {
        grid: Grid {
            raster: *raster,
            values,
        },
        eigenvalues,
    })
}

/// Finite-section eigenvalues, exposed for diagnostics.
pub fn section_eigenvalues(a: &QTMatrix, size: usize) -> Result<Vec<Complex64>> {
    eig_dense(&a.finite_section(size)?)
}

/// Smallest distance from `lambda` to the spectrum of `A_N`.
pub fn section_distance(a: &QTMatrix, size: usize, lambda: Complex64) -> Result<f64> {
    let ev = section_eigenvalues(a, size)?;
    Ok(ev.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min))
}
