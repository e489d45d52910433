//! The three space scales: Hardy `H^p`, weighted sequence spaces `l^p_a(α)`
//! and radial-weight Bergman spaces `L^p_a(β)`.
//!
//! Hilbert members (p = 2) are described by their reproducing-kernel
//! diagonal κ_k: `‖f‖² = Σ |f̂(k)|² / κ_k` and `k_λ(z) = Σ κ_k λ̄^k z^k`.
//!
//! The Bergman measure is `(1 - |z|²)^β dx dy` with no `1/π` factor; multiply
//! squared norms by [`NORMALIZED_AREA_FACTOR`] to get normalized-area values.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discfun::{check_in_disc, eval_on_circle, falling_factorial, CoeffSeries, SigmaSet, C64, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, solve_hermitian_pd, CMatrix};

/// `dA = NORMALIZED_AREA_FACTOR · dx dy` is the normalized area measure.
pub const NORMALIZED_AREA_FACTOR: f64 = 1.0 / PI;

const SERIES_TOL: f64 = 1e-14;
const MAX_SERIES_TERMS: usize = 50_000_000;
const SUP_GRID: usize = 4096;
const SUP_REFINED_BRACKETS: usize = 8;
const ILL_CONDITIONED: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpaceSpec {
    Hardy { p: f64 },
    SeqWeighted { p: f64, alpha: f64 },
    BergmanRadial { p: f64, beta: f64 },
}

impl SpaceSpec {
    pub fn hardy2() -> Self {
        SpaceSpec::Hardy { p: 2.0 }
    }

    pub fn p(&self) -> f64 {
        match *self {
            SpaceSpec::Hardy { p } | SpaceSpec::SeqWeighted { p, .. } | SpaceSpec::BergmanRadial { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p.is_nan() || p < 1.0 {
            return Err(Error::UnsupportedSpace(format!("p = {p} must lie in [1, ∞]")));
        }
        match *self {
            SpaceSpec::Hardy { .. } => Ok(()),
            SpaceSpec::SeqWeighted { alpha, .. } if !(alpha >= 1.0 && alpha.is_finite()) => {
                Err(Error::UnsupportedSpace(format!("alpha = {alpha} must be ≥ 1")))
            }
            SpaceSpec::SeqWeighted { .. } => Ok(()),
            SpaceSpec::BergmanRadial { beta, .. } if !(beta > -1.0 && beta.is_finite()) => {
                Err(Error::UnsupportedSpace(format!("beta = {beta} must be > -1")))
            }
            SpaceSpec::BergmanRadial { p, .. } if p.is_infinite() => {
                Err(Error::UnsupportedSpace("Bergman spaces need finite p".into()))
            }
            SpaceSpec::BergmanRadial { .. } => Ok(()),
        }
    }

    pub fn is_hilbert(&self) -> bool {
        self.p() == 2.0
    }

    pub(crate) fn require_hilbert(&self) -> Result<()> {
        self.validate()?;
        if self.is_hilbert() {
            Ok(())
        } else {
            Err(Error::NotHilbert(self.p()))
        }
    }

    /// Lazily generated kernel diagonal κ_0, κ_1, ...
    pub(crate) fn kappa(&self) -> Result<KappaSeq> {
        self.require_hilbert()?;
        Ok(KappaSeq {
            space: *self,
            k: 0,
            last: 0.0,
        })
    }

    pub fn short_name(&self) -> String {
        match *self {
            SpaceSpec::Hardy { p } => format!("hardy(p={p})"),
            SpaceSpec::SeqWeighted { p, alpha } => format!("seq(p={p},alpha={alpha})"),
            SpaceSpec::BergmanRadial { p, beta } => format!("bergman(p={p},beta={beta})"),
        }
    }
}

/// Moments `w_k = ∫_𝔻 |z|^{2k} (1 - |z|²)^β dx dy = π B(k + 1, β + 1)`.
fn bergman_moment_first(beta: f64) -> f64 {
    PI / (beta + 1.0)
}

#[derive(Debug, Clone)]
pub(crate) struct KappaSeq {
    space: SpaceSpec,
    k: usize,
    last: f64,
}

impl Iterator for KappaSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let k = self.k;
        let value = match self.space {
            SpaceSpec::Hardy { .. } => 1.0,
            SpaceSpec::SeqWeighted { alpha, .. } => ((k + 1) as f64).powf(2.0 * (alpha - 1.0)),
            SpaceSpec::BergmanRadial { beta, .. } => {
                if k == 0 {
                    1.0 / bergman_moment_first(beta)
                } else {
                    self.last * (k as f64 + beta + 1.0) / k as f64
                }
            }
        };
        self.k += 1;
        self.last = value;
        Some(value)
    }
}

/// Reproducing-kernel diagonal κ_k of a Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagonal {
    pub kappa: Vec<f64>,
}

pub fn kernel_diagonal(space: &SpaceSpec, len: usize) -> Result<KernelDiagonal> {
    Ok(KernelDiagonal {
        kappa: space.kappa()?.take(len).collect(),
    })
}

/// Norm of `f` in `space`.
pub fn norm(space: &SpaceSpec, f: &CoeffSeries) -> Result<f64> {
    space.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    match *space {
        SpaceSpec::Hardy { p: 2.0 } => Ok(f.h2_norm_sq().sqrt()),
        SpaceSpec::Hardy { p } if p.is_infinite() => Ok(sup_norm(f)),
        SpaceSpec::Hardy { p } => Ok(hardy_quadrature_norm(f, p)),
        SpaceSpec::SeqWeighted { p, alpha } => {
            let weighted = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * ((k + 1) as f64).powf(1.0 - alpha));
            if p.is_infinite() {
                Ok(weighted.fold(0.0, f64::max))
            } else {
                Ok(weighted.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
            }
        }
        SpaceSpec::BergmanRadial { p: 2.0, beta } => {
            let mut w = bergman_moment_first(beta);
            let mut acc = 0.0;
            for (k, c) in f.coeffs().iter().enumerate() {
                if k > 0 {
                    w *= k as f64 / (k as f64 + beta + 1.0);
                }
                acc += c.norm_sqr() * w;
            }
            Ok(acc.sqrt())
        }
        SpaceSpec::BergmanRadial { p, beta } => Ok(bergman_quadrature_norm(f, p, beta)),
    }
}

fn circle_grid(len: usize, p: f64) -> usize {
    let needed = (p.ceil() as usize).max(2) * len + 1;
    needed.max(SUP_GRID).next_power_of_two()
}

/// `(mean_θ |f(e^{iθ})|^p)^{1/p}` on an equispaced grid; exact for even
/// integer p since the grid resolves every frequency of `|f|^p`.
fn hardy_quadrature_norm(f: &CoeffSeries, p: f64) -> f64 {
    let values = eval_on_circle(f, circle_grid(f.len(), p));
    let mean = values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / values.len() as f64;
    mean.powf(1.0 / p)
}

/// Max modulus on the circle: coarse grid, then golden-section refinement
/// around the largest local maxima.
pub fn sup_norm(f: &CoeffSeries) -> f64 {
    let m = SUP_GRID.max((8 * f.len()).next_power_of_two());
    let values: Vec<f64> = eval_on_circle(f, m).iter().map(|v| v.norm()).collect();
    let step = 2.0 * PI / m as f64;
    let modulus = |theta: f64| f.eval(C64::from_polar(1.0, theta)).norm();
    maximize_on_circle(&values, step, modulus)
}

/// Refines the top local maxima of `values` (samples of `g` at `j·step`).
pub(crate) fn maximize_on_circle(values: &[f64], step: f64, g: impl Fn(f64) -> f64) -> f64 {
    let m = values.len();
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&j| values[j] >= values[(j + m - 1) % m] && values[j] >= values[(j + 1) % m])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    peaks.truncate(SUP_REFINED_BRACKETS);
    let mut best = values.iter().copied().fold(0.0, f64::max);
    for j in peaks {
        let center = j as f64 * step;
        best = best.max(golden_max(&g, center - step, center + step));
    }
    best
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = g(x1);
        }
    }
    f1.max(f2)
}

/// Gauss–Jacobi rule for `∫_0^1 (1 - s)^β h(s) ds` (Golub–Welsch).
pub fn gauss_jacobi_unit(nodes: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (beta, 0.0);
    let ab = a + b;
    let diag: Vec<f64> = (0..nodes)
        .map(|k| {
            if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let kk = 2.0 * k as f64 + ab;
                (b * b - a * a) / (kk * (kk + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..nodes)
        .map(|k| {
            let k = k as f64;
            let kk = 2.0 * k + ab;
            (4.0 * k * (k + a) * (k + b) * (k + ab) / (kk * kk * (kk + 1.0) * (kk - 1.0))).sqrt()
        })
        .collect();
    let jacobi = DMatrix::from_fn(nodes, nodes, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    // μ0 = ∫_{-1}^{1} (1 - x)^a dx, then map x ↦ s = (1 + x) / 2
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);
    let scale = 2f64.powf(-(beta + 1.0));
    let mut pairs: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            ((1.0 + x) / 2.0, mu0 * v0 * v0 * scale)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `(∫_𝔻 |f|^p (1 - |z|²)^β dx dy)^{1/p}` by Gauss–Jacobi in `s = |z|²`
/// times the uniform rule in the angle.
pub fn bergman_quadrature_norm(f: &CoeffSeries, p: f64, beta: f64) -> f64 {
    let len = f.len();
    let radial = ((p.ceil() as usize).max(2) * len / 2 + 16).min(2048);
    let angular = circle_grid(len, p);
    let (nodes, weights) = gauss_jacobi_unit(radial, beta);
    let mut total = 0.0;
    for (s, w) in nodes.iter().zip(&weights) {
        let rho = s.sqrt();
        let scaled = CoeffSeries::new(
            f.coeffs()
                .iter()
                .scan(1.0, |pw, c| {
                    let out = c * *pw;
                    *pw *= rho;
                    Some(out)
                })
                .collect(),
        );
        let values = eval_on_circle(&scaled, angular);
        let mean = values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / angular as f64;
        total += w * mean;
    }
    // dx dy = (1/2) ds dθ
    (PI * total).powf(1.0 / p)
}

/// Sums a positive series whose terms eventually decay geometrically.
fn sum_positive_series(mut term: impl FnMut(usize) -> f64, t: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..MAX_SERIES_TERMS {
        let x = term(k);
        sum += x;
        if x == 0.0 && k > 0 {
            return Ok(sum);
        }
        let ratio = x / prev;
        if k > 0 && ratio < 1.0 && x * ratio / (1.0 - ratio) <= SERIES_TOL * sum {
            return Ok(sum);
        }
        prev = x;
    }
    Err(Error::Divergence(t))
}

/// Norm φ_X(t) of the evaluation functional `f ↦ f(t)`.
pub fn eval_functional_norm(space: &SpaceSpec, t: f64) -> Result<f64> {
    space.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("t = {t} must be ≥ 0")));
    }
    if t >= 1.0 {
        return Err(Error::Divergence(t));
    }
    let t2 = t * t;
    match *space {
        SpaceSpec::Hardy { p: 2.0 } => Ok((1.0 / (1.0 - t2)).sqrt()),
        // classical sharp value for H^p
        SpaceSpec::Hardy { p } => Ok((1.0 - t2).powf(-1.0 / p)),
        SpaceSpec::SeqWeighted { p: 1.0, alpha } => {
            // dual is a weighted sup norm; maximize t^k (k+1)^{α-1}
            let mut best: f64 = 0.0;
            let mut prev = 0.0;
            for k in 0..MAX_SERIES_TERMS {
                let x = t.powi(k as i32) * ((k + 1) as f64).powf(alpha - 1.0);
                best = best.max(x);
                if x < prev {
                    return Ok(best);
                }
                prev = x;
            }
            Err(Error::Divergence(t))
        }
        SpaceSpec::SeqWeighted { p, alpha } => {
            let q = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
            let mut tk = 1.0;
            let s = sum_positive_series(
                |k| {
                    let x = (tk * ((k + 1) as f64).powf(alpha - 1.0)).powf(q);
                    tk *= t;
                    x
                },
                t,
            )?;
            Ok(s.powf(1.0 / q))
        }
        SpaceSpec::BergmanRadial { p: 2.0, .. } => {
            let mut kappa = space.kappa()?;
            let mut tk = 1.0;
            let s = sum_positive_series(
                |_| {
                    let x = kappa.next().unwrap_or(0.0) * tk;
                    tk *= t2;
                    x
                },
                t,
            )?;
            Ok(s.sqrt())
        }
        SpaceSpec::BergmanRadial { .. } => Err(Error::UnsupportedSpace(
            "evaluation functional norms of Bergman spaces need p = 2".into(),
        )),
    }
}

/// Gram matrix of the jet functionals of σ in a Hilbert space.
#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: CMatrix,
    pub functionals: Vec<(C64, usize)>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl Gram {
    pub fn is_ill_conditioned(&self) -> bool {
        self.min_eigenvalue < ILL_CONDITIONED * self.max_eigenvalue
    }
}

/// Shared κ table grown on demand.
struct KappaTable {
    seq: KappaSeq,
    values: Vec<f64>,
}

impl KappaTable {
    fn new(space: &SpaceSpec) -> Result<Self> {
        Ok(Self {
            seq: space.kappa()?,
            values: Vec::new(),
        })
    }

    fn get(&mut self, k: usize) -> f64 {
        while self.values.len() <= k {
            let v = self.seq.next().unwrap_or(0.0);
            self.values.push(v);
        }
        self.values[k]
    }
}

/// `Σ_k κ_k (k)_i (k)_j x^{k-i} ȳ^{k-j}` summed until the tail is negligible.
fn kernel_entry(table: &mut KappaTable, x: C64, i: usize, y: C64, j: usize) -> Result<C64> {
    let start = i.max(j);
    let yc = y.conj();
    let mut px = x.powu((start - i) as u32);
    let mut py = yc.powu((start - j) as u32);
    let (ax, ay) = (x.norm(), y.norm());
    let mut sum = ZERO;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in start..start + MAX_SERIES_TERMS {
        let weight = table.get(k) * falling_factorial(k, i) * falling_factorial(k, j);
        sum += px * py * weight;
        let bound = weight * ax.powi((k - i) as i32) * ay.powi((k - j) as i32);
        abs_sum += bound;
        let ratio = bound / prev;
        if k > start && (bound == 0.0 || (ratio < 1.0 && bound * ratio / (1.0 - ratio) <= 1e-17 * abs_sum)) {
            return Ok(sum);
        }
        prev = bound;
        px *= x;
        py *= yc;
    }
    Err(Error::Truncation("kernel series did not converge".into()))
}

pub fn gram_matrix(space: &SpaceSpec, sigma: &SigmaSet) -> Result<Gram> {
    let mut table = KappaTable::new(space)?;
    let functionals = sigma.functionals();
    let n = functionals.len();
    let mut matrix = CMatrix::from_element(n, n, ZERO);
    for a in 0..n {
        for b in a..n {
            let (x, i) = functionals[a];
            let (y, j) = functionals[b];
            let v = kernel_entry(&mut table, x, i, y, j)?;
            matrix[(a, b)] = v;
            matrix[(b, a)] = v.conj();
        }
        matrix[(a, a)].im = 0.0;
    }
    let eig = hermitian_eigenvalues(&matrix);
    let gram = Gram {
        min_eigenvalue: eig[0],
        max_eigenvalue: eig[n - 1],
        matrix,
        functionals,
    };
    if gram.is_ill_conditioned() {
        log::warn!(
            "Gram matrix ill-conditioned: λmin/λmax = {:e}",
            gram.min_eigenvalue / gram.max_eigenvalue
        );
    }
    Ok(gram)
}

/// Minimal-norm interpolant of prescribed jet data.
#[derive(Debug, Clone)]
pub struct MinNormTrace {
    pub norm: f64,
    pub interpolant: CoeffSeries,
    /// Weights of the (derivative) kernels in the interpolant.
    pub weights: Vec<C64>,
}

/// Coefficients of `Σ_i w_i · h_i`, where `h_i` represents the i-th jet functional.
pub(crate) fn kernel_combination(
    space: &SpaceSpec,
    functionals: &[(C64, usize)],
    weights: &[C64],
) -> Result<CoeffSeries> {
    let mut kappa = space.kappa()?;
    let max_abs: f64 = weights.iter().map(|w| w.norm()).sum();
    let mut coeffs = Vec::new();
    let mut peak: f64 = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..crate::discfun::MAX_TRUNCATION {
        let kk = kappa.next().unwrap_or(0.0);
        let mut c = ZERO;
        let mut bound = 0.0;
        for ((lambda, d), w) in functionals.iter().zip(weights) {
            if k < *d {
                continue;
            }
            let ff = falling_factorial(k, *d);
            c += w * lambda.conj().powu((k - d) as u32) * (kk * ff);
            bound += w.norm() * kk * ff * lambda.norm().powi((k - d) as i32);
        }
        coeffs.push(c);
        peak = peak.max(bound);
        let ratio = bound / prev;
        let done = bound == 0.0 && k >= functionals.iter().map(|f| f.1).max().unwrap_or(0);
        if max_abs == 0.0 || done || (prev.is_finite() && ratio < 1.0 && bound / (1.0 - ratio) <= 1e-17 * peak) {
            return Ok(CoeffSeries::new(coeffs).trimmed());
        }
        prev = bound;
    }
    Err(Error::Truncation(
        "kernel expansion needs more than the maximum degree".into(),
    ))
}

pub fn min_norm_trace(space: &SpaceSpec, sigma: &SigmaSet, a: &[C64]) -> Result<MinNormTrace> {
    if a.len() != sigma.n() {
        return Err(Error::InvalidInput(format!(
            "trace has {} values for {} points",
            a.len(),
            sigma.n()
        )));
    }
    let gram = gram_matrix(space, sigma)?;
    let weights = solve_hermitian_pd(&gram.matrix, a)?;
    let energy: f64 = a.iter().zip(&weights).map(|(x, c)| (x.conj() * c).re).sum();
    let interpolant = kernel_combination(space, &gram.functionals, &weights)?;
    Ok(MinNormTrace {
        norm: energy.max(0.0).sqrt(),
        interpolant,
        weights,
    })
}

/// Checks `‖f^{2α-1}‖²_{l²_a(α)} ≤ (‖f‖²_{H²})^{2α-1}`; returns `(lhs, rhs)`.
pub fn power_inequality_check(alpha: f64, f: &CoeffSeries) -> Result<(f64, f64)> {
    let m = 2.0 * alpha - 1.0;
    if !(m >= 1.0) || (m - m.round()).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("2α - 1 = {m} must be a positive integer")));
    }
    let power = f.pow(m.round() as u32, None);
    let lhs = norm(&SpaceSpec::SeqWeighted { p: 2.0, alpha }, &power)?.powi(2);
    let rhs = f.h2_norm_sq().powf(m);
    Ok((lhs, rhs))
}

/// Reproducing kernel `k_λ` of a Hilbert space, as a truncated series.
pub fn reproducing_kernel(space: &SpaceSpec, lambda: C64) -> Result<CoeffSeries> {
    check_in_disc(lambda)?;
    kernel_combination(space, &[(lambda, 0)], &[C64::new(1.0, 0.0)])
}
