//! Interpolation constants `c(σ, X, H∞)`: multistart estimates, explicit
//! witness lower bounds, and the closed-form bounds on `C_{n,r}`.

use nalgebra::SVD;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discfun::{
    compose_with_blaschke_auto, dirichlet_kernel, factorial, fejer_kernel, hadamard_product, transplant_jet,
    CoeffSeries, SigmaSet, C64, ZERO,
};
use crate::error::{Error, Result};
use crate::extremal::{lower_toeplitz, quotient_norm, szego_gram, DEFAULT_TOL};
use crate::linalg::CMatrix;
use crate::search::{multistart_max, LocalSearch};
use crate::spaces::{eval_functional_norm, gram_matrix, norm, SpaceSpec};

pub const DEFAULT_BUDGET: usize = 32;
/// Largest n for which sweeps run the multistart estimate.
pub const DEFAULT_ESTIMATE_MAX_N: usize = 6;
const COMPOSE_TOL: f64 = 1e-13;
const POLISH_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantOptions {
    pub budget: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    /// Jet data (values and derivatives on σ) of a maximizing trace,
    /// scaled so its minimal X-norm is 1.
    pub jet: Vec<C64>,
    pub starts: usize,
}

/// The quotient norm as a function of whitened jet coordinates `y`
/// (`a = L y`, `G = L L*`): `J(y) = ‖Σ_m y_m A_m‖₂ / |y|`.
struct WhitenedQuotient {
    whitening: CMatrix,
    ops: Vec<CMatrix>,
}

impl WhitenedQuotient {
    fn new(space: &SpaceSpec, sigma: &SigmaSet) -> Result<Self> {
        let gram = gram_matrix(space, sigma)?;
        let whitening = gram
            .matrix
            .clone()
            .cholesky()
            .ok_or(Error::IllConditioned(gram.min_eigenvalue / gram.max_eigenvalue))?
            .l();
        let n = sigma.n();
        let ops = if sigma.is_distinct() {
            // Pick value of data a: ‖S⁻¹ diag(a) S‖ with S the Szegő Cholesky factor
            let s = szego_gram(sigma.points())
                .cholesky()
                .ok_or(Error::IllConditioned(0.0))?
                .l();
            (0..n)
                .map(|m| {
                    let ds = CMatrix::from_fn(n, n, |i, j| whitening[(i, m)] * s[(i, j)]);
                    s.solve_lower_triangular(&ds).ok_or(Error::IllConditioned(0.0))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            let lambda = sigma.single_point().ok_or(Error::MixedMultiplicity)?;
            // derivative jet -> first n Taylor coefficients of f ∘ b_λ
            let mut transplant = CMatrix::from_element(n, n, ZERO);
            for (col, &(_, d)) in gram.functionals.iter().enumerate() {
                let mut t = vec![ZERO; n];
                t[d] = C64::new(1.0 / factorial(d), 0.0);
                for (row, c) in transplant_jet(lambda, &t)?.into_iter().enumerate() {
                    transplant[(row, col)] = c;
                }
            }
            let coeffs = &transplant * &whitening;
            (0..n)
                .map(|m| lower_toeplitz(&coeffs.column(m).iter().copied().collect::<Vec<_>>()))
                .collect()
        };
        Ok(Self { whitening, ops })
    }

    fn dim(&self) -> usize {
        self.ops.len()
    }

    fn combine(&self, y: &[C64]) -> CMatrix {
        let n = self.ops[0].nrows();
        let mut out = CMatrix::from_element(n, n, ZERO);
        for (op, c) in self.ops.iter().zip(y) {
            out += op * *c;
        }
        out
    }

    fn value(&self, y: &[C64]) -> f64 {
        let len = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if len == 0.0 {
            return 0.0;
        }
        crate::linalg::spectral_norm(&self.combine(y)) / len
    }

    /// Alternating ascent: fix the top singular pair `(u, v)` of `A(y)`, then
    /// maximize the linear form `y ↦ u* A(y) v` on the sphere. Never decreases J.
    fn polish(&self, y: &[C64]) -> (Vec<C64>, f64) {
        let mut y = normalized(y);
        let mut value = self.value(&y);
        for _ in 0..POLISH_STEPS {
            let svd = SVD::new(self.combine(&y), true, true);
            let top = svd.singular_values.imax();
            let u = svd.u.as_ref().expect("requested").column(top).into_owned();
            let v = svd.v_t.as_ref().expect("requested").row(top).adjoint();
            let g: Vec<C64> = self.ops.iter().map(|op| (u.adjoint() * op * &v)[(0, 0)]).collect();
            let next = normalized(&g.iter().map(|c| c.conj()).collect::<Vec<_>>());
            let next_value = self.value(&next);
            if next_value <= value * (1.0 + 1e-15) {
                break;
            }
            y = next;
            value = next_value;
        }
        (y, value)
    }
}

fn normalized(y: &[C64]) -> Vec<C64> {
    let len = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    y.iter().map(|c| c / len).collect()
}

fn from_real(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn to_real(y: &[C64]) -> Vec<f64> {
    y.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Estimates `c(σ, X, H∞)` for a Hilbert space X.
///
/// The worst f for a fixed trace is the minimal-norm interpolant, so the
/// supremum over the unit ball of X reduces to a supremum over jet data on
/// the unit sphere of `ℂ^n` (in the Gram metric). That finite-dimensional
/// problem is searched by seeded multistart Nelder–Mead, then polished.
pub fn interp_constant(space: &SpaceSpec, sigma: &SigmaSet, opts: &ConstantOptions) -> Result<ConstantEstimate> {
    space.require_hilbert()?;
    let q = WhitenedQuotient::new(space, sigma)?;
    let n = q.dim();

    // probes: reproducing kernels of the distinct points, coordinate axes, then random
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for (i, (_, d)) in sigma.functionals().iter().enumerate() {
        if *d == 0 {
            let y: Vec<C64> = (0..n).map(|m| q.whitening[(i, m)].conj()).collect();
            starts.push(to_real(&normalized(&y)));
        }
    }
    for m in 0..n {
        let mut e = vec![0.0; 2 * n];
        e[2 * m] = 1.0;
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let budget = opts.budget.max(1);
    while starts.len() < budget {
        starts.push((0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    starts.truncate(budget);

    let objective = |x: &[f64]| q.value(&from_real(x));
    let search = LocalSearch {
        initial_step: 0.3,
        max_evals: 150 * (2 * n + 1),
        ftol: opts.tol.min(1e-10),
    };
    let best = multistart_max(&objective, &starts, &search).expect("at least one start");
    let (y, value) = q.polish(&from_real(&best.x));
    let a = &q.whitening * nalgebra::DVector::from_vec(y);
    Ok(ConstantEstimate {
        value: value.max(best.value),
        jet: a.iter().copied().collect(),
        starts: starts.len(),
    })
}

/// Power of the witness kernel for spaces where a witness is available.
fn witness_power(space: &SpaceSpec) -> Result<u32> {
    space.validate()?;
    match *space {
        SpaceSpec::Hardy { p: 2.0 } => Ok(1),
        SpaceSpec::SeqWeighted { p: 2.0, alpha } => {
            let m = 2.0 * alpha - 1.0;
            if (m - m.round()).abs() < 1e-12 {
                Ok(m.round() as u32)
            } else {
                Err(Error::UnsupportedSpace(format!(
                    "witness needs 2α - 1 integral, got {m}"
                )))
            }
        }
        _ => Err(Error::UnsupportedSpace(format!(
            "no witness for {}",
            space.short_name()
        ))),
    }
}

/// The witness `f` for `σ_{λ,n}`: `(p_n ⋆ K_n)^m` at the origin, and
/// `g(u · b_λ)` with `u = -λ̄/|λ|` elsewhere, which puts the peak of `g`
/// (at 1) over the boundary point nearest λ.
pub fn witness_function(space: &SpaceSpec, lambda: C64, n: usize) -> Result<CoeffSeries> {
    let m = witness_power(space)?;
    if n == 0 {
        return Err(Error::InvalidInput("multiplicity must be ≥ 1".into()));
    }
    crate::discfun::check_in_disc(lambda)?;
    let g = hadamard_product(&dirichlet_kernel(n), &fejer_kernel(n)).pow(m, None);
    if lambda == ZERO {
        return Ok(g);
    }
    let u = -lambda.conj() / lambda.norm();
    compose_with_blaschke_auto(&g.rotated(u), lambda, COMPOSE_TOL)
}

/// `‖f‖_{H∞/B H∞} / ‖f‖_X` for the witness at `σ_{λ,n}`: a lower bound for
/// `c(σ_{λ,n}, X, H∞)`.
pub fn witness_lower_bound(space: &SpaceSpec, lambda: C64, n: usize) -> Result<f64> {
    let f = witness_function(space, lambda, n)?;
    let sigma = SigmaSet::repeated(lambda, n)?;
    let q = quotient_norm(&f, &sigma, DEFAULT_TOL)?;
    Ok(q.value / norm(space, &f)?)
}

/// Closed-form bounds on `C_{n,r}(X, H∞)`. Multiplicative constants that are
/// only known to exist are set to 1 and flagged `*_order_only`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub r: f64,
    /// `n / (1 - r)`
    pub x: f64,
    pub lower: Option<f64>,
    pub lower_tag: String,
    pub lower_order_only: bool,
    pub upper: Option<f64>,
    pub upper_tag: String,
    pub upper_order_only: bool,
    /// Growth exponent of the upper side in its scale variable.
    pub exponent: Option<f64>,
    /// `φ_X(r)`, a lower bound for `C_{n,r}` (take f the normalized kernel at r).
    pub eval_lower: Option<f64>,
    /// `φ_X(1 - (1 - r)/n)`, the conjectured scale.
    pub phi_scale: Option<f64>,
    pub witness: Option<f64>,
    pub estimate: Option<f64>,
}

fn side(value: f64, tag: &str, order_only: bool) -> (Option<f64>, String, bool) {
    (Some(value), tag.to_string(), order_only)
}

fn none_side() -> (Option<f64>, String, bool) {
    (None, "none".to_string(), false)
}

pub fn theorem_bounds(space: &SpaceSpec, n: usize, r: f64) -> Result<BoundReport> {
    space.validate()?;
    if n == 0 || !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidInput(format!(
            "need n ≥ 1 and 0 ≤ r < 1, got n = {n}, r = {r}"
        )));
    }
    let x = n as f64 / (1.0 - r);
    let p = space.p();
    let inv_p = 1.0 / p;
    let (lower, upper, exponent) = match *space {
        SpaceSpec::Hardy { .. } => {
            let lower = side(x.powf(inv_p) / 32f64.powf(inv_p), "hardy-lower", false);
            let upper = if p == 2.0 {
                side((2.0 * x).sqrt(), "hardy2-upper", false)
            } else if p.is_infinite() {
                side(1.0, "hinf-trivial", false)
            } else {
                side(x.powf(inv_p), "hardy-upper", true)
            };
            (lower, upper, Some(inv_p))
        }
        SpaceSpec::SeqWeighted { alpha, .. } if p == 2.0 => {
            let e = alpha - 0.5;
            let m = 2.0 * alpha - 1.0;
            let lower = if (m - m.round()).abs() < 1e-12 {
                side(x.powf(e), "seq2-lower", true)
            } else {
                side((1.0 - r).powf(-(alpha - inv_p)), "seq-lower", true)
            };
            (lower, side(x.powf(e), "seq2-upper", true), Some(e))
        }
        SpaceSpec::SeqWeighted { alpha, .. } => {
            let lower = side((1.0 - r).powf(-(alpha - inv_p)), "seq-lower", true);
            let e = if p <= 2.0 {
                alpha - 0.5
            } else {
                alpha + 0.5 - 2.0 * inv_p
            };
            (lower, side(x.powf(e), "seq-upper", true), Some(e))
        }
        SpaceSpec::BergmanRadial { beta, .. } => {
            if p <= 2.0 {
                let e = (beta + 2.0) * inv_p;
                (
                    none_side(),
                    side(x.powf(e), "bergman-single-point-upper", true),
                    Some(e),
                )
            } else {
                (none_side(), none_side(), None)
            }
        }
    };
    let phi = |t: f64| eval_functional_norm(space, t).ok();
    Ok(BoundReport {
        n,
        r,
        x,
        lower: lower.0,
        lower_tag: lower.1,
        lower_order_only: lower.2,
        upper: upper.0,
        upper_tag: upper.1,
        upper_order_only: upper.2,
        exponent,
        eval_lower: phi(r),
        phi_scale: phi(1.0 - (1.0 - r) / n as f64),
        witness: None,
        estimate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub budget: usize,
    pub tol: f64,
    pub seed: u64,
    /// Rows with larger n skip the multistart estimate.
    pub estimate_max_n: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            tol: DEFAULT_TOL,
            seed: 0,
            estimate_max_n: DEFAULT_ESTIMATE_MAX_N,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<BoundReport>,
    /// Least-squares slope of log(witness) against log(n/(1-r)).
    pub slope_witness: Option<f64>,
    /// Same for the estimate, over rows where it was computed.
    pub slope_estimate: Option<f64>,
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than two distinct x.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Row seed: decorrelates rows while staying a pure function of `(seed, index)`.
fn row_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Bounds, witness and (for small n) the estimate at `σ_{r,n}` for every
/// `(n, r)` in the grid, rows ordered n-major.
pub fn cnr_sweep(space: &SpaceSpec, n_grid: &[usize], r_grid: &[f64], opts: &SweepOptions) -> Result<SweepReport> {
    if n_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidInput("empty sweep grid".into()));
    }
    let cells: Vec<(usize, f64)> = n_grid
        .iter()
        .flat_map(|&n| r_grid.iter().map(move |&r| (n, r)))
        .collect();
    let has_witness = witness_power(space).is_ok();
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(index, &(n, r))| {
            let mut row = theorem_bounds(space, n, r)?;
            let lambda = C64::new(r, 0.0);
            if has_witness {
                row.witness = Some(witness_lower_bound(space, lambda, n)?);
            }
            if space.is_hilbert() && n <= opts.estimate_max_n {
                let sigma = SigmaSet::repeated(lambda, n)?;
                let copts = ConstantOptions {
                    budget: opts.budget,
                    tol: opts.tol,
                    seed: row_seed(opts.seed, index),
                };
                row.estimate = Some(interp_constant(space, &sigma, &copts)?.value);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let slope_witness = loglog_slope(&rows.iter().filter_map(|r| Some((r.x, r.witness?))).collect::<Vec<_>>());
    let estimated: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.x, r.estimate?))).collect();
    let slope_estimate = if estimated.len() == rows.len() {
        loglog_slope(&estimated)
    } else {
        None
    };
    Ok(SweepReport {
        rows,
        slope_witness,
        slope_estimate,
    })
}
