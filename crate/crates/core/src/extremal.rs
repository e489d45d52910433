//! Minimal-norm H∞ interpolation: Nevanlinna–Pick on distinct nodes,
//! Carathéodory–Schur at a single repeated node, the quotient norm
//! `‖f‖_{H∞/BH∞}` and a multistart estimate of the Carleson constant.

use nalgebra::SVD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discfun::{check_in_disc, compose_with_blaschke, CoeffSeries, SigmaSet, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, lambda_min, spectral_norm, CMatrix};
use crate::search::{multistart_max, LocalSearch};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_CARLESON_BUDGET: usize = 64;
const MIN_SEPARATION: f64 = 1e-10;
const PSD_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;

/// Nevanlinna–Pick data: distinct nodes `λ_i` and target values `w_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickProblem {
    nodes: Vec<C64>,
    values: Vec<C64>,
}

impl PickProblem {
    pub fn new(nodes: Vec<C64>, values: Vec<C64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes and {} values",
                nodes.len(),
                values.len()
            )));
        }
        check_nodes(&nodes)?;
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

fn check_nodes(nodes: &[C64]) -> Result<()> {
    for &z in nodes {
        check_in_disc(z)?;
    }
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if (a - b).norm() < MIN_SEPARATION {
                return Err(Error::DegenerateNodes(format!(
                    "nodes {a} and {b} closer than {MIN_SEPARATION:e}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Pick matrix at the returned level.
    Pick {
        min_eigenvalue: f64,
        /// Smallest eigenvalue after congruence by the Szegő Gram matrix,
        /// i.e. `c² - ‖L⁻¹ W L‖²`.
        normalized_min_eigenvalue: f64,
        bisections: usize,
    },
    /// Top singular triplet of the lower-triangular Toeplitz matrix.
    Toeplitz {
        singular_value: f64,
        left: Vec<C64>,
        right: Vec<C64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResult {
    pub value: f64,
    pub certificate: Certificate,
}

/// `[1 / (1 - λ_i λ̄_j)]`
pub fn szego_gram(nodes: &[C64]) -> CMatrix {
    let n = nodes.len();
    CMatrix::from_fn(n, n, |i, j| ONE / (ONE - nodes[i] * nodes[j].conj()))
}

/// `[(c² - w_i w̄_j) / (1 - λ_i λ̄_j)]`
pub fn pick_matrix(nodes: &[C64], values: &[C64], c: f64) -> CMatrix {
    let n = nodes.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        (C64::new(c * c, 0.0) - values[i] * values[j].conj()) / (ONE - nodes[i] * nodes[j].conj())
    });
    hermitian_part(&m)
}

/// PSD test on the diagonally rescaled Pick matrix (unit Szegő diagonal).
fn pick_feasible(nodes: &[C64], values: &[C64], c: f64) -> bool {
    let scale: Vec<f64> = nodes.iter().map(|z| (1.0 - z.norm_sqr()).sqrt()).collect();
    let mut p = pick_matrix(nodes, values, c);
    let n = nodes.len();
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] *= scale[i] * scale[j];
        }
    }
    let wmax = values.iter().map(|w| w.norm_sqr()).fold(0.0, f64::max);
    lambda_min(&p) >= -PSD_TOL * (c * c + wmax)
}

/// `c* = ‖L⁻¹ W L‖₂` with `G = L L*` the Szegő Gram matrix: the Pick matrix
/// `c² G - W G W*` is PSD exactly when `c ≥ c*`.
pub fn pick_value_spectral(nodes: &[C64], values: &[C64]) -> Result<f64> {
    let g = szego_gram(nodes);
    let chol = g.cholesky().ok_or(Error::IllConditioned(0.0))?;
    let l = chol.l();
    let n = nodes.len();
    let wl = CMatrix::from_fn(n, n, |i, j| values[i] * l[(i, j)]);
    let m = l.solve_lower_triangular(&wl).ok_or(Error::IllConditioned(0.0))?;
    Ok(spectral_norm(&m))
}

/// Smallest `c ≥ 0` whose Pick matrix is positive semidefinite, by bisection.
pub fn pick_min_norm(problem: &PickProblem, tol: f64) -> Result<ExtremalResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol = {tol} must be positive")));
    }
    let (nodes, values) = (&problem.nodes, &problem.values);
    let mut lo = values.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mut bisections = 0;
    let hi = if pick_feasible(nodes, values, lo) {
        lo
    } else {
        let mut hi = lo
            * nodes
                .iter()
                .map(|z| (1.0 + z.norm()) / (1.0 - z.norm()))
                .product::<f64>();
        while !pick_feasible(nodes, values, hi) {
            lo = hi;
            hi *= 2.0;
            bisections += 1;
            if bisections > MAX_BISECTIONS {
                return Err(Error::IllConditioned(0.0));
            }
        }
        while hi - lo > tol * hi && bisections < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if pick_feasible(nodes, values, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            bisections += 1;
        }
        hi
    };
    let min_eigenvalue = lambda_min(&pick_matrix(nodes, values, hi));
    let normalized_min_eigenvalue = match pick_value_spectral(nodes, values) {
        Ok(c_star) => hi * hi - c_star * c_star,
        Err(_) => f64::NAN,
    };
    Ok(ExtremalResult {
        value: hi,
        certificate: Certificate::Pick {
            min_eigenvalue,
            normalized_min_eigenvalue,
            bisections,
        },
    })
}

/// Lower-triangular Toeplitz matrix with `(i, j)` entry `c_{i-j}`.
pub fn lower_toeplitz(c: &[C64]) -> CMatrix {
    let n = c.len();
    CMatrix::from_fn(n, n, |i, j| if i >= j { c[i - j] } else { ZERO })
}

/// `inf{‖g‖_∞ : ĝ(k) = c_k, k < n}` as the spectral norm of the
/// lower-triangular Toeplitz matrix of `c`.
pub fn cs_min_norm(c: &[C64]) -> Result<ExtremalResult> {
    if c.is_empty() {
        return Err(Error::InvalidInput("empty coefficient vector".into()));
    }
    let t = lower_toeplitz(c);
    let svd = SVD::new(t, true, true);
    let (idx, &singular_value) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    Ok(ExtremalResult {
        value: singular_value,
        certificate: Certificate::Toeplitz {
            singular_value,
            left: u.column(idx).iter().copied().collect(),
            right: v_t.row(idx).iter().map(|x| x.conj()).collect(),
        },
    })
}

/// First `n` Taylor coefficients of `f ∘ b_λ`: the Carathéodory–Schur data
/// of `f` transplanted from λ to 0.
pub fn transplanted_coefficients(f: &CoeffSeries, lambda: C64, n: usize) -> Result<Vec<C64>> {
    if lambda == ZERO {
        // b_0 = -z
        return Ok((0..n)
            .map(|k| if k % 2 == 0 { f.coeff(k) } else { -f.coeff(k) })
            .collect());
    }
    Ok(compose_with_blaschke(f, lambda, n - 1)?.into_coeffs())
}

/// `‖f‖_{H∞/BH∞}` for σ all-distinct or a single point with multiplicity.
pub fn quotient_norm(f: &CoeffSeries, sigma: &SigmaSet, tol: f64) -> Result<ExtremalResult> {
    if sigma.is_distinct() {
        let nodes = sigma.points().to_vec();
        let values = nodes.iter().map(|&z| f.eval(z)).collect();
        return pick_min_norm(&PickProblem::new(nodes, values)?, tol);
    }
    let lambda = sigma.single_point().ok_or(Error::MixedMultiplicity)?;
    cs_min_norm(&transplanted_coefficients(f, lambda, sigma.n())?)
}

/// Result of the multistart search for the Carleson constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonEstimate {
    /// Best value found; a lower estimate of `C_I(σ)`.
    pub value: f64,
    /// Unimodular data attaining it.
    pub data: Vec<C64>,
    pub starts: usize,
}

fn unimodular(theta: &[f64]) -> Vec<C64> {
    theta.iter().map(|&t| C64::from_polar(1.0, t)).collect()
}

/// Deterministic starting angles: alternating signs, constants, quarter-turn
/// patterns, then all vertices of `{±1, ±i}^n` (first entry fixed) while the
/// budget allows, then seeded random angles.
fn carleson_starts(n: usize, budget: usize, seed: u64) -> Vec<Vec<f64>> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut starts: Vec<Vec<f64>> = vec![
        (0..n).map(|i| if i % 2 == 0 { 0.0 } else { PI }).collect(),
        vec![0.0; n],
        (0..n).map(|i| FRAC_PI_2 * i as f64).collect(),
        (0..n).map(|i| -FRAC_PI_2 * i as f64).collect(),
    ];
    let vertices = 4usize.saturating_pow(n.saturating_sub(1) as u32);
    if vertices <= budget / 2 {
        for code in 0..vertices {
            let mut c = code;
            let mut theta = vec![0.0; n];
            for t in theta.iter_mut().skip(1) {
                *t = FRAC_PI_2 * (c % 4) as f64;
                c /= 4;
            }
            if !starts.contains(&theta) {
                starts.push(theta);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < budget.max(1) {
        starts.push((0..n).map(|_| rng.random_range(-PI..PI)).collect());
    }
    starts.truncate(budget.max(1));
    starts
}

/// Multistart estimate of `sup_{‖a‖_∞ ≤ 1} inf{‖g‖_∞ : g|σ = a}` for distinct σ.
///
/// The objective is a norm in `a`, so its maximum over the polydisc sits on
/// the torus; the search runs over the angles of unimodular data.
pub fn carleson_constant(sigma: &SigmaSet, tol: f64, budget: usize, seed: u64) -> Result<CarlesonEstimate> {
    if !sigma.is_distinct() {
        return Err(Error::DegenerateNodes("Carleson constant needs distinct nodes".into()));
    }
    let nodes = sigma.points().to_vec();
    check_nodes(&nodes)?;
    let n = nodes.len();
    // fail early if the Szegő Gram matrix cannot be factored
    pick_value_spectral(&nodes, &vec![ONE; n])?;
    let objective = |theta: &[f64]| pick_value_spectral(&nodes, &unimodular(theta)).unwrap_or(f64::NAN);
    let starts = carleson_starts(n, budget, seed);
    let opts = LocalSearch {
        initial_step: 0.5,
        max_evals: 300 * n.max(2),
        ftol: 1e-12,
    };
    let best = multistart_max(&objective, &starts, &opts).expect("at least one start");
    let data = unimodular(&best.x);
    let exact = pick_min_norm(&PickProblem::new(nodes, data.clone())?, tol)?;
    Ok(CarlesonEstimate {
        value: exact.value.max(best.value),
        data,
        starts: starts.len(),
    })
}
