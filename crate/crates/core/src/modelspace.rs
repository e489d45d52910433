//! The model space `K_B = H² ⊖ B H²`: its Malmquist basis, the linear
//! interpolation operator `T f = Σ ⟨f, e_k⟩ e_k`, the norm of `T` into H∞,
//! and the operator norm of differentiation on `K_B`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discfun::{derivative, CoeffSeries, SigmaSet, C64, MAX_TRUNCATION, ONE, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{lambda_max, CMatrix};
use crate::spaces::{kernel_diagonal, maximize_on_circle, SpaceSpec};

const TAIL_COEFF_TOL: f64 = 1e-20;
const CIRCLE_GRID: usize = 4096;

/// Orthonormal basis `e_k = √(1 - |λ_k|²) / (1 - λ̄_k z) · Π_{j<k} b_{λ_j}` of `K_B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MalmquistBasis {
    sigma: SigmaSet,
    basis: Vec<CoeffSeries>,
    truncation: usize,
}

fn build(sigma: &SigmaSet, truncation: usize) -> Vec<CoeffSeries> {
    let len = truncation + 1;
    let mut partial = CoeffSeries::constant(ONE).truncated(len);
    let mut basis = Vec::with_capacity(sigma.n());
    for &lambda in sigma.points() {
        let s = (1.0 - lambda.norm_sqr()).sqrt();
        basis.push(partial.div_linear(lambda.conj()).scale(C64::new(s, 0.0)));
        partial = partial.mul_blaschke_factor(lambda, len);
    }
    basis
}

fn tail_is_negligible(basis: &[CoeffSeries]) -> bool {
    basis.iter().all(|e| {
        let start = 3 * e.len() / 4;
        e.coeffs()[start..].iter().all(|c| c.norm() <= TAIL_COEFF_TOL)
    })
}

impl MalmquistBasis {
    /// Builds the basis, doubling the truncation degree until every basis
    /// function has a negligible tail.
    pub fn new(sigma: &SigmaSet) -> Result<Self> {
        let r = sigma.r();
        let mut truncation = ((40.0 / (1.0 - r)).ceil() as usize).max(64).next_power_of_two();
        loop {
            match Self::with_truncation(sigma, truncation) {
                Ok(b) => return Ok(b),
                Err(e) if truncation >= MAX_TRUNCATION => return Err(e),
                Err(_) => truncation *= 2,
            }
        }
    }

    /// Builds the basis at a fixed truncation degree.
    pub fn with_truncation(sigma: &SigmaSet, truncation: usize) -> Result<Self> {
        let basis = build(sigma, truncation);
        if !tail_is_negligible(&basis) {
            return Err(Error::Truncation(format!(
                "r = {:.6} too close to 1 for truncation degree {truncation}",
                sigma.r()
            )));
        }
        Ok(Self {
            sigma: sigma.clone(),
            basis,
            truncation,
        })
    }

    pub fn sigma(&self) -> &SigmaSet {
        &self.sigma
    }

    pub fn basis(&self) -> &[CoeffSeries] {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `e_1(z), ..., e_n(z)` from the rational form.
    pub fn eval_all(&self, z: C64) -> Vec<C64> {
        let mut partial = ONE;
        self.sigma
            .points()
            .iter()
            .map(|&lambda| {
                let s = (1.0 - lambda.norm_sqr()).sqrt();
                let value = partial * s / (ONE - lambda.conj() * z);
                partial *= (lambda - z) / (ONE - lambda.conj() * z);
                value
            })
            .collect()
    }

    /// `e_k(z)` (0-based `k`) from the rational form.
    pub fn eval(&self, k: usize, z: C64) -> C64 {
        self.eval_all(z)[k]
    }

    /// Gram matrix `⟨e_j, e_k⟩` of the truncated basis.
    pub fn gram(&self) -> CMatrix {
        pairing_matrix(&self.basis)
    }
}

pub fn malmquist_basis(sigma: &SigmaSet, truncation: Option<usize>) -> Result<MalmquistBasis> {
    match truncation {
        Some(n) => MalmquistBasis::with_truncation(sigma, n),
        None => MalmquistBasis::new(sigma),
    }
}

/// `⟨h, g⟩ = Σ ĥ(k) conj(ĝ(k))`.
pub fn cauchy_pairing(h: &CoeffSeries, g: &CoeffSeries) -> C64 {
    h.coeffs().iter().zip(g.coeffs()).map(|(a, b)| a * b.conj()).sum()
}

fn pairing_matrix(series: &[CoeffSeries]) -> CMatrix {
    let n = series.len();
    let mut m = CMatrix::from_element(n, n, ZERO);
    for j in 0..n {
        for k in j..n {
            let v = cauchy_pairing(&series[j], &series[k]);
            m[(j, k)] = v;
            m[(k, j)] = v.conj();
        }
        m[(j, j)].im = 0.0;
    }
    m
}

/// `T f = Σ ⟨f, e_k⟩ e_k`.
pub fn project(basis: &MalmquistBasis, f: &CoeffSeries) -> CoeffSeries {
    let mut out = vec![ZERO; basis.truncation + 1];
    for e in &basis.basis {
        let w = cauchy_pairing(f, e);
        for (o, c) in out.iter_mut().zip(e.coeffs()) {
            *o += w * c;
        }
    }
    CoeffSeries::new(out)
}

/// Norm of `d^order/dz^order` from `K_B` (H² norm) into H².
pub fn derivative_operator_norm(sigma: &SigmaSet, order: usize) -> Result<f64> {
    let basis = MalmquistBasis::new(sigma)?;
    let derived: Vec<CoeffSeries> = basis
        .basis
        .iter()
        .map(|e| (0..order).fold(e.clone(), |acc, _| derivative(&acc)))
        .collect();
    Ok(lambda_max(&pairing_matrix(&derived)).max(0.0).sqrt())
}

/// Exact norm of `g ↦ g'` on `K_B` in H².
pub fn bernstein_ratio(sigma: &SigmaSet) -> Result<f64> {
    derivative_operator_norm(sigma, 1)
}

/// The bound `k! (5/2)^k (n / (1 - r))^k` for the k-th derivative on `K_B`.
pub fn bernstein_bound(n: usize, r: f64, order: usize) -> f64 {
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    factorial * (2.5 * n as f64 / (1.0 - r)).powi(order as i32)
}

/// `‖T‖_{X→H∞}` for a Hilbert space X.
///
/// At each z the functional `f ↦ (Tf)(z)` has X-dual norm squared
/// `Σ_{k,l} e_k(z) conj(e_l(z)) A_{kl}` with `A_{kl} = Σ_m κ_m ê_l(m) conj(ê_k(m))`;
/// the maximum over the circle is located on a grid and refined.
pub fn t_operator_norm(space: &SpaceSpec, sigma: &SigmaSet) -> Result<f64> {
    space.require_hilbert()?;
    let basis = MalmquistBasis::new(sigma)?;
    let kappa = kernel_diagonal(space, basis.truncation + 1)?.kappa;
    let n = basis.len();
    let mut a = CMatrix::from_element(n, n, ZERO);
    for k in 0..n {
        for l in 0..n {
            a[(k, l)] = basis.basis[l]
                .coeffs()
                .iter()
                .zip(basis.basis[k].coeffs())
                .zip(&kappa)
                .map(|((el, ek), w)| el * ek.conj() * *w)
                .sum();
        }
    }
    let dual_norm = |theta: f64| {
        let e = basis.eval_all(C64::from_polar(1.0, theta));
        let mut acc = ZERO;
        for k in 0..n {
            for l in 0..n {
                acc += e[k] * e[l].conj() * a[(k, l)];
            }
        }
        acc.re.max(0.0).sqrt()
    };
    let step = 2.0 * PI / CIRCLE_GRID as f64;
    let values: Vec<f64> = (0..CIRCLE_GRID).map(|j| dual_norm(j as f64 * step)).collect();
    Ok(maximize_on_circle(&values, step, dual_norm))
}
