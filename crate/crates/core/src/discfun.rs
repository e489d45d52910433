//! Truncated Taylor series on the unit disc, Blaschke factors and products,
//! the Dirichlet/Fejér kernels and coefficient extraction for compositions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Default truncation degree for adaptive series expansions.
pub const DEFAULT_TRUNCATION: usize = 1024;
/// Largest truncation degree the adaptive expansions will try.
pub const MAX_TRUNCATION: usize = 1 << 18;
const MAX_GRID: usize = 1 << 21;
const ALIAS_TOL: f64 = 1e-10;

pub(crate) fn check_in_disc(z: C64) -> Result<()> {
    if z.norm() < 1.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::PoleOnDomain { re: z.re, im: z.im })
    }
}

/// A truncated Taylor series `c_0 + c_1 z + ... + c_N z^N`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffSeries {
    coeffs: Vec<C64>,
}

impl CoeffSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![ZERO])
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^k`
    pub fn monomial(k: usize, c: C64) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero past the truncation.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Truncation degree N (the series holds N + 1 coefficients).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Drops trailing exact zeros, keeping at least one coefficient.
    pub fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(ZERO);
        }
        self
    }

    /// Keeps coefficients of degree `< len`, padding with zeros if needed.
    pub fn truncated(&self, len: usize) -> Self {
        let mut coeffs: Vec<C64> = self.coeffs.iter().take(len).copied().collect();
        coeffs.resize(len, ZERO);
        Self::new(coeffs)
    }

    pub fn eval(&self, z: C64) -> C64 {
        eval_series(self, z)
    }

    /// `f^{(order)}(z)` from the truncated series.
    pub fn eval_derivative(&self, z: C64, order: usize) -> C64 {
        let mut acc = ZERO;
        for k in (order..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[k] * falling_factorial(k, order);
        }
        acc
    }

    /// Taylor coefficients `f^{(j)}(λ) / j!` for `j < m`.
    pub fn taylor_at(&self, lambda: C64, m: usize) -> Vec<C64> {
        (0..m).map(|j| self.eval_derivative(lambda, j) / factorial(j)).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        Self::new((0..len).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.len().max(other.len());
        Self::new((0..len).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    /// Cauchy product, truncated to `max_len` coefficients when given.
    pub fn mul(&self, other: &Self, max_len: Option<usize>) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::zero();
        }
        let full = self.len() + other.len() - 1;
        let len = max_len.map_or(full, |m| m.min(full));
        let mut out = vec![ZERO; len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, m: u32, max_len: Option<usize>) -> Self {
        let mut acc = Self::constant(ONE);
        for _ in 0..m {
            acc = acc.mul(self, max_len);
        }
        acc
    }

    /// `f(u z)` for a unimodular (or any) `u`.
    pub fn rotated(&self, u: C64) -> Self {
        let mut w = ONE;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * w;
                w *= u;
                out
            })
            .collect();
        Self::new(coeffs)
    }

    /// Multiplies by the Blaschke factor `b_λ` in O(N), keeping `len` coefficients.
    pub fn mul_blaschke_factor(&self, lambda: C64, len: usize) -> Self {
        // (λ - z) g, then divide by (1 - λ̄ z)
        let numer: Vec<C64> = (0..len)
            .map(|k| {
                let prev = if k == 0 { ZERO } else { self.coeff(k - 1) };
                lambda * self.coeff(k) - prev
            })
            .collect();
        Self::new(numer).div_linear(lambda.conj())
    }

    /// Divides by `1 - a z` (|a| < 1), same length.
    pub fn div_linear(&self, a: C64) -> Self {
        let mut out = Vec::with_capacity(self.len());
        let mut prev = ZERO;
        for c in &self.coeffs {
            prev = c + a * prev;
            out.push(prev);
        }
        Self::new(out)
    }

    /// Sum of squared coefficient moduli, i.e. the squared H² norm.
    pub fn h2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

/// `(k)_j = k (k-1) ... (k-j+1)`
pub(crate) fn falling_factorial(k: usize, j: usize) -> f64 {
    if j > k {
        return 0.0;
    }
    (0..j).map(|i| (k - i) as f64).product()
}

/// Horner evaluation of `Σ c_k z^k`.
pub fn eval_series(f: &CoeffSeries, z: C64) -> C64 {
    f.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// The disc automorphism `b_λ(z) = (λ - z) / (1 - λ̄ z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeFactor {
    lambda: C64,
}

impl BlaschkeFactor {
    pub fn new(lambda: C64) -> Result<Self> {
        check_in_disc(lambda)?;
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.lambda - z) / (ONE - self.lambda.conj() * z)
    }

    /// Taylor coefficients up to degree `n_out`.
    pub fn series(&self, n_out: usize) -> CoeffSeries {
        CoeffSeries::constant(ONE).mul_blaschke_factor(self.lambda, n_out + 1)
    }
}

/// Finite Blaschke product `Π b_{λ_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<C64>) -> Result<Self> {
        for &z in &zeros {
            check_in_disc(z)?;
        }
        Ok(Self { zeros })
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.zeros.iter().map(|&l| (l - z) / (ONE - l.conj() * z)).product()
    }

    /// Taylor coefficients up to degree `n_out`.
    pub fn series(&self, n_out: usize) -> CoeffSeries {
        let mut s = CoeffSeries::constant(ONE).truncated(n_out + 1);
        for &l in &self.zeros {
            s = s.mul_blaschke_factor(l, n_out + 1);
        }
        s
    }
}

pub fn blaschke_eval(zeros: &[C64], z: C64) -> Result<C64> {
    Ok(BlaschkeProduct::new(zeros.to_vec())?.eval(z))
}

/// A finite multiset σ of points of the open disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSet {
    points: Vec<C64>,
}

impl SigmaSet {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("sigma must contain at least one point".into()));
        }
        for &p in &points {
            check_in_disc(p)?;
        }
        Ok(Self { points })
    }

    /// σ_{λ,n}: the point λ repeated n times.
    pub fn repeated(lambda: C64, n: usize) -> Result<Self> {
        Self::new(vec![lambda; n])
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn r(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Distinct points with multiplicities, in order of first appearance.
    pub fn groups(&self) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for &p in &self.points {
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some((_, m)) => *m += 1,
                None => out.push((p, 1)),
            }
        }
        out
    }

    /// Jet functionals `(point, derivative order)` in grouped order.
    pub fn functionals(&self) -> Vec<(C64, usize)> {
        self.groups()
            .into_iter()
            .flat_map(|(p, m)| (0..m).map(move |d| (p, d)))
            .collect()
    }

    pub fn is_distinct(&self) -> bool {
        self.groups().len() == self.points.len()
    }

    /// The point when σ is a single point repeated, `None` otherwise.
    pub fn single_point(&self) -> Option<C64> {
        let g = self.groups();
        (g.len() == 1).then(|| g[0].0)
    }

    pub fn blaschke(&self) -> BlaschkeProduct {
        BlaschkeProduct {
            zeros: self.points.clone(),
        }
    }

    /// Jet of `f` on σ: derivatives in grouped order.
    pub fn jet_of(&self, f: &CoeffSeries) -> Vec<C64> {
        self.functionals()
            .into_iter()
            .map(|(p, d)| f.eval_derivative(p, d))
            .collect()
    }

    pub fn rotated(&self, u: C64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p * u).collect())
    }
}

/// Values of `f` at the `m` roots of unity `e^{2πij/m}` (exact folding of long series).
pub fn eval_on_circle(f: &CoeffSeries, m: usize) -> Vec<C64> {
    let mut buf = vec![ZERO; m];
    for (k, c) in f.coeffs().iter().enumerate() {
        buf[k % m] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Fourier coefficients `(1/m) Σ_j v_j e^{-2πijk/m}`.
fn coefficients_from_samples(mut samples: Vec<C64>) -> Vec<C64> {
    let m = samples.len();
    FftPlanner::new().plan_fft_forward(m).process(&mut samples);
    let scale = 1.0 / m as f64;
    samples.iter_mut().for_each(|c| *c *= scale);
    samples
}

fn composed_bins(f: &CoeffSeries, factor: &BlaschkeFactor, m: usize) -> Vec<C64> {
    let samples: Vec<C64> = (0..m)
        .map(|j| {
            let z = C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
            f.eval(factor.eval(z))
        })
        .collect();
    coefficients_from_samples(samples)
}

/// Samples `f ∘ b_λ` on the unit circle and returns the FFT bins for the
/// smallest grid whose upper half (the aliasing indicator) is negligible.
fn composed_bins_adaptive(f: &CoeffSeries, lambda: C64, min_grid: usize) -> Result<Vec<C64>> {
    let factor = BlaschkeFactor::new(lambda)?;
    let mut m = min_grid.next_power_of_two().max(64);
    loop {
        let bins = composed_bins(f, &factor, m);
        let scale = bins.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let alias = bins[m / 2..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if alias <= ALIAS_TOL * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
            return Ok(bins);
        }
        if m >= MAX_GRID {
            return Err(Error::Truncation(format!(
                "composition with b_λ (|λ| = {:.6}) still aliased at grid size {m}",
                lambda.norm()
            )));
        }
        m *= 2;
    }
}

/// Taylor coefficients of `f ∘ b_λ` up to degree `n_out`, extracted from
/// samples on the unit circle by FFT.
pub fn compose_with_blaschke(f: &CoeffSeries, lambda: C64, n_out: usize) -> Result<CoeffSeries> {
    let min_grid = 8 * (n_out + 1).max(f.len());
    let bins = composed_bins_adaptive(f, lambda, min_grid)?;
    Ok(CoeffSeries::new(bins[..=n_out].to_vec()))
}

/// Like [`compose_with_blaschke`] but picks the truncation degree by doubling
/// from [`DEFAULT_TRUNCATION`] until the discarded tail is below
/// `tol` times the retained head (both in ℓ²).
pub fn compose_with_blaschke_auto(f: &CoeffSeries, lambda: C64, tol: f64) -> Result<CoeffSeries> {
    let mut n_out = DEFAULT_TRUNCATION;
    loop {
        let min_grid = 8 * (n_out + 1).max(f.len());
        let bins = composed_bins_adaptive(f, lambda, min_grid)?;
        let half = bins.len() / 2;
        let head: f64 = bins[..=n_out].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let tail: f64 = bins[n_out + 1..half].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if tail <= tol * head || head == 0.0 {
            let mut out = bins[..=n_out].to_vec();
            let floor = 1e-17 * head;
            while out.len() > 1 && out.last().is_some_and(|c| c.norm() <= floor) {
                out.pop();
            }
            return Ok(CoeffSeries::new(out));
        }
        if n_out >= MAX_TRUNCATION {
            return Err(Error::Truncation(format!(
                "tail of f∘b_λ (|λ| = {:.6}) above {tol:e} at degree {n_out}",
                lambda.norm()
            )));
        }
        n_out *= 2;
    }
}

/// First `t.len()` Taylor coefficients of `g ∘ b_λ`, where `t` holds the
/// Taylor coefficients of `g` at λ. Pure series algebra, no sampling.
pub fn transplant_jet(lambda: C64, t: &[C64]) -> Result<Vec<C64>> {
    check_in_disc(lambda)?;
    let n = t.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // b_λ(z) - λ = -(1 - |λ|²) z / (1 - λ̄ z)
    let s = 1.0 - lambda.norm_sqr();
    let h = CoeffSeries::monomial(1, C64::new(-s, 0.0))
        .truncated(n)
        .div_linear(lambda.conj());
    let mut power = CoeffSeries::constant(ONE).truncated(n);
    let mut out = vec![ZERO; n];
    for tj in t {
        for (o, p) in out.iter_mut().zip(power.coeffs()) {
            *o += tj * p;
        }
        power = power.mul(&h, Some(n));
    }
    Ok(out)
}

/// Coefficientwise product `f ⋆ g`.
pub fn hadamard_product(f: &CoeffSeries, g: &CoeffSeries) -> CoeffSeries {
    CoeffSeries::new(f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| a * b).collect())
}

/// `p_n(z) = 1 + z + ... + z^{n-1}`.
pub fn dirichlet_kernel(n: usize) -> CoeffSeries {
    CoeffSeries::new(vec![ONE; n.max(1)])
}

/// Analytic part of the Fejér kernel of order n: coefficients `1 - k/n`, `k < n`.
pub fn fejer_kernel(n: usize) -> CoeffSeries {
    let n = n.max(1);
    CoeffSeries::new((0..n).map(|k| C64::new(1.0 - k as f64 / n as f64, 0.0)).collect())
}

pub fn derivative(f: &CoeffSeries) -> CoeffSeries {
    if f.len() <= 1 {
        return CoeffSeries::zero();
    }
    CoeffSeries::new(
        f.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect(),
    )
}
