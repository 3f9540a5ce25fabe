//! Sobolev, homogeneous Sobolev and Gevrey norms of spectral fields, plus the
//! analyticity-radius diagnostic.
//!
//! Conventions: `mu_n = n(n+1) + 1`,
//! `||u||_{H^k}^2   = sum mu_n^k |u_n^m|^2`,
//! `||u||_{Hdot^k}^2 = sum_{n>=1} lambda_n^k |u_n^m|^2` (mean-free only),
//! `||u||_{G_lambda^{k/2}}^2 = sum mu_n^k e^{2 lambda sqrt(mu_n)} |u_n^m|^2`.
//!
//! The Gevrey norm is the operator norm `||A^{k/2} e^{lambda A^{1/2}} u||_{L^2}`
//! with `A = 1 - Delta`, so a single mode has norm
//! `mu_n^{k/2} e^{lambda sqrt(mu_n)}` and `lambda = 0` reduces exactly to `H^k`.

use crate::gaunt::expand_product;
use crate::sphere::{lambda, mu, SpectralField};
use crate::{Error, Result};

/// Gevrey-norm parameters: analyticity radius `lambda >= 0` and Sobolev
/// weight exponent `k` (the paper's default is `k = 2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevreySpec {
    pub lambda: f64,
    pub k: f64,
}

impl GevreySpec {
    pub fn new(lambda: f64) -> Self {
        assert!(lambda >= 0.0, "analyticity radius must be >= 0");
        Self { lambda, k: 2.0 }
    }

    pub fn with_k(lambda: f64, k: f64) -> Self {
        assert!(lambda >= 0.0);
        Self { lambda, k }
    }
}

fn degree_block_sq(u: &SpectralField, n: usize) -> f64 {
    let mut block = 0.0;
    for m in -(n as i32)..=n as i32 {
        let c = u.get(n, m);
        block += c * c;
    }
    block
}

/// Inhomogeneous Sobolev norm `H^k`.
pub fn sobolev_norm(u: &SpectralField, k: f64) -> f64 {
    let mut acc = 0.0;
    for n in 0..=u.max_degree() {
        acc += mu(n).powf(k) * degree_block_sq(u, n);
    }
    acc.sqrt()
}

/// Homogeneous Sobolev norm `Hdot^k`; errors on fields with nonzero mean.
pub fn homogeneous_sobolev_norm(u: &SpectralField, k: f64) -> Result<f64> {
    u.require_mean_free()?;
    let mut acc = 0.0;
    for n in 1..=u.max_degree() {
        let w = lambda(n).powf(k);
        for m in -(n as i32)..=n as i32 {
            let c = u.get(n, m);
            acc += w * c * c;
        }
    }
    Ok(acc.sqrt())
}

/// Gevrey norm; returns `+inf` when a term overflows the floating range.
///
/// At `lambda = 0` the exponential factor is exactly one, so the value agrees
/// bit-for-bit with `sobolev_norm(u, k)`.
pub fn gevrey_norm(u: &SpectralField, spec: GevreySpec) -> f64 {
    let mut acc = 0.0_f64;
    for n in 0..=u.max_degree() {
        let block = degree_block_sq(u, n);
        if block == 0.0 {
            continue;
        }
        let mu_n = mu(n);
        let exponent = 2.0 * spec.lambda * mu_n.sqrt();
        if exponent > f64::MAX.ln() {
            return f64::INFINITY;
        }
        acc += mu_n.powf(spec.k) * exponent.exp() * block;
    }
    if !acc.is_finite() {
        return f64::INFINITY;
    }
    acc.sqrt()
}

/// Ratio `||uv|| / (||u|| ||v||)` in the Gevrey norm; empirical probe of the
/// algebra constant.
pub fn algebra_defect(u: &SpectralField, v: &SpectralField, spec: GevreySpec) -> Result<f64> {
    let nu = gevrey_norm(u, spec);
    let nv = gevrey_norm(v, spec);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroDenominator(
            "algebra defect of a zero field".into(),
        ));
    }
    let product = expand_product(u, v)?;
    Ok(gevrey_norm(&product, spec) / (nu * nv))
}

/// Largest grid value of `lambda` with `gevrey_norm(u) <= bound`; `0` when
/// even the smallest grid point fails.
pub fn analyticity_profile(u: &SpectralField, bound: f64, lambda_grid: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for &l in lambda_grid {
        if gevrey_norm(u, GevreySpec::new(l)) <= bound {
            best = best.max(l);
        }
    }
    best
}
