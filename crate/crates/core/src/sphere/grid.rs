use crate::{Error, Result};
use ndarray::Array2;
use std::f64::consts::PI;

/// Gauss-Legendre nodes (ascending in `x = cos(theta)`) and weights on
/// `[-1, 1]`, by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // evaluate (P_n, P_n') at x via the three-term recurrence
    let eval = |x: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        let dp = if x * x == 1.0 {
            f64::NAN
        } else {
            n as f64 * (x * p1 - p0) / (x * x - 1.0)
        };
        (p1, dp)
    };
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = if n % 2 == 1 && i == m - 1 {
            0.0
        } else {
            (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos()
        };
        for _ in 0..100 {
            let (p, dp) = eval(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = eval(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Smallest integer `>= n` whose prime factors are in `{2, 3, 5}`.
pub(crate) fn fft_friendly(n: usize) -> usize {
    let mut k = n.max(1);
    loop {
        let mut r = k;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return k;
        }
        k += 1;
    }
}

/// Gauss-Legendre x uniform-longitude quadrature grid on the sphere.
///
/// `sum(theta_weights) = 2` and all colatitude nodes lie strictly inside
/// `(0, pi)`, so `1/sin(theta)` stays bounded on the grid.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta_nodes: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    pub phi_nodes: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        // descending theta <-> ascending x; keep theta ascending instead
        let cos_theta: Vec<f64> = x.iter().rev().copied().collect();
        let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
        let theta_nodes: Vec<f64> = cos_theta.iter().map(|c| c.acos()).collect();
        let sin_theta: Vec<f64> = cos_theta.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let phi_nodes: Vec<f64> = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        Self {
            n_theta,
            n_phi,
            theta_nodes,
            theta_weights,
            cos_theta,
            sin_theta,
            phi_nodes,
        }
    }

    /// Grid integrating products of total spherical-polynomial degree `d`
    /// exactly: `d/2 + 1` Gauss nodes and an FFT-friendly `n_phi >= d + 1`.
    pub fn for_integrand_degree(d: usize) -> Self {
        Self::new(d / 2 + 1, fft_friendly(d + 1))
    }

    /// Quadrature weight of the full 2D rule at `(i, j)`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.theta_weights[i] * 2.0 * PI / self.n_phi as f64
    }

    /// Integral of a grid function over the sphere.
    pub fn integrate(&self, g: &GridField) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut acc = 0.0;
        for i in 0..self.n_theta {
            let mut row = 0.0;
            for j in 0..self.n_phi {
                row += g.values[[i, j]];
            }
            acc += self.theta_weights[i] * row;
        }
        acc * dphi
    }

    /// `integral of g^2` over the sphere.
    pub fn integrate_sq(&self, g: &GridField) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut acc = 0.0;
        for i in 0..self.n_theta {
            let mut row = 0.0;
            for j in 0..self.n_phi {
                let v = g.values[[i, j]];
                row += v * v;
            }
            acc += self.theta_weights[i] * row;
        }
        acc * dphi
    }

    pub(crate) fn check_resolves(&self, max_degree: usize) -> Result<()> {
        let need_theta = max_degree + 1;
        let need_phi = 2 * max_degree + 1;
        if self.n_theta < need_theta || self.n_phi < need_phi {
            return Err(Error::GridTooCoarse {
                need_theta,
                need_phi,
                have_theta: self.n_theta,
                have_phi: self.n_phi,
            });
        }
        Ok(())
    }
}

/// Values on a quadrature grid (`n_theta x n_phi`).
#[derive(Debug, Clone)]
pub struct GridField {
    pub values: Array2<f64>,
}

impl GridField {
    pub fn zeros(grid: &QuadratureGrid) -> Self {
        Self {
            values: Array2::zeros((grid.n_theta, grid.n_phi)),
        }
    }

    pub fn n_theta(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_phi(&self) -> usize {
        self.values.ncols()
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridField) -> GridField {
        GridField {
            values: &self.values * &other.values,
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridField {
        GridField {
            values: self.values.mapv(f),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1usize, 2, 3, 7, 24, 50, 74, 201] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: sum = {s}");
            assert!(x.iter().all(|v| v.abs() < 1.0));
            // ascending
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // q nodes are exact through degree 2q - 1
        let (x, w) = gauss_legendre(6);
        for d in 0..=11usize {
            let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
            let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            assert!((quad - exact).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn poles_never_sampled() {
        let g = QuadratureGrid::new(33, 64);
        assert!(g.theta_nodes.iter().all(|&t| t > 0.0 && t < PI));
        assert!(g.sin_theta.iter().all(|&s| s > 1e-3));
        let s: f64 = g.theta_weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn fft_friendly_sizes() {
        assert_eq!(fft_friendly(145), 150);
        assert_eq!(fft_friendly(97), 100);
        assert_eq!(fft_friendly(73), 75);
        assert_eq!(fft_friendly(49), 50);
        assert_eq!(fft_friendly(1), 1);
    }
}
