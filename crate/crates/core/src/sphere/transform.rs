use super::grid::fft_friendly;
use super::ops::d_phi;
use super::{GridField, LegendreTable, QuadratureGrid, SpectralField, TruncationSpec};
use crate::{par, Result};
use ndarray::Array2;
use std::f64::consts::PI;

/// Transform plan: a quadrature grid together with the Legendre and
/// longitude tables needed to move fields between coefficients and grid
/// values up to a fixed degree.
#[derive(Debug, Clone)]
pub struct Transform {
    grid: QuadratureGrid,
    max_degree: usize,
    leg: LegendreTable,
    cos_m: Array2<f64>,
    sin_m: Array2<f64>,
}

impl Transform {
    pub fn new(grid: QuadratureGrid, max_degree: usize) -> Result<Self> {
        grid.check_resolves(max_degree)?;
        let leg = LegendreTable::new(max_degree, &grid.theta_nodes);
        let mut cos_m = Array2::zeros((max_degree + 1, grid.n_phi));
        let mut sin_m = Array2::zeros((max_degree + 1, grid.n_phi));
        for m in 0..=max_degree {
            for (j, &phi) in grid.phi_nodes.iter().enumerate() {
                let a = m as f64 * phi;
                cos_m[[m, j]] = a.cos();
                sin_m[[m, j]] = a.sin();
            }
        }
        Ok(Self {
            grid,
            max_degree,
            leg,
            cos_m,
            sin_m,
        })
    }

    /// Minimal exact transform for degree-`n` fields (linear products only).
    pub fn for_degree(n: usize) -> Self {
        Self::new(QuadratureGrid::new(n + 1, fft_friendly(2 * n + 1)), n).unwrap()
    }

    /// Dealiased grid for quadratic products of degree-`n` fields analyzed
    /// back to degree `n` (the 3/2 rule).
    pub fn for_quadratic(n: usize) -> Self {
        let n_theta = (3 * n).div_ceil(2) + 1;
        Self::new(QuadratureGrid::new(n_theta, fft_friendly(3 * n + 1)), n).unwrap()
    }

    /// Construction grid: cubic integrands against degree-`n` harmonics,
    /// `n_theta = 2n + 2` Gauss nodes and FFT-friendly `n_phi >= 6n + 1`.
    pub fn for_cubic_construction(n: usize) -> Self {
        Self::new(QuadratureGrid::new(2 * n + 2, fft_friendly(6 * n + 1)), n).unwrap()
    }

    /// Residual-audit grid: exact analysis of cubic content (degree `3n`)
    /// against harmonics up to degree `3n`.
    pub fn for_audit(n: usize) -> Self {
        Self::new(
            QuadratureGrid::new(3 * n + 2, fft_friendly(6 * n + 1)),
            3 * n,
        )
        .unwrap()
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn theta_accumulate(&self, u: &SpectralField, derivative: bool, i: usize) -> (Vec<f64>, Vec<f64>) {
        let nu = u.max_degree().min(self.max_degree);
        let mut acc_c = vec![0.0; nu + 1];
        let mut acc_s = vec![0.0; nu + 1];
        for m in 0..=nu {
            let (val, dval) = self.leg.column(m);
            let tab = if derivative { dval } else { val };
            let mut c = 0.0;
            let mut s = 0.0;
            for n in m..=nu {
                let t = tab[[n - m, i]];
                c += u.get(n, m as i32) * t;
                if m > 0 {
                    s += u.get(n, -(m as i32)) * t;
                }
            }
            acc_c[m] = c;
            acc_s[m] = s;
        }
        (acc_c, acc_s)
    }

    fn synthesize_impl(&self, u: &SpectralField, derivative: bool) -> Result<GridField> {
        if u.max_degree() > self.max_degree {
            // content above the plan's tables must vanish
            for (idx, c) in u.iter() {
                if idx.n > self.max_degree && c != 0.0 {
                    self.grid.check_resolves(u.max_degree())?;
                    return Err(crate::Error::GridTooCoarse {
                        need_theta: u.max_degree() + 1,
                        need_phi: 2 * u.max_degree() + 1,
                        have_theta: self.grid.n_theta,
                        have_phi: self.grid.n_phi,
                    });
                }
            }
        }
        let n_phi = self.grid.n_phi;
        let rows = par::map_indexed(self.grid.n_theta, |i| {
            let (acc_c, acc_s) = self.theta_accumulate(u, derivative, i);
            let mut row = vec![0.0; n_phi];
            for (m, &c) in acc_c.iter().enumerate() {
                if c != 0.0 {
                    for j in 0..n_phi {
                        row[j] += c * self.cos_m[[m, j]];
                    }
                }
                let s = acc_s[m];
                if s != 0.0 {
                    for j in 0..n_phi {
                        row[j] += s * self.sin_m[[m, j]];
                    }
                }
            }
            row
        });
        let mut values = Array2::zeros((self.grid.n_theta, n_phi));
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[[i, j]] = v;
            }
        }
        Ok(GridField { values })
    }

    /// Pointwise values of the truncated expansion.
    pub fn synthesize(&self, u: &SpectralField) -> Result<GridField> {
        self.synthesize_impl(u, false)
    }

    /// Pointwise values of `d u / d theta`.
    pub fn synthesize_dtheta(&self, u: &SpectralField) -> Result<GridField> {
        self.synthesize_impl(u, true)
    }

    /// Longitude Fourier profiles of `g`: row `i` holds
    /// `(2 pi / n_phi) * sum_j g[i][j] trig(m phi_j)` for `m <= max_degree`.
    fn phi_profiles(&self, g: &GridField) -> (Array2<f64>, Array2<f64>) {
        let n_m = self.max_degree + 1;
        let n_phi = self.grid.n_phi;
        let dphi = 2.0 * PI / n_phi as f64;
        let rows = par::map_indexed(self.grid.n_theta, |i| {
            let mut fc = vec![0.0; n_m];
            let mut fs = vec![0.0; n_m];
            for m in 0..n_m {
                let mut c = 0.0;
                let mut s = 0.0;
                for j in 0..n_phi {
                    let v = g.values[[i, j]];
                    c += v * self.cos_m[[m, j]];
                    s += v * self.sin_m[[m, j]];
                }
                fc[m] = c * dphi;
                fs[m] = s * dphi;
            }
            (fc, fs)
        });
        let mut f_cos = Array2::zeros((self.grid.n_theta, n_m));
        let mut f_sin = Array2::zeros((self.grid.n_theta, n_m));
        for (i, (fc, fs)) in rows.into_iter().enumerate() {
            for m in 0..n_m {
                f_cos[[i, m]] = fc[m];
                f_sin[[i, m]] = fs[m];
            }
        }
        (f_cos, f_sin)
    }

    /// Spectral coefficients of `g`, exact for band-limited content when the
    /// grid covers the combined integrand degree.
    pub fn analyze(&self, g: &GridField, trunc: TruncationSpec) -> Result<SpectralField> {
        self.grid.check_resolves(trunc.max_degree)?;
        assert!(trunc.max_degree <= self.max_degree, "plan tables too small");
        let (f_cos, f_sin) = self.phi_profiles(g);
        let w = &self.grid.theta_weights;
        let nt = self.grid.n_theta;
        let nu = trunc.max_degree;
        let per_m: Vec<Vec<(usize, i32, f64)>> = par::map_indexed(nu + 1, |m| {
            let (val, _) = self.leg.column(m);
            let mut out = Vec::new();
            for n in m..=nu {
                if trunc.symmetry.admits(m as i32) {
                    let mut acc = 0.0;
                    for i in 0..nt {
                        acc += w[i] * val[[n - m, i]] * f_cos[[i, m]];
                    }
                    out.push((n, m as i32, acc));
                }
                if m > 0 && trunc.symmetry.admits(-(m as i32)) {
                    let mut acc = 0.0;
                    for i in 0..nt {
                        acc += w[i] * val[[n - m, i]] * f_sin[[i, m]];
                    }
                    out.push((n, -(m as i32), acc));
                }
            }
            out
        });
        let mut out = SpectralField::zeros(trunc);
        for entries in per_m {
            for (n, m, v) in entries {
                out.set(n, m, v);
            }
        }
        Ok(out)
    }

    /// Quadrature projection of `g` onto the single harmonic `Y_n^m`.
    pub fn project(&self, g: &GridField, n: usize, m: i32) -> f64 {
        let ma = m.unsigned_abs() as usize;
        let (val, _) = self.leg.column(ma);
        let trig = if m >= 0 { &self.cos_m } else { &self.sin_m };
        let dphi = 2.0 * PI / self.grid.n_phi as f64;
        let mut acc = 0.0;
        for i in 0..self.grid.n_theta {
            let mut row = 0.0;
            for j in 0..self.grid.n_phi {
                row += g.values[[i, j]] * trig[[ma, j]];
            }
            acc += self.grid.theta_weights[i] * val[[n - ma, i]] * row;
        }
        acc * dphi
    }

    /// Advective Jacobian `(1/sin)(d_phi psi d_theta q - d_theta psi d_phi q)`
    /// evaluated pseudospectrally and analyzed back to `out` resolution.
    pub fn jacobian(
        &self,
        psi: &SpectralField,
        q: &SpectralField,
        out: TruncationSpec,
    ) -> Result<SpectralField> {
        let gt_psi = self.synthesize_dtheta(psi)?;
        let gp_psi = self.synthesize(&d_phi(psi))?;
        let gt_q = self.synthesize_dtheta(q)?;
        let gp_q = self.synthesize(&d_phi(q))?;
        let mut point = GridField::zeros(&self.grid);
        for i in 0..self.grid.n_theta {
            let inv_sin = 1.0 / self.grid.sin_theta[i];
            for j in 0..self.grid.n_phi {
                point.values[[i, j]] = inv_sin
                    * (gp_psi.values[[i, j]] * gt_q.values[[i, j]]
                        - gt_psi.values[[i, j]] * gp_q.values[[i, j]]);
            }
        }
        self.analyze(&point, out)
    }
}
