//! Normalized associated Legendre tables.
//!
//! Entries are the colatitude parts of the real orthonormal harmonics,
//! `t_n^m(theta)`, so that `Y_n^m = t_n^{|m|}(theta) * {cos(m phi), 1, sin(|m| phi)}`.
//! The fully normalized three-term recurrence in `n` for fixed `m`, seeded by
//! the closed-form sectoral value, stays bounded for degrees well past 200
//! where the unnormalized `P_n^m` would overflow.

use crate::par;
use ndarray::Array2;
use std::f64::consts::PI;

/// Colatitude parts and their theta-derivatives for all `(n, m)` with
/// `m <= n <= max_degree`, tabulated at a fixed set of colatitude nodes.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    max_degree: usize,
    n_nodes: usize,
    /// `val[m]` has shape `(max_degree + 1 - m, n_nodes)`; row `r` is degree `m + r`.
    val: Vec<Array2<f64>>,
    dval: Vec<Array2<f64>>,
}

/// Recurrence factor for the sectoral chain `t_m^m = k_m sin(theta) t_{m-1}^{m-1}`.
fn sectoral_factor(m: usize) -> f64 {
    let f = (2 * m + 1) as f64 / (2 * m) as f64;
    if m == 1 {
        // the real basis carries sqrt(2) on every m > 0 column
        (2.0 * f).sqrt()
    } else {
        f.sqrt()
    }
}

fn recur_a(n: usize, m: usize) -> f64 {
    (((4 * n * n - 1) as f64) / ((n * n - m * m) as f64)).sqrt()
}

fn recur_b(n: usize, m: usize) -> f64 {
    let nm1 = n - 1;
    (((nm1 * nm1 - m * m) as f64) / ((4 * nm1 * nm1 - 1) as f64)).sqrt()
}

impl LegendreTable {
    /// Tabulate values and theta-derivatives at `theta_nodes` for all
    /// `n <= max_degree`.
    pub fn new(max_degree: usize, theta_nodes: &[f64]) -> Self {
        let n_nodes = theta_nodes.len();
        let cos_t: Vec<f64> = theta_nodes.iter().map(|t| t.cos()).collect();
        let sin_t: Vec<f64> = theta_nodes.iter().map(|t| t.sin()).collect();

        // sectoral chain t_m^m and its derivative, for every m
        let mut sec = vec![vec![0.0; n_nodes]; max_degree + 1];
        let mut dsec = vec![vec![0.0; n_nodes]; max_degree + 1];
        let t00 = 1.0 / (4.0 * PI).sqrt();
        for i in 0..n_nodes {
            sec[0][i] = t00;
        }
        for m in 1..=max_degree {
            let k = sectoral_factor(m);
            for i in 0..n_nodes {
                sec[m][i] = k * sin_t[i] * sec[m - 1][i];
                dsec[m][i] = k * (cos_t[i] * sec[m - 1][i] + sin_t[i] * dsec[m - 1][i]);
            }
        }

        let mut tables: Vec<(Array2<f64>, Array2<f64>)> = (0..=max_degree)
            .map(|m| {
                let rows = max_degree + 1 - m;
                (Array2::zeros((rows, n_nodes)), Array2::zeros((rows, n_nodes)))
            })
            .collect();

        par::for_each_mut(&mut tables, |m, (val, dval)| {
            for i in 0..n_nodes {
                val[[0, i]] = sec[m][i];
                dval[[0, i]] = dsec[m][i];
            }
            if m + 1 <= max_degree {
                let c = ((2 * m + 3) as f64).sqrt();
                for i in 0..n_nodes {
                    val[[1, i]] = c * cos_t[i] * val[[0, i]];
                    dval[[1, i]] = c * (-sin_t[i] * val[[0, i]] + cos_t[i] * dval[[0, i]]);
                }
            }
            for n in (m + 2)..=max_degree {
                let a = recur_a(n, m);
                let b = recur_b(n, m);
                let r = n - m;
                for i in 0..n_nodes {
                    val[[r, i]] = a * (cos_t[i] * val[[r - 1, i]] - b * val[[r - 2, i]]);
                    dval[[r, i]] = a
                        * (-sin_t[i] * val[[r - 1, i]] + cos_t[i] * dval[[r - 1, i]]
                            - b * dval[[r - 2, i]]);
                }
            }
        });

        let (val, dval) = tables.into_iter().unzip();
        Self {
            max_degree,
            n_nodes,
            val,
            dval,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// `t_n^m` at node `i`.
    #[inline]
    pub fn value(&self, n: usize, m: usize, i: usize) -> f64 {
        self.val[m][[n - m, i]]
    }

    /// `d t_n^m / d theta` at node `i`.
    #[inline]
    pub fn dvalue(&self, n: usize, m: usize, i: usize) -> f64 {
        self.dval[m][[n - m, i]]
    }

    /// Contiguous degree column `(values, derivatives)` for fixed `m`, node `i`
    /// unrolled over `n = m..=max_degree` as rows.
    #[inline]
    pub(crate) fn column(&self, m: usize) -> (&Array2<f64>, &Array2<f64>) {
        (&self.val[m], &self.dval[m])
    }
}

/// Single-`m` column of values and derivatives, `n = m..=max_degree`, without
/// building the full table. Used for stability checks at large degree.
pub fn legendre_column(max_degree: usize, m: usize, theta_nodes: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let table = ColumnBuilder::new(max_degree, m, theta_nodes);
    (table.val, table.dval)
}

/// Like [`legendre_column`] but also returning second theta-derivatives,
/// obtained by differentiating the recurrences twice (independent of the
/// Legendre differential equation, which it is used to verify).
pub fn legendre_column_d2(
    max_degree: usize,
    m: usize,
    theta_nodes: &[f64],
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let table = ColumnBuilder::new(max_degree, m, theta_nodes);
    (table.val, table.dval, table.d2val)
}

struct ColumnBuilder {
    val: Array2<f64>,
    dval: Array2<f64>,
    d2val: Array2<f64>,
}

impl ColumnBuilder {
    fn new(max_degree: usize, m: usize, theta_nodes: &[f64]) -> Self {
        assert!(m <= max_degree);
        let n_nodes = theta_nodes.len();
        let cos_t: Vec<f64> = theta_nodes.iter().map(|t| t.cos()).collect();
        let sin_t: Vec<f64> = theta_nodes.iter().map(|t| t.sin()).collect();
        let rows = max_degree + 1 - m;
        let mut val = Array2::zeros((rows, n_nodes));
        let mut dval = Array2::zeros((rows, n_nodes));
        let mut d2val = Array2::zeros((rows, n_nodes));

        // sectoral seed with first and second derivatives
        let mut s = vec![1.0 / (4.0 * PI).sqrt(); n_nodes];
        let mut ds = vec![0.0; n_nodes];
        let mut d2s = vec![0.0; n_nodes];
        for mm in 1..=m {
            let k = sectoral_factor(mm);
            let mut s2 = vec![0.0; n_nodes];
            let mut ds2 = vec![0.0; n_nodes];
            let mut d2s2 = vec![0.0; n_nodes];
            for i in 0..n_nodes {
                s2[i] = k * sin_t[i] * s[i];
                ds2[i] = k * (cos_t[i] * s[i] + sin_t[i] * ds[i]);
                d2s2[i] = k * (-sin_t[i] * s[i] + 2.0 * cos_t[i] * ds[i] + sin_t[i] * d2s[i]);
            }
            s = s2;
            ds = ds2;
            d2s = d2s2;
        }
        for i in 0..n_nodes {
            val[[0, i]] = s[i];
            dval[[0, i]] = ds[i];
            d2val[[0, i]] = d2s[i];
        }
        if rows > 1 {
            let c = ((2 * m + 3) as f64).sqrt();
            for i in 0..n_nodes {
                val[[1, i]] = c * cos_t[i] * val[[0, i]];
                dval[[1, i]] = c * (-sin_t[i] * val[[0, i]] + cos_t[i] * dval[[0, i]]);
                d2val[[1, i]] = c
                    * (-cos_t[i] * val[[0, i]] - 2.0 * sin_t[i] * dval[[0, i]]
                        + cos_t[i] * d2val[[0, i]]);
            }
        }
        for n in (m + 2)..=max_degree {
            let a = recur_a(n, m);
            let b = recur_b(n, m);
            let r = n - m;
            for i in 0..n_nodes {
                val[[r, i]] = a * (cos_t[i] * val[[r - 1, i]] - b * val[[r - 2, i]]);
                dval[[r, i]] = a
                    * (-sin_t[i] * val[[r - 1, i]] + cos_t[i] * dval[[r - 1, i]]
                        - b * dval[[r - 2, i]]);
                d2val[[r, i]] = a
                    * (-cos_t[i] * val[[r - 1, i]] - 2.0 * sin_t[i] * dval[[r - 1, i]]
                        + cos_t[i] * d2val[[r - 1, i]]
                        - b * d2val[[r - 2, i]]);
            }
        }
        Self { val, dval, d2val }
    }
}
