//! Coefficient-space operators: Laplace-Beltrami, its inverses, the
//! longitude derivative and the mode projections.

use super::{lambda, SpectralField, Symmetry, TruncationSpec};
use crate::{Error, Result};

/// `Delta u`: multiply each degree-`n` coefficient by `-n(n+1)`.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    let mut out = u.clone();
    for n in 0..=u.max_degree() {
        let factor = -lambda(n);
        for m in -(n as i32)..=n as i32 {
            out.set(n, m, factor * u.get(n, m));
        }
    }
    out
}

/// `Delta^{-1} u` on mean-free fields; the result is mean-free.
pub fn invert_laplacian(u: &SpectralField) -> Result<SpectralField> {
    u.require_mean_free()?;
    let mut out = u.clone();
    out.set(0, 0, 0.0);
    for n in 1..=u.max_degree() {
        let factor = -1.0 / lambda(n);
        for m in -(n as i32)..=n as i32 {
            out.set(n, m, factor * u.get(n, m));
        }
    }
    Ok(out)
}

/// `(Delta + lambda_k)^{-1} u` on the complement of the degree-`k` kernel.
///
/// Coefficients at degree `k` must vanish; each other degree is divided by
/// `lambda_k - lambda_n`. The output has no degree-`k` content.
pub fn invert_shifted_helmholtz(u: &SpectralField, k: usize) -> Result<SpectralField> {
    let scale = u.l2_norm();
    let mut kernel_sq = 0.0;
    if k <= u.max_degree() {
        for m in -(k as i32)..=k as i32 {
            kernel_sq += u.get(k, m) * u.get(k, m);
        }
    }
    if kernel_sq.sqrt() > 1e-12 * scale.max(1e-300) {
        return Err(Error::KernelObstruction {
            degree: k,
            norm: kernel_sq.sqrt(),
        });
    }
    let lam_k = lambda(k);
    let mut out = u.clone();
    for n in 0..=u.max_degree() {
        if n == k {
            for m in -(n as i32)..=n as i32 {
                out.set(n, m, 0.0);
            }
            continue;
        }
        let factor = 1.0 / (lam_k - lambda(n));
        for m in -(n as i32)..=n as i32 {
            out.set(n, m, factor * u.get(n, m));
        }
    }
    Ok(out)
}

/// Longitude derivative in the real basis: the `(n, m)` cosine coefficient
/// moves to `(n, -m)` scaled by `-m`, the sine coefficient to `(n, m)`
/// scaled by `+m`; zonal coefficients map to zero.
pub fn d_phi(u: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(TruncationSpec::new(u.max_degree()));
    for n in 1..=u.max_degree() {
        for m in 1..=n as i32 {
            let c_cos = u.get(n, m);
            let c_sin = u.get(n, -m);
            out.set(n, -m, -(m as f64) * c_cos);
            out.set(n, m, m as f64 * c_sin);
        }
    }
    out
}

/// Zero every coefficient the symmetry class excludes. Idempotent.
pub fn project_symmetry(u: &SpectralField, class: Symmetry) -> SpectralField {
    let mut out = SpectralField::zeros(TruncationSpec {
        max_degree: u.max_degree(),
        symmetry: class,
    });
    for (idx, c) in u.iter() {
        if class.admits(idx.m) {
            out.set(idx.n, idx.m, c);
        }
    }
    out
}

/// Zero the degree-`k` coefficients. Idempotent.
pub fn project_out_degree(u: &SpectralField, k: usize) -> SpectralField {
    let mut out = u.clone();
    if k <= u.max_degree() {
        for m in -(k as i32)..=k as i32 {
            out.set(k, m, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{Transform, TruncationSpec};

    fn unit(n: usize, m: i32) -> SpectralField {
        SpectralField::harmonic(TruncationSpec::new(8), n, m)
    }

    #[test]
    fn laplacian_eigenvalues() {
        // Delta Y_2^2 = -6 Y_2^2;  Delta Y_0^0 = 0
        let u = unit(2, 2);
        let lu = laplacian(&u);
        assert_eq!(lu.get(2, 2), -6.0);
        assert_eq!(laplacian(&unit(0, 0)).l2_norm(), 0.0);
    }

    #[test]
    fn laplacian_inverse_round_trip() {
        let mut u = SpectralField::zeros(TruncationSpec::new(8));
        u.set(1, 0, 0.5);
        u.set(5, -3, -2.0);
        let v = invert_laplacian(&laplacian(&u)).unwrap();
        assert!(v.sub(&u).linf_coeff() < 1e-15);
        let mut bad = u.clone();
        bad.set(0, 0, 1.0);
        assert!(invert_laplacian(&bad).is_err());
    }

    #[test]
    fn shifted_helmholtz_paper_factors() {
        // (Delta+6)^{-1} Y_6^2 = -(1/36) Y_6^2 ; (Delta+6)^{-1} Y_4^2 = -(1/14) Y_4^2
        let v = invert_shifted_helmholtz(&unit(6, 2), 2).unwrap();
        assert!((v.get(6, 2) - (-1.0 / 36.0)).abs() < 1e-16);
        let v = invert_shifted_helmholtz(&unit(4, 2), 2).unwrap();
        assert!((v.get(4, 2) - (-1.0 / 14.0)).abs() < 1e-16);
        // kernel case errors
        assert!(matches!(
            invert_shifted_helmholtz(&unit(2, 0), 2),
            Err(Error::KernelObstruction { degree: 2, .. })
        ));
    }

    #[test]
    fn d_phi_pairing_and_square() {
        // d_phi Y_2^2 = -2 Y_2^{-2}; twice gives -m^2
        let du = d_phi(&unit(2, 2));
        assert_eq!(du.get(2, -2), -2.0);
        assert_eq!(du.get(2, 2), 0.0);
        let ddu = d_phi(&du);
        assert_eq!(ddu.get(2, 2), -4.0);
        // zonal fields die
        assert_eq!(d_phi(&unit(3, 0)).l2_norm(), 0.0);
    }

    #[test]
    fn d_phi_matches_grid_differentiation() {
        // oracle: differentiate the longitude factor analytically on the grid
        // and re-analyze, for a mixed field
        let mut u = SpectralField::zeros(TruncationSpec::new(6));
        u.set(2, 2, 1.25);
        u.set(4, -3, -0.6);
        u.set(5, 1, 0.3);
        let plan = Transform::for_degree(6);
        let spectral = plan.synthesize(&d_phi(&u)).unwrap();
        // grid oracle: build d/dphi pointwise from the basis definition
        let grid = plan.grid();
        let leg = crate::sphere::LegendreTable::new(6, &grid.theta_nodes);
        let mut oracle = crate::sphere::GridField::zeros(grid);
        for (idx, c) in u.iter() {
            if c == 0.0 || idx.m == 0 {
                continue;
            }
            let ma = idx.m.unsigned_abs() as usize;
            for i in 0..grid.n_theta {
                let t = leg.value(idx.n, ma, i);
                for (j, &phi) in grid.phi_nodes.iter().enumerate() {
                    let dtrig = if idx.m > 0 {
                        -(ma as f64) * (ma as f64 * phi).sin()
                    } else {
                        ma as f64 * (ma as f64 * phi).cos()
                    };
                    oracle.values[[i, j]] += c * t * dtrig;
                }
            }
        }
        let diff = spectral
            .values
            .iter()
            .zip(oracle.values.iter())
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(diff < 1e-13, "d_phi mismatch {diff}");
    }

    #[test]
    fn projections_are_idempotent() {
        let mut u = SpectralField::zeros(TruncationSpec::new(6));
        for (i, (n, m)) in [(3usize, 1i32), (4, 2), (2, 0), (6, 2), (5, -4)].iter().enumerate() {
            u.set(*n, *m, 1.0 + i as f64);
        }
        // project_symmetry(Y_3^1 + Y_4^2, even-cosine) keeps only Y_4^2
        let p = project_symmetry(&u, Symmetry::EvenCosine);
        assert_eq!(p.get(3, 1), 0.0);
        assert_eq!(p.get(5, -4), 0.0);
        assert_eq!(p.get(4, 2), u.get(4, 2));
        let pp = project_symmetry(&p, Symmetry::EvenCosine);
        assert_eq!(p, pp);

        // project_out_degree(Y_2^0 + Y_6^2, 2) keeps Y_6^2
        let q = project_out_degree(&u, 2);
        assert_eq!(q.get(2, 0), 0.0);
        assert_eq!(q.get(6, 2), u.get(6, 2));
        assert_eq!(project_out_degree(&q, 2), q);
    }
}
