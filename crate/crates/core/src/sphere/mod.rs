//! Real spherical harmonics, quadrature grids and the differential operators
//! acting on spectral fields.
//!
//! The basis convention is the real orthonormal one: for `m > 0` the harmonic
//! carries `cos(m phi)`, for `m < 0` it carries `sin(|m| phi)`, and the
//! Condon-Shortley phase of the associated Legendre function cancels against
//! the explicit `(-1)^m` prefactor, so e.g.
//! `Y_2^2 = (1/4) sqrt(15/pi) sin^2(theta) cos(2 phi)`.

mod grid;
mod legendre;
mod ops;
mod transform;

pub use grid::{gauss_legendre, GridField, QuadratureGrid};
pub use legendre::{legendre_column, legendre_column_d2, LegendreTable};
pub use ops::{
    d_phi, invert_laplacian, invert_shifted_helmholtz, laplacian, project_out_degree,
    project_symmetry,
};
pub use transform::Transform;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Eigenvalue of `-Delta` on degree-`n` harmonics.
pub fn lambda(n: usize) -> f64 {
    (n * (n + 1)) as f64
}

/// Sobolev weight `mu_n = lambda_n + 1`.
pub fn mu(n: usize) -> f64 {
    lambda(n) + 1.0
}

/// Index of a real spherical harmonic: degree `n >= 0`, order `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SphIndex {
    pub n: usize,
    pub m: i32,
}

impl SphIndex {
    pub fn new(n: usize, m: i32) -> Self {
        assert!(m.unsigned_abs() as usize <= n, "|m| <= n violated: ({n},{m})");
        Self { n, m }
    }
}

/// Symmetry class of a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// No restriction.
    #[serde(rename = "full")]
    Full,
    /// Only `m >= 0` even orders (fields even in `phi` with `cos(2k phi)`
    /// longitude dependence).
    #[serde(rename = "even-cosine")]
    EvenCosine,
}

impl Symmetry {
    /// Does the class admit a nonzero coefficient at `(n, m)`?
    pub fn admits(self, m: i32) -> bool {
        match self {
            Symmetry::Full => true,
            Symmetry::EvenCosine => m >= 0 && m % 2 == 0,
        }
    }

    /// Class of a pointwise product of fields in classes `self` and `other`.
    pub fn product(self, other: Symmetry) -> Symmetry {
        if self == Symmetry::EvenCosine && other == Symmetry::EvenCosine {
            Symmetry::EvenCosine
        } else {
            Symmetry::Full
        }
    }
}

/// Galerkin cutoff: maximum degree plus symmetry class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub max_degree: usize,
    pub symmetry: Symmetry,
}

impl TruncationSpec {
    pub fn new(max_degree: usize) -> Self {
        Self {
            max_degree,
            symmetry: Symmetry::Full,
        }
    }

    pub fn even_cosine(max_degree: usize) -> Self {
        Self {
            max_degree,
            symmetry: Symmetry::EvenCosine,
        }
    }

    /// Number of coefficients stored up to the cutoff.
    pub fn len(&self) -> usize {
        (self.max_degree + 1) * (self.max_degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Real spherical-harmonic coefficient vector up to a truncation degree.
///
/// Storage is dense: the coefficient of `Y_n^m` sits at `n^2 + n + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    trunc: TruncationSpec,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(trunc: TruncationSpec) -> Self {
        Self {
            coeffs: vec![0.0; trunc.len()],
            trunc,
        }
    }

    /// Field with a single unit coefficient at `(n, m)`.
    pub fn harmonic(trunc: TruncationSpec, n: usize, m: i32) -> Self {
        let mut f = Self::zeros(trunc);
        f.set(n, m, 1.0);
        f
    }

    pub fn truncation(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn max_degree(&self) -> usize {
        self.trunc.max_degree
    }

    #[inline]
    fn idx(&self, n: usize, m: i32) -> usize {
        debug_assert!(n <= self.trunc.max_degree);
        debug_assert!(m.unsigned_abs() as usize <= n);
        n * n + (n as i32 + m) as usize
    }

    #[inline]
    pub fn get(&self, n: usize, m: i32) -> f64 {
        if n > self.trunc.max_degree {
            return 0.0;
        }
        self.coeffs[self.idx(n, m)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, m: i32, value: f64) {
        let i = self.idx(n, m);
        self.coeffs[i] = value;
    }

    #[inline]
    pub fn add_to(&mut self, n: usize, m: i32, value: f64) {
        let i = self.idx(n, m);
        self.coeffs[i] += value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Iterate `(index, coefficient)` over all stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (SphIndex, f64)> + '_ {
        (0..=self.trunc.max_degree).flat_map(move |n| {
            (-(n as i32)..=n as i32).map(move |m| (SphIndex { n, m }, self.get(n, m)))
        })
    }

    /// `self + s * other` (degrees above the receiver's cutoff are dropped by
    /// choice of the receiver; extend first if that matters).
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        let n_min = self.trunc.max_degree.min(other.trunc.max_degree);
        for n in 0..=n_min {
            for m in -(n as i32)..=n as i32 {
                self.add_to(n, m, s * other.get(n, m));
            }
        }
        if other.trunc.symmetry == Symmetry::Full {
            self.trunc.symmetry = Symmetry::Full;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Copy into a (possibly larger or smaller) truncation.
    pub fn resized(&self, trunc: TruncationSpec) -> SpectralField {
        let mut out = SpectralField::zeros(trunc);
        let n_min = trunc.max_degree.min(self.trunc.max_degree);
        for n in 0..=n_min {
            for m in -(n as i32)..=n as i32 {
                if trunc.symmetry.admits(m) {
                    out.set(n, m, self.get(n, m));
                }
            }
        }
        out
    }

    /// L2 inner product (Parseval).
    pub fn dot(&self, other: &SpectralField) -> f64 {
        let n_min = self.trunc.max_degree.min(other.trunc.max_degree);
        let mut acc = 0.0;
        for n in 0..=n_min {
            for m in -(n as i32)..=n as i32 {
                acc += self.get(n, m) * other.get(n, m);
            }
        }
        acc
    }

    /// L2 norm (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn linf_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// Error unless the spherical mean vanishes (relative to the field size).
    pub fn require_mean_free(&self) -> Result<()> {
        let scale = self.l2_norm().max(1.0);
        if self.mean().abs() > 1e-12 * scale {
            return Err(Error::NonMeanFree { mean: self.mean() });
        }
        Ok(())
    }

    /// Check the stored invariants: finiteness, and the symmetry class.
    pub fn validate(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::FieldFormat("non-finite coefficient".into()));
        }
        if self.trunc.symmetry == Symmetry::EvenCosine {
            for (idx, c) in self.iter() {
                if c != 0.0 && !Symmetry::EvenCosine.admits(idx.m) {
                    return Err(Error::FieldFormat(format!(
                        "even-cosine field has nonzero coefficient at ({}, {})",
                        idx.n, idx.m
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serialize as JSON: header plus an array of `{n, m, value}` records for
    /// the nonzero coefficients, with 17 significant digits.
    pub fn to_json(&self) -> String {
        let sym = match self.trunc.symmetry {
            Symmetry::Full => "full",
            Symmetry::EvenCosine => "even-cosine",
        };
        let mut s = String::new();
        s.push_str(&format!(
            "{{\n  \"max_degree\": {},\n  \"symmetry\": \"{}\",\n  \"coeffs\": [",
            self.trunc.max_degree, sym
        ));
        let mut first = true;
        for (idx, c) in self.iter() {
            if c == 0.0 {
                continue;
            }
            if !first {
                s.push(',');
            }
            first = false;
            s.push_str(&format!(
                "\n    {{\"n\": {}, \"m\": {}, \"value\": {:.16e}}}",
                idx.n, idx.m, c
            ));
        }
        s.push_str("\n  ]\n}\n");
        s
    }

    /// Parse the JSON produced by [`SpectralField::to_json`].
    pub fn from_json(text: &str) -> Result<SpectralField> {
        #[derive(Deserialize)]
        struct Record {
            n: usize,
            m: i32,
            value: f64,
        }
        #[derive(Deserialize)]
        struct FieldFile {
            max_degree: usize,
            symmetry: Symmetry,
            coeffs: Vec<Record>,
        }
        let file: FieldFile = serde_json::from_str(text)
            .map_err(|e| Error::FieldFormat(format!("bad field JSON: {e}")))?;
        let trunc = TruncationSpec {
            max_degree: file.max_degree,
            symmetry: file.symmetry,
        };
        let mut out = SpectralField::zeros(trunc);
        for r in &file.coeffs {
            if r.n > file.max_degree || r.m.unsigned_abs() as usize > r.n {
                return Err(Error::FieldFormat(format!(
                    "record ({}, {}) outside truncation N = {}",
                    r.n, r.m, file.max_degree
                )));
            }
            out.set(r.n, r.m, r.value);
        }
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_is_dense() {
        let f = SpectralField::zeros(TruncationSpec::new(3));
        let mut seen = vec![false; 16];
        for n in 0..=3usize {
            for m in -(n as i32)..=n as i32 {
                let i = f.idx(n, m);
                assert!(!seen[i], "collision at ({n},{m})");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn json_round_trip_preserves_bits() {
        let mut f = SpectralField::zeros(TruncationSpec::even_cosine(4));
        f.set(2, 2, 0.1 + 0.2); // not exactly representable as short decimal
        f.set(4, 0, -3.25e-17);
        let g = SpectralField::from_json(&f.to_json()).unwrap();
        assert_eq!(f.get(2, 2).to_bits(), g.get(2, 2).to_bits());
        assert_eq!(f.get(4, 0).to_bits(), g.get(4, 0).to_bits());
        assert_eq!(g.truncation().symmetry, Symmetry::EvenCosine);
    }

    #[test]
    fn symmetry_violating_record_rejected() {
        let text = r#"{"max_degree": 3, "symmetry": "even-cosine",
                       "coeffs": [{"n": 3, "m": 1, "value": 1.0}]}"#;
        assert!(SpectralField::from_json(text).is_err());
    }

    #[test]
    fn mean_free_guard() {
        let mut f = SpectralField::zeros(TruncationSpec::new(2));
        f.set(1, 0, 1.0);
        assert!(f.require_mean_free().is_ok());
        f.set(0, 0, 1e-6);
        assert!(matches!(
            f.require_mean_free(),
            Err(Error::NonMeanFree { .. })
        ));
    }
}
