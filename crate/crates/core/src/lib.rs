//! Spectral machinery for steady solutions of the 2D incompressible Euler
//! equations on the rotating unit sphere.
//!
//! The crate provides:
//!
//! * real spherical-harmonic transforms on Gauss-Legendre grids ([`sphere`]),
//! * exact triple products and product expansions of harmonics ([`gaunt`]),
//! * Sobolev and Gevrey norm diagnostics ([`norms`]),
//! * the fixed-point construction of non-zonal steady states bifurcating
//!   from the degree-2 Rossby-Haurwitz flow ([`construct`]),
//! * pseudo-spectral time evolution of the vorticity equation ([`dynamics`]),
//! * spectral non-resonance and coercivity diagnostics for flows near rigid
//!   rotation ([`rigidity`]).
//!
//! All grid work runs data-parallel via rayon when the `parallel` feature is
//! enabled (the default); disabling it yields a dependency-free sequential
//! build with identical results.

pub mod construct;
pub mod dynamics;
pub mod error;
pub mod gaunt;
pub mod norms;
mod par;
pub mod rigidity;
pub mod sphere;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Cap the worker pool used by data-parallel sections.
///
/// No-op when the crate is built without the `parallel` feature. Returns
/// `false` if the pool was already initialised.
pub fn set_max_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        true
    }
}
