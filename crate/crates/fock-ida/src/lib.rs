//! fock-ida: a numerical toolkit for operator theory on weighted Fock spaces.
//!
//! The library models the weighted Segal-Bargmann space F²(φ) of entire
//! functions that are square-integrable against e^{−2φ} dv on ℂ, for radial
//! weights φ(z) = (α/2)|z|² (+ an optional bounded radial perturbation), in
//! complex dimension one. On top of that space it computes, at desk scale:
//!
//! - reproducing kernels, normalized kernels k_z, and weighted L^p norms
//!   ([`space`]);
//! - r-lattices, sublattice splittings, and separation diagnostics
//!   ([`lattice`]);
//! - the local oscillation functionals G_r (mean-square distance to
//!   holomorphic functions on disks), M_{2,r}, MO_{2,r}, their L^p norms,
//!   the holomorphic/residual symbol decomposition f = f₁ + f₂, standard
//!   deviations against the Gaussian measure, cube double-integral
//!   functionals, and averaged measures μ̂_r ([`ida`]);
//! - finite sections of Toeplitz operators T_g and T_μ, the Bergman
//!   projection, Hankel operators H_f = (I−P)M_f through their Gram
//!   matrices, Berezin transforms, and kernel-vector norms ‖H_f(k_z)‖
//!   ([`operators`]);
//! - singular values, Schatten p-(quasi)norms, norm-equivalence and
//!   conjugate-symbol reports, and compactness profiles ([`schatten`]);
//! - the Ahlfors-Beurling transform as a Fourier multiplier, Wirtinger
//!   derivatives, and L^p derivative-ratio checks ([`beurling`]);
//! - a symbol catalog, experiment drivers, and CSV/JSON serialization
//!   ([`symbols`], [`config`], [`experiments`], [`io`]).
//!
//! Everything is finite and explicit: operators are compressed to a
//! truncated orthonormal monomial basis, plane integrals use polar
//! Gauss-Legendre × trapezoid grids with controlled Gaussian tails, and all
//! spectral results carry a truncation-order convergence delta. The
//! [`checks`] module bundles the acceptance suite that ties the numerics to
//! the closed-form oracles.

#![forbid(unsafe_code)]
#![warn(missing_docs)]
// Tolerance tests are written as `!(x <= tol)` on purpose: a NaN produced
// by a degenerate computation must fail the check, and the negated form is
// the one that fires on incomparable values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beurling;
pub mod checks;
pub mod config;
pub mod experiments;
pub mod ida;
pub mod io;
pub mod lattice;
pub mod operators;
pub mod quad;
pub mod schatten;
pub mod space;
pub mod symbols;

use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural parameter (order, radius, spacing, …) is outside the
    /// supported range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested weight cannot be handled by the basis builder.
    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),

    /// A quadrature rule failed to reach the requested accuracy; the payload
    /// is the observed residual.
    #[error("quadrature did not converge: residual {residual:.3e} ({context})")]
    QuadratureDiagnostic {
        /// Observed residual of the failed refinement comparison.
        residual: f64,
        /// Human-readable description of the failing integral.
        context: String,
    },

    /// The truncated kernel K_N(z,z) is too small to normalize at this point.
    #[error("truncation too small: K_N(z,z) = {value:.3e} at |z| = {radius:.3}")]
    TruncationTooSmall {
        /// Computed diagonal kernel value.
        value: f64,
        /// Modulus of the evaluation point.
        radius: f64,
    },

    /// The integration grid does not cover the effective support of the
    /// integrand (tail estimate above tolerance).
    #[error("insufficient grid: outer-band mass fraction {fraction:.3e} exceeds {tolerance:.3e}")]
    InsufficientGrid {
        /// Fraction of the integral carried by the outermost radial band.
        fraction: f64,
        /// Tolerance the fraction was tested against.
        tolerance: f64,
    },

    /// A symbol's declared growth class is inconsistent with its samples or
    /// with the requested operation.
    #[error("symbol class error: {0}")]
    SymbolClass(String),

    /// An operation received too little data to be defined (e.g. a
    /// separation constant of fewer than two points).
    #[error("undefined input: {0}")]
    UndefinedInput(String),

    /// A Gram matrix violated positive semidefiniteness beyond tolerance,
    /// i.e. the finite section is not trustworthy at this order.
    #[error("truncation error: minimal eigenvalue {min_eigenvalue:.3e} below -{tolerance:.3e}")]
    TruncationError {
        /// Most negative eigenvalue encountered.
        min_eigenvalue: f64,
        /// Allowed negativity tolerance.
        tolerance: f64,
    },

    /// A field represented on a uniform grid is not effectively supported
    /// inside it, so spectral differentiation would alias.
    #[error("periodization error: boundary magnitude {boundary:.3e} vs interior scale {scale:.3e}")]
    Periodization {
        /// Largest magnitude on the boundary ring.
        boundary: f64,
        /// Overall magnitude scale of the field.
        scale: f64,
    },

    /// Invalid run configuration (maps to CLI exit code 2).
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while reading configs or writing results.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
