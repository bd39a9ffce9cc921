//! Products of one-dimensional tempered distributions represented as
//! boundary values of rational holomorphic functions.
//!
//! A distribution `f` is carried by a [`HyperfunctionPair`] `(f⁺, f⁻)` whose
//! regularization `F^y(x) = f⁺(x+iy) − f⁻(x−iy)` tends to `f` as `y → 0⁺`.
//! The product `f₁⋯f_m` is probed by smearing `F₁^y⋯F_m^y` against a test
//! function and sending `y → 0`. When that limit fails, [`Extension`] builds
//! the Taylor-subtracted continuation with point-supported counterterms
//! `Σ c_κ δ^(κ)`.
//!
//! Modules:
//! - [`testfn`]: Gaussian-polynomial test functions, plateau cutoffs, seminorms.
//! - [`boundary`]: hyperfunction pairs, the catalog, growth-bound fitting.
//! - [`pairing`]: smeared products, `y → 0` extrapolation, divergence analysis.
//! - [`extension`]: the subtracted continuation and its ambiguity.
//! - [`cli`]: expression grammar, jobs and JSON reports.

pub mod boundary;
pub mod cli;
mod error;
pub mod extension;
pub mod fit;
pub mod pairing;
pub mod poly;
pub mod quadrature;
pub mod testfn;

pub use boundary::{catalog, CatalogEntry, GrowthRegion, GrowthReport, HyperfunctionPair};
pub use error::{Error, Result};
pub use extension::{Extension, ExtensionReport};
pub use pairing::{PairingResult, ProductExpression, Schedule, Status};
pub use testfn::{PlateauCutoff, SeminormReport, Smooth, TestFunction};

pub use num_complex::Complex64;
