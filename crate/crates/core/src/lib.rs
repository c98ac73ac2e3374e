//! Numerical toolkit for the Opdam–Cherednik transform on the real line.
//!
//! Pointwise special functions, measures and quadrature rules are generic over [`Scalar`]
//! (`f32` or `f64`). Sampled pipelines (transform plans, translation tensors, time-frequency
//! planes, operator matrices) work in double precision through the [`Real`] and [`Cplx`]
//! aliases.

pub mod cache;
pub mod error;
pub mod families;
pub mod localization;
pub mod measure_grid;
pub mod mod_spaces;
pub mod modulation_window;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod special_fn;
pub mod transform;
pub mod translation_conv;

pub use error::{Error, Result};
pub use params::Params;
pub use scalar::Scalar;

/// Real scalar of the sampled pipelines.
pub type Real = f64;
/// Complex scalar of the sampled pipelines.
pub type Cplx = num_complex::Complex<Real>;
