//! Complex Gamma, ₂F₁ on the non-positive axis, Jacobi functions, Opdam eigenfunctions and
//! the Jacobi–Cherednik operator.

mod cherednik;
mod gamma;
mod hypergeometric;
mod jacobi;

pub use cherednik::cherednik_apply;
pub use gamma::{complex_gamma, is_pole, ln_gamma_real, recip_gamma, POLE_TOL};
pub use hypergeometric::{gauss_2f1, series_connection, series_direct, series_pfaff, MAX_TERMS};
pub use jacobi::{jacobi_phi, opdam_g, opdam_g_pair};
