//! Finite-difference application of the Jacobi–Cherednik operator
//! T f(x) = f′(x) + [(2α+1) coth x + (2β+1) tanh x]·(f(x) − f(−x))/2 − ρ f(−x).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure_grid::{GridKind, QuadratureGrid, SampledFunction};
use crate::params::Params;

/// Applies T to samples on a uniform symmetric grid.
///
/// The derivative uses the fourth-order central stencil, so the two outermost nodes on each
/// side are dropped from the result.
pub fn cherednik_apply(f: &SampledFunction, p: &Params) -> Result<SampledFunction> {
    let grid = f.grid();
    if grid.kind() != GridKind::UniformMidpoint {
        return Err(Error::Grid("Cherednik operator needs a uniform symmetric grid".into()));
    }
    let n = grid.len();
    if n < 6 {
        return Err(Error::Grid(format!("Cherednik operator needs at least 6 nodes, got {n}")));
    }
    let x = grid.nodes();
    let h = x[1] - x[0];
    let v = f.values();
    let (a2, b2, rho) = (2.0 * p.alpha() + 1.0, 2.0 * p.beta() + 1.0, p.rho());
    let out: Vec<Complex64> = (2..n - 2)
        .map(|i| {
            let d = (-v[i + 2] + v[i + 1] * 8.0 - v[i - 1] * 8.0 + v[i - 2]) / (12.0 * h);
            let refl = v[n - 1 - i];
            let coef = a2 / x[i].tanh() + b2 * x[i].tanh();
            d + (v[i] - refl) * (0.5 * coef) - refl * rho
        })
        .collect();
    let inner = QuadratureGrid::from_parts(
        x[2..n - 2].to_vec(),
        grid.weights()[2..n - 2].to_vec(),
        grid.truncation() - 2.0 * h,
        GridKind::UniformMidpoint,
    )?;
    SampledFunction::new(inner.into(), out, f.side())
}
