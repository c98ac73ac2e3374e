//! Weighted measures, quadrature grids, sampled functions and L^p norms.

mod geometry;
mod grid;
mod measure;
mod sampled;

pub use geometry::Geometry;
pub use grid::{make_grid, make_grid_with_panels, GridKind, QuadratureGrid};
pub use measure::{abs_density, c_function, plancherel_density, weight_a};
pub use sampled::{density_weights, lp_norm, lp_norm_weighted, measure_weights, Measure, SampledFunction, Side};
