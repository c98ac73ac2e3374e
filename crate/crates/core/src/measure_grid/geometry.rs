use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{make_grid_with_panels, GridKind, QuadratureGrid};
use crate::error::{Error, Result};

/// Sizes and half-widths of the time, spectral and frequency-slot grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Time half-width X.
    pub x_max: f64,
    /// Spectral half-width Λ.
    pub lambda_max: f64,
    pub n_x: usize,
    pub n_lambda: usize,
    /// Size of the ξ grid of time-frequency planes, on [−Λ, Λ].
    pub n_xi: usize,
    /// Nodes of the kernel χ-rule.
    pub n_chi: usize,
    #[serde(default = "default_kind")]
    pub kind: GridKind,
    #[serde(default = "one")]
    pub panels_per_side: usize,
}

fn default_kind() -> GridKind {
    GridKind::GaussLegendreComposite
}

fn one() -> usize {
    1
}

impl Default for Geometry {
    fn default() -> Self {
        Self { x_max: 4.0, lambda_max: 16.0, n_x: 128, n_lambda: 256, n_xi: 64, n_chi: 64, kind: default_kind(), panels_per_side: 1 }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.lambda_max > 0.0) || !self.x_max.is_finite() || !self.lambda_max.is_finite() {
            return Err(Error::Config("half-widths must be positive and finite".into()));
        }
        if self.n_chi == 0 {
            return Err(Error::Config("n_chi must be positive".into()));
        }
        for (name, n) in [("n_x", self.n_x), ("n_lambda", self.n_lambda), ("n_xi", self.n_xi)] {
            if n == 0 || n % 2 == 1 {
                return Err(Error::Config(format!("{name} must be even and positive, got {n}")));
            }
        }
        Ok(())
    }

    /// Same geometry with every grid size doubled.
    pub fn refined(&self) -> Self {
        Self { n_x: 2 * self.n_x, n_lambda: 2 * self.n_lambda, n_xi: 2 * self.n_xi, ..*self }
    }

    fn grid(&self, half: f64, n: usize) -> Result<Arc<QuadratureGrid>> {
        let panels = if self.kind == GridKind::GaussLegendreComposite && n % (2 * self.panels_per_side) == 0 { self.panels_per_side } else { 1 };
        Ok(Arc::new(make_grid_with_panels(half, n, self.kind, panels)?))
    }

    pub fn time_grid(&self) -> Result<Arc<QuadratureGrid>> {
        self.grid(self.x_max, self.n_x)
    }

    pub fn spectral_grid(&self) -> Result<Arc<QuadratureGrid>> {
        self.grid(self.lambda_max, self.n_lambda)
    }

    pub fn xi_grid(&self) -> Result<Arc<QuadratureGrid>> {
        self.grid(self.lambda_max, self.n_xi)
    }
}
