use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The pair (α, β) with α ≥ β ≥ −1/2 and α > −1/2. The derived ρ = α + β + 1 is never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params<T = f64> {
    alpha: T,
    beta: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        let half = T::lit(0.5);
        let ok = alpha.is_finite() && beta.is_finite() && alpha >= beta && beta >= -half && alpha > -half;
        if !ok {
            return Err(Error::Param(format!(
                "need alpha >= beta >= -1/2 and alpha > -1/2, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.beta
    }

    #[inline]
    pub fn rho(&self) -> T {
        self.alpha + self.beta + T::one()
    }

    /// (α + 1, β + 1), the parameters of the second Jacobi function inside G.
    pub fn shifted(&self) -> Self {
        Self { alpha: self.alpha + T::one(), beta: self.beta + T::one() }
    }

    /// Errors unless α > β, which the product-formula kernel requires.
    pub fn require_kernel_range(&self) -> Result<()> {
        if self.alpha > self.beta && self.beta > -T::lit(0.5) {
            Ok(())
        } else {
            Err(Error::Param(format!(
                "translation kernel needs alpha > beta > -1/2, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )))
        }
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        Params { alpha: U::from_f64(self.alpha.to_f64().unwrap()).unwrap(), beta: U::from_f64(self.beta.to_f64().unwrap()).unwrap() }
    }

    /// Little-endian (α, β, ρ) as stored in cache headers.
    pub fn to_le_bytes(&self) -> [u8; 24] {
        let mut out = [0u8; 24];
        for (i, v) in [self.alpha, self.beta, self.rho()].iter().enumerate() {
            out[i * 8..i * 8 + 8].copy_from_slice(&v.to_f64().unwrap().to_le_bytes());
        }
        out
    }
}
