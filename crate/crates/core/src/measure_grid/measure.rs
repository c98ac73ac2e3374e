//! The time-side weight A and the complex Plancherel density on the spectral side.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Scalar;
use crate::special_fn::{complex_gamma, recip_gamma};

/// A(x) = (sinh|x|)^{2α+1} (cosh|x|)^{2β+1}.
pub fn weight_a<T: Scalar>(x: T, p: &Params<T>) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let ax = x.abs();
    ax.sinh().powf(two * p.alpha() + one) * ax.cosh().powf(two * p.beta() + one)
}

/// C(λ) = 2^{ρ−iλ} Γ(α+1) Γ(iλ) / (Γ((ρ+iλ)/2) Γ((α−β+1+iλ)/2)).
pub fn c_function<T: Scalar>(lambda: Complex<T>, p: &Params<T>) -> Result<Complex<T>> {
    let i = Complex::new(T::zero(), T::one());
    let il = i * lambda;
    let n = il.re.round();
    let tol = T::lit(1e-10);
    if n <= T::zero() && (il.re - n).abs() < tol && il.im.abs() < tol {
        return Err(Error::Pole { re: lambda.re.to_f64().unwrap(), im: lambda.im.to_f64().unwrap() });
    }
    let half = T::lit(0.5);
    let rho = p.rho();
    let pow2 = ((-il + rho) * T::LN_2()).exp();
    let g_a1 = complex_gamma(Complex::new(p.alpha() + T::one(), T::zero()))?;
    let g_il = complex_gamma(il)?;
    let d1 = recip_gamma((il + rho) * half);
    let d2 = recip_gamma((il + p.alpha() - p.beta() + T::one()) * half);
    Ok(pow2 * g_a1 * g_il * d1 * d2)
}

/// 4^ρ/(8π|C(λ)|²). The factor 4^ρ = |2^{ρ−iλ}|² fixes the overall scale so that
/// ∫|ℋf|² dσ = ∫|f|² A dx for even f with A as defined in [`weight_a`].
fn radial_density<T: Scalar>(lambda: T, p: &Params<T>) -> Result<T> {
    if lambda == T::zero() || lambda.is_nan() {
        return Err(Error::Domain("Plancherel density is evaluated at lambda != 0 only".into()));
    }
    let c = c_function(Complex::new(lambda, T::zero()), p)?;
    let scale = T::lit(4.0).powf(p.rho());
    Ok(scale / (T::lit(8.0) * T::PI() * c.norm_sqr()))
}

/// Complex Plancherel density (1 + iρ/λ)·4^ρ/(8π|C(λ)|²).
pub fn plancherel_density<T: Scalar>(lambda: T, p: &Params<T>) -> Result<Complex<T>> {
    let r = radial_density(lambda, p)?;
    Ok(Complex::new(r, r * p.rho() / lambda))
}

/// Modulus of [`plancherel_density`], the density of |σ|.
pub fn abs_density<T: Scalar>(lambda: T, p: &Params<T>) -> Result<T> {
    let r = radial_density(lambda, p)?;
    Ok(r * (T::one() + (p.rho() / lambda).powi(2)).sqrt())
}
