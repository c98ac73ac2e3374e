//! Jacobi functions φ_λ and the Opdam eigenfunctions G_λ of the Jacobi–Cherednik operator.

use num_complex::Complex;

use super::hypergeometric::gauss_2f1;
use crate::error::Result;
use crate::params::Params;
use crate::scalar::Scalar;

/// φ_λ(x) = ₂F₁((ρ+iλ)/2, (ρ−iλ)/2; α+1; −sinh²x).
pub fn jacobi_phi<T: Scalar>(lambda: Complex<T>, x: T, p: &Params<T>) -> Result<Complex<T>> {
    let i = Complex::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let rho = p.rho();
    let a = (i * lambda + rho) * half;
    let b = (-i * lambda + rho) * half;
    let c = Complex::new(p.alpha() + T::one(), T::zero());
    let s = x.sinh();
    gauss_2f1(a, b, c, -(s * s))
}

/// G_λ at x and at −x for a single x, sharing the two Jacobi evaluations.
pub fn opdam_g_pair<T: Scalar>(lambda: Complex<T>, x: T, p: &Params<T>) -> Result<(Complex<T>, Complex<T>)> {
    let phi = jacobi_phi(lambda, x, p)?;
    let phi1 = jacobi_phi(lambda, x, &p.shifted())?;
    let i = Complex::new(T::zero(), T::one());
    let coef = (i * lambda + p.rho()) / (T::lit(4.0) * (p.alpha() + T::one()));
    let odd = coef * (x + x).sinh() * phi1;
    Ok((phi + odd, phi - odd))
}

/// G_λ(x) = φ^{α,β}_λ(x) + (ρ+iλ)/(4(α+1))·sinh 2x·φ^{α+1,β+1}_λ(x), normalized by G_λ(0) = 1.
pub fn opdam_g<T: Scalar>(lambda: Complex<T>, x: T, p: &Params<T>) -> Result<Complex<T>> {
    Ok(opdam_g_pair(lambda, x, p)?.0)
}
