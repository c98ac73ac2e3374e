//! Gauss hypergeometric function ₂F₁(a, b; c; z) on the non-positive real axis.
//!
//! Three evaluation paths share one power-series kernel:
//! the direct series for −1/2 ≤ z ≤ 0, the Pfaff transform for −1 ≤ z < −1/2, and the
//! connection formula in 1/(1−z) for z < −1. The last one keeps the work bounded for large
//! |z| where the Pfaff argument z/(z−1) creeps towards 1 and the series needs tens of
//! thousands of terms. When b − a is within [`SPLIT_GAP`] of an integer the connection
//! coefficients blow up; there the parameters are split symmetrically, a − ε and b + ε, and the
//! even part in ε is extrapolated to ε = 0 (₂F₁ is entire in a and b).

use num_complex::Complex;

use super::gamma::{complex_gamma, is_pole, recip_gamma};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 10_000;

/// Minimum distance of b − a from the integers accepted by [`series_connection`].
const CONNECTION_GAP: f64 = 1e-6;

/// Below this distance of b − a from the integers the split evaluation is used instead.
pub const SPLIT_GAP: f64 = 1e-3;

/// Splitting step; the six shifted points keep b − a at least 3e−3 from any integer.
const SPLIT_EPS: f64 = 2e-3;

fn integer_gap<T: Scalar>(d: Complex<T>) -> T {
    (d.re - d.re.round()).hypot(d.im)
}

fn c_is_nonpositive_integer<T: Scalar>(c: Complex<T>) -> bool {
    is_pole(c)
}

fn is_terminating<T: Scalar>(a: Complex<T>) -> bool {
    is_pole(a)
}

/// Sums the hypergeometric power series in `z` directly; `z` must satisfy |z| < 1.
pub fn series_direct<T: Scalar>(a: Complex<T>, b: Complex<T>, c: Complex<T>, z: T) -> Result<Complex<T>> {
    let tol = T::series_tol();
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    let mut quiet = 0;
    for n in 0..MAX_TERMS {
        let nf = T::from_usize(n).unwrap();
        term = term * (a + nf) * (b + nf) / ((c + nf) * (nf + T::one())) * z;
        sum = sum + term;
        if term.norm() <= tol * sum.norm() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence { terms: MAX_TERMS })
}

/// Pfaff transform: (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)), valid for every z ≤ 0.
pub fn series_pfaff<T: Scalar>(a: Complex<T>, b: Complex<T>, c: Complex<T>, z: T) -> Result<Complex<T>> {
    let w = z / (z - T::one());
    let pref = (-a * (T::one() - z).ln()).exp();
    Ok(pref * series_direct(a, c - b, c, w)?)
}

/// Connection formula in u = 1/(1−z) for z < −1; needs b − a away from the integers.
pub fn series_connection<T: Scalar>(a: Complex<T>, b: Complex<T>, c: Complex<T>, z: T) -> Result<Complex<T>> {
    let d = b - a;
    if integer_gap(d) < T::lit(CONNECTION_GAP) {
        return Err(Error::Domain("connection formula needs b - a away from the integers".into()));
    }
    let one = T::one();
    let u = one / (one - z);
    let ln1mz = (one - z).ln();
    let gc = complex_gamma(c)?;
    let c1 = gc * complex_gamma(d)? * recip_gamma(b) * recip_gamma(c - a);
    let c2 = gc * complex_gamma(-d)? * recip_gamma(a) * recip_gamma(c - b);
    let mut out = Complex::new(T::zero(), T::zero());
    if c1.norm() != T::zero() {
        out = out + c1 * (-a * ln1mz).exp() * series_direct(a, c - b, -d + one, u)?;
    }
    if c2.norm() != T::zero() {
        out = out + c2 * (-b * ln1mz).exp() * series_direct(b, c - a, d + one, u)?;
    }
    Ok(out)
}

/// ₂F₁(a, b; c; z) for real z ≤ 0.
pub fn gauss_2f1<T: Scalar>(a: Complex<T>, b: Complex<T>, c: Complex<T>, z: T) -> Result<Complex<T>> {
    if z.is_nan() || z > T::zero() {
        return Err(Error::Domain(format!("2F1 is only evaluated for z <= 0, got {z}")));
    }
    if c_is_nonpositive_integer(c) {
        return Err(Error::Domain("2F1 lower parameter c is a non-positive integer".into()));
    }
    if z == T::zero() {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    // A terminating upper parameter goes first so the Pfaff series stays a polynomial.
    let (a, b) = if !is_terminating(a) && is_terminating(b) { (b, a) } else { (a, b) };
    if z >= -T::lit(0.5) {
        return series_direct(a, b, c, z);
    }
    if z >= -T::one() || is_terminating(a) {
        return series_pfaff(a, b, c, z);
    }
    if integer_gap(b - a) >= T::lit(SPLIT_GAP) {
        return series_connection(a, b, c, z);
    }
    series_split(a, b, c, z)
}

/// Connection formula at (a − kε, b + kε), k = ±1, ±2, ±3, combined with the weights
/// (3/2, −3/5, 1/10) that cancel the ε² and ε⁴ terms of the even part.
fn series_split<T: Scalar>(a: Complex<T>, b: Complex<T>, c: Complex<T>, z: T) -> Result<Complex<T>> {
    let eps = T::lit(SPLIT_EPS);
    let weights = [T::lit(1.5), T::lit(-0.6), T::lit(0.1)];
    let mut acc = Complex::new(T::zero(), T::zero());
    for (k, &w) in weights.iter().enumerate() {
        let e = eps * T::from_usize(k + 1).unwrap();
        let plus = series_connection(a - e, b + e, c, z)?;
        let minus = series_connection(a + e, b - e, c, z)?;
        acc = acc + (plus + minus) * (w * T::lit(0.5));
    }
    Ok(acc)
}
