//! Pointwise product-formula kernel K(x, y, z) of the generalized translation.

use crate::error::Result;
use crate::params::Params;
use crate::quadrature::GaussJacobi;
use crate::special_fn::ln_gamma_real;
use crate::Scalar;

/// (cosh x cosh y − cosh z cos χ)/(sinh x sinh y), and 0 when xy = 0.
pub fn sigma_chi<T: Scalar>(x: T, y: T, z: T, chi: T) -> T {
    if x * y == T::zero() {
        return T::zero();
    }
    (x.cosh() * y.cosh() - z.cosh() * chi.cos()) / (x.sinh() * y.sinh())
}

/// 1 − cosh²x − cosh²y − cosh²z + 2 cosh x cosh y cosh z cos χ, evaluated as written.
pub fn g_chi<T: Scalar>(x: T, y: T, z: T, chi: T) -> T {
    let (cx, cy, cz) = (x.cosh(), y.cosh(), z.cosh());
    T::one() - cx * cx - cy * cy - cz * cz + T::lit(2.0) * cx * cy * cz * chi.cos()
}

pub fn g_plus<T: Scalar>(g: T) -> T {
    if g > T::zero() {
        g
    } else {
        T::zero()
    }
}

/// x, y, z ≠ 0 and ||x| − |y|| < |z| < |x| + |y|.
pub fn in_support<T: Scalar>(x: T, y: T, z: T) -> bool {
    let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
    ax > T::zero() && ay > T::zero() && az > T::zero() && (ax - ay).abs() < az && az < ax + ay
}

/// cos χ* = (cosh²x + cosh²y + cosh²z − 1)/(2 cosh x cosh y cosh z), where g changes sign.
pub fn cos_chi_star<T: Scalar>(x: T, y: T, z: T) -> T {
    let (cx, cy, cz) = (x.cosh(), y.cosh(), z.cosh());
    (cx * cx + cy * cy + cz * cz - T::one()) / (T::lit(2.0) * cx * cy * cz)
}

/// g(x, y, z, 0) = (cosh(x+y) − cosh z)(cosh z − cosh(x−y)) as a product of sinh factors, for
/// nonnegative arguments.
fn g_at_zero<T: Scalar>(ax: T, ay: T, az: T) -> T {
    let h = T::lit(0.5);
    T::lit(4.0) * ((ax + ay + az) * h).sinh() * ((ax + ay - az) * h).sinh() * ((az + ax - ay) * h).sinh() * ((az - ax + ay) * h).sinh()
}

fn sinc<T: Scalar>(u: T) -> T {
    if u.abs() < T::lit(1e-4) {
        T::one() - u * u / T::lit(6.0)
    } else {
        u.sin() / u
    }
}

/// Reusable χ-rule for the kernel integral at fixed parameters.
///
/// On [0, χ*] the integrand carries (cos χ − cos χ*)^{α−β−1} at χ* and (sin χ)^{2β} at 0; both are
/// absorbed into a Gauss–Jacobi rule after χ = χ*(1+t)/2, leaving an analytic remainder.
#[derive(Clone, Debug)]
pub struct KernelQuadrature<T: Scalar = f64> {
    params: Params<T>,
    rule: GaussJacobi<T>,
    ln_m: T,
    bracket_coef: T,
}

impl<T: Scalar> KernelQuadrature<T> {
    pub fn new(p: &Params<T>, n_chi: usize) -> Result<Self> {
        p.require_kernel_range()?;
        let (alpha, beta) = (p.alpha(), p.beta());
        let half = T::lit(0.5);
        let rule = GaussJacobi::new(n_chi, alpha - beta - T::one(), T::lit(2.0) * beta)?;
        let ln_m = ln_gamma_real(alpha + T::one()) - half * T::PI().ln() - ln_gamma_real(alpha - beta) - ln_gamma_real(beta + half);
        Ok(Self { params: *p, rule, ln_m, bracket_coef: p.rho() / (beta + half) })
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn n_chi(&self) -> usize {
        self.rule.len()
    }

    /// K(x, y, z); zero outside the support region.
    pub fn eval(&self, x: T, y: T, z: T) -> T {
        if !in_support(x, y, z) {
            return T::zero();
        }
        let (alpha, beta) = (self.params.alpha(), self.params.beta());
        let a = alpha - beta - T::one();
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
        let (sx, sy, sz) = (x.sinh(), y.sinh(), z.sinh());
        let (cx, cy, cz) = (ax.cosh(), ay.cosh(), az.cosh());
        let p2 = two * cx * cy * cz;
        // 1 − cos χ* = 2 sin²(χ*/2)
        let gap = g_at_zero(ax, ay, az) / p2;
        let chi_star = two * (half * gap).sqrt().min(T::one()).asin();
        let coth3 = self.bracket_coef / (x.tanh() * y.tanh() * z.tanh());
        let mut sum = T::zero();
        for (&t, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let chi = chi_star * (T::one() + t) * half;
            let u = chi_star * (T::one() - t) * T::lit(0.25);
            let (sin_chi, cos_chi) = chi.sin_cos();
            let s_xyz = (cx * cy - cz * cos_chi) / (sx * sy);
            let s_xzy = (cx * cz - cy * cos_chi) / (sx * sz);
            let s_zyx = (cz * cy - cx * cos_chi) / (sz * sy);
            let bracket = T::one() - s_xyz + s_xzy + s_zyx + coth3 * sin_chi * sin_chi;
            let edge = ((chi_star + chi) * half).sin() * sinc(u);
            let ln_rest = a * edge.ln() + two * beta * sinc(chi).ln();
            sum = sum + w * ln_rest.exp() * bracket;
        }
        let ln_pre = self.ln_m - two * alpha * (sx.abs().ln() + sy.abs().ln() + sz.abs().ln()) + a * p2.ln() + (a + two * beta + T::one()) * (chi_star * half).ln();
        ln_pre.exp() * sum
    }
}

/// K(x, y, z) with a fresh χ-rule of `n_chi` nodes.
pub fn kernel_k<T: Scalar>(x: T, y: T, z: T, p: &Params<T>, n_chi: usize) -> Result<T> {
    Ok(KernelQuadrature::new(p, n_chi)?.eval(x, y, z))
}
