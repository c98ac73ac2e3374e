//! Gauss–Legendre and Gauss–Jacobi rules on [−1, 1].

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special_fn::ln_gamma_real;

/// Nodes (ascending) and weights of the n-point Gauss–Legendre rule, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::from_usize(n).unwrap();
    let one = T::one();
    let tol = T::epsilon() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (T::from_usize(i).unwrap() + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut pp = one;
        for _ in 0..100 {
            let (mut p1, mut p2) = (one, T::zero());
            for j in 1..=n {
                let jf = T::from_usize(j).unwrap();
                let p3 = p2;
                p2 = p1;
                p1 = ((jf + jf - one) * z * p2 - (jf - one) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - one);
            let dz = p1 / pp;
            z = z - dz;
            if dz.abs() <= tol {
                break;
            }
        }
        let wi = T::lit(2.0) / ((one - z * z) * pp * pp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    (x, w)
}

/// Gauss–Jacobi rule for the weight (1−t)^a (1+t)^b on [−1, 1], a, b > −1.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussJacobi<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub a: T,
    pub b: T,
}

impl<T: Scalar> GaussJacobi<T> {
    /// Golub–Welsch: eigenvalues of the Jacobi matrix and squared first eigenvector components.
    pub fn new(n: usize, a: T, b: T) -> Result<Self> {
        let one = T::one();
        if n == 0 || !(a > -one) || !(b > -one) {
            return Err(Error::Domain(format!("Gauss-Jacobi needs n > 0 and a, b > -1 (a = {a}, b = {b})")));
        }
        let two = T::lit(2.0);
        let ab = a + b;
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n];
        diag[0] = (b - a) / (ab + two);
        for (k, d) in diag.iter_mut().enumerate().skip(1) {
            let kf = T::from_usize(k).unwrap();
            let s = two * kf + ab;
            *d = (b * b - a * a) / (s * (s + two));
        }
        for k in 1..n {
            let kf = T::from_usize(k).unwrap();
            let s = two * kf + ab;
            let e2 = if k == 1 {
                T::lit(4.0) * (one + a) * (one + b) / ((two + ab) * (two + ab) * (T::lit(3.0) + ab))
            } else {
                T::lit(4.0) * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + one) * (s - one))
            };
            off[k - 1] = e2.sqrt();
        }
        let mut first = vec![T::zero(); n];
        first[0] = one;
        tridiagonal_ql(&mut diag, &mut off, &mut first)?;
        let mu0 = (ab + one) * two.ln() + ln_gamma_real(a + one) + ln_gamma_real(b + one) - ln_gamma_real(ab + two);
        let mu0 = mu0.exp();
        let mut pairs: Vec<(T, T)> = diag.into_iter().zip(first.into_iter().map(|v| mu0 * v * v)).collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights, a, b })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix. `off[i]` couples rows
/// i and i+1. On return `diag` holds the eigenvalues and `row` the transformed first row of
/// the eigenvector matrix (pass the first unit vector to get first eigenvector components).
fn tridiagonal_ql<T: Scalar>(diag: &mut [T], off: &mut [T], row: &mut [T]) -> Result<()> {
    let n = diag.len();
    let eps = T::epsilon();
    let one = T::one();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::LinAlg("tridiagonal QL did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (T::lit(2.0) * off[l]);
            let mut r = g.hypot(one);
            g = diag[m] - diag[l] + off[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (one, one, T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] = diag[i + 1] - p;
                    off[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = row[i + 1];
                row[i + 1] = s * row[i] + c * fz;
                row[i] = c * row[i] - s * fz;
            }
            if deflated {
                continue;
            }
            diag[l] = diag[l] - p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}
