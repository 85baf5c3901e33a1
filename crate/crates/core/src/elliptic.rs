//! Complete and incomplete elliptic integrals and the Jacobi functions
//! `sn`, `cn`, `dn` for a real modulus `0 <= p < 1`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_STEPS: usize = 64;

/// An elliptic modulus validated to lie in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && (0.0..1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!(
                "elliptic modulus {p} outside [0, 1)"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complete integral of the first kind.
    pub fn k(self) -> f64 {
        agm_sequence(self.0).k
    }

    /// Complete integral of the second kind.
    pub fn e(self) -> f64 {
        let agm = agm_sequence(self.0);
        let mut weight = 0.5;
        let mut sum = 0.0;
        for c in &agm.c {
            sum += weight * c * c;
            weight *= 2.0;
        }
        agm.k * (1.0 - sum)
    }

    /// Returns `(sn, cn, dn)` at `t`.
    pub fn jacobi(self, t: f64) -> (f64, f64, f64) {
        jacobi_unchecked(t, self.0)
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<EllipticModulus> for f64 {
    fn from(p: EllipticModulus) -> f64 {
        p.0
    }
}

struct Agm {
    a: Vec<f64>,
    c: Vec<f64>,
    k: f64,
}

/// Runs the arithmetic-geometric mean from `(1, sqrt(1-p²))`, keeping the
/// `a_n` and `c_n` sequences needed by `E` and the Jacobi back-recurrence.
fn agm_sequence(p: f64) -> Agm {
    let mut a = 1.0;
    let mut b = (1.0 - p * p).sqrt();
    let mut av = vec![a];
    let mut cv = vec![p];
    for _ in 0..AGM_MAX_STEPS {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let cn = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        av.push(a);
        cv.push(cn);
    }
    Agm {
        k: FRAC_PI_2 / a,
        a: av,
        c: cv,
    }
}

fn jacobi_unchecked(t: f64, p: f64) -> (f64, f64, f64) {
    if p == 0.0 {
        return (t.sin(), t.cos(), 1.0);
    }
    let agm = agm_sequence(p);
    // sn and cn have period 4K; reducing keeps the phase recurrence accurate.
    let period = 4.0 * agm.k;
    let u = t - period * (t / period).round();
    let n = agm.a.len() - 1;
    let mut phi = (2f64).powi(n as i32) * agm.a[n] * u;
    for level in (1..=n).rev() {
        let s = (agm.c[level] / agm.a[level] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - p * p * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Complete elliptic integral of the first kind, via the AGM.
pub fn complete_k(p: f64) -> Result<f64> {
    Ok(EllipticModulus::new(p)?.k())
}

/// Complete elliptic integral of the second kind, via the AGM.
pub fn complete_e(p: f64) -> Result<f64> {
    Ok(EllipticModulus::new(p)?.e())
}

/// Incomplete integral of the first kind `F(phi, p)`.
///
/// The angle is reduced to `[-π/2, π/2]` using `F(phi + jπ) = F(phi) + 2jK`
/// and the remainder integrated by adaptive quadrature.
pub fn incomplete_f(phi: f64, p: f64) -> Result<f64> {
    let m = EllipticModulus::new(p)?;
    if !phi.is_finite() {
        return Err(Error::Domain("amplitude must be finite".into()));
    }
    let j = (phi / std::f64::consts::PI).round();
    let rest = phi - j * std::f64::consts::PI;
    let integrand = |th: f64| {
        let s = th.sin();
        1.0 / (1.0 - p * p * s * s).sqrt()
    };
    let partial = quadrature::integrate(integrand, 0.0, rest, 1e-13)?;
    Ok(partial + 2.0 * j * m.k())
}

/// Jacobi elliptic functions `(sn, cn, dn)` at `t` for modulus `p`.
pub fn jacobi(t: f64, p: f64) -> Result<(f64, f64, f64)> {
    let m = EllipticModulus::new(p)?;
    if !t.is_finite() {
        return Err(Error::Domain("argument must be finite".into()));
    }
    Ok(m.jacobi(t))
}

/// Central-difference residual of `dn'' + 2dn³ - (2 - p²)dn = 0` at `t`.
pub fn dn_ode_residual(t: f64, p: f64, h: f64) -> Result<f64> {
    let m = EllipticModulus::new(p)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("step {h} must be positive")));
    }
    let dn = |x: f64| m.jacobi(x).2;
    let d0 = dn(t);
    let second = (dn(t + h) - 2.0 * d0 + dn(t - h)) / (h * h);
    Ok(second + 2.0 * d0 * d0 * d0 - (2.0 - p * p) * d0)
}
