//! Forward-mode automatic differentiation.
//!
//! The discrete energies are sums of stencil terms that each touch three
//! consecutive nodes, so derivatives are computed per stencil with a fixed
//! number of independent variables `N` and scattered into the global arrays.
//! [`Dual`] carries the gradient, [`HyperDual`] the gradient and the Hessian.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and the dual number types.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn asin(self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn powi2(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn asin(self) -> Self {
        f64::asin(self)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// First-order dual number with `N` infinitesimal directions.
#[derive(Clone, Copy, Debug)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn variable(v: f64, index: usize) -> Self {
        let mut d = [0.0; N];
        d[index] = 1.0;
        Self { v, d }
    }

    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= df;
        }
        Self { v: f, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for (a, b) in self.d.iter_mut().zip(o.d.iter()) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for (a, b) in self.d.iter_mut().zip(o.d.iter()) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; N];
        for k in 0..N {
            d[k] = self.v * o.d[k] + o.v * self.d[k];
        }
        Self { v: self.v * o.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        let mut d = [0.0; N];
        for k in 0..N {
            d[k] = (self.d[k] - v * o.d[k]) * inv;
        }
        Self { v, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self { v, d: [0.0; N] }
    }
    #[inline]
    fn re(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    #[inline]
    fn asin(self) -> Self {
        self.chain(self.v.asin(), 1.0 / (1.0 - self.v * self.v).sqrt())
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self.chain(self.v * k, k)
    }
}

/// Second-order dual number: value, gradient and (symmetric) Hessian.
#[derive(Clone, Copy, Debug)]
pub struct HyperDual<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> HyperDual<N> {
    pub fn variable(v: f64, index: usize) -> Self {
        let mut g = [0.0; N];
        g[index] = 1.0;
        Self {
            v,
            g,
            h: [[0.0; N]; N],
        }
    }

    /// Composition with a scalar function given `f(v)`, `f'(v)` and `f''(v)`.
    #[inline]
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self {
            v: f,
            g: [0.0; N],
            h: [[0.0; N]; N],
        };
        for a in 0..N {
            out.g[a] = df * self.g[a];
            for b in 0..N {
                out.h[a][b] = df * self.h[a][b] + d2f * self.g[a] * self.g[b];
            }
        }
        out
    }

    #[inline]
    fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl<const N: usize> Add for HyperDual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for a in 0..N {
            self.g[a] += o.g[a];
            for b in 0..N {
                self.h[a][b] += o.h[a][b];
            }
        }
        self
    }
}

impl<const N: usize> Sub for HyperDual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for a in 0..N {
            self.g[a] -= o.g[a];
            for b in 0..N {
                self.h[a][b] -= o.h[a][b];
            }
        }
        self
    }
}

impl<const N: usize> Mul for HyperDual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Self {
            v: self.v * o.v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        };
        for a in 0..N {
            out.g[a] = self.v * o.g[a] + o.v * self.g[a];
            for b in 0..N {
                out.h[a][b] = self.v * o.h[a][b]
                    + o.v * self.h[a][b]
                    + self.g[a] * o.g[b]
                    + o.g[a] * self.g[b];
            }
        }
        out
    }
}

impl<const N: usize> Div for HyperDual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Neg for HyperDual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Real for HyperDual<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }
    #[inline]
    fn re(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    #[inline]
    fn asin(self) -> Self {
        let w = 1.0 - self.v * self.v;
        let df = 1.0 / w.sqrt();
        self.chain(self.v.asin(), df, self.v * df / w)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        let mut out = self;
        out.v *= k;
        for a in 0..N {
            out.g[a] *= k;
            for b in 0..N {
                out.h[a][b] *= k;
            }
        }
        out
    }
}
