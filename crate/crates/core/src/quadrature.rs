//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 60;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to the absolute tolerance `tol`.
///
/// Intervals are bisected until the Kronrod–Gauss error estimate of each
/// piece falls below its share of the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = hi - lo;
    let mut total = 0.0;
    let mut stack = vec![(lo, hi, 0usize)];
    while let Some((x0, x1, depth)) = stack.pop() {
        let (val, err) = gk15(&f, x0, x1);
        let budget = tol * (x1 - x0) / width;
        if err <= budget.max(f64::EPSILON * val.abs()) || depth >= MAX_DEPTH {
            if !val.is_finite() {
                return Err(Error::Numerical("non-finite integrand".into()));
            }
            total += val;
        } else {
            let mid = 0.5 * (x0 + x1);
            stack.push((x0, mid, depth + 1));
            stack.push((mid, x1, depth + 1));
        }
    }
    Ok(sign * total)
}
