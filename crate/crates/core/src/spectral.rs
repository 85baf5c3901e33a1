//! Fourier differentiation of periodic samples.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Differentiates uniformly sampled periodic data on `[0, period)`.
///
/// Modes above `keep_fraction · N/2` are discarded (the Nyquist mode always
/// is), which suppresses rounding noise that repeated differentiation would
/// otherwise amplify.
pub fn derivative(values: &[f64], period: f64, keep_fraction: f64) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let cutoff = (keep_fraction * (n / 2) as f64).floor() as i64;
    let scale = std::f64::consts::TAU / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        };
        if freq.abs() > cutoff || (n % 2 == 0 && k == n / 2) {
            *c = Complex::new(0.0, 0.0);
        } else {
            *c *= Complex::new(0.0, scale * freq as f64);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}
