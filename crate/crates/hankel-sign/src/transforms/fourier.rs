//! Trapezoid Fourier sums evaluated with an FFT on arbitrary output grids.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::grid::Axis;

/// Direction of the exponential in a Fourier sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// e^{−iut}
    Minus,
    /// e^{+iut}
    Plus,
}

impl Sign {
    fn f(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

/// `∫_{t_lo}^{t_hi} f(t) e^{±i u t} dt` by the trapezoid rule, for every `u` on `out`.
///
/// The sampling step is at most `max_dt` and is chosen so that the FFT bins land on
/// an integer refinement of `out.step`; the bins in between are discarded.
pub fn fourier_sum<F>(f: F, t_lo: f64, t_hi: f64, max_dt: f64, out: &Axis, sign: Sign) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let len = t_hi - t_lo;
    let tau = std::f64::consts::TAU;
    let m = ((len * out.step / tau) * (1.0 + 1e-12)).ceil().max(1.0) as usize;
    let du = out.step / m as f64;
    let need = ((tau / (max_dt * du)).ceil() as usize).max(out.len * m).max(16);
    let p = need.next_power_of_two();
    let dt = tau / (p as f64 * du);
    let nt = ((len / dt).floor() as usize + 1).min(p);
    let s = sign.f();
    let u0 = out.origin;

    let mut buf: Vec<Complex64> = (0..p)
        .into_par_iter()
        .map(|n| {
            if n >= nt {
                return Complex64::new(0.0, 0.0);
            }
            let t = t_lo + n as f64 * dt;
            let w = if n == 0 || n + 1 == nt { 0.5 } else { 1.0 };
            f(t) * Complex64::from_polar(w, s * u0 * t)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = match sign {
        Sign::Minus => planner.plan_fft_forward(p),
        Sign::Plus => planner.plan_fft_inverse(p),
    };
    fft.process(&mut buf);

    (0..out.len)
        .map(|j| {
            let k = j * m;
            buf[k] * Complex64::from_polar(dt, s * k as f64 * du * t_lo)
        })
        .collect()
}

/// Plain O(N·M) version of [`fourier_sum`] on explicit nodes; used for short inputs and as a cross-check.
pub fn direct_sum(samples: &[(f64, Complex64)], weight: f64, us: &[f64], sign: Sign) -> Vec<Complex64> {
    let s = sign.f();
    us.par_iter()
        .map(|u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, v) in samples {
                acc += v * Complex64::from_polar(1.0, s * u * t);
            }
            acc * weight
        })
        .collect()
}

/// Smooth flat-top window: 1 on |v| ≤ 1/2, 0 on |v| ≥ 1, C^∞ in between.
pub fn flat_top(v: f64) -> f64 {
    let a = v.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    smooth_step((1.0 - a) / 0.5)
}

/// C^∞ step from 0 (at v ≤ 0) to 1 (at v ≥ 1).
pub fn smooth_step(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / v).exp();
    let b = (-1.0 / (1.0 - v)).exp();
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_transform() {
        // ∫ e^{−t²/2} e^{−iut} dt = √(2π) e^{−u²/2}
        let out = Axis::new(-3.0, 0.37, 17);
        let v = fourier_sum(|t| Complex64::new((-0.5 * t * t).exp(), 0.0), -12.0, 12.0, 0.05, &out, Sign::Minus);
        for (j, z) in v.iter().enumerate() {
            let u = out.at(j);
            let want = (2.0 * PI).sqrt() * (-0.5 * u * u).exp();
            assert!((z - want).norm() < 1e-12, "u={u} got {z}");
        }
    }

    #[test]
    fn matches_direct_sum_with_shift() {
        let f = |t: f64| Complex64::new((-(t - 1.0).powi(2)).exp(), 0.3 * (-(t + 0.5).powi(2)).exp());
        let out = Axis::new(0.25, 0.9, 9);
        let fast = fourier_sum(f, -9.0, 11.0, 0.02, &out, Sign::Plus);
        let nodes: Vec<(f64, Complex64)> = (0..=2000).map(|n| -9.0 + 0.01 * n as f64).map(|t| (t, f(t))).collect();
        let slow = direct_sum(&nodes, 0.01, &out.points(), Sign::Plus);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn window_shape() {
        assert_eq!(flat_top(0.3), 1.0);
        assert_eq!(flat_top(-1.2), 0.0);
        assert!((flat_top(0.75) - 0.5).abs() < 1e-15);
        assert!(flat_top(0.6) > flat_top(0.9));
    }
}
