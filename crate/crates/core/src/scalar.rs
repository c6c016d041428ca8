//! Scalar abstraction plus the small pieces of closed-form analysis
//! (sphere measures, sin-power integrals, Gauss-Legendre rules) shared by
//! the kernel and cone-integral math.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Copy + Send + Sync + std::fmt::Debug + 'static
{
    fn of(v: f64) -> Self;

    fn as_f64(self) -> f64;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f32 {
    fn of(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn of(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// Surface measure of the unit N-sphere, sigma_N(S^N).
///
/// sigma_0 = 2, sigma_1 = 2*pi, sigma_n = 2*pi*sigma_{n-2}/(n-1).
pub fn sphere_measure<S: Scalar>(n: usize) -> S {
    let two_pi = S::of(2.0) * S::PI();
    match n {
        0 => S::of(2.0),
        1 => two_pi,
        _ => two_pi / S::of_usize(n - 1) * sphere_measure::<S>(n - 2),
    }
}

/// Integral of sin^n(theta) over [a, b] by the reduction formula.
pub fn sin_power_integral<S: Scalar>(n: usize, a: S, b: S) -> S {
    match n {
        0 => b - a,
        1 => a.cos() - b.cos(),
        _ => {
            let sn = S::of_usize(n);
            let boundary = (a.cos() * a.sin().powi(n as i32 - 1)
                - b.cos() * b.sin().powi(n as i32 - 1))
                / sn;
            boundary + (sn - S::one()) / sn * sin_power_integral::<S>(n - 2, a, b)
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre polynomial; accurate to machine
/// precision for the modest orders used here.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based starting guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on<S: Scalar>(n: usize, a: S, b: S) -> Vec<(S, S)> {
    let mid = (a + b) * S::of(0.5);
    let half = (b - a) * S::of(0.5);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * S::of(x), half * S::of(w)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_measures_match_closed_forms() {
        assert_relative_eq!(sphere_measure::<f64>(0), 2.0);
        assert_relative_eq!(sphere_measure::<f64>(1), 2.0 * std::f64::consts::PI);
        assert_relative_eq!(sphere_measure::<f64>(2), 4.0 * std::f64::consts::PI);
        assert_relative_eq!(
            sphere_measure::<f64>(3),
            2.0 * std::f64::consts::PI * std::f64::consts::PI
        );
    }

    #[test]
    fn sin_powers() {
        use std::f64::consts::PI;
        assert_relative_eq!(sin_power_integral::<f64>(0, 0.0, PI), PI);
        assert_relative_eq!(sin_power_integral::<f64>(1, 0.0, PI), 2.0);
        assert_relative_eq!(sin_power_integral::<f64>(2, 0.0, PI), PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(sin_power_integral::<f64>(3, 0.0, PI), 4.0 / 3.0, epsilon = 1e-14);
        // f32 path agrees with f64.
        let v32 = sin_power_integral::<f32>(2, 0.0, std::f32::consts::PI);
        assert!((v32 as f64 - PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre_on::<f64>(8, 0.0, 2.0);
        let v: f64 = rule.iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert_relative_eq!(v, 2.0f64.powi(8) / 8.0, epsilon = 1e-12);
        let smooth: f64 = gauss_legendre_on::<f64>(48, 0.0, 1.0)
            .iter()
            .map(|&(x, w)| w * (x * x + 0.25).powf(-1.5))
            .sum();
        // closed form: integral of (x^2+a^2)^{-3/2} = x/(a^2 sqrt(x^2+a^2))
        assert_relative_eq!(smooth, 1.0 / (0.25 * (1.25f64).sqrt()), epsilon = 1e-10);
    }
}
