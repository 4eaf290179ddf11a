//! Quadrature, finite differences and interpolation on uniform grids.
//!
//! Every waveform integral in the crate goes through [`trapezoid`] or
//! [`cumulative_trapezoid`] so that identities between modules hold to
//! rounding rather than to discretisation error.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Scalar sample type: real or complex.
pub trait Sample:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Sample for f64 {}
impl Sample for Complex64 {}

pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Running trapezoid integral, starting at zero on the first sample.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Second-order finite-difference derivative: central in the interior,
/// one-sided three-point at the two ends.
pub fn derivative<T: Sample>(values: &[T], dt: f64) -> Vec<T> {
    let n = values.len();
    if n < 3 {
        let slope = if n == 2 {
            (values[1] - values[0]) * (1.0 / dt)
        } else {
            T::default()
        };
        return vec![slope; n];
    }
    let inv2 = 0.5 / dt;
    let mut out = Vec::with_capacity(n);
    out.push((values[0] * -3.0 + values[1] * 4.0 - values[2]) * inv2);
    for i in 1..n - 1 {
        out.push((values[i + 1] - values[i - 1]) * inv2);
    }
    out.push((values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * inv2);
    out
}

/// Cubic Hermite (Catmull-Rom) interpolation of uniformly sampled data.
///
/// Outside the sampled interval the value is zero: signals here have finite
/// support.
#[derive(Debug, Clone, Copy)]
pub struct Interpolant<'a, T> {
    t0: f64,
    dt: f64,
    values: &'a [T],
}

impl<'a, T: Sample> Interpolant<'a, T> {
    pub fn new(t0: f64, dt: f64, values: &'a [T]) -> Self {
        Interpolant { t0, dt, values }
    }

    fn slope(&self, i: usize) -> T {
        let v = self.values;
        let n = v.len();
        if n < 3 {
            return (v[n - 1] - v[0]) * (1.0 / ((n - 1) as f64 * self.dt));
        }
        let inv2 = 0.5 / self.dt;
        if i == 0 {
            (v[0] * -3.0 + v[1] * 4.0 - v[2]) * inv2
        } else if i == n - 1 {
            (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * inv2
        } else {
            (v[i + 1] - v[i - 1]) * inv2
        }
    }

    pub fn eval(&self, t: f64) -> T {
        let n = self.values.len();
        if n == 0 {
            return T::default();
        }
        let x = (t - self.t0) / self.dt;
        let last = (n - 1) as f64;
        // half-ulp slack so the end points are not lost to rounding
        if x < -1e-9 || x > last + 1e-9 {
            return T::default();
        }
        if n == 1 {
            return self.values[0];
        }
        let x = x.clamp(0.0, last);
        let i = (x.floor() as usize).min(n - 2);
        let s = x - i as f64;
        if s == 0.0 {
            return self.values[i];
        }
        let p0 = self.values[i];
        let p1 = self.values[i + 1];
        let m0 = self.slope(i) * self.dt;
        let m1 = self.slope(i + 1) * self.dt;
        let s2 = s * s;
        let s3 = s2 * s;
        p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + p1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let v: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        assert!((trapezoid(&v, 0.1) - 2.0).abs() < 1e-14);
        let c = cumulative_trapezoid(&v, 0.1);
        assert_eq!(c.len(), v.len());
        assert!((c[10] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let dt = 0.01;
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * dt).powi(2) * 3.0).collect();
        for (i, d) in derivative(&v, dt).iter().enumerate() {
            assert!((d - 6.0 * i as f64 * dt).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn interpolant_reproduces_cubics_in_the_interior() {
        let dt = 0.1;
        let f = |t: f64| 0.5 * t * t - t + 2.0;
        let v: Vec<f64> = (0..20).map(|i| f(i as f64 * dt)).collect();
        let it = Interpolant::new(0.0, dt, &v);
        for k in 0..100 {
            let t = 0.05 + k as f64 * 0.017;
            assert!((it.eval(t) - f(t)).abs() < 1e-12, "t={t}");
        }
        assert_eq!(it.eval(-0.5), 0.0);
        assert_eq!(it.eval(2.5), 0.0);
        assert!((it.eval(1.9) - v[19]).abs() < 1e-12);
    }

    #[test]
    fn complex_samples_interpolate_componentwise() {
        let v = vec![
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 2.0),
            Complex64::new(2.0, 3.0),
        ];
        let it = Interpolant::new(0.0, 1.0, &v);
        let mid = it.eval(0.5);
        assert!((mid - Complex64::new(0.5, 1.5)).norm() < 1e-14);
    }
}
