//! Explicit Runge-Kutta integrators for small complex linear systems.
//!
//! The adaptive Dormand-Prince 5(4) pair does the production work; the
//! classical fixed-step RK4 exists as an independent reference.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

pub type State<const N: usize> = [Complex64; N];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const MAX_STEPS_PER_SAMPLE: usize = 100_000;

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        let w = h * c;
        for i in 0..N {
            out[i] += k[i] * w;
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` and return the state at every grid sample.
///
/// Steps are adapted inside each grid interval and always land on the
/// sample times, so no interpolation of the solution is involved.
pub fn integrate_adaptive<const N: usize, F>(
    f: F,
    grid: &TimeGrid,
    y0: State<N>,
    tol: Tolerances,
) -> Result<Vec<State<N>>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut y = y0;
    let mut h = grid.dt();
    for i in 1..grid.len() {
        let t_target = grid.t(i);
        let mut t = grid.t(i - 1);
        let mut steps = 0usize;
        while t < t_target {
            steps += 1;
            if steps > MAX_STEPS_PER_SAMPLE {
                return Err(Error::Integration {
                    time: t,
                    reason: "step budget exhausted".into(),
                });
            }
            let remaining = t_target - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };

            let k1 = f(t, &y);
            let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * step,
                &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &axpy(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = f(t + step, &y_new);

            let mut err = 0.0f64;
            for j in 0..N {
                let e = (k1[j] * E1 + k3[j] * E3 + k4[j] * E4 + k5[j] * E5 + k6[j] * E6
                    + k7[j] * E7)
                    * step;
                let scale = tol.atol + tol.rtol * y[j].norm().max(y_new[j].norm());
                err = err.max(e.norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    time: t,
                    reason: "non-finite error estimate".into(),
                });
            }

            if err <= 1.0 {
                y = y_new;
                t = if last { t_target } else { t + step };
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a shortened final step says nothing about the interior step size
            let proposed = step * factor;
            h = if last && err <= 1.0 { h.max(proposed) } else { proposed };
            if h < 1e-14 * grid.dt() {
                return Err(Error::Integration {
                    time: t,
                    reason: "step size underflow".into(),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Classical RK4 with `substeps` equal steps per grid interval.
pub fn integrate_rk4<const N: usize, F>(
    f: F,
    grid: &TimeGrid,
    y0: State<N>,
    substeps: usize,
) -> Vec<State<N>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let substeps = substeps.max(1);
    let h = grid.dt() / substeps as f64;
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut y = y0;
    for i in 1..grid.len() {
        let t0 = grid.t(i - 1);
        for s in 0..substeps {
            let t = t0 + s as f64 * h;
            let k1 = f(t, &y);
            let k2 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]));
            let k3 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]));
            let k4 = f(t + h, &axpy(&y, h, &[(1.0, &k3)]));
            y = axpy(
                &y,
                h,
                &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
            );
        }
        out.push(y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn damped_rotation_matches_closed_form() {
        let w = 3.0;
        let damp = 0.5;
        let grid = TimeGrid::spanning(0.0, 5.0, 51).unwrap();
        let f = |_t: f64, y: &State<1>| [y[0] * (I * w - damp)];
        let sol = integrate_adaptive(f, &grid, [Complex64::new(1.0, 0.0)], Tolerances::default())
            .unwrap();
        for (t, y) in grid.times().zip(&sol) {
            let exact = (Complex64::new(-damp, w) * t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn adaptive_and_rk4_agree_on_driven_two_level_system() {
        let grid = TimeGrid::spanning(0.0, 2.0, 41).unwrap();
        let f = |t: f64, y: &State<2>| {
            let drive = 2.0 * (1.5 * t).sin();
            [I * drive * y[1] * 0.5, I * drive * y[0] * 0.5 - y[1] * 0.3]
        };
        let y0 = [Complex64::new(1.0, 0.0), Complex64::default()];
        let a = integrate_adaptive(f, &grid, y0, Tolerances::default()).unwrap();
        let b = integrate_rk4(f, &grid, y0, 64);
        for (ya, yb) in a.iter().zip(&b) {
            for j in 0..2 {
                assert!((ya[j] - yb[j]).norm() < 1e-9);
            }
        }
    }
}
