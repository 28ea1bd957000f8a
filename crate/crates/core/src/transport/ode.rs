//! Classical fourth-order Runge-Kutta on vector-space states.

use crate::error::Result;
use crate::numeric::{Mat, Vector};

pub trait OdeState: Clone {
    /// `self + a * other`.
    fn axpy(&self, a: f64, other: &Self) -> Self;
}

impl OdeState for Vector {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + other * a
    }
}

impl OdeState for Mat {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + other * a
    }
}

impl<A: OdeState, B: OdeState> OdeState for (A, B) {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        (self.0.axpy(a, &other.0), self.1.axpy(a, &other.1))
    }
}

/// One RK4 step of `y' = f(t, y)`.
pub fn rk4_step<S, F>(f: F, t: f64, y: &S, dt: f64) -> Result<S>
where
    S: OdeState,
    F: Fn(f64, &S) -> Result<S>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + dt / 2.0, &y.axpy(dt / 2.0, &k1))?;
    let k3 = f(t + dt / 2.0, &y.axpy(dt / 2.0, &k2))?;
    let k4 = f(t + dt, &y.axpy(dt, &k3))?;
    Ok(y.axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4))
}

/// Times `t0, t0 + step, ...` ending exactly at `t1`. Works in either direction.
pub fn time_grid(t0: f64, t1: f64, step: f64) -> Vec<f64> {
    let len = (t1 - t0).abs();
    let n = ((len / step.abs()) - 1e-9).ceil().max(1.0) as usize;
    let sign = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut out: Vec<f64> = (0..n).map(|k| t0 + sign * step.abs() * k as f64).collect();
    out.push(t1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let err = |dt: f64| {
            let mut y = Vector::from_element(1, 1.0);
            let grid = time_grid(0.0, 1.0, dt);
            for w in grid.windows(2) {
                y = rk4_step(|_, y: &Vector| Ok(-y), w[0], &y, w[1] - w[0]).unwrap();
            }
            (y[0] - (-1.0_f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn grid_ends_exactly() {
        let g = time_grid(0.0, 1.0, 0.3);
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let back = time_grid(1.0, 0.0, 0.5);
        assert_eq!(back, vec![1.0, 0.5, 0.0]);
        assert_eq!(time_grid(0.0, 1.0, 0.25).len(), 5);
    }
}
