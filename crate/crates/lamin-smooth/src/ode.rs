//! Fixed-step RK4 with a step-halving refinement pass.
//!
//! The slope fields here are continuous but only log-Lipschitz transversally,
//! so a robust low-order scheme with verification by step halving is used
//! instead of high-order adaptivity.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorParams {
    /// Base step size; refinement halves it until two runs agree.
    pub base_step: f64,
    /// Agreement tolerance between successive halvings, on the endpoint value.
    pub refine_tol: f64,
    /// Cap on the number of halvings.
    pub max_halvings: u32,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self {
            base_step: 1e-3,
            refine_tol: 1e-10,
            max_halvings: 8,
        }
    }
}

/// One RK4 sweep from `x0` to `x1` (either direction) with at most `steps` steps.
///
/// `guard` may reject a state (solution left the admissible box); the error
/// carries the last valid x.
pub fn rk4_sweep<const N: usize>(
    f: &dyn Fn(f64, [f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    steps: usize,
    guard: &dyn Fn([f64; N]) -> bool,
) -> Result<[f64; N]> {
    let steps = steps.max(1);
    let h = (x1 - x0) / steps as f64;
    let mut x = x0;
    let mut y = y0;
    for _ in 0..steps {
        y = rk4_step(f, x, y, h);
        x += h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                last_x: x - h,
                msg: "non-finite state".into(),
            });
        }
        if !guard(y) {
            return Err(Error::Truncation { exit_x: x });
        }
    }
    Ok(y)
}

#[inline]
pub fn rk4_step<const N: usize>(
    f: &dyn Fn(f64, [f64; N]) -> [f64; N],
    x: f64,
    y: [f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, axpy(y, 0.5 * h, k1));
    let k3 = f(x + 0.5 * h, axpy(y, 0.5 * h, k2));
    let k4 = f(x + h, axpy(y, h, k3));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline]
fn axpy<const N: usize>(y: [f64; N], a: f64, k: [f64; N]) -> [f64; N] {
    let mut out = y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// Integrate with step halving until two successive sweeps agree to
/// `params.refine_tol` at the endpoint.
pub fn integrate_refined<const N: usize>(
    f: &dyn Fn(f64, [f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    params: &IntegratorParams,
    guard: &dyn Fn([f64; N]) -> bool,
) -> Result<[f64; N]> {
    if x0 == x1 {
        return Ok(y0);
    }
    let span = (x1 - x0).abs();
    let mut steps = (span / params.base_step).ceil() as usize;
    let mut prev = rk4_sweep(f, x0, y0, x1, steps, guard)?;
    for _ in 0..params.max_halvings {
        steps *= 2;
        let next = rk4_sweep(f, x0, y0, x1, steps, guard)?;
        let diff = prev
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        prev = next;
        if diff <= params.refine_tol {
            return Ok(prev);
        }
        if steps > 80_000_000 {
            return Err(Error::Integration {
                last_x: x1,
                msg: "step-size underflow before reaching agreement".into(),
            });
        }
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let f = |_x: f64, y: [f64; 1]| [y[0]];
        let y = integrate_refined(&f, 0.0, [1.0], 1.0, &IntegratorParams::default(), &|_| true)
            .unwrap();
        assert!((y[0] - 1.0f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn backward_integration() {
        let f = |_x: f64, y: [f64; 1]| [y[0]];
        let y = integrate_refined(
            &f,
            1.0,
            [1.0f64.exp()],
            0.0,
            &IntegratorParams::default(),
            &|_| true,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn guard_reports_exit() {
        let f = |_x: f64, _y: [f64; 1]| [1.0];
        let err = rk4_sweep(&f, 0.0, [0.0], 2.0, 2000, &|y: [f64; 1]| y[0] <= 1.0).unwrap_err();
        match err {
            Error::Truncation { exit_x } => assert!((exit_x - 1.0).abs() < 1e-2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
