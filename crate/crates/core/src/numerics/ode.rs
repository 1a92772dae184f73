//! Fixed-step classical Runge-Kutta integration.

use crate::error::{GeoError, Result};

/// Magnitude beyond which a state component counts as blown up.
pub const BLOWUP_LIMIT: f64 = 1e12;

pub fn rk4_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let shift = |base: &[f64; N], k: &[f64; N], c: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &shift(y, &k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, &shift(y, &k2, 0.5 * h));
    let k4 = rhs(t + h, &shift(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Samples of an integrated trajectory, one per step including the start.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

/// Integrates from `t0` to `t_end` with a step no larger than `step`.
///
/// The step is shrunk so that `t_end` is hit exactly. `guard` is called on
/// every accepted state; an error from it stops the integration. Any
/// non-finite component or one larger than [`BLOWUP_LIMIT`] raises
/// [`GeoError::Blowup`].
pub fn integrate<const N: usize, F, G>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    step: f64,
    mut guard: G,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(GeoError::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let span = t_end - t0;
    let n = ((span.abs() / step).ceil() as usize).max(1);
    let h = span / n as f64;
    let mut traj = Trajectory { t: Vec::with_capacity(n + 1), y: Vec::with_capacity(n + 1) };
    guard(t0, &y0)?;
    traj.t.push(t0);
    traj.y.push(y0);
    let mut y = y0;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        y = rk4_step(&rhs, t, &y, h);
        let t_next = if i + 1 == n { t_end } else { t0 + (i + 1) as f64 * h };
        let magnitude = y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !magnitude.is_finite() || magnitude > BLOWUP_LIMIT {
            return Err(GeoError::Blowup { t: t_next, magnitude });
        }
        guard(t_next, &y)?;
        traj.t.push(t_next);
        traj.y.push(y);
    }
    Ok(traj)
}

/// Step-doubling error estimate for the final state of a 4th-order run:
/// `|y_h - y_{h/2}| / 15`, maximized over components.
pub fn richardson_error<const N: usize>(coarse: &[f64; N], fine: &[f64; N]) -> f64 {
    coarse.iter().zip(fine).map(|(a, b)| (a - b).abs() / 15.0).fold(0.0, f64::max)
}
