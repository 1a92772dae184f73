//! Abstract-surface side: metrics `e^{2 rho(u)} (du^2 + dv^2)`, their Gauss
//! curvature, the level-curve identity, the ODE for `rho` with its first
//! integral and quadrature, and geodesic shooting.
//!
//! For `g = C0 cosh^6(u) (du^2 + dv^2)` the ODE `rho'' = e^{-2 rho / 3}`
//! (ambient curvature 0) holds verbatim only when `C0 = 1/27`. For other
//! `C0` it holds after the homothety `u = alpha x, v = alpha y` with
//! `alpha = (27 C0)^{-1/8}`; see [`ConformalMetric::biconservative_normalized`].

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::numerics::ode;
use crate::numerics::quad::{self, QuadOptions};

/// Log conformal factor `rho(u)`.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoFunction {
    /// Flat metric scaled by `e^{2 value}`.
    Constant { value: f64 },
    /// `rho(u) = (1/2) ln C0 + 3 ln cosh(alpha u) + ln alpha`.
    Biconservative { c0: f64, alpha: f64 },
    /// Round sphere of radius `radius` in Mercator coordinates:
    /// `rho(u) = ln radius - ln cosh u`.
    Mercator { radius: f64 },
    /// Arbitrary function; derivatives by central differences.
    #[serde(skip)]
    Custom(fn(f64) -> f64),
}

impl RhoFunction {
    /// `(rho, rho', rho'', rho''')`.
    pub fn jet(&self, u: f64) -> [f64; 4] {
        match *self {
            Self::Constant { value } => [value, 0.0, 0.0, 0.0],
            Self::Biconservative { c0, alpha } => {
                let x = alpha * u;
                let (th, sech2) = (x.tanh(), 1.0 / x.cosh().powi(2));
                [
                    0.5 * c0.ln() + 3.0 * x.cosh().ln() + alpha.ln(),
                    3.0 * alpha * th,
                    3.0 * alpha * alpha * sech2,
                    -6.0 * alpha.powi(3) * sech2 * th,
                ]
            }
            Self::Mercator { radius } => {
                let (th, sech2) = (u.tanh(), 1.0 / u.cosh().powi(2));
                [radius.ln() - u.cosh().ln(), -th, -sech2, 2.0 * sech2 * th]
            }
            Self::Custom(rho) => {
                let h = 1e-3 * 1f64.max(u.abs());
                let (m2, m1, c, p1, p2) = (rho(u - 2.0 * h), rho(u - h), rho(u), rho(u + h), rho(u + 2.0 * h));
                [
                    c,
                    (p1 - m1) / (2.0 * h),
                    (p1 - 2.0 * c + m1) / (h * h),
                    (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConformalMetric {
    pub rho: RhoFunction,
    /// Curvature of the ambient space form.
    pub c: f64,
    /// Open interval of admissible `u`.
    pub domain: (f64, f64),
}

impl ConformalMetric {
    pub fn flat() -> Self {
        Self { rho: RhoFunction::Constant { value: 0.0 }, c: 0.0, domain: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    /// `C0 cosh^6(u) (du^2 + dv^2)`, ambient curvature 0.
    pub fn biconservative(c0: f64) -> Result<Self> {
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(GeoError::InvalidParameter(format!("C0 must be positive, got {c0}")));
        }
        Ok(Self {
            rho: RhoFunction::Biconservative { c0, alpha: 1.0 },
            c: 0.0,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    /// The same metric in coordinates rescaled by [`normalizing_homothety`],
    /// in which `rho'' = e^{-2 rho / 3}` holds exactly.
    pub fn biconservative_normalized(c0: f64) -> Result<Self> {
        let mut m = Self::biconservative(c0)?;
        m.rho = RhoFunction::Biconservative { c0, alpha: normalizing_homothety(c0) };
        Ok(m)
    }

    pub fn round(radius: f64) -> Self {
        Self { rho: RhoFunction::Mercator { radius }, c: 0.0, domain: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    pub fn contains(&self, u: f64) -> bool {
        u > self.domain.0 && u < self.domain.1
    }

    fn check(&self, u: f64) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(GeoError::OutOfDomain(format!("u = {u} outside {:?}", self.domain)))
        }
    }

    /// Conformal factor `e^{2 rho(u)}`.
    pub fn factor(&self, u: f64) -> f64 {
        (2.0 * self.rho.jet(u)[0]).exp()
    }
}

/// Scale `alpha = (27 C0)^{-1/8}` of the coordinate homothety `u = alpha x`
/// that turns `C0 cosh^6` into a solution of `rho'' = e^{-2 rho / 3}`.
pub fn normalizing_homothety(c0: f64) -> f64 {
    (27.0 * c0).powf(-0.125)
}

/// `K = -e^{-2 rho} rho''`.
pub fn gauss_curvature_conformal(m: &ConformalMetric, u: f64) -> Result<f64> {
    m.check(u)?;
    let j = m.rho.jet(u);
    Ok(-(-2.0 * j[0]).exp() * j[2])
}

/// `dK/du = e^{-2 rho} (2 rho' rho'' - rho''')`.
pub fn gauss_curvature_derivative(m: &ConformalMetric, u: f64) -> Result<f64> {
    m.check(u)?;
    let j = m.rho.jet(u);
    Ok((-2.0 * j[0]).exp() * (2.0 * j[1] * j[2] - j[3]))
}

/// Both sides of the level-curve identity at `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCurveCheck {
    pub u: f64,
    /// Geodesic curvature of the circle `u = const`, `e^{-rho} |rho'|`.
    pub geodesic_curvature: f64,
    /// `3 |grad K| / (8 (c - K))`.
    pub predicted: f64,
    pub residual: f64,
}

/// `kappa_g - 3 |grad K| / (8 (c - K))` on the coordinate circle through `u`.
pub fn level_curve_identity_residual(m: &ConformalMetric, u: f64) -> Result<LevelCurveCheck> {
    let k = gauss_curvature_conformal(m, u)?;
    let dk = gauss_curvature_derivative(m, u)?;
    let j = m.rho.jet(u);
    if !(m.c - k > 0.0) {
        return Err(GeoError::HypothesisViolated(format!("c - K = {} is not positive at u = {u}", m.c - k)));
    }
    if dk.abs() <= 1e-12 * (1.0 + k.abs()) {
        return Err(GeoError::HypothesisViolated(format!("grad K vanishes at u = {u}")));
    }
    let inv = (-j[0]).exp();
    let kg = inv * j[1].abs();
    let predicted = 3.0 * inv * dk.abs() / (8.0 * (m.c - k));
    Ok(LevelCurveCheck { u, geodesic_curvature: kg, predicted, residual: kg - predicted })
}

/// `a = rho'^2 + 3 e^{-2 rho / 3} + c e^{2 rho}`, constant along solutions.
pub fn first_integral(c: f64, rho: f64, drho: f64) -> f64 {
    drho * drho + 3.0 * (-2.0 * rho / 3.0).exp() + c * (2.0 * rho).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSamples {
    pub c: f64,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub a: Vec<f64>,
}

impl RhoSamples {
    /// Largest `|a(u) - a(u_0)|` over the run.
    pub fn first_integral_drift(&self) -> f64 {
        let a0 = self.a[0];
        self.a.iter().map(|a| (a - a0).abs()).fold(0.0, f64::max)
    }
}

/// Integrates `rho'' = e^{-2 rho / 3} - c e^{2 rho}` from `u_span.0` to
/// `u_span.1` with fixed RK4 steps, recording the first integral.
pub fn rho_ode_integrate(c: f64, rho0: f64, drho0: f64, u_span: (f64, f64), step: f64) -> Result<RhoSamples> {
    let rhs = move |_: f64, y: &[f64; 2]| [y[1], (-2.0 * y[0] / 3.0).exp() - c * (2.0 * y[0]).exp()];
    let traj = ode::integrate(rhs, u_span.0, [rho0, drho0], u_span.1, step, |_, _| Ok(()))?;
    Ok(RhoSamples {
        c,
        a: traj.y.iter().map(|y| first_integral(c, y[0], y[1])).collect(),
        rho: traj.y.iter().map(|y| y[0]).collect(),
        drho: traj.y.iter().map(|y| y[1]).collect(),
        u: traj.t,
    })
}

/// Which sign of `rho'` the quadrature follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Increasing,
    Decreasing,
}

const RADICAND_RELATIVE_FLOOR: f64 = 1e-12;

fn radicand(c: f64, a: f64, tau: f64) -> (f64, f64) {
    let (p, q) = (3.0 * (-2.0 * tau / 3.0).exp(), c * (2.0 * tau).exp());
    (a - p - q, a.abs() + p + q.abs())
}

/// `u(rho) = u0 +/- int_{rho0}^{rho} dtau / sqrt(a - 3 e^{-2 tau / 3} - c e^{2 tau})`.
///
/// Both ends are integrated after a square-root substitution so the
/// integrand stays smooth near a turning point of `rho`.
pub fn rho_quadrature(c: f64, a: f64, rho0: f64, u0: f64, rho: f64, branch: Branch) -> Result<f64> {
    if rho == rho0 {
        return Ok(u0);
    }
    const SCAN: usize = 64;
    for i in 0..=SCAN {
        let tau = rho0 + (rho - rho0) * i as f64 / SCAN as f64;
        let (value, scale) = radicand(c, a, tau);
        if !(value > RADICAND_RELATIVE_FLOOR * scale) {
            return Err(GeoError::RadicandNonpositive { tau, value });
        }
    }
    let integrand = |tau: f64| 1.0 / radicand(c, a, tau).0.sqrt();
    let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-13, max_intervals: 2000 };
    let value = quad::integrate_sqrt_both(integrand, rho0, rho, opts)?.value;
    Ok(match branch {
        Branch::Increasing => u0 + value,
        Branch::Decreasing => u0 - value,
    })
}

/// Agreement between the integrator and the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrip {
    pub checked: usize,
    pub max_error: f64,
}

/// Recovers `u` from `rho` by quadrature at every `every`-th sample of an
/// integrator run and compares with the integrator's `u`. Stops before the
/// first sample where `rho'` changes sign or falls below `1e-3`.
pub fn quadrature_round_trip(run: &RhoSamples, every: usize) -> Result<RoundTrip> {
    let every = every.max(1);
    let sign = run.drho[0].signum();
    let branch = if sign > 0.0 { Branch::Increasing } else { Branch::Decreasing };
    let mut out = RoundTrip { checked: 0, max_error: 0.0 };
    for i in (every..run.u.len()).step_by(every) {
        if !(run.drho[i] * sign >= 1e-3) {
            break;
        }
        let u = rho_quadrature(run.c, run.a[0], run.rho[0], run.u[0], run.rho[i], branch)?;
        out.checked += 1;
        out.max_error = out.max_error.max((u - run.u[i]).abs());
    }
    Ok(out)
}

/// Position, velocity and arc length along a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub s: f64,
}

impl GeodesicState {
    /// Unit-speed start at `(u, v)` making angle `angle` with `d/du`.
    pub fn unit(m: &ConformalMetric, u: f64, v: f64, angle: f64) -> Self {
        let inv = (-m.rho.jet(u)[0]).exp();
        Self { u, v, du: inv * angle.cos(), dv: inv * angle.sin(), s: 0.0 }
    }

    pub fn speed_squared(&self, m: &ConformalMetric) -> f64 {
        m.factor(self.u) * (self.du * self.du + self.dv * self.dv)
    }

    /// Conserved momentum `e^{2 rho(u)} dv/ds` of the `v`-translation symmetry.
    pub fn clairaut(&self, m: &ConformalMetric) -> f64 {
        m.factor(self.u) * self.dv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicRun {
    pub samples: Vec<GeodesicSample>,
    pub max_speed_drift: f64,
    pub max_clairaut_drift: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub clairaut: f64,
}

const UNIT_SPEED_TOL: f64 = 1e-8;

/// Integrates the geodesic equations of `m` by arc length up to `length`:
/// `u'' = -rho'(u'^2 - v'^2)`, `v'' = -2 rho' u' v'`.
pub fn geodesic_shoot(m: &ConformalMetric, start: GeodesicState, length: f64, step: f64) -> Result<GeodesicRun> {
    m.check(start.u)?;
    let speed = start.speed_squared(m);
    if (speed - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(GeoError::InvalidParameter(format!("start is not unit speed: |x'|^2 = {speed}")));
    }
    let metric = *m;
    let rhs = move |_: f64, y: &[f64; 4]| {
        let d = metric.rho.jet(y[0])[1];
        [y[2], y[3], -d * (y[2] * y[2] - y[3] * y[3]), -2.0 * d * y[2] * y[3]]
    };
    let guard = |s: f64, y: &[f64; 4]| {
        if metric.contains(y[0]) {
            Ok(())
        } else {
            Err(GeoError::DomainExit { t: s, reason: format!("u = {} left {:?}", y[0], metric.domain) })
        }
    };
    let traj = ode::integrate(rhs, start.s, [start.u, start.v, start.du, start.dv], start.s + length, step, guard)?;
    let p0 = start.clairaut(m);
    let mut run =
        GeodesicRun { samples: Vec::with_capacity(traj.len()), max_speed_drift: 0.0, max_clairaut_drift: 0.0, length };
    for (s, y) in traj.t.iter().zip(&traj.y) {
        let st = GeodesicState { u: y[0], v: y[1], du: y[2], dv: y[3], s: *s };
        let p = st.clairaut(m);
        run.max_speed_drift = run.max_speed_drift.max((st.speed_squared(m) - 1.0).abs());
        run.max_clairaut_drift = run.max_clairaut_drift.max((p - p0).abs());
        run.samples.push(GeodesicSample { s: *s, u: y[0], v: y[1], du: y[2], dv: y[3], clairaut: p });
    }
    Ok(run)
}

/// Outcome of shooting geodesics in many directions from one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessProbe {
    pub directions: usize,
    pub length: f64,
    pub reached: usize,
    pub max_speed_drift: f64,
    pub max_clairaut_drift: f64,
    pub failures: Vec<String>,
}

/// Shoots `directions` equally spaced unit-speed geodesics from `(u, v)`.
/// Evidence of completeness only: every geodesic reaching `length`
/// without leaving the domain is consistent with, not a proof of, it.
pub fn completeness_probe(
    m: &ConformalMetric,
    u: f64,
    v: f64,
    directions: usize,
    length: f64,
    step: f64,
) -> CompletenessProbe {
    use rayon::prelude::*;
    let runs: Vec<Result<GeodesicRun>> = (0..directions)
        .into_par_iter()
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / directions as f64;
            geodesic_shoot(m, GeodesicState::unit(m, u, v, angle), length, step)
        })
        .collect();
    let mut probe = CompletenessProbe {
        directions,
        length,
        reached: 0,
        max_speed_drift: 0.0,
        max_clairaut_drift: 0.0,
        failures: vec![],
    };
    for (k, r) in runs.into_iter().enumerate() {
        match r {
            Ok(run) => {
                probe.reached += 1;
                probe.max_speed_drift = probe.max_speed_drift.max(run.max_speed_drift);
                probe.max_clairaut_drift = probe.max_clairaut_drift.max(run.max_clairaut_drift);
            }
            Err(e) => probe.failures.push(format!("direction {k}: {e}")),
        }
    }
    probe
}
