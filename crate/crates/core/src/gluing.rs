//! Boundary circle, boundary limits of `f` and `grad f`, the mirror
//! construction and smooth-matching checks, and meridian geodesics.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffgeo::{point_geometry, ChartId, ChartPoint, GeometryOptions, Immersion, Vec2};
use crate::error::{GeoError, Result};
use crate::families::{c0_from_ct0, SurfaceFamily};
use crate::numerics::ode;
use crate::numerics::richardson::extrapolate_to_zero;
use crate::profiles::{boundary_radius, CompleteProfile};

/// Header carried by every gluing report.
pub const SCOPE_NOTE: &str =
    "consistency evidence on the explicit family only; says nothing about other biconservative surfaces";

/// Relative field step used near the boundary: `h = BOUNDARY_STEP_RATIO * theta`.
pub const BOUNDARY_STEP_RATIO: f64 = 1e-2;

/// Mean curvature on the boundary circle, `(2/3) Ct0^{3/2}`.
pub fn boundary_mean_curvature(ct0: f64) -> f64 {
    2.0 / 3.0 * ct0.powf(1.5)
}

/// `theta_k = first * ratio^k`, `k = 0..count`.
pub fn geometric_thetas(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * ratio.powi(k as i32)).collect()
}

pub fn default_thetas() -> Vec<f64> {
    geometric_thetas(1e-2, 0.5, 12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRecord {
    pub theta: f64,
    pub f: f64,
    pub grad_norm: f64,
    /// Angle between the unit normal and the Oxy plane, radians.
    pub tilt: f64,
}

impl BoundaryRecord {
    pub fn tilt_deg(&self) -> f64 {
        self.tilt.to_degrees()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProbe {
    pub note: &'static str,
    pub ct0: f64,
    pub boundary_radius: f64,
    pub expected_f: f64,
    pub records: Vec<BoundaryRecord>,
    /// Limits at `theta -> 0` extrapolated from the two smallest `theta`.
    pub f_limit: f64,
    pub grad_limit: f64,
    pub tilt_limit: f64,
}

impl BoundaryProbe {
    pub fn grad_monotone_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].grad_norm < w[0].grad_norm)
    }
}

/// Samples `f`, `|grad f|` and the normal tilt along `thetas` in the
/// `theta` chart and extrapolates them to the boundary circle. `f` is
/// smooth in `theta` (exponent 1); `|grad f|` and the tilt go like
/// `sqrt(theta)` (exponent 1/2).
pub fn boundary_limits(ct0: f64, thetas: &[f64]) -> Result<BoundaryProbe> {
    let family = SurfaceFamily::sc(ct0)?;
    if thetas.len() < 2 {
        return Err(GeoError::InvalidParameter("need at least two theta values".into()));
    }
    if thetas.iter().any(|t| !(*t > 0.0)) || thetas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GeoError::InvalidParameter("theta sequence must be positive and strictly decreasing".into()));
    }
    let records = thetas
        .par_iter()
        .map(|&theta| {
            let opts = GeometryOptions::analytic_with_field_step(BOUNDARY_STEP_RATIO * theta);
            let g = point_geometry(&family, ChartPoint::new(theta, 0.0, ChartId::Theta), &opts)?;
            Ok(BoundaryRecord {
                theta,
                f: g.f(),
                grad_norm: g.grad_f_norm(),
                tilt: g.forms.normal.z.abs().min(1.0).asin(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = (records[records.len() - 2], records[records.len() - 1]);
    Ok(BoundaryProbe {
        note: SCOPE_NOTE,
        ct0,
        boundary_radius: boundary_radius(ct0),
        expected_f: boundary_mean_curvature(ct0),
        f_limit: extrapolate_to_zero(a.theta, a.f, b.theta, b.f, 1.0),
        grad_limit: extrapolate_to_zero(a.theta, a.grad_norm, b.theta, b.grad_norm, 0.5),
        tilt_limit: extrapolate_to_zero(a.theta, a.tilt, b.theta, b.tilt, 0.5),
        records,
    })
}

/// How the lower piece (`u < 0`) is produced from an upper piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GluingCandidate {
    /// Reflection of the same piece through the Oxy plane.
    Mirror,
    /// Reflection of the piece with a different `C0`.
    MirrorOther { c0: f64 },
    /// The same piece traversed backwards and shifted by `dz` along Oz.
    Translate { dz: f64 },
}

pub const DEFAULT_MATCH_ORDER: usize = 4;
pub const MATCH_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub note: &'static str,
    pub c0: f64,
    pub order: usize,
    pub candidate: GluingCandidate,
    /// `[rho, z]` mismatch of the `n`-th derivative at `u = 0`, `n = 0..=order`.
    pub mismatch: Vec<[f64; 2]>,
    pub tolerance: f64,
    pub first_failing_order: Option<usize>,
}

impl MatchReport {
    pub fn passed(&self) -> bool {
        self.first_failing_order.is_none()
    }
}

/// Compares the one-sided `u`-jets at the neck of the upper profile
/// `u >= 0` of the complete surface with those of the lower piece built by
/// `candidate`, up to derivative order `k <= 4`.
pub fn mirror_and_match(c0: f64, k: usize, candidate: GluingCandidate) -> Result<MatchReport> {
    if k > 4 {
        return Err(GeoError::InvalidParameter(format!("derivative order {k} exceeds 4")));
    }
    let upper = CompleteProfile::new(c0)?;
    let lower_source = match candidate {
        GluingCandidate::MirrorOther { c0 } => CompleteProfile::new(c0)?,
        _ => upper,
    };
    // d^n/du^n of t(-u) at u = 0 is (-1)^n t^(n)(0).
    let lower = |n: usize| -> Vec2 {
        let d = lower_source.derivative(0.0, n) * if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        match candidate {
            GluingCandidate::Mirror | GluingCandidate::MirrorOther { .. } => Vec2::new(d.x, -d.y),
            GluingCandidate::Translate { dz } => d + if n == 0 { Vec2::new(0.0, dz) } else { Vec2::zeros() },
        }
    };
    let mismatch: Vec<[f64; 2]> = (0..=k)
        .map(|n| {
            let diff = upper.derivative(0.0, n) - lower(n);
            [diff.x, diff.y]
        })
        .collect();
    let first_failing_order =
        mismatch.iter().position(|m| m[0].abs() > MATCH_TOLERANCE || m[1].abs() > MATCH_TOLERANCE);
    Ok(MatchReport {
        note: SCOPE_NOTE,
        c0,
        order: k,
        candidate,
        mismatch,
        tolerance: MATCH_TOLERANCE,
        first_failing_order,
    })
}

/// Same as [`mirror_and_match`] with both pieces given by their `Ct0`.
pub fn mirror_and_match_sc(ct0: f64, ct0_other: f64, k: usize) -> Result<MatchReport> {
    let candidate = if ct0_other == ct0 {
        GluingCandidate::Mirror
    } else {
        GluingCandidate::MirrorOther { c0: c0_from_ct0(ct0_other) }
    };
    mirror_and_match(c0_from_ct0(ct0), k, candidate)
}

/// Initial direction of a geodesic on the complete surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeodesicStart {
    /// Tangent to the meridian `v = v0`, from `u_span.0` toward `u_span.1`.
    Meridian { v0: f64 },
    /// Tangent to the parallel `u = u0`, once around it.
    Parallel { u0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub note: &'static str,
    pub c0: f64,
    pub start: GeodesicStart,
    pub u_span: (f64, f64),
    pub step: f64,
    pub length: f64,
    /// Largest ambient distance from the reference meridian or parallel.
    pub max_deviation: f64,
    pub final_u: f64,
    pub final_v: f64,
    pub steps: usize,
}

/// Integrates the geodesic equation of the complete surface in the global
/// chart, with Christoffel symbols taken from the immersion's jets, and
/// measures how far the geodesic strays from the meridian (or parallel)
/// it starts tangent to.
pub fn meridian_geodesic_check(c0: f64, u_span: (f64, f64), start: GeodesicStart, step: f64) -> Result<DriftReport> {
    if !u_span.0.is_finite() || !u_span.1.is_finite() {
        return Err(GeoError::InvalidParameter(format!("u span {u_span:?} must be finite")));
    }
    let surface = SurfaceFamily::stilde(c0)?;
    let profile = CompleteProfile::new(c0)?;
    let (u0, v0, length) = match start {
        GeodesicStart::Meridian { v0 } => {
            (u_span.0, v0, (profile.arclength_from_neck(u_span.1) - profile.arclength_from_neck(u_span.0)).abs())
        }
        GeodesicStart::Parallel { u0 } => (u0, 0.0, 2.0 * std::f64::consts::PI / 3.0 * c0.sqrt() * u0.cosh().powi(3)),
    };
    let g = surface.analytic_jet(u0, v0).expect("closed form")?.metric();
    let y0 = match start {
        GeodesicStart::Meridian { .. } => [u0, v0, (u_span.1 - u_span.0).signum() / g[(0, 0)].sqrt(), 0.0],
        GeodesicStart::Parallel { .. } => [u0, v0, 0.0, 1.0 / g[(1, 1)].sqrt()],
    };
    let rhs = |_: f64, y: &[f64; 4]| {
        let gamma = surface
            .analytic_jet(y[0], y[1])
            .expect("closed form")
            .and_then(|j| j.christoffel())
            .map(|g| g.map(|m| m[(0, 0)] * y[2] * y[2] + 2.0 * m[(0, 1)] * y[2] * y[3] + m[(1, 1)] * y[3] * y[3]))
            .unwrap_or([f64::NAN; 2]);
        [y[2], y[3], -gamma[0], -gamma[1]]
    };
    let traj = ode::integrate(rhs, 0.0, y0, length, step, |_, _| Ok(()))?;
    let mut max_deviation = 0.0f64;
    for y in &traj.y {
        let here = surface.position(y[0], y[1])?;
        let reference = match start {
            GeodesicStart::Meridian { v0 } => surface.position(y[0], v0)?,
            GeodesicStart::Parallel { u0 } => surface.position(u0, y[1])?,
        };
        max_deviation = max_deviation.max((here - reference).norm());
    }
    let (_, last) = traj.last();
    Ok(DriftReport {
        note: SCOPE_NOTE,
        c0,
        start,
        u_span,
        step,
        length,
        max_deviation,
        final_u: last[0],
        final_v: last[1],
        steps: traj.len() - 1,
    })
}
