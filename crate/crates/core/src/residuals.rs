//! Pointwise residuals of the biconservativity identities and grid sweeps
//! that audit them under step refinement.
//!
//! Three identities are checked at every point:
//!
//! * `A(grad f) + (f/2) grad f = 0` (reported as its g-norm),
//! * `f Delta f + |grad f|^2 + (4/3) c f^2 - f^4 = 0`,
//! * `f Delta f - 3 |grad f|^2 - 2 <A, Hess f> = 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffgeo::{
    point_geometry, ChartPoint, GeometryOptions, Immersion, LaplacianConvention, PointGeometry, Vec2,
    CALIBRATED_LAPLACIAN,
};
use crate::error::Result;
use crate::families::SurfaceFamily;
use crate::numerics::richardson::observed_order;

/// `A(grad f) + (f/2) grad f` in coordinate components.
pub fn bicons_residual(geom: &PointGeometry) -> Vec2 {
    geom.forms.shape * geom.mean.grad + 0.5 * geom.f() * geom.mean.grad
}

/// g-norm of [`bicons_residual`].
pub fn bicons_residual_norm(geom: &PointGeometry) -> f64 {
    let r = bicons_residual(geom);
    geom.forms.inner(&r, &r).max(0.0).sqrt()
}

/// `f Delta f + |grad f|^2 + (4/3) c f^2 - f^4`.
pub fn pde_residual(geom: &PointGeometry, c: f64) -> f64 {
    let f = geom.f();
    f * geom.mean.lap + geom.mean.grad_norm2 + 4.0 / 3.0 * c * f * f - f.powi(4)
}

/// Full contraction `A^i_j (Hess f)^j_i`, indices raised with `g`.
pub fn shape_hessian_pairing(geom: &PointGeometry) -> f64 {
    (geom.forms.shape * geom.forms.metric_inverse() * geom.mean.hess).trace()
}

/// `f Delta f - 3 |grad f|^2 - 2 <A, Hess f>`.
pub fn hess_residual(geom: &PointGeometry) -> f64 {
    geom.f() * geom.mean.lap - 3.0 * geom.mean.grad_norm2 - 2.0 * shape_hessian_pairing(geom)
}

const SCALE_FLOOR: f64 = 1e-30;

/// Curvature scale `f^4 + |grad f|^2` used to nondimensionalize residuals.
pub fn residual_scale(geom: &PointGeometry) -> f64 {
    geom.f().powi(4) + geom.mean.grad_norm2 + SCALE_FLOOR
}

/// Inclusive `start:end:count` sampling of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Range {
    pub fn new(start: f64, end: f64, count: usize) -> Self {
        Self { start, end, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + (self.end - self.start) * (i as f64 / n) })
            .collect()
    }
}

/// Tensor grid in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub u: Range,
    pub v: Range,
}

impl Grid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let vs = self.v.values();
        self.u.values().into_iter().flat_map(|u| vs.iter().map(move |&v| (u, v))).collect()
    }

    /// Default verification grid for a family.
    pub fn default_for(family: &SurfaceFamily) -> Self {
        use crate::families::FamilyKind::*;
        let full_v = |p: f64| Range::new(0.0, p * (1.0 - 1.0 / 8.0), 8);
        match family.kind {
            Sc { .. } => Grid { u: Range::new(0.2, 5.0, 20), v: full_v(2.0 * std::f64::consts::PI) },
            STilde { .. } => Grid { u: Range::new(-2.0, 2.0, 21), v: full_v(2.0 * std::f64::consts::PI / 3.0) },
            Sphere { .. } | Ellipsoid { .. } => {
                Grid { u: Range::new(0.2, 2.9, 20), v: full_v(2.0 * std::f64::consts::PI) }
            }
            Cylinder { .. } | Plane => Grid { u: Range::new(-2.0, 2.0, 20), v: full_v(2.0 * std::f64::consts::PI) },
        }
    }
}

/// Residuals and curvature data at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub f: f64,
    pub gauss: f64,
    pub grad_norm: f64,
    pub residual_bicons: f64,
    pub residual_pde: f64,
    pub residual_hess: f64,
    pub nondim_bicons: f64,
    pub nondim_pde: f64,
    pub nondim_hess: f64,
    pub error: Option<String>,
}

impl PointRecord {
    fn failed(index: usize, u: f64, v: f64, err: String) -> Self {
        Self {
            index,
            u,
            v,
            f: f64::NAN,
            gauss: f64::NAN,
            grad_norm: f64::NAN,
            residual_bicons: f64::NAN,
            residual_pde: f64::NAN,
            residual_hess: f64::NAN,
            nondim_bicons: f64::NAN,
            nondim_pde: f64::NAN,
            nondim_hess: f64::NAN,
            error: Some(err),
        }
    }

    pub fn from_geometry(index: usize, geom: &PointGeometry, c: f64) -> Self {
        let scale = residual_scale(geom);
        let (b, p, h) = (bicons_residual_norm(geom), pde_residual(geom, c), hess_residual(geom));
        Self {
            index,
            u: geom.point.u,
            v: geom.point.v,
            f: geom.f(),
            gauss: geom.gauss(),
            grad_norm: geom.grad_f_norm(),
            residual_bicons: b,
            residual_pde: p,
            residual_hess: h,
            nondim_bicons: b / scale.powf(0.75),
            nondim_pde: p / scale,
            nondim_hess: h / scale,
            error: None,
        }
    }
}

/// The three residual magnitudes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualTriple {
    pub bicons: f64,
    pub pde: f64,
    pub hess: f64,
}

pub fn residuals_at(surface: &dyn Immersion, u: f64, v: f64, opts: &GeometryOptions, c: f64) -> Result<ResidualTriple> {
    let geom = point_geometry(surface, ChartPoint::new(u, v, surface.chart_id()), opts)?;
    Ok(ResidualTriple {
        bicons: bicons_residual_norm(&geom),
        pde: pde_residual(&geom, c).abs(),
        hess: hess_residual(&geom).abs(),
    })
}

/// Residuals at successive halvings of a pure finite-difference step,
/// with the observed orders between consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub u: f64,
    pub v: f64,
    pub steps: Vec<f64>,
    pub bicons: Vec<f64>,
    pub pde: Vec<f64>,
    pub hess: Vec<f64>,
    pub order_bicons: Vec<Option<f64>>,
    pub order_pde: Vec<Option<f64>>,
    pub order_hess: Vec<Option<f64>>,
    pub error: Option<String>,
}

fn orders(errs: &[f64], steps: &[f64]) -> Vec<Option<f64>> {
    errs.windows(2).zip(steps.windows(2)).map(|(e, h)| observed_order(e[0], e[1], h[0] / h[1])).collect()
}

/// Runs the residuals at each step of `steps` using `make_opts(h)`.
pub fn refinement_study<F>(
    surface: &dyn Immersion,
    u: f64,
    v: f64,
    steps: &[f64],
    c: f64,
    make_opts: F,
) -> RefinementStudy
where
    F: Fn(f64) -> GeometryOptions,
{
    let runs: Result<Vec<ResidualTriple>> =
        steps.iter().map(|&h| residuals_at(surface, u, v, &make_opts(h), c)).collect();
    match runs {
        Ok(runs) => {
            let pick = |g: fn(&ResidualTriple) -> f64| runs.iter().map(g).collect::<Vec<_>>();
            let (b, p, h) = (pick(|r| r.bicons), pick(|r| r.pde), pick(|r| r.hess));
            RefinementStudy {
                u,
                v,
                steps: steps.to_vec(),
                order_bicons: orders(&b, steps),
                order_pde: orders(&p, steps),
                order_hess: orders(&h, steps),
                bicons: b,
                pde: p,
                hess: h,
                error: None,
            }
        }
        Err(e) => RefinementStudy {
            u,
            v,
            steps: steps.to_vec(),
            bicons: vec![],
            pde: vec![],
            hess: vec![],
            order_bicons: vec![],
            order_pde: vec![],
            order_hess: vec![],
            error: Some(e.to_string()),
        },
    }
}

/// Default pure finite-difference steps for refinement at the probes.
pub const REFINEMENT_STEPS: [f64; 3] = [8e-2, 4e-2, 2e-2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    /// Max and mean of `|x|` over the finite values.
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
        for x in values.filter(|x| x.is_finite()).map(f64::abs) {
            max = max.max(x);
            sum += x;
            n += 1;
        }
        Self { max, mean: if n == 0 { 0.0 } else { sum / n as f64 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub bicons: Stats,
    pub pde: Stats,
    pub hess: Stats,
    pub failed_points: usize,
    pub refinement: Vec<RefinementStudy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub family: String,
    pub family_params: SurfaceFamily,
    pub ambient_curvature: f64,
    pub grid: Grid,
    pub options: GeometryOptions,
    pub convention_note: String,
    pub records: Vec<PointRecord>,
    pub summary: Summary,
}

/// Evaluates all residuals over `grid` and refinement studies at the
/// family's probe points. Per-point failures are recorded, not raised.
/// Output order follows grid index regardless of scheduling.
pub fn sweep(family: &SurfaceFamily, grid: &Grid, opts: &GeometryOptions) -> ResidualReport {
    let c = 0.0;
    let points = grid.points();
    let records: Vec<PointRecord> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(u, v))| match point_geometry(family, ChartPoint::new(u, v, family.chart), opts) {
            Ok(geom) => PointRecord::from_geometry(i, &geom, c),
            Err(e) => PointRecord::failed(i, u, v, e.to_string()),
        })
        .collect();
    let laplacian = opts.laplacian;
    let refinement: Vec<RefinementStudy> = family
        .default_probes()
        .par_iter()
        .map(|&(u, v)| {
            refinement_study(family, u, v, &REFINEMENT_STEPS, c, |h| GeometryOptions {
                laplacian,
                ..GeometryOptions::pure_fd(h)
            })
        })
        .collect();
    let summary = Summary {
        bicons: Stats::of(records.iter().map(|r| r.residual_bicons)),
        pde: Stats::of(records.iter().map(|r| r.residual_pde)),
        hess: Stats::of(records.iter().map(|r| r.residual_hess)),
        failed_points: records.iter().filter(|r| r.error.is_some()).count(),
        refinement,
    };
    ResidualReport {
        family: family.id(),
        family_params: *family,
        ambient_curvature: c,
        grid: *grid,
        options: *opts,
        convention_note: opts.laplacian.note().to_string(),
        records,
        summary,
    }
}

/// Outcome of choosing the Laplacian sign from data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub chosen: LaplacianConvention,
    pub max_pde_analyst: f64,
    pub max_pde_geometer: f64,
}

/// Evaluates the PDE residual under both Laplacian signs on interior
/// points of the extrinsic biconservative family and keeps the sign under
/// which it vanishes.
pub fn calibrate_laplacian() -> Result<Calibration> {
    let family = SurfaceFamily::sc(1.0)?;
    let mut worst = [0.0f64; 2];
    for (k, conv) in [LaplacianConvention::Analyst, LaplacianConvention::Geometer].into_iter().enumerate() {
        let opts = GeometryOptions { laplacian: conv, ..GeometryOptions::default() };
        for &(u, v) in &family.default_probes() {
            let geom = point_geometry(&family, ChartPoint::new(u, v, family.chart), &opts)?;
            worst[k] = worst[k].max(pde_residual(&geom, 0.0).abs());
        }
    }
    let chosen = if worst[1] < worst[0] { LaplacianConvention::Geometer } else { LaplacianConvention::Analyst };
    Ok(Calibration { chosen, max_pde_analyst: worst[0], max_pde_geometer: worst[1] })
}

/// Confirms the hard-coded convention still matches a fresh calibration.
pub fn calibrated_convention_holds() -> Result<bool> {
    Ok(calibrate_laplacian()?.chosen == CALIBRATED_LAPLACIAN)
}
