//! Second-order jets of parametric surfaces and the geometry derived from
//! them: fundamental forms, shape operator, curvatures, and the intrinsic
//! calculus (gradient, Hessian, Laplace-Beltrami) of scalar fields.
//!
//! Everything here works in a single chart with coordinates `(u, v)`. The
//! shape operator is stored as the coordinate matrix `g^{-1} II`, which is
//! self-adjoint with respect to `g` but generally not symmetric.

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Smallest and largest finite-difference steps accepted anywhere.
pub const H_MIN: f64 = 1e-8;
pub const H_MAX: f64 = 1e-1;

/// Relative threshold for chart collapse: `EG - F^2 <= EPS_G (E + G)^2`.
pub const EPS_G: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartId {
    /// `(theta, v)` chart of the extrinsic biconservative family.
    Theta,
    /// `(rho, v)` graph chart of the extrinsic biconservative family.
    Rho,
    /// Global `(u, v)` chart of the complete biconservative surface.
    Global,
    /// `(polar angle, azimuth)` on spheres and ellipsoids.
    Polar,
    /// `(height, azimuth)` on cylinders.
    Cylindrical,
    Cartesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
    pub chart: ChartId,
}

impl ChartPoint {
    pub fn new(u: f64, v: f64, chart: ChartId) -> Self {
        Self { u, v, chart }
    }
}

/// Open coordinate box of a chart. A `v_period` means `v` wraps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub v_period: Option<f64>,
}

impl Domain {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let in_u = u > self.u.0 && u < self.u.1;
        let in_v = self.v_period.is_some() || (v > self.v.0 && v < self.v.1);
        in_u && in_v && u.is_finite() && v.is_finite()
    }
}

/// Position and first/second partial derivatives of an immersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub position: Vec3,
    pub d_u: Vec3,
    pub d_v: Vec3,
    pub d_uu: Vec3,
    pub d_uv: Vec3,
    pub d_vv: Vec3,
}

impl Jet2 {
    pub fn metric(&self) -> Mat2 {
        let f = self.d_u.dot(&self.d_v);
        Mat2::new(self.d_u.norm_squared(), f, f, self.d_v.norm_squared())
    }

    /// Christoffel symbols of the induced metric, `gamma[k][(i, j)]`.
    ///
    /// Uses `Gamma^k_ij = g^{kl} <x_ij, x_l>`, valid for any immersion.
    pub fn christoffel(&self) -> Result<[Mat2; 2]> {
        let g_inv = invert_metric(&self.metric())?;
        let second = [[self.d_uu, self.d_uv], [self.d_uv, self.d_vv]];
        let tangent = [self.d_u, self.d_v];
        let mut gamma = [Mat2::zeros(); 2];
        for i in 0..2 {
            for j in 0..2 {
                let lowered = Vec2::new(second[i][j].dot(&tangent[0]), second[i][j].dot(&tangent[1]));
                let raised = g_inv * lowered;
                gamma[0][(i, j)] = raised[0];
                gamma[1][(i, j)] = raised[1];
            }
        }
        Ok(gamma)
    }

    pub fn area_element(&self) -> f64 {
        self.d_u.cross(&self.d_v).norm()
    }
}

fn invert_metric(g: &Mat2) -> Result<Mat2> {
    let det = g.determinant();
    let trace = g[(0, 0)] + g[(1, 1)];
    let threshold = EPS_G * trace * trace;
    if !(det > threshold) || !det.is_finite() {
        return Err(GeoError::DegenerateMetric { det, threshold });
    }
    Ok(Mat2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det)
}

/// Extrinsic data at one point: both fundamental forms, the oriented unit
/// normal, and the shape operator with its trace and determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceForms {
    pub e: f64,
    pub f_: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: Vec3,
    pub shape: Mat2,
    /// Mean curvature as the trace of the shape operator (no 1/2 factor).
    pub mean: f64,
    pub gauss: f64,
}

impl SurfaceForms {
    pub fn metric(&self) -> Mat2 {
        Mat2::new(self.e, self.f_, self.f_, self.g)
    }

    pub fn metric_inverse(&self) -> Mat2 {
        let det = self.e * self.g - self.f_ * self.f_;
        Mat2::new(self.g, -self.f_, -self.f_, self.e) / det
    }

    pub fn second_form(&self) -> Mat2 {
        Mat2::new(self.l, self.m, self.m, self.n)
    }

    /// `K` from the determinant quotient `(LN - M^2) / (EG - F^2)`.
    pub fn gauss_from_forms(&self) -> f64 {
        (self.l * self.n - self.m * self.m) / (self.e * self.g - self.f_ * self.f_)
    }

    /// g-inner product of two tangent vectors given in coordinates.
    pub fn inner(&self, a: &Vec2, b: &Vec2) -> f64 {
        a.dot(&(self.metric() * b))
    }
}

/// First and second fundamental forms of `jet`, with the normal
/// `orientation * (x_u x x_v) / |x_u x x_v|`.
pub fn fundamental_forms(jet: &Jet2, orientation: f64) -> Result<SurfaceForms> {
    let g = jet.metric();
    let g_inv = invert_metric(&g)?;
    let cross = jet.d_u.cross(&jet.d_v);
    let normal = orientation.signum() * cross / cross.norm();
    let (l, m, n) = (jet.d_uu.dot(&normal), jet.d_uv.dot(&normal), jet.d_vv.dot(&normal));
    let shape = g_inv * Mat2::new(l, m, m, n);
    Ok(SurfaceForms {
        e: g[(0, 0)],
        f_: g[(0, 1)],
        g: g[(1, 1)],
        l,
        m,
        n,
        normal,
        shape,
        mean: shape.trace(),
        gauss: shape.determinant(),
    })
}

/// A parametrized surface in one chart.
pub trait Immersion: Sync {
    fn chart_id(&self) -> ChartId;

    fn domain(&self) -> Domain;

    /// +1 or -1, multiplies `x_u x x_v` to give the selected normal.
    fn orientation(&self) -> f64;

    fn position(&self, u: f64, v: f64) -> Result<Vec3>;

    /// Closed-form jet, or `None` when the surface has no analytic partials.
    fn analytic_jet(&self, _u: f64, _v: f64) -> Option<Result<Jet2>> {
        None
    }

    /// Closed-form mean curvature, when the surface has one.
    fn mean_curvature_closed_form(&self, _u: f64, _v: f64) -> Option<f64> {
        None
    }

    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum JetMode {
    Analytic,
    /// Central differences; `h = None` selects [`default_step`].
    FiniteDifference {
        h: Option<f64>,
    },
}

/// `1e-4 * max(1, |u|, |v|)`.
pub fn default_step(u: f64, v: f64) -> f64 {
    1e-4 * 1f64.max(u.abs()).max(v.abs())
}

fn check_step(h: f64) -> Result<f64> {
    if (H_MIN..=H_MAX).contains(&h) {
        Ok(h)
    } else {
        Err(GeoError::InvalidStep { h, min: H_MIN, max: H_MAX })
    }
}

fn check_stencil(domain: &Domain, u: f64, v: f64, h: f64) -> Result<()> {
    for (du, dv) in [(-h, -h), (-h, h), (h, -h), (h, h)] {
        if !domain.contains(u + du, v + dv) {
            return Err(GeoError::StencilOutOfDomain { u, v });
        }
    }
    Ok(())
}

pub fn jet_of(surface: &dyn Immersion, p: ChartPoint, mode: JetMode) -> Result<Jet2> {
    let domain = surface.domain();
    if !domain.contains(p.u, p.v) {
        return Err(GeoError::OutOfDomain(format!("({}, {}) in {}", p.u, p.v, surface.label())));
    }
    match mode {
        JetMode::Analytic => {
            surface.analytic_jet(p.u, p.v).unwrap_or_else(|| Err(GeoError::UnsupportedMode(surface.label())))
        }
        JetMode::FiniteDifference { h } => {
            let h = check_step(h.unwrap_or_else(|| default_step(p.u, p.v)))?;
            check_stencil(&domain, p.u, p.v, h)?;
            let x = |du: f64, dv: f64| surface.position(p.u + du, p.v + dv);
            let c = x(0.0, 0.0)?;
            let (up, um, vp, vm) = (x(h, 0.0)?, x(-h, 0.0)?, x(0.0, h)?, x(0.0, -h)?);
            let (pp, pm, mp, mm) = (x(h, h)?, x(h, -h)?, x(-h, h)?, x(-h, -h)?);
            Ok(Jet2 {
                position: c,
                d_u: (up - um) / (2.0 * h),
                d_v: (vp - vm) / (2.0 * h),
                d_uu: (up - 2.0 * c + um) / (h * h),
                d_vv: (vp - 2.0 * c + vm) / (h * h),
                d_uv: (pp - pm - mp + mm) / (4.0 * h * h),
            })
        }
    }
}

/// Sign convention for the Laplace-Beltrami operator on functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianConvention {
    /// `Delta f = div grad f` (negative semi-definite).
    Analyst,
    /// `Delta f = -div grad f` (positive semi-definite).
    Geometer,
}

impl LaplacianConvention {
    pub fn sign(self) -> f64 {
        match self {
            Self::Analyst => 1.0,
            Self::Geometer => -1.0,
        }
    }

    pub fn note(self) -> &'static str {
        match self {
            Self::Analyst => "Laplace-Beltrami sign: Delta f = +div grad f",
            Self::Geometer => "Laplace-Beltrami sign: Delta f = -div grad f",
        }
    }
}

/// The convention under which `f Delta f + |grad f|^2 - f^4` vanishes on
/// the biconservative family. `residuals::calibrate_laplacian` recomputes
/// it from scratch and the test suite checks the two agree.
pub const CALIBRATED_LAPLACIAN: LaplacianConvention = LaplacianConvention::Geometer;

/// How derivatives of a scalar field are approximated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum DifferentiationScheme {
    /// Second-order central differences.
    Central { h: Option<f64> },
    /// Central differences at `h` and `h/2` combined to cancel the `h^2` term.
    Richardson { h: Option<f64> },
}

impl Default for DifferentiationScheme {
    fn default() -> Self {
        Self::Central { h: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryOptions {
    pub jet: JetMode,
    pub field: DifferentiationScheme,
    pub laplacian: LaplacianConvention,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self { jet: JetMode::Analytic, field: DifferentiationScheme::default(), laplacian: CALIBRATED_LAPLACIAN }
    }
}

impl GeometryOptions {
    /// Finite-difference jets and field derivatives, both at step `h`.
    pub fn pure_fd(h: f64) -> Self {
        Self {
            jet: JetMode::FiniteDifference { h: Some(h) },
            field: DifferentiationScheme::Central { h: Some(h) },
            laplacian: CALIBRATED_LAPLACIAN,
        }
    }

    pub fn analytic_with_field_step(h: f64) -> Self {
        Self { field: DifferentiationScheme::Central { h: Some(h) }, ..Self::default() }
    }
}

/// Gradient (contravariant components), Hessian (covariant components) and
/// Laplacian of a scalar field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDerivatives {
    pub value: f64,
    pub differential: Vec2,
    pub grad: Vec2,
    pub grad_norm2: f64,
    pub hess: Mat2,
    pub lap: f64,
}

#[derive(Debug, Clone, Copy)]
struct RawPartials {
    value: f64,
    d: Vec2,
    dd: Mat2,
}

fn central_partials<F>(field: &F, u: f64, v: f64, h: f64) -> Result<RawPartials>
where
    F: Fn(f64, f64) -> Result<f64> + ?Sized,
{
    let c = field(u, v)?;
    let (up, um, vp, vm) = (field(u + h, v)?, field(u - h, v)?, field(u, v + h)?, field(u, v - h)?);
    let (pp, pm, mp, mm) = (field(u + h, v + h)?, field(u + h, v - h)?, field(u - h, v + h)?, field(u - h, v - h)?);
    let uv = (pp - pm - mp + mm) / (4.0 * h * h);
    Ok(RawPartials {
        value: c,
        d: Vec2::new((up - um) / (2.0 * h), (vp - vm) / (2.0 * h)),
        dd: Mat2::new((up - 2.0 * c + um) / (h * h), uv, uv, (vp - 2.0 * c + vm) / (h * h)),
    })
}

/// Intrinsic calculus of `field` at `p`, using the metric and connection of
/// the surface's jet at `p` (in the jet mode of `opts`).
pub fn scalar_field_calculus<F>(
    surface: &dyn Immersion,
    field: &F,
    p: ChartPoint,
    opts: &GeometryOptions,
) -> Result<FieldDerivatives>
where
    F: Fn(f64, f64) -> Result<f64> + ?Sized,
{
    let jet = jet_of(surface, p, opts.jet)?;
    let domain = surface.domain();
    let raw = match opts.field {
        DifferentiationScheme::Central { h } => {
            let h = check_step(h.unwrap_or_else(|| default_step(p.u, p.v)))?;
            check_stencil(&domain, p.u, p.v, h)?;
            central_partials(field, p.u, p.v, h)?
        }
        DifferentiationScheme::Richardson { h } => {
            let h = check_step(h.unwrap_or_else(|| default_step(p.u, p.v)))?;
            check_stencil(&domain, p.u, p.v, h)?;
            let coarse = central_partials(field, p.u, p.v, h)?;
            let fine = central_partials(field, p.u, p.v, 0.5 * h)?;
            RawPartials { value: fine.value, d: (4.0 * fine.d - coarse.d) / 3.0, dd: (4.0 * fine.dd - coarse.dd) / 3.0 }
        }
    };
    field_derivatives_from_partials(&jet, raw.value, raw.d, raw.dd, opts.laplacian)
}

/// Assembles gradient, Hessian and Laplacian from coordinate partials.
pub fn field_derivatives_from_partials(
    jet: &Jet2,
    value: f64,
    d: Vec2,
    dd: Mat2,
    convention: LaplacianConvention,
) -> Result<FieldDerivatives> {
    let g_inv = invert_metric(&jet.metric())?;
    let gamma = jet.christoffel()?;
    let grad = g_inv * d;
    let hess = dd - gamma[0] * d[0] - gamma[1] * d[1];
    let div_grad = (g_inv * hess).trace();
    Ok(FieldDerivatives {
        value,
        differential: d,
        grad,
        grad_norm2: d.dot(&grad),
        hess,
        lap: convention.sign() * div_grad,
    })
}

/// Everything the residual identities consume at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub point: ChartPoint,
    pub position: Vec3,
    pub forms: SurfaceForms,
    /// Derivatives of the mean curvature `f`.
    pub mean: FieldDerivatives,
}

impl PointGeometry {
    pub fn f(&self) -> f64 {
        self.forms.mean
    }

    pub fn gauss(&self) -> f64 {
        self.forms.gauss
    }

    pub fn grad_f_norm(&self) -> f64 {
        self.mean.grad_norm2.max(0.0).sqrt()
    }
}

/// Mean curvature at `(u, v)`: the surface's closed form in analytic mode
/// when it has one, otherwise the full jet pipeline.
pub fn mean_curvature_at(surface: &dyn Immersion, u: f64, v: f64, mode: JetMode) -> Result<f64> {
    if mode == JetMode::Analytic {
        if let Some(f) = surface.mean_curvature_closed_form(u, v) {
            return Ok(f);
        }
    }
    let jet = jet_of(surface, ChartPoint::new(u, v, surface.chart_id()), mode)?;
    Ok(fundamental_forms(&jet, surface.orientation())?.mean)
}

pub fn point_geometry(surface: &dyn Immersion, p: ChartPoint, opts: &GeometryOptions) -> Result<PointGeometry> {
    let jet = jet_of(surface, p, opts.jet)?;
    let forms = fundamental_forms(&jet, surface.orientation())?;
    let field = |u: f64, v: f64| mean_curvature_at(surface, u, v, opts.jet);
    let mean = scalar_field_calculus(surface, &field, p, opts)?;
    Ok(PointGeometry { point: p, position: jet.position, forms, mean })
}
