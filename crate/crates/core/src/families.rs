//! Concrete surfaces: the biconservative families with closed-form jets and
//! the CMC / non-biconservative control surfaces.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::diffgeo::{ChartId, Domain, Immersion, Jet2, Vec3};
use crate::error::{GeoError, Result};
use crate::profiles::{boundary_radius, CompleteProfile, CurvePoint, ProfileCurve, RhoGraph, SigmaTheta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Extrinsic biconservative surface `S_{Ct0}` (incomplete, with boundary circle).
    Sc {
        ct0: f64,
    },
    /// Complete biconservative surface, via the global conformal immersion.
    STilde {
        c0: f64,
    },
    Sphere {
        r: f64,
    },
    Cylinder {
        r: f64,
    },
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    Plane,
}

/// Parameter dictionary between the two biconservative charts: the boundary
/// circle radius `Ct0^{-3/2}` equals the neck radius `sqrt(C0)/3`.
pub fn c0_from_ct0(ct0: f64) -> f64 {
    9.0 * ct0.powi(-3)
}

pub fn ct0_from_c0(c0: f64) -> f64 {
    (9.0 / c0).cbrt()
}

/// A family together with the chart used to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceFamily {
    pub kind: FamilyKind,
    pub chart: ChartId,
}

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, x) in pairs {
        if !(x > 0.0) || !x.is_finite() {
            return Err(GeoError::InvalidParameter(format!("{name} must be positive, got {x}")));
        }
    }
    Ok(())
}

impl SurfaceFamily {
    pub fn sc(ct0: f64) -> Result<Self> {
        require_positive(&[("Ct0", ct0)])?;
        Ok(Self { kind: FamilyKind::Sc { ct0 }, chart: ChartId::Theta })
    }

    /// The same surface in the `(rho, v)` graph chart.
    pub fn sc_rho(ct0: f64) -> Result<Self> {
        Ok(Self { chart: ChartId::Rho, ..Self::sc(ct0)? })
    }

    pub fn stilde(c0: f64) -> Result<Self> {
        require_positive(&[("C0", c0)])?;
        Ok(Self { kind: FamilyKind::STilde { c0 }, chart: ChartId::Global })
    }

    pub fn sphere(r: f64) -> Result<Self> {
        require_positive(&[("r", r)])?;
        Ok(Self { kind: FamilyKind::Sphere { r }, chart: ChartId::Polar })
    }

    pub fn cylinder(r: f64) -> Result<Self> {
        require_positive(&[("r", r)])?;
        Ok(Self { kind: FamilyKind::Cylinder { r }, chart: ChartId::Cylindrical })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        require_positive(&[("a", a), ("b", b), ("c", c)])?;
        Ok(Self { kind: FamilyKind::Ellipsoid { a, b, c }, chart: ChartId::Polar })
    }

    pub fn plane() -> Self {
        Self { kind: FamilyKind::Plane, chart: ChartId::Cartesian }
    }

    /// Every chart the family can be evaluated in, with its domain.
    pub fn charts(&self) -> Vec<(ChartId, Domain)> {
        match self.kind {
            FamilyKind::Sc { ct0 } => vec![
                (ChartId::Theta, Self { chart: ChartId::Theta, ..*self }.domain()),
                (ChartId::Rho, Self::sc_rho(ct0).map(|f| f.domain()).unwrap_or_else(|_| self.domain())),
            ],
            _ => vec![(self.chart, self.domain())],
        }
    }

    /// Angular multiplier: `v` enters as `cos(m v)`, `sin(m v)`.
    fn angular_multiplier(&self) -> f64 {
        match self.kind {
            FamilyKind::STilde { .. } => 3.0,
            _ => 1.0,
        }
    }

    /// Period of the `v` coordinate, when it is an angle.
    pub fn v_period(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::Plane => None,
            _ => Some(2.0 * PI / self.angular_multiplier()),
        }
    }

    /// Fixed probe points used for refinement studies.
    pub fn default_probes(&self) -> Vec<(f64, f64)> {
        match (self.kind, self.chart) {
            (FamilyKind::Sc { .. }, ChartId::Theta) => vec![(0.5, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 0.5), (4.0, 1.5)],
            (FamilyKind::Sc { ct0 }, _) => {
                let b = boundary_radius(ct0);
                vec![(1.5 * b, 0.0), (2.0 * b, 1.0), (3.0 * b, 2.0), (4.0 * b, 0.5), (6.0 * b, 1.5)]
            }
            (FamilyKind::STilde { .. }, _) => vec![(0.5, 0.0), (1.0, 0.5), (-1.0, 1.0), (1.5, 0.3), (-0.5, 1.8)],
            (FamilyKind::Plane, _) => vec![(0.5, 0.0), (1.0, 1.0), (2.0, 2.0), (-3.0, 0.5), (4.0, -1.5)],
            _ => vec![(0.5, 0.0), (1.0, 1.0), (2.0, 2.0), (2.5, 0.5), (1.5, 1.5)],
        }
    }

    /// Short identifier in the `name:key=val` grammar.
    pub fn id(&self) -> String {
        let base = match self.kind {
            FamilyKind::Sc { ct0 } => format!("sc:Ct0={ct0}"),
            FamilyKind::STilde { c0 } => format!("stilde:C0={c0}"),
            FamilyKind::Sphere { r } => format!("sphere:r={r}"),
            FamilyKind::Cylinder { r } => format!("cylinder:r={r}"),
            FamilyKind::Ellipsoid { a, b, c } => format!("ellipsoid:a={a},b={b},c={c}"),
            FamilyKind::Plane => "plane".to_string(),
        };
        if self.chart == ChartId::Rho {
            format!("{base},chart=rho")
        } else {
            base
        }
    }

    /// Mean curvature a CMC control must have with the selected orientation.
    pub fn constant_mean_curvature(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::Sphere { r } => Some(2.0 / r),
            FamilyKind::Cylinder { r } => Some(1.0 / r),
            FamilyKind::Plane => Some(0.0),
            _ => None,
        }
    }

    pub fn is_cmc(&self) -> bool {
        self.constant_mean_curvature().is_some()
    }

    fn profile_point(&self, u: f64) -> Result<CurvePoint> {
        match self.kind {
            FamilyKind::Sc { ct0 } => match self.chart {
                ChartId::Rho => RhoGraph::new(ct0)?.eval(u),
                _ => SigmaTheta::new(ct0)?.eval(u),
            },
            FamilyKind::STilde { c0 } => CompleteProfile::new(c0)?.eval(u),
            FamilyKind::Sphere { r } => {
                let (s, c) = u.sin_cos();
                Ok(CurvePoint { pos: [r * s, r * c].into(), d1: [r * c, -r * s].into(), d2: [-r * s, -r * c].into() })
            }
            FamilyKind::Cylinder { r } => {
                Ok(CurvePoint { pos: [r, u].into(), d1: [0.0, 1.0].into(), d2: [0.0, 0.0].into() })
            }
            FamilyKind::Ellipsoid { .. } | FamilyKind::Plane => {
                Err(GeoError::InvalidParameter(format!("{} is not a surface of revolution", self.id())))
            }
        }
    }

    fn check(&self, u: f64, v: f64) -> Result<()> {
        if self.domain().contains(u, v) {
            Ok(())
        } else {
            Err(GeoError::OutOfDomain(format!("({u}, {v}) outside the {:?} chart of {}", self.chart, self.id())))
        }
    }
}

impl fmt::Display for SurfaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Jet of `(rho(t) cos(m v), rho(t) sin(m v), z(t))`.
pub fn revolution_jet(p: &CurvePoint, m: f64, v: f64) -> Jet2 {
    let (s, c) = (m * v).sin_cos();
    let radial = Vec3::new(c, s, 0.0);
    let angular = Vec3::new(-s, c, 0.0);
    let axis = Vec3::z();
    Jet2 {
        position: p.pos[0] * radial + p.pos[1] * axis,
        d_u: p.d1[0] * radial + p.d1[1] * axis,
        d_v: m * p.pos[0] * angular,
        d_uu: p.d2[0] * radial + p.d2[1] * axis,
        d_uv: m * p.d1[0] * angular,
        d_vv: -m * m * p.pos[0] * radial,
    }
}

impl Immersion for SurfaceFamily {
    fn chart_id(&self) -> ChartId {
        self.chart
    }

    fn domain(&self) -> Domain {
        let all = (f64::NEG_INFINITY, f64::INFINITY);
        let (u, v_period) = match self.kind {
            FamilyKind::Sc { ct0 } => match self.chart {
                ChartId::Rho => ((boundary_radius(ct0), f64::INFINITY), self.v_period()),
                _ => ((0.0, f64::INFINITY), self.v_period()),
            },
            FamilyKind::STilde { .. } | FamilyKind::Cylinder { .. } => (all, self.v_period()),
            FamilyKind::Sphere { .. } | FamilyKind::Ellipsoid { .. } => ((0.0, PI), self.v_period()),
            FamilyKind::Plane => (all, None),
        };
        Domain { u, v: all, v_period }
    }

    fn orientation(&self) -> f64 {
        match self.kind {
            FamilyKind::Sphere { .. } | FamilyKind::Ellipsoid { .. } => -1.0,
            _ => 1.0,
        }
    }

    fn position(&self, u: f64, v: f64) -> Result<Vec3> {
        self.check(u, v)?;
        match self.kind {
            FamilyKind::Ellipsoid { a, b, c } => {
                Ok(Vec3::new(a * u.sin() * v.cos(), b * u.sin() * v.sin(), c * u.cos()))
            }
            FamilyKind::Plane => Ok(Vec3::new(u, v, 0.0)),
            _ => Ok(revolution_jet(&self.profile_point(u)?, self.angular_multiplier(), v).position),
        }
    }

    fn analytic_jet(&self, u: f64, v: f64) -> Option<Result<Jet2>> {
        Some(self.check(u, v).and_then(|_| match self.kind {
            FamilyKind::Ellipsoid { a, b, c } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                Ok(Jet2 {
                    position: Vec3::new(a * su * cv, b * su * sv, c * cu),
                    d_u: Vec3::new(a * cu * cv, b * cu * sv, -c * su),
                    d_v: Vec3::new(-a * su * sv, b * su * cv, 0.0),
                    d_uu: Vec3::new(-a * su * cv, -b * su * sv, -c * cu),
                    d_uv: Vec3::new(-a * cu * sv, b * cu * cv, 0.0),
                    d_vv: Vec3::new(-a * su * cv, -b * su * sv, 0.0),
                })
            }
            FamilyKind::Plane => Ok(Jet2 {
                position: Vec3::new(u, v, 0.0),
                d_u: Vec3::x(),
                d_v: Vec3::y(),
                d_uu: Vec3::zeros(),
                d_uv: Vec3::zeros(),
                d_vv: Vec3::zeros(),
            }),
            _ => Ok(revolution_jet(&self.profile_point(u)?, self.angular_multiplier(), v)),
        }))
    }

    fn mean_curvature_closed_form(&self, _u: f64, _v: f64) -> Option<f64> {
        self.constant_mean_curvature()
    }

    fn label(&self) -> String {
        self.id()
    }
}

/// Point of the extrinsic family in the `(theta, v)` chart.
pub fn eval_sc(ct0: f64, theta: f64, v: f64) -> Result<Vec3> {
    SurfaceFamily::sc(ct0)?.position(theta, v)
}

pub fn jet_sc(ct0: f64, theta: f64, v: f64) -> Result<Jet2> {
    let fam = SurfaceFamily::sc(ct0)?;
    fam.analytic_jet(theta, v).expect("closed form")
}

/// Point of the complete surface in the global `(u, v)` chart.
pub fn eval_stilde(c0: f64, u: f64, v: f64) -> Result<Vec3> {
    SurfaceFamily::stilde(c0)?.position(u, v)
}

pub fn jet_stilde(c0: f64, u: f64, v: f64) -> Result<Jet2> {
    let fam = SurfaceFamily::stilde(c0)?;
    fam.analytic_jet(u, v).expect("closed form")
}

/// Analytic jet of a control surface.
pub fn control_surface_jet(family: &SurfaceFamily, u: f64, v: f64) -> Result<Jet2> {
    match family.kind {
        FamilyKind::Sc { .. } | FamilyKind::STilde { .. } => {
            Err(GeoError::InvalidParameter(format!("{} is not a control surface", family.id())))
        }
        _ => family.analytic_jet(u, v).expect("closed form"),
    }
}
