//! Shared workloads for the criterion benches.

use bicons_core::diffgeo::{ChartPoint, GeometryOptions};
use bicons_core::intrinsic::ConformalMetric;
use bicons_core::residuals::Grid;
use bicons_core::SurfaceFamily;

/// Families measured by the per-point benches, with a generic interior point.
pub fn point_cases() -> Vec<(&'static str, SurfaceFamily, ChartPoint)> {
    let sc = SurfaceFamily::sc(1.0).expect("valid parameter");
    let stilde = SurfaceFamily::stilde(1.0).expect("valid parameter");
    let ellipsoid = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).expect("valid parameter");
    vec![
        ("sc", sc, ChartPoint::new(1.0, 0.5, sc.chart)),
        ("stilde", stilde, ChartPoint::new(0.7, 0.3, stilde.chart)),
        ("ellipsoid", ellipsoid, ChartPoint::new(1.0, 0.8, ellipsoid.chart)),
    ]
}

/// Default verification grid of the extrinsic family.
pub fn sweep_case() -> (SurfaceFamily, Grid, GeometryOptions) {
    let sc = SurfaceFamily::sc(1.0).expect("valid parameter");
    (sc, Grid::default_for(&sc), GeometryOptions::default())
}

pub fn complete_metric() -> ConformalMetric {
    ConformalMetric::biconservative(1.0).expect("valid parameter")
}
