//! Numerical differential geometry of biconservative surfaces of revolution
//! in R^3: closed-form families, their fundamental forms and curvatures,
//! residuals of the biconservativity identities, the intrinsic conformal
//! picture, and the boundary/gluing geometry.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffgeo;
pub mod error;
pub mod families;
pub mod gluing;
pub mod intrinsic;
pub mod io;
pub mod numerics;
pub mod profiles;
pub mod residuals;

pub use diffgeo::{ChartId, ChartPoint, GeometryOptions, Immersion, Jet2, JetMode, PointGeometry};
pub use error::{GeoError, Result};
pub use families::{FamilyKind, SurfaceFamily};
pub use gluing::{BoundaryProbe, DriftReport, GluingCandidate, MatchReport};
pub use intrinsic::{ConformalMetric, GeodesicState};
pub use io::{ParseError, Spec};
pub use residuals::{Grid, Range, ResidualReport};
