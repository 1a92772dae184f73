//! Generic numerical kernels shared by the geometry modules.

pub mod ode;
pub mod quad;
pub mod richardson;
