use thiserror::Error;

/// Failures raised by the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("degenerate metric: EG - F^2 = {det:e} (threshold {threshold:e})")]
    DegenerateMetric { det: f64, threshold: f64 },

    #[error("stencil leaves chart domain at ({u}, {v})")]
    StencilOutOfDomain { u: f64, v: f64 },

    #[error("point out of domain: {0}")]
    OutOfDomain(String),

    #[error("analytic jets are not available for {0}")]
    UnsupportedMode(String),

    #[error("invalid step {h:e}: must lie in [{min:e}, {max:e}]")]
    InvalidStep { h: f64, min: f64, max: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} (error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("radicand nonpositive at tau = {tau} (value {value:e})")]
    RadicandNonpositive { tau: f64, value: f64 },

    #[error("integration blew up at t = {t} (|state| = {magnitude:e})")]
    Blowup { t: f64, magnitude: f64 },

    #[error("integration left the domain at t = {t}: {reason}")]
    DomainExit { t: f64, reason: String },

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
