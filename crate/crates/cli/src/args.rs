use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bicons", version, about = "Biconservative surfaces of revolution: profiles, meshes, residual checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a profile curve: t, rho, z, kappa, ode_residual.
    Profile(ProfileArgs),
    /// Export an OBJ mesh and a JSON report of the surface.
    Surface(SurfaceArgs),
    /// Run the residual suite over a grid.
    Verify(VerifyArgs),
    /// Conformal-metric checks: ODE, geodesics, completeness, level curves.
    Intrinsic(IntrinsicArgs),
    /// Boundary limits, mirror matching and meridian geodesics.
    Glue(GlueArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Primary output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Analytic,
    Fd,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    /// How position jets are obtained.
    #[arg(long, value_enum, default_value = "analytic")]
    pub scheme: Scheme,
    /// Finite-difference step for jets (fd) and for derivatives of f.
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Family spec, e.g. `sc:Ct0=1` or `stilde:C0=1`.
    pub family: String,
    /// Samples of theta (sc), as start:end:count.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Samples of u (stilde).
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Samples of rho (sc, graph chart).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    pub family: String,
    /// First chart coordinate, start:end:count.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Alias of --u for the theta chart.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "u")]
    pub theta: Option<String>,
    /// Second chart coordinate; a span of one full period closes the mesh.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub output: Output,
    /// Mesh report (JSON); defaults to the output path with a .json extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub family: String,
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "u")]
    pub theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Tolerance gate on a maximum residual: bicons, pde, hess or failed.
    #[arg(long = "gate")]
    pub gates: Vec<String>,
    #[command(flatten)]
    pub output: Output,
    /// Per-point table (CSV).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntrinsicArgs {
    #[command(subcommand)]
    pub command: IntrinsicCommand,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Constant of the metric C0 cosh^6(u) (du^2 + dv^2).
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Use coordinates in which rho'' = e^{-2 rho / 3} holds exactly.
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Debug, Subcommand)]
pub enum IntrinsicCommand {
    /// Integrate rho'' = e^{-2 rho/3} - c e^{2 rho}: u, rho, drho, a.
    Ode {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        drho0: f64,
        /// Integration span start:end.
        #[arg(long, default_value = "0:5", allow_hyphen_values = true)]
        span: String,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Keep every n-th sample in the table.
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Gates: drift (first integral, per unit u), roundtrip.
        #[arg(long = "gate")]
        gates: Vec<String>,
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Shoot one unit-speed geodesic: s, u, v, du, dv, clairaut.
    Geodesic {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        v0: f64,
        /// Angle of the initial velocity with d/du, radians.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long, default_value_t = 10.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Gates: speed, clairaut (maximum drifts).
        #[arg(long = "gate")]
        gates: Vec<String>,
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Shoot equally spaced geodesics from one point.
    Completeness {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long, default_value_t = 16)]
        directions: usize,
        #[arg(long, default_value_t = 1000.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// Gate: drift (largest speed or Clairaut drift).
        #[arg(long = "gate")]
        gates: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Level-curve identity on coordinate circles: u, K, dK, kappa_g, predicted, residual.
    Level {
        #[command(flatten)]
        metric: MetricArgs,
        /// Ambient curvature.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value = "0.5:2:4", allow_hyphen_values = true)]
        u: String,
        /// Gate: level (largest |residual|).
        #[arg(long = "gate")]
        gates: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    /// `mirror:C0=1`, `mirror:Ct0=1,with=1.2`, `translate:C0=1,dz=0`,
    /// `boundary:Ct0=1`, `meridian:C0=1`, `parallel:C0=1,u0=1`.
    pub spec: String,
    /// Highest derivative order compared (mirror, translate).
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Comma-separated decreasing theta values (boundary).
    #[arg(long)]
    pub thetas: Option<String>,
    /// Span of u, start:end (meridian, parallel).
    #[arg(long, default_value = "-2:2", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Gates: f, grad, tilt (boundary); deviation (meridian, parallel).
    #[arg(long = "gate")]
    pub gates: Vec<String>,
    #[command(flatten)]
    pub output: Output,
    /// Table (CSV): mismatch by order, or boundary records.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
