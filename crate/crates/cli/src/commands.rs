use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use bicons_core::diffgeo::{DifferentiationScheme, GeometryOptions, Immersion, JetMode, H_MAX, H_MIN};
use bicons_core::families::FamilyKind;
use bicons_core::gluing::{self, GeodesicStart, GluingCandidate};
use bicons_core::intrinsic::{self, ConformalMetric, GeodesicState};
use bicons_core::io::{self, CsvTable, Gate, GateResult, GlueSpec, ParseError};
use bicons_core::profiles::{self, CompleteProfile, ProfileCurve, RhoGraph, SigmaTheta};
use bicons_core::residuals::{self, Grid, Range};
use bicons_core::{ChartId, SurfaceFamily};

use crate::args::{
    Command, Format, GlueArgs, IntrinsicCommand, MetricArgs, ProfileArgs, Scheme, SchemeArgs, SurfaceArgs, VerifyArgs,
};

/// Invalid combination of otherwise well-formed options.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

/// Files written by one invocation, and its run metadata.
pub struct Session {
    args: Vec<String>,
    started: SystemTime,
    clock: Instant,
    outputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    args: &'a [String],
    threads: usize,
    started_unix_ms: u128,
    elapsed_ms: u128,
    outputs: &'a [PathBuf],
    gates: Option<&'a [GateResult]>,
}

impl Session {
    pub fn start() -> Self {
        Self { args: std::env::args().collect(), started: SystemTime::now(), clock: Instant::now(), outputs: vec![] }
    }

    /// Writes `content` to `path`, or to stdout when there is no path.
    fn emit(&mut self, path: Option<&Path>, content: &str) -> Result<()> {
        match path {
            Some(p) => {
                std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))?;
                self.outputs.push(p.to_path_buf());
            }
            None => {
                std::io::stdout().lock().write_all(content.as_bytes())?;
            }
        }
        Ok(())
    }

    /// Metadata sidecar `<first output>.meta.json`; data files stay free
    /// of timestamps and host details.
    pub fn finish(&self, gates: Option<&Vec<GateResult>>) -> Result<()> {
        let Some(first) = self.outputs.first() else {
            return Ok(());
        };
        let mut name = first.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        let sidecar = Sidecar {
            tool: "bicons",
            version: env!("CARGO_PKG_VERSION"),
            args: &self.args,
            threads: rayon::current_num_threads(),
            started_unix_ms: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
            elapsed_ms: self.clock.elapsed().as_millis(),
            outputs: &self.outputs,
            gates: gates.map(|g| g.as_slice()),
        };
        let path = first.with_file_name(name);
        std::fs::write(&path, json(&sidecar)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn run(command: Command, session: &mut Session) -> Result<Vec<GateResult>> {
    match command {
        Command::Profile(a) => profile(a, session),
        Command::Surface(a) => surface(a, session),
        Command::Verify(a) => verify(a, session),
        Command::Intrinsic(a) => intrinsic(a.command, session),
        Command::Glue(a) => glue(a, session),
    }
}

fn parse_gates(raw: &[String], known: &[&str]) -> Result<Vec<Gate>> {
    Ok(raw.iter().map(|g| io::parse_gate(g, known)).collect::<Result<Vec<_>, ParseError>>()?)
}

fn apply_gates(gates: &[Gate], value: impl Fn(&str) -> f64) -> Vec<GateResult> {
    gates.iter().map(|g| g.check(value(&g.name))).collect()
}

fn profile(a: ProfileArgs, session: &mut Session) -> Result<Vec<GateResult>> {
    let family = io::parse_family(&a.family)?;
    let given = [("--theta", &a.theta), ("--u", &a.u), ("--rho", &a.rho)];
    let pick = |allowed: &[&str]| -> Result<()> {
        for (flag, value) in given {
            if value.is_some() && !allowed.contains(&flag) {
                return config(format!("{flag} does not apply to {}", family.id()));
            }
        }
        Ok(())
    };
    let range = |raw: &Option<String>, default: String| -> Result<Range> {
        Ok(io::parse_range(raw.as_deref().unwrap_or(&default))?)
    };
    let (curve, ts): (Box<dyn ProfileCurve>, Range) = match family.kind {
        FamilyKind::Sc { ct0 } => {
            let b = profiles::boundary_radius(ct0);
            let rho_default = format!("{}:{}:500", 1.001 * b, 6.0 * b);
            if family.chart == ChartId::Rho || a.rho.is_some() {
                pick(&["--rho"])?;
                (Box::new(RhoGraph::new(ct0)?), range(&a.rho, rho_default)?)
            } else {
                pick(&["--theta", "--rho"])?;
                (Box::new(SigmaTheta::new(ct0)?), range(&a.theta, "0.01:5:500".into())?)
            }
        }
        FamilyKind::STilde { c0 } => {
            pick(&["--u"])?;
            (Box::new(CompleteProfile::new(c0)?), range(&a.u, "-3:3:601".into())?)
        }
        _ => return config(format!("profile export is available for sc, sc_rho and stilde, not {}", family.id())),
    };
    let samples = profiles::sample_profile(curve.as_ref(), &ts.values())?;
    let text = match a.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["t", "rho", "z", "kappa", "ode_residual"]);
            for s in &samples {
                t.push_floats(&[s.t, s.rho, s.z, s.kappa, s.ode_residual]);
            }
            t.render()
        }
        Format::Json => json(&samples)?,
    };
    session.emit(a.output.out.as_deref(), &text)?;
    Ok(vec![])
}

fn jet_mode(s: &SchemeArgs) -> Result<JetMode> {
    check_step(s.h)?;
    Ok(match s.scheme {
        Scheme::Analytic => JetMode::Analytic,
        Scheme::Fd => JetMode::FiniteDifference { h: s.h },
    })
}

fn check_step(h: Option<f64>) -> Result<()> {
    match h {
        Some(h) if !(H_MIN..=H_MAX).contains(&h) => config(format!("--h {h} outside [{H_MIN:e}, {H_MAX:e}]")),
        _ => Ok(()),
    }
}

fn geometry_options(s: &SchemeArgs) -> Result<GeometryOptions> {
    let jet = jet_mode(s)?;
    Ok(GeometryOptions { jet, field: DifferentiationScheme::Central { h: s.h }, ..GeometryOptions::default() })
}

/// `default` with `u`/`theta` and `v` overrides applied; every point must
/// lie in the family's chart.
fn grid_from(
    family: &SurfaceFamily,
    default: Grid,
    u: &Option<String>,
    theta: &Option<String>,
    v: &Option<String>,
) -> Result<Grid> {
    if theta.is_some() && family.chart != ChartId::Theta {
        return config(format!("--theta applies to the theta chart only; {} uses --u", family.id()));
    }
    let mut grid = default;
    if let Some(raw) = u.as_ref().or(theta.as_ref()) {
        grid.u = io::parse_range(raw)?;
    }
    if let Some(raw) = v {
        grid.v = io::parse_range(raw)?;
    }
    let domain = family.domain();
    for (a, b) in [(grid.u.start, grid.v.start), (grid.u.end, grid.v.end)] {
        if !domain.contains(a, b) {
            return Err(bicons_core::GeoError::OutOfDomain(format!(
                "grid corner ({a}, {b}) outside the chart of {}",
                family.id()
            ))
            .into());
        }
    }
    Ok(grid)
}

fn surface(a: SurfaceArgs, session: &mut Session) -> Result<Vec<GateResult>> {
    let family = io::parse_family(&a.family)?;
    let grid = grid_from(&family, io::default_mesh_grid(&family), &a.u, &a.theta, &a.v)?;
    let mode = jet_mode(&a.scheme)?;
    let mesh = io::build_mesh(&family, &grid.u, &grid.v, family.v_period(), mode)?;
    let out = a.output.out.as_deref();
    session.emit(out, &mesh.to_obj())?;
    let report_path = a.report.or_else(|| out.map(|p| p.with_extension("json")));
    if let Some(p) = report_path {
        session.emit(Some(&p), &json(&mesh.report(&family))?)?;
    }
    Ok(vec![])
}

fn verify(a: VerifyArgs, session: &mut Session) -> Result<Vec<GateResult>> {
    let family = io::parse_family(&a.family)?;
    let gates = parse_gates(&a.gates, &["bicons", "pde", "hess", "failed"])?;
    let grid = grid_from(&family, Grid::default_for(&family), &a.u, &a.theta, &a.v)?;
    let opts = geometry_options(&a.scheme)?;
    let report = residuals::sweep(&family, &grid, &opts);
    session.emit(a.output.out.as_deref(), &json(&report)?)?;
    if let Some(p) = &a.csv {
        let mut t = CsvTable::new(&[
            "index",
            "u",
            "v",
            "f",
            "gauss",
            "grad_norm",
            "residual_bicons",
            "residual_pde",
            "residual_hess",
            "nondim_bicons",
            "nondim_pde",
            "nondim_hess",
            "error",
        ]);
        for r in &report.records {
            let mut row = vec![r.index.to_string()];
            row.extend(
                [
                    r.u,
                    r.v,
                    r.f,
                    r.gauss,
                    r.grad_norm,
                    r.residual_bicons,
                    r.residual_pde,
                    r.residual_hess,
                    r.nondim_bicons,
                    r.nondim_pde,
                    r.nondim_hess,
                ]
                .map(io::fmt_float),
            );
            row.push(r.error.clone().unwrap_or_default());
            t.push(row);
        }
        session.emit(Some(p), &t.render())?;
    }
    let s = &report.summary;
    let failed = s.failed_points;
    let gated = |max: f64| if failed > 0 { f64::NAN } else { max };
    Ok(apply_gates(&gates, |name| match name {
        "bicons" => gated(s.bicons.max),
        "pde" => gated(s.pde.max),
        "hess" => gated(s.hess.max),
        _ => failed as f64,
    }))
}

fn metric(m: &MetricArgs) -> Result<ConformalMetric> {
    Ok(if m.normalized {
        ConformalMetric::biconservative_normalized(m.c0)?
    } else {
        ConformalMetric::biconservative(m.c0)?
    })
}

#[derive(Serialize)]
struct OdeReport {
    c: f64,
    rho0: f64,
    drho0: f64,
    span: (f64, f64),
    step: f64,
    a0: f64,
    first_integral_drift: f64,
    drift_per_unit_u: f64,
    round_trip: intrinsic::RoundTrip,
    final_rho: f64,
    final_drho: f64,
}

#[derive(Serialize)]
struct GeodesicReport {
    metric: ConformalMetric,
    start: GeodesicState,
    length: f64,
    step: f64,
    max_speed_drift: f64,
    max_clairaut_drift: f64,
    end: intrinsic::GeodesicSample,
}

#[derive(Serialize)]
struct LevelRow {
    u: f64,
    gauss: f64,
    gauss_derivative: f64,
    geodesic_curvature: f64,
    predicted: f64,
    residual: f64,
    error: Option<String>,
}

fn decimate<T: Copy>(xs: &[T], every: usize) -> Vec<T> {
    let every = every.max(1);
    let mut out: Vec<T> = xs.iter().step_by(every).copied().collect();
    if !(xs.len() - 1).is_multiple_of(every) {
        out.push(xs[xs.len() - 1]);
    }
    out
}

fn intrinsic(cmd: IntrinsicCommand, session: &mut Session) -> Result<Vec<GateResult>> {
    match cmd {
        IntrinsicCommand::Ode { c, rho0, drho0, span, step, every, gates, output, report } => {
            let gates = parse_gates(&gates, &["drift", "roundtrip"])?;
            let span = io::parse_span(&span)?;
            let run = intrinsic::rho_ode_integrate(c, rho0, drho0, span, step)?;
            let round_trip = intrinsic::quadrature_round_trip(&run, (run.u.len() / 200).max(1))?;
            let drift = run.first_integral_drift();
            let idx: Vec<usize> = decimate(&(0..run.u.len()).collect::<Vec<_>>(), every);
            let mut t = CsvTable::new(&["u", "rho", "drho", "a"]);
            for &i in &idx {
                t.push_floats(&[run.u[i], run.rho[i], run.drho[i], run.a[i]]);
            }
            session.emit(output.out.as_deref(), &t.render())?;
            let r = OdeReport {
                c,
                rho0,
                drho0,
                span,
                step,
                a0: run.a[0],
                first_integral_drift: drift,
                drift_per_unit_u: drift / (span.1 - span.0).abs(),
                round_trip,
                final_rho: *run.rho.last().unwrap(),
                final_drho: *run.drho.last().unwrap(),
            };
            if let Some(p) = report {
                session.emit(Some(&p), &json(&r)?)?;
            }
            Ok(apply_gates(&gates, |name| if name == "drift" { r.drift_per_unit_u } else { r.round_trip.max_error }))
        }
        IntrinsicCommand::Geodesic { metric: m, u0, v0, angle, length, step, every, gates, output, report } => {
            let gates = parse_gates(&gates, &["speed", "clairaut"])?;
            let g = metric(&m)?;
            let start = GeodesicState::unit(&g, u0, v0, angle);
            let run = intrinsic::geodesic_shoot(&g, start, length, step)?;
            let mut t = CsvTable::new(&["s", "u", "v", "du", "dv", "clairaut"]);
            for s in decimate(&run.samples, every) {
                t.push_floats(&[s.s, s.u, s.v, s.du, s.dv, s.clairaut]);
            }
            session.emit(output.out.as_deref(), &t.render())?;
            let r = GeodesicReport {
                metric: g,
                start,
                length,
                step,
                max_speed_drift: run.max_speed_drift,
                max_clairaut_drift: run.max_clairaut_drift,
                end: *run.samples.last().unwrap(),
            };
            if let Some(p) = report {
                session.emit(Some(&p), &json(&r)?)?;
            }
            Ok(apply_gates(&gates, |name| if name == "speed" { r.max_speed_drift } else { r.max_clairaut_drift }))
        }
        IntrinsicCommand::Completeness { metric: m, u0, v0, directions, length, step, gates, output } => {
            let gates = parse_gates(&gates, &["drift"])?;
            if directions == 0 {
                return config("--directions must be positive");
            }
            let g = metric(&m)?;
            let probe = intrinsic::completeness_probe(&g, u0, v0, directions, length, step);
            session.emit(output.out.as_deref(), &json(&probe)?)?;
            let mut results =
                vec![Gate { name: "reached".into(), limit: 0.0 }.check((directions - probe.reached) as f64)];
            results.extend(apply_gates(&gates, |_| probe.max_speed_drift.max(probe.max_clairaut_drift)));
            Ok(results)
        }
        IntrinsicCommand::Level { metric: m, c, u, gates, output } => {
            let gates = parse_gates(&gates, &["level"])?;
            let mut g = metric(&m)?;
            g.c = c;
            let us = io::parse_range(&u)?.values();
            let rows: Vec<LevelRow> = us
                .iter()
                .map(|&u| {
                    let gauss = intrinsic::gauss_curvature_conformal(&g, u)?;
                    let gauss_derivative = intrinsic::gauss_curvature_derivative(&g, u)?;
                    Ok(match intrinsic::level_curve_identity_residual(&g, u) {
                        Ok(r) => LevelRow {
                            u,
                            gauss,
                            gauss_derivative,
                            geodesic_curvature: r.geodesic_curvature,
                            predicted: r.predicted,
                            residual: r.residual,
                            error: None,
                        },
                        Err(e) => LevelRow {
                            u,
                            gauss,
                            gauss_derivative,
                            geodesic_curvature: f64::NAN,
                            predicted: f64::NAN,
                            residual: f64::NAN,
                            error: Some(e.to_string()),
                        },
                    })
                })
                .collect::<bicons_core::Result<_>>()?;
            let mut t = CsvTable::new(&["u", "K", "dK", "kappa_g", "predicted", "residual", "error"]);
            for r in &rows {
                let mut row: Vec<String> =
                    [r.u, r.gauss, r.gauss_derivative, r.geodesic_curvature, r.predicted, r.residual]
                        .map(io::fmt_float)
                        .to_vec();
                row.push(r.error.clone().unwrap_or_default());
                t.push(row);
            }
            session.emit(output.out.as_deref(), &t.render())?;
            // Any row outside the identity's hypotheses fails the gate.
            let worst = if rows.iter().any(|r| r.error.is_some()) {
                f64::NAN
            } else {
                rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
            };
            Ok(apply_gates(&gates, |_| worst))
        }
    }
}

fn parse_thetas(raw: &str) -> Result<Vec<f64>> {
    let mut col = 1;
    let mut out = vec![];
    for item in raw.split(',') {
        let x: f64 = item.trim().parse().map_err(|_| ParseError {
            input: raw.to_string(),
            column: col,
            message: format!("expected a number, found `{item}`"),
        })?;
        out.push(x);
        col += item.len() + 1;
    }
    Ok(out)
}

fn glue(a: GlueArgs, session: &mut Session) -> Result<Vec<GateResult>> {
    let spec = io::parse_glue(&a.spec)?;
    let out = a.output.out.as_deref();
    match spec {
        GlueSpec::Mirror { .. } | GlueSpec::Translate { .. } => {
            parse_gates(&a.gates, &[])?;
            let (c0, candidate) = match spec {
                GlueSpec::Mirror { c0, other: Some(o) } if o != c0 => (c0, GluingCandidate::MirrorOther { c0: o }),
                GlueSpec::Mirror { c0, .. } => (c0, GluingCandidate::Mirror),
                GlueSpec::Translate { c0, dz } => (c0, GluingCandidate::Translate { dz }),
                _ => unreachable!(),
            };
            let report = gluing::mirror_and_match(c0, a.order, candidate)?;
            session.emit(out, &json(&report)?)?;
            if let Some(p) = &a.csv {
                let mut t = CsvTable::new(&["order", "rho", "z"]);
                for (n, m) in report.mismatch.iter().enumerate() {
                    t.push(vec![n.to_string(), io::fmt_float(m[0]), io::fmt_float(m[1])]);
                }
                session.emit(Some(p), &t.render())?;
            }
            let worst = report.mismatch.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok(vec![Gate { name: "match".into(), limit: report.tolerance }.check(worst)])
        }
        GlueSpec::Boundary { ct0 } => {
            let gates = parse_gates(&a.gates, &["f", "grad", "tilt"])?;
            let thetas = match &a.thetas {
                Some(raw) => parse_thetas(raw)?,
                None => gluing::default_thetas(),
            };
            let probe = gluing::boundary_limits(ct0, &thetas)?;
            session.emit(out, &json(&probe)?)?;
            if let Some(p) = &a.csv {
                let mut t = CsvTable::new(&["theta", "f", "grad_norm", "tilt_deg"]);
                for r in &probe.records {
                    t.push_floats(&[r.theta, r.f, r.grad_norm, r.tilt_deg()]);
                }
                session.emit(Some(p), &t.render())?;
            }
            Ok(apply_gates(&gates, |name| match name {
                "f" => (probe.f_limit - probe.expected_f).abs(),
                "grad" => probe.grad_limit.abs(),
                _ => probe.tilt_limit.abs(),
            }))
        }
        GlueSpec::Meridian { c0 } | GlueSpec::Parallel { c0, .. } => {
            let gates = parse_gates(&a.gates, &["deviation"])?;
            let span = io::parse_span(&a.u)?;
            let start = match spec {
                GlueSpec::Parallel { u0, .. } => GeodesicStart::Parallel { u0 },
                _ => GeodesicStart::Meridian { v0: 0.0 },
            };
            let report = gluing::meridian_geodesic_check(c0, span, start, a.step)?;
            session.emit(out, &json(&report)?)?;
            Ok(apply_gates(&gates, |_| report.max_deviation))
        }
    }
}
