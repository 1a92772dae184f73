//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bicons_core::diffgeo::{fundamental_forms, jet_of, point_geometry, ChartPoint, GeometryOptions, JetMode};
use bicons_core::families::{jet_stilde, SurfaceFamily};
use bicons_core::gluing::{self, GluingCandidate};
use bicons_core::intrinsic::{self, ConformalMetric};
use bicons_core::profiles::{arclength_reparam, curvature_ode_residual, SigmaTheta};
use bicons_core::residuals::{bicons_residual_norm, hess_residual, sweep, Grid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

fn isometry() -> Outcome {
    let mut worst = 0.0f64;
    for c0 in [0.5, 1.0, 4.0] {
        for i in 0..61 {
            let u = -3.0 + 0.1 * i as f64;
            for j in 0..31 {
                let v = (2.0 * PI / 3.0) * j as f64 / 31.0;
                let g = jet_stilde(c0, u, v).map_err(|e| e.to_string())?.metric();
                let e = c0 * u.cosh().powi(6);
                let err =
                    [(g[(0, 0)] - e).abs(), (g[(1, 1)] - e).abs(), g[(0, 1)].abs()].into_iter().fold(0.0, f64::max) / e;
                worst = worst.max(err);
            }
        }
    }
    check(worst <= 1e-12, format!("max relative metric error {worst:.3e}"))
}

fn curvature() -> Outcome {
    let c0 = 1.0;
    let fam = SurfaceFamily::stilde(c0).map_err(|e| e.to_string())?;
    let exact = |u: f64| -3.0 / (c0 * u.cosh().powi(8));
    let mut worst = 0.0f64;
    for i in 0..61 {
        let u = -3.0 + 0.1 * i as f64;
        let k = fundamental_forms(&jet_stilde(c0, u, 0.4).unwrap(), 1.0).unwrap().gauss;
        worst = worst.max((k - exact(u)).abs());
    }
    let steps = [1e-3, 5e-4, 2.5e-4];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in [-1.0, 0.3, 1.2] {
        let p = ChartPoint::new(u, 0.4, fam.chart);
        let errs: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let jet = jet_of(&fam, p, JetMode::FiniteDifference { h: Some(h) }).unwrap();
                (fundamental_forms(&jet, 1.0).unwrap().gauss - exact(u)).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let o = order(w[0], w[1], 2.0);
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    check(
        worst <= 1e-9 && lo >= 1.8 && hi <= 2.2,
        format!("analytic error {worst:.3e}; FD orders in [{lo:.3}, {hi:.3}]"),
    )
}

fn biconservativity() -> Outcome {
    let sc = SurfaceFamily::sc(1.0).unwrap();
    let report = sweep(&sc, &Grid::default_for(&sc), &GeometryOptions::default());
    let ell = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap();
    let neg = sweep(&ell, &Grid::default_for(&ell), &GeometryOptions::default());
    let mut cmc_max = 0.0f64;
    for fam in [SurfaceFamily::sphere(1.0).unwrap(), SurfaceFamily::cylinder(1.0).unwrap()] {
        for (u, v) in Grid::default_for(&fam).points() {
            let g = point_geometry(&fam, ChartPoint::new(u, v, fam.chart), &GeometryOptions::default()).unwrap();
            cmc_max = cmc_max.max(bicons_residual_norm(&g)).max(hess_residual(&g).abs());
        }
    }
    check(
        report.summary.failed_points == 0
            && report.summary.bicons.max <= 1e-6
            && neg.summary.bicons.max > 1e-2
            && cmc_max == 0.0,
        format!(
            "sc max {:.3e}; ellipsoid max {:.3e}; sphere/cylinder max {cmc_max:e}",
            report.summary.bicons.max, neg.summary.bicons.max
        ),
    )
}

fn pde_and_hessian() -> Outcome {
    let sc = SurfaceFamily::sc(1.0).unwrap();
    let report = sweep(&sc, &Grid::default_for(&sc), &GeometryOptions::default());
    let s = &report.summary;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for study in &s.refinement {
        if let Some(e) = &study.error {
            return Err(format!("refinement at ({}, {}) failed: {e}", study.u, study.v));
        }
        for o in study.order_pde.iter().chain(&study.order_hess) {
            let o = o.ok_or("order undefined")?;
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    check(
        s.pde.max <= 1e-5 && s.hess.max <= 1e-4 && lo >= 1.8 && hi <= 2.2,
        format!("pde max {:.3e}; hess max {:.3e}; orders in [{lo:.3}, {hi:.3}]", s.pde.max, s.hess.max),
    )
}

fn profile_ode() -> Outcome {
    let curve = arclength_reparam(SigmaTheta::new(1.0).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
    let samples: Vec<f64> = (0..20).map(|i| 0.5 + 0.5 * i as f64).collect();
    let max_at = |h: f64| {
        samples.iter().map(|&s| curvature_ode_residual(&curve, s, h).unwrap().residual.abs()).fold(0.0, f64::max)
    };
    let value = max_at(1e-3);
    let (a, b, c) = (max_at(4e-2), max_at(2e-2), max_at(1e-2));
    let (o1, o2) = (order(a, b, 2.0), order(b, c, 2.0));
    check(
        value <= 1e-4 && o1 >= 1.99 && o2 >= 1.99,
        format!("max residual {value:.3e} at h=1e-3; orders {o1:.3}, {o2:.3}"),
    )
}

fn boundary() -> Outcome {
    let mut lines = vec![];
    let mut ok = true;
    for ct0 in [0.5, 1.0, 9f64.cbrt(), 4.0] {
        let p = gluing::boundary_limits(ct0, &gluing::default_thetas()).map_err(|e| e.to_string())?;
        let f_err = (p.f_limit - p.expected_f).abs();
        ok &= f_err <= 1e-4 && p.grad_limit.abs() <= 1e-4 && p.tilt_limit.abs() <= 1e-3 && p.grad_monotone_decreasing();
        lines.push(format!(
            "Ct0={ct0:.4}: f err {f_err:.2e}, grad {:.2e}, tilt {:.2e}",
            p.grad_limit.abs(),
            p.tilt_limit.abs()
        ));
    }
    check(ok, lines.join("; "))
}

fn intrinsic_ode() -> Outcome {
    let (mut drift, mut trip) = (0.0f64, 0.0f64);
    for (c, span) in [(0.0, 2.0), (1.0, 2.0), (-1.0, 0.5)] {
        let run = intrinsic::rho_ode_integrate(c, 0.2, 0.5, (0.0, span), 1e-3).map_err(|e| e.to_string())?;
        drift = drift.max(run.first_integral_drift() / span);
        let rt = intrinsic::quadrature_round_trip(&run, 50).map_err(|e| e.to_string())?;
        if rt.checked == 0 {
            return Err(format!("no round-trip samples for c={c}"));
        }
        trip = trip.max(rt.max_error);
    }
    check(drift <= 1e-8 && trip <= 1e-6, format!("drift per unit u {drift:.3e}; round trip {trip:.3e}"))
}

fn level_curves() -> Outcome {
    let mut worst = 0.0f64;
    for c0 in [0.5, 1.0, 4.0] {
        let m = ConformalMetric::biconservative(c0).unwrap();
        for u in [0.5, 1.0, 2.0] {
            worst =
                worst.max(intrinsic::level_curve_identity_residual(&m, u).map_err(|e| e.to_string())?.residual.abs());
        }
    }
    check(worst <= 1e-9, format!("max residual {worst:.3e}"))
}

fn gluing_rigidity() -> Outcome {
    let mut mirror = 0.0f64;
    for c0 in [0.5, 1.0, 9.0] {
        let r = gluing::mirror_and_match(c0, 4, GluingCandidate::Mirror).map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("mirror failed for C0={c0}"));
        }
        mirror = mirror.max(r.mismatch.iter().flatten().fold(0.0, |m, x| m.max(x.abs())));
    }
    let other = gluing::mirror_and_match_sc(1.0, 1.2, 4).map_err(|e| e.to_string())?;
    let shifted =
        gluing::mirror_and_match(1.0, 4, GluingCandidate::Translate { dz: 0.0 }).map_err(|e| e.to_string())?;
    let fails_early = |o: Option<usize>| o.is_some_and(|o| o <= 1);
    let mut neck = 0.0f64;
    for c0 in [0.5, 1.0, 4.0, 9.0] {
        let fam = SurfaceFamily::stilde(c0).unwrap();
        let g = point_geometry(&fam, ChartPoint::new(0.0, 0.3, fam.chart), &GeometryOptions::default()).unwrap();
        neck = neck.max((g.f() - 2.0 / c0.sqrt()).abs());
    }
    check(
        mirror <= 1e-10
            && fails_early(other.first_failing_order)
            && fails_early(shifted.first_failing_order)
            && neck <= 1e-9,
        format!(
            "mirror max {mirror:e}; mismatched fails at {:?}; translate fails at {:?}; neck error {neck:.3e}",
            other.first_failing_order, shifted.first_failing_order
        ),
    )
}

fn completeness() -> Outcome {
    let m = ConformalMetric::biconservative(1.0).unwrap();
    let p = intrinsic::completeness_probe(&m, 0.0, 0.0, 16, 1000.0, 1e-2);
    let drift = p.max_speed_drift.max(p.max_clairaut_drift);
    check(
        p.reached == 16 && p.failures.is_empty() && drift <= 1e-5,
        format!("{}/16 reached length {}; max drift {drift:.3e}", p.reached, p.length),
    )
}

const EXAMPLES: &[&[&str]] = &[
    &["profile", "sc:Ct0=1", "--theta", "0.01:5:500", "--out", "profile_sc.csv"],
    &["profile", "stilde:C0=1", "--u", "-3:3:601", "--out", "profile_stilde.csv"],
    &["profile", "stilde:C0=1", "--u", "3:-3:10"],
    &["surface", "stilde:C0=1", "--u", "-2:2:81", "--v", "0:2.0944:61", "--out", "stilde.obj"],
    &["surface", "sphere:r=1", "--out", "sphere.obj"],
    &["verify", "sc:Ct0=1", "--gate", "bicons=1e-6", "--out", "verify_sc.json", "--csv", "verify_sc.csv"],
    &["verify", "ellipsoid:a=1,b=1.2,c=1.5", "--gate", "bicons=1e-6", "--out", "verify_ell.json"],
    &["glue", "mirror:C0=1", "--order", "4", "--out", "glue.json", "--csv", "glue.csv"],
    &["intrinsic", "level", "--c0", "1", "--out", "level.csv"],
    &["glue", "boundary:Ct0=1", "--out", "boundary.json", "--csv", "boundary.csv"],
];

/// Data files of one run, keyed by name; sidecars carry run metadata and are skipped.
fn run_all(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = vec![];
    for (i, args) in EXAMPLES.iter().enumerate() {
        let o = Command::new(env!("CARGO_BIN_EXE_bicons"))
            .args(*args)
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        out.push((format!("#{i} status"), o.status.code().unwrap_or(-1).to_string().into_bytes()));
        out.push((format!("#{i} stdout"), o.stdout));
    }
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.ends_with(".meta.json"))
        .collect();
    names.sort();
    for n in names {
        let bytes = std::fs::read(dir.join(&n)).map_err(|e| e.to_string())?;
        out.push((n, bytes));
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let (first, second) = (run_all(a.path())?, run_all(b.path())?);
    let files = first.iter().filter(|(n, _)| !n.starts_with('#')).count();
    if first.len() != second.len() {
        return Err("runs produced different file sets".into());
    }
    for ((n1, d1), (n2, d2)) in first.iter().zip(&second) {
        if n1 != n2 || d1 != d2 {
            return Err(format!("{n1} differs between runs"));
        }
    }
    check(files >= 12, format!("{} examples, {files} data files byte-identical", EXAMPLES.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("isometry identity", isometry),
        ("curvature identity", curvature),
        ("biconservativity residual", biconservativity),
        ("pde and hessian identities", pde_and_hessian),
        ("profile curvature ode", profile_ode),
        ("boundary limits", boundary),
        ("intrinsic ode", intrinsic_ode),
        ("level-curve identity", level_curves),
        ("gluing rigidity", gluing_rigidity),
        ("completeness probe", completeness),
        ("cli determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d} ({secs:.2}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
