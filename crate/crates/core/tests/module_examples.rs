//! Worked examples for each module, checked against independent closed-form
//! oracles computed here.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use bicons_core::diffgeo::{
    fundamental_forms, jet_of, point_geometry, ChartPoint, GeometryOptions, Immersion, JetMode,
};
use bicons_core::families::{c0_from_ct0, eval_sc, eval_stilde, jet_stilde, SurfaceFamily};
use bicons_core::residuals::{bicons_residual_norm, hess_residual, pde_residual, sweep, Grid, Range};
use bicons_core::{ChartId, GeoError};

fn geometry(fam: &SurfaceFamily, u: f64, v: f64) -> bicons_core::PointGeometry {
    point_geometry(fam, ChartPoint::new(u, v, fam.chart), &GeometryOptions::default()).unwrap()
}

mod diffgeo {
    use super::*;

    #[test]
    fn unit_sphere_forms() {
        let fam = SurfaceFamily::sphere(1.0).unwrap();
        for &(u, v) in &[(0.4, 0.1), (1.3, 2.0), (2.7, -1.0)] {
            let jet = fam.analytic_jet(u, v).unwrap().unwrap();
            let forms = fundamental_forms(&jet, fam.orientation()).unwrap();
            assert_relative_eq!(forms.mean, 2.0, epsilon = 1e-13);
            assert_relative_eq!(forms.gauss, 1.0, epsilon = 1e-13);
            assert_relative_eq!(forms.normal.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn stilde_gauss_curvature_at_one() {
        // -3 / cosh^8(1) in closed form.
        let oracle = -3.0 / 1f64.cosh().powi(8);
        assert_relative_eq!(oracle, -0.093_328_070_348_316, epsilon = 1e-15);
        let jet = jet_stilde(1.0, 1.0, 0.0).unwrap();
        let forms = fundamental_forms(&jet, 1.0).unwrap();
        assert_relative_eq!(forms.gauss, oracle, epsilon = 1e-12);
        assert_relative_eq!(forms.gauss_from_forms(), forms.gauss, epsilon = 1e-12);
    }

    #[test]
    fn grad_f_vanishes_only_on_the_neck() {
        let fam = SurfaceFamily::stilde(1.0).unwrap();
        assert!(geometry(&fam, 0.0, 0.7).grad_f_norm() < 1e-9);
        for u in [-1.0, -0.2, 0.2, 1.5] {
            assert!(geometry(&fam, u, 0.7).grad_f_norm() > 1e-3);
        }
    }

    #[test]
    fn cmc_sphere_has_no_gradient() {
        let fam = SurfaceFamily::sphere(1.0).unwrap();
        let g = geometry(&fam, 1.1, 0.4);
        assert_eq!(g.grad_f_norm(), 0.0);
        assert_eq!(g.f(), 2.0);
    }

    #[test]
    fn stilde_origin_position() {
        let p = eval_stilde(1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(p.x, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!((p.y, p.z), (0.0, 0.0));
    }

    #[test]
    fn sphere_equator_is_immersed() {
        let fam = SurfaceFamily::sphere(2.0).unwrap();
        let jet = fam.analytic_jet(PI / 2.0, 0.3).unwrap().unwrap();
        assert!(jet.area_element() > 0.0);
    }

    /// Finite-difference jets converge to analytic jets at second order.
    #[test]
    fn jet_convergence_orders() {
        let cases = [
            (SurfaceFamily::sc(1.0).unwrap(), 1.0, 0.5),
            (SurfaceFamily::sc_rho(1.0).unwrap(), 2.0, 0.5),
            (SurfaceFamily::stilde(1.0).unwrap(), 0.7, 0.3),
            (SurfaceFamily::sphere(2.0).unwrap(), 1.0, 0.2),
            (SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap(), 1.0, 0.8),
        ];
        for (fam, u, v) in cases {
            let p = ChartPoint::new(u, v, fam.chart);
            let exact = jet_of(&fam, p, JetMode::Analytic).unwrap();
            let err = |h: f64| {
                let j = jet_of(&fam, p, JetMode::FiniteDifference { h: Some(h) }).unwrap();
                [j.d_u - exact.d_u, j.d_v - exact.d_v, j.d_uu - exact.d_uu, j.d_uv - exact.d_uv, j.d_vv - exact.d_vv]
                    .iter()
                    .map(|d| d.norm())
                    .fold(0.0, f64::max)
            };
            let order = (err(1e-2) / err(5e-3)).log2();
            assert!((1.8..=2.2).contains(&order), "{fam}: order {order}");
        }
    }

    #[test]
    fn shape_operator_is_metric_self_adjoint() {
        let fam = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap();
        let g = geometry(&fam, 1.0, 0.8);
        let gs = g.forms.metric() * g.forms.shape;
        assert_relative_eq!(gs[(0, 1)], gs[(1, 0)], epsilon = 1e-12);
    }

    /// The same ambient point seen from the theta chart and the rho chart.
    #[test]
    fn chart_invariance_of_f_and_k() {
        let theta_chart = SurfaceFamily::sc(1.0).unwrap();
        let rho_chart = SurfaceFamily::sc_rho(1.0).unwrap();
        for theta in [0.3, 1.0, 3.0] {
            let rho = (theta + 1.0f64).powf(1.5);
            let a = geometry(&theta_chart, theta, 0.4);
            let b = geometry(&rho_chart, rho, 0.4);
            assert!((a.position - b.position).norm() < 1e-12);
            assert_relative_eq!(a.f(), b.f(), epsilon = 1e-6);
            assert_relative_eq!(a.gauss(), b.gauss(), epsilon = 1e-6);
        }
    }
}

mod profiles {
    use super::*;
    use bicons_core::profiles::{
        arclength_reparam, curvature_ode_residual, integrate_curvature_ode, sigma_theta, signed_curvature, u_profile,
        u_profile_derivatives, CompleteProfile, ProfileCurve, SigmaTheta,
    };

    #[test]
    fn u_profile_at_eight() {
        let oracle = 1.5 * (2.0 * 3f64.sqrt() + (2.0 + 3f64.sqrt()).ln());
        assert_relative_eq!(oracle, 7.171_589_3, epsilon = 1e-7);
        assert_relative_eq!(u_profile(1.0, 8.0).unwrap(), oracle, epsilon = 1e-13);
    }

    #[test]
    fn vertical_tangent_at_boundary() {
        let near = u_profile_derivatives(1.0, 1.0001).unwrap().0;
        let far = u_profile_derivatives(1.0, 1.01).unwrap().0;
        assert!(near > 8.0 * far);
    }

    #[test]
    fn sigma_theta_values() {
        let (r, z) = sigma_theta(1.0, 1.0).unwrap();
        let z_oracle = 1.5 * (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln());
        assert_relative_eq!(r, 2f64.powf(1.5), epsilon = 1e-14);
        assert_relative_eq!(z, z_oracle, epsilon = 1e-14);
        assert_relative_eq!(r, 2.828_427_1, epsilon = 1e-7);
        assert_relative_eq!(z, 3.443_380_724_088_957, epsilon = 1e-14);
        let (r0, z0) = sigma_theta(1.0, 1e-12).unwrap();
        assert!((r0 - 1.0).abs() < 1e-11 && z0.abs() < 1e-5);
    }

    #[test]
    fn boundary_point_for_each_parameter() {
        for ct0 in [0.5, 1.0, 9f64.cbrt(), 4.0] {
            let (r, z) = sigma_theta(ct0, 1e-14).unwrap();
            assert_relative_eq!(r, ct0.powf(-1.5), max_relative = 1e-12);
            assert!(z.abs() < 1e-6);
        }
    }

    #[test]
    fn theta_curve_is_the_graph() {
        for theta in [0.5, 1.0, 2.0] {
            let (r, z) = sigma_theta(1.0, theta).unwrap();
            assert_relative_eq!(u_profile(1.0, r).unwrap(), z, epsilon = 1e-9);
        }
        // Dense sampling: vertical gap between the two curves.
        let gap = (1..=2000)
            .map(|i| 1e-3 * i as f64)
            .map(|t| {
                let (r, z) = sigma_theta(1.2, t).unwrap();
                (u_profile(1.2, r).unwrap() - z).abs()
            })
            .fold(0.0, f64::max);
        assert!(gap <= 1e-8, "gap {gap}");
    }

    #[test]
    fn arclength_speed_is_one() {
        let curve = arclength_reparam(SigmaTheta::new(1.0).unwrap(), 0.0).unwrap();
        for i in 0..100 {
            let s = 0.05 + 0.1 * i as f64;
            let p = curve.eval(s).unwrap();
            assert!((p.speed() - 1.0).abs() <= 1e-9, "speed at {s}");
        }
        // s = 3 sqrt(theta) + theta^{3/2} for Ct0 = 1.
        let theta = 2.0f64;
        let s = 3.0 * theta.sqrt() + theta.powf(1.5);
        assert_relative_eq!(curve.param_at(s).unwrap(), theta, epsilon = 1e-12);
    }

    #[test]
    fn profile_curvature_is_positive() {
        let curve = arclength_reparam(SigmaTheta::new(1.0).unwrap(), 0.0).unwrap();
        for i in 0..40 {
            assert!(signed_curvature(&curve, 0.1 + 0.5 * i as f64).unwrap() > 0.0);
        }
    }

    #[test]
    fn curvature_ode_on_profile() {
        let curve = arclength_reparam(SigmaTheta::new(1.0).unwrap(), 0.0).unwrap();
        for i in 0..20 {
            let s = 0.5 + 0.5 * i as f64;
            let r = curvature_ode_residual(&curve, s, 1e-3).unwrap();
            assert!(r.residual.abs() <= 1e-4, "s = {s}: {}", r.residual);
        }
    }

    #[test]
    fn integrated_curvature_matches_profile() {
        let curve = arclength_reparam(SigmaTheta::new(1.0).unwrap(), 0.0).unwrap();
        let s0 = 2.0;
        let h = 1e-3;
        let k = |s: f64| signed_curvature(&curve, s).unwrap();
        let dk0 = (k(s0 + h) - k(s0 - h)) / (2.0 * h);
        let run = integrate_curvature_ode(k(s0), dk0, (s0, s0 + 1.0), 1e-3).unwrap();
        for (s, kappa) in run.s.iter().zip(&run.kappa).step_by(50) {
            assert!((kappa - k(*s)).abs() <= 1e-5, "s = {s}");
        }
    }

    #[test]
    fn curvature_ode_is_homogeneous() {
        let (k0, dk0, lambda) = (0.8, -0.3, 2.0);
        let base = integrate_curvature_ode(k0, dk0, (0.0, 1.0), 1e-3).unwrap();
        let scaled = integrate_curvature_ode(lambda * k0, lambda * lambda * dk0, (0.0, 0.5), 5e-4).unwrap();
        for (i, s) in scaled.s.iter().enumerate().step_by(100) {
            let j = base.s.iter().position(|t| (t - lambda * s).abs() < 1e-12).unwrap();
            assert_relative_eq!(scaled.kappa[i], lambda * base.kappa[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn curvature_peaks_at_the_neck() {
        let curve = arclength_reparam(CompleteProfile::new(1.0).unwrap(), 0.0).unwrap();
        let k = |s: f64| signed_curvature(&curve, s).unwrap();
        let h = 1e-3;
        let slope = |s: f64| (k(s + h) - k(s - h)) / (2.0 * h);
        assert!(slope(-0.2) > 0.0 && slope(0.2) < 0.0);
        assert!(slope(0.0).abs() < 1e-8);
        let run = integrate_curvature_ode(k(0.0), 0.0, (0.0, 0.5), 1e-3).unwrap();
        let back = integrate_curvature_ode(k(0.0), 0.0, (0.0, -0.5), 1e-3).unwrap();
        assert!(run.dkappa[1..].iter().all(|d| *d < 0.0));
        for (a, b) in run.kappa.iter().zip(&back.kappa) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }
}

mod families {
    use super::*;

    #[test]
    fn sc_point_values() {
        let p = eval_sc(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(p.x, 2.828_427_1, epsilon = 1e-7);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_relative_eq!(p.z, 3.443_380_724_088_957, epsilon = 1e-14);
    }

    #[test]
    fn boundary_circle_of_radius_one_third() {
        let ct0 = 9f64.cbrt();
        for v in [0.0, 1.0, 4.0] {
            let p = eval_sc(ct0, 1e-14, v).unwrap();
            assert_relative_eq!(p.x.hypot(p.y), 1.0 / 3.0, epsilon = 1e-12);
            assert!(p.z.abs() < 1e-6);
        }
    }

    #[test]
    fn symmetries() {
        let a = eval_sc(1.3, 0.8, 0.4).unwrap();
        let b = eval_sc(1.3, 0.8, 0.4 + PI).unwrap();
        assert!((b - bicons_core::diffgeo::Vec3::new(-a.x, -a.y, a.z)).norm() < 1e-14);
        for u in [0.3, 1.7] {
            let up = eval_stilde(2.0, u, 0.5).unwrap();
            let down = eval_stilde(2.0, -u, 0.5).unwrap();
            assert!((down - bicons_core::diffgeo::Vec3::new(up.x, up.y, -up.z)).norm() < 1e-14);
            let shifted = eval_stilde(2.0, u, 0.5 + 2.0 * PI / 3.0).unwrap();
            assert!((shifted - up).norm() < 1e-13);
        }
    }

    #[test]
    fn controls() {
        let sphere = SurfaceFamily::sphere(2.0).unwrap();
        assert_eq!(geometry(&sphere, 0.9, 0.3).f(), 1.0);
        let cyl = SurfaceFamily::cylinder(1.0).unwrap();
        let g = geometry(&cyl, 0.5, 0.3);
        assert_eq!((g.f(), g.grad_f_norm()), (1.0, 0.0));
        assert!(g.gauss().abs() < 1e-15);
        let ell = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap();
        let g = geometry(&ell, 1.0, 0.8);
        assert!(g.grad_f_norm() > 1e-3 && bicons_residual_norm(&g) > 1e-3);
    }

    #[test]
    fn pullback_metric_and_gauss_identity() {
        for c0 in [0.5, 1.0, 9.0] {
            for &(u, v) in &[(-2.5, 0.1), (0.0, 1.0), (1.2, 2.0)] {
                let jet = jet_stilde(c0, u, v).unwrap();
                let g = jet.metric();
                let e = c0 * u.cosh().powi(6);
                assert_relative_eq!(g[(0, 0)], e, max_relative = 1e-12);
                assert_relative_eq!(g[(1, 1)], e, max_relative = 1e-12);
                assert!(g[(0, 1)].abs() <= 1e-12 * e);
                let k = fundamental_forms(&jet, 1.0).unwrap().gauss;
                assert_relative_eq!(k, -3.0 / (c0 * u.cosh().powi(8)), epsilon = 1e-9);
            }
        }
    }

    /// Every extrinsic point lies on the complete surface with matched `C0`:
    /// project by radius onto the `u > 0` half-chart.
    #[test]
    fn extrinsic_surface_inside_complete_surface() {
        for ct0 in [0.5, 1.0, 4.0] {
            let c0 = c0_from_ct0(ct0);
            for theta in [1e-3, 0.2, 1.0, 4.0] {
                for v in [0.0, 1.1, 2.5] {
                    let p = eval_sc(ct0, theta, v).unwrap();
                    let radius = p.x.hypot(p.y);
                    let u = (3.0 * radius / c0.sqrt()).cbrt().acosh();
                    let q = eval_stilde(c0, u, v / 3.0).unwrap();
                    assert!((p - q).norm() <= 1e-8 * (1.0 + p.norm()), "Ct0 {ct0} theta {theta}");
                }
            }
        }
    }

    #[test]
    fn neck_mean_curvature() {
        for c0 in [0.5, 1.0, 4.0, 9.0] {
            let fam = SurfaceFamily::stilde(c0).unwrap();
            assert_relative_eq!(geometry(&fam, 0.0, 0.2).f(), 2.0 / c0.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn orientation_contract() {
        for fam in [SurfaceFamily::sc(0.7).unwrap(), SurfaceFamily::stilde(2.0).unwrap()] {
            for (u, v) in Grid::default_for(&fam).points() {
                assert!(geometry(&fam, u, v).f() > 0.0);
            }
        }
    }
}

mod intrinsic {
    use super::*;
    use bicons_core::intrinsic::*;

    #[test]
    fn gauss_curvature_values() {
        let g = ConformalMetric::biconservative(1.0).unwrap();
        assert_relative_eq!(gauss_curvature_conformal(&g, 0.0).unwrap(), -3.0, epsilon = 1e-15);
        let oracle = 24.0 * 1f64.sinh() / 1f64.cosh().powi(9);
        assert_relative_eq!(oracle, 0.5686, epsilon = 1e-4);
        assert_relative_eq!(gauss_curvature_derivative(&g, 1.0).unwrap(), oracle, epsilon = 1e-14);
        for c0 in [0.5, 4.0] {
            let g = ConformalMetric::biconservative(c0).unwrap();
            for u in [-3.0, -0.4, 1.0, 2.5] {
                let k = gauss_curvature_conformal(&g, u).unwrap();
                assert_relative_eq!(k, -3.0 / (c0 * u.cosh().powi(8)), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn level_curve_identity() {
        for c0 in [0.5, 1.0, 4.0] {
            let g = ConformalMetric::biconservative(c0).unwrap();
            for u in [0.5, 1.0, 2.0] {
                assert!(level_curve_identity_residual(&g, u).unwrap().residual.abs() <= 1e-9);
            }
            assert!(matches!(level_curve_identity_residual(&g, 0.0), Err(GeoError::HypothesisViolated(_))));
        }
    }

    #[test]
    fn homothety_normalizes_the_ode() {
        for c0 in [0.25, 1.0, 7.0] {
            let raw = ConformalMetric::biconservative(c0).unwrap();
            let norm = ConformalMetric::biconservative_normalized(c0).unwrap();
            let alpha = normalizing_homothety(c0);
            for x in [-2.0, 0.0, 0.6, 3.0] {
                let j = norm.rho.jet(x);
                assert!((j[2] - (-2.0 * j[0] / 3.0).exp()).abs() < 1e-13);
                // The normalized factor is the pullback under u = alpha x.
                assert_relative_eq!(norm.factor(x), alpha * alpha * raw.factor(alpha * x), max_relative = 1e-13);
            }
        }
        let g = ConformalMetric::biconservative(1.0 / 27.0).unwrap();
        let j = g.rho.jet(0.9);
        assert!((j[2] - (-2.0 * j[0] / 3.0).exp()).abs() < 1e-14);
        let g = ConformalMetric::biconservative(1.0).unwrap();
        let j = g.rho.jet(0.9);
        assert!((j[2] - (-2.0 * j[0] / 3.0).exp()).abs() > 0.1);
    }

    #[test]
    fn first_integral_and_monotone_growth() {
        for (rho0, drho0) in [(0.0, 0.5), (1.0, 0.1), (-0.5, 2.0)] {
            let run = rho_ode_integrate(0.0, rho0, drho0, (0.0, 5.0), 1e-3).unwrap();
            assert!(run.first_integral_drift() <= 1e-8);
            assert!(run.drho.iter().all(|d| *d > 0.0));
        }
        let eq = rho_ode_integrate(1.0, 0.0, 0.0, (0.0, 1.0), 1e-3).unwrap();
        assert!(eq.rho.iter().all(|r| r.abs() < 1e-15));
    }

    #[test]
    fn quadrature_round_trip() {
        for c in [0.0, 1.0, -1.0] {
            let span = if c < 0.0 { 0.5 } else { 2.0 };
            let run = rho_ode_integrate(c, 0.2, 0.5, (0.0, span), 1e-3).unwrap();
            let rt = bicons_core::intrinsic::quadrature_round_trip(&run, 50).unwrap();
            assert!(rt.checked >= 5);
            assert!(rt.max_error <= 1e-6, "c = {c}: {}", rt.max_error);
        }
    }

    #[test]
    fn singular_radicand_is_reported() {
        let (c, rho0) = (1.0, 0.3);
        let a = 3.0 * (-2.0 * rho0 / 3.0f64).exp() + c * (2.0 * rho0).exp();
        assert!(matches!(
            rho_quadrature(c, a, rho0, 0.0, 0.5, Branch::Increasing),
            Err(GeoError::RadicandNonpositive { .. })
        ));
    }

    #[test]
    fn meridians_reach_far_targets() {
        let g = ConformalMetric::biconservative(1.0).unwrap();
        // Arc length of the meridian from 0 to 10 is sinh 10 + sinh^3 10 / 3.
        let length = 10f64.sinh() + 10f64.sinh().powi(3) / 3.0;
        assert!(length.is_finite());
        let run = geodesic_shoot(&g, GeodesicState::unit(&g, 0.0, 0.5, 0.0), 10.0, 1e-3).unwrap();
        let last = run.samples.last().unwrap();
        assert!(run.samples.iter().all(|s| s.v == 0.5 && s.dv == 0.0));
        // u(s) solves sinh u + sinh^3 u / 3 = s.
        let s = |u: f64| u.sinh() + u.sinh().powi(3) / 3.0;
        assert_relative_eq!(s(last.u), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn clairaut_and_speed_along_geodesics() {
        let g = ConformalMetric::biconservative(1.0).unwrap();
        for angle in [0.3, 1.2, 2.5] {
            let run = geodesic_shoot(&g, GeodesicState::unit(&g, 0.2, 0.0, angle), 50.0, 1e-2).unwrap();
            assert!(run.max_clairaut_drift <= 1e-8 * 50.0);
            assert!(run.max_speed_drift <= 1e-8);
        }
    }
}

mod residuals {
    use super::*;

    fn sc_grid() -> Grid {
        Grid { u: Range::new(0.2, 5.0, 20), v: Range::new(0.0, 2.0 * PI * 7.0 / 8.0, 8) }
    }

    #[test]
    fn sc_grid_residuals() {
        let fam = SurfaceFamily::sc(1.0).unwrap();
        let report = sweep(&fam, &sc_grid(), &GeometryOptions::default());
        assert_eq!(report.records.len(), 160);
        assert_eq!(report.summary.failed_points, 0);
        assert!(report.summary.bicons.max <= 1e-6);
        assert!(report.summary.pde.max <= 1e-5);
        assert!(report.summary.hess.max <= 1e-4);
        for r in &report.records {
            assert!(report.summary.bicons.max >= r.residual_bicons);
        }
    }

    /// Where the first-order identity holds to its tolerance, the PDE holds
    /// to at most ten times that tolerance.
    #[test]
    fn consistency_chain() {
        let fam = SurfaceFamily::sc(1.0).unwrap();
        let report = sweep(&fam, &sc_grid(), &GeometryOptions::default());
        for r in report.records.iter().filter(|r| r.residual_bicons <= 1e-6 && r.grad_norm > 0.0) {
            assert!(r.residual_pde.abs() <= 1e-5, "{r:?}");
        }
    }

    #[test]
    fn stilde_hessian_identity_off_the_neck() {
        let fam = SurfaceFamily::stilde(1.0).unwrap();
        let v = Range::new(0.0, 2.0 * PI / 3.0 * 0.9, 6);
        for u in [Range::new(-2.0, -0.1, 12), Range::new(0.1, 2.0, 12)] {
            let report = sweep(&fam, &Grid { u, v }, &GeometryOptions::default());
            assert!(report.summary.hess.max <= 1e-4);
        }
        for study in
            &sweep(&fam, &Grid { u: Range::new(0.5, 1.0, 2), v }, &GeometryOptions::default()).summary.refinement
        {
            for o in &study.order_hess {
                let o = o.unwrap();
                assert!((1.8..=2.2).contains(&o), "{study:?}");
            }
        }
    }

    #[test]
    fn controls() {
        for fam in [SurfaceFamily::sphere(1.0).unwrap(), SurfaceFamily::cylinder(1.0).unwrap()] {
            let report = sweep(&fam, &Grid::default_for(&fam), &GeometryOptions::default());
            assert!(report.records.iter().all(|r| r.residual_bicons == 0.0 && r.residual_hess == 0.0));
            assert!(!report.convention_note.is_empty());
        }
        let sphere = SurfaceFamily::sphere(1.0).unwrap();
        assert_eq!(pde_residual(&geometry(&sphere, 1.0, 1.0), 0.0), -16.0);
        let plane = SurfaceFamily::plane();
        let g = geometry(&plane, 0.3, -0.2);
        assert_eq!((pde_residual(&g, 0.0), hess_residual(&g), bicons_residual_norm(&g)), (0.0, 0.0, 0.0));
        let ell = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap();
        let report = sweep(&ell, &Grid::default_for(&ell), &GeometryOptions::default());
        assert!(report.summary.bicons.max > 1e-2);
        assert!(report.summary.hess.max > 1e-6);
    }

    /// Under `x -> lambda x`, `f -> f / lambda` and the bicons g-norm
    /// scales as `lambda^{-3}`.
    #[test]
    fn dilation_covariance() {
        let lambda: f64 = 2.0;
        let (a, b) = (SurfaceFamily::sc(1.0).unwrap(), SurfaceFamily::sc(lambda.powf(-2.0 / 3.0)).unwrap());
        for theta in [0.5, 2.0] {
            let (ga, gb) = (geometry(&a, theta, 0.3), geometry(&b, theta, 0.3));
            assert!((gb.position - lambda * ga.position).norm() < 1e-12);
            assert_relative_eq!(gb.f(), ga.f() / lambda, max_relative = 1e-12);
        }
        let small = SurfaceFamily::ellipsoid(1.0, 1.2, 1.5).unwrap();
        let big = SurfaceFamily::ellipsoid(lambda, 1.2 * lambda, 1.5 * lambda).unwrap();
        for &(u, v) in &[(1.0, 0.8), (0.5, 2.0)] {
            let (gs, gb) = (geometry(&small, u, v), geometry(&big, u, v));
            let ratio = bicons_residual_norm(&gs) / bicons_residual_norm(&gb);
            assert_relative_eq!(ratio, lambda.powi(3), max_relative = 1e-5);
        }
    }
}

mod gluing {
    use super::*;
    use bicons_core::gluing::*;

    #[test]
    fn boundary_limit_values() {
        let p = boundary_limits(1.0, &default_thetas()).unwrap();
        assert!((p.f_limit - 2.0 / 3.0).abs() <= 1e-4);
        assert!(p.grad_limit.abs() <= 1e-4);
        assert!(p.grad_monotone_decreasing());
        let q = boundary_limits(9f64.cbrt(), &default_thetas()).unwrap();
        assert_relative_eq!(q.boundary_radius, 1.0 / 3.0, epsilon = 1e-15);
        assert!(q.records.windows(2).all(|w| w[1].tilt < w[0].tilt));
        assert!(q.tilt_limit.abs() <= 1e-3);
    }

    #[test]
    fn mismatched_parameters_fail_at_positions() {
        let r = mirror_and_match_sc(1.0, 1.2, 4).unwrap();
        assert_eq!(r.first_failing_order, Some(0));
        assert_relative_eq!(r.mismatch[0][0].abs(), (1.0 - 1.2f64.powf(-1.5)).abs(), epsilon = 1e-14);
    }

    #[test]
    fn reversed_copy_fails_at_tangents() {
        let r = mirror_and_match(1.0, 4, GluingCandidate::Translate { dz: 0.0 }).unwrap();
        assert_eq!(r.first_failing_order, Some(1));
    }

    #[test]
    fn mirror_matches_to_order_four() {
        for c0 in [0.1, 1.0, 9.0, 50.0] {
            let r = mirror_and_match(c0, 4, GluingCandidate::Mirror).unwrap();
            assert!(r.passed());
            assert!(r.mismatch.iter().flatten().all(|m| m.abs() <= 1e-10));
        }
    }

    #[test]
    fn meridian_and_parallels() {
        let m = meridian_geodesic_check(1.0, (-2.0, 2.0), GeodesicStart::Meridian { v0: 0.3 }, 1e-3).unwrap();
        assert!(m.max_deviation <= 1e-6);
        assert!((m.final_u - 2.0).abs() < 1e-6);
        let p = meridian_geodesic_check(1.0, (-2.0, 2.0), GeodesicStart::Parallel { u0: 1.0 }, 1e-3).unwrap();
        assert!(p.max_deviation > 0.1);
        let n = meridian_geodesic_check(1.0, (-2.0, 2.0), GeodesicStart::Parallel { u0: 0.0 }, 1e-3).unwrap();
        assert!(n.max_deviation <= 1e-10);
    }

    #[test]
    fn theta_chart_boundary_uses_chart_id() {
        assert_eq!(SurfaceFamily::sc(1.0).unwrap().chart, ChartId::Theta);
    }
}
