use std::collections::BTreeMap;

use proptest::prelude::*;
use prandtl_lab::error::LabError;
use prandtl_lab::profiles::{
    critical_point_at, make_profile, solve_heat, track_critical_point, DecayClass, ShearProfile,
};
use prandtl_lab::quad::uniform_grid;

fn profile(name: &str, amp: f64) -> ShearProfile {
    let mut p = BTreeMap::new();
    p.insert("amp".to_string(), amp);
    make_profile(name, &p).unwrap()
}

/// Crank-Nicolson heat solve on `[0, L]` with `u(0) = 0` and `u(L)` held at `U0`.
fn crank_nicolson(prof: &ShearProfile, l: f64, ny: usize, t: f64, nt: usize) -> (Vec<f64>, Vec<f64>) {
    let y = uniform_grid(0.0, l, ny);
    let (h, dt) = (y[1] - y[0], t / nt as f64);
    let r = dt / (h * h);
    let mut u: Vec<f64> = y.iter().map(|&z| prof.value(z)).collect();
    u[0] = 0.0;
    u[ny - 1] = prof.u0;
    let m = ny - 2;
    for _ in 0..nt {
        let mut rhs: Vec<f64> = (1..ny - 1)
            .map(|i| u[i] + 0.5 * r * (u[i - 1] - 2.0 * u[i] + u[i + 1]))
            .collect();
        rhs[m - 1] += 0.5 * r * prof.u0;
        // Thomas algorithm for the constant tridiagonal (-r/2, 1+r, -r/2)
        let (a, b) = (-0.5 * r, 1.0 + r);
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = a / b;
        d[0] = rhs[0] / b;
        for i in 1..m {
            let den = b - a * c[i - 1];
            c[i] = a / den;
            d[i] = (rhs[i] - a * d[i - 1]) / den;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        u[1..ny - 1].copy_from_slice(&d);
    }
    (y, u)
}

#[test]
fn kernel_solution_matches_crank_nicolson() {
    let prof = profile("gaussian-bump", 1.0);
    let t = 0.1;
    let err = |ny: usize, nt: usize| {
        let (y, u) = crank_nicolson(&prof, 30.0, ny, t, nt);
        let f = solve_heat(&prof, &y, &[t]).unwrap();
        y.iter().enumerate().map(|(i, _)| (f.jet(0, i)[0] - u[i]).abs()).fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(601, 40), err(1201, 80), err(2401, 160));
    assert!(e3 < 1e-5, "{e3}");
    assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{e1} {e2} {e3}");
}

#[test]
fn time_zero_is_the_initial_profile() {
    for prof in [profile("gaussian-bump", 3.0), profile("algebraic-bump", 5.0)] {
        let y = uniform_grid(0.0, 10.0, 201);
        let f = solve_heat(&prof, &y, &[0.0, 0.1]).unwrap();
        for (i, &z) in y.iter().enumerate() {
            assert!((f.jet(0, i)[0] - prof.value(z)).abs() < 1e-12);
        }
    }
}

#[test]
fn field_invariants() {
    for prof in [profile("gaussian-bump", 3.0), profile("algebraic-bump", 5.0)] {
        let y = uniform_grid(0.0, 40.0, 401);
        let t = uniform_grid(0.0, 0.25, 6);
        let f = solve_heat(&prof, &y, &t).unwrap();
        let (lo, hi) = y.iter().fold((0.0f64, prof.u0), |(l, h), &z| (l.min(prof.value(z)), h.max(prof.value(z))));
        for it in 0..t.len() {
            assert_eq!(f.jet(it, 0)[0], 0.0);
            let far = y[y.len() - 1];
            assert!((f.jet(it, y.len() - 1)[0] - prof.u0).abs() <= (prof.value(far) - prof.u0).abs() + 1e-3);
            for iy in 0..y.len() {
                let u = f.jet(it, iy)[0];
                assert!(u >= lo - 1e-10 && u <= hi + 1e-10);
            }
        }
        assert!(f.heat_residual().unwrap() < 1e-6);
    }
}

#[test]
fn csv_export_has_the_documented_columns() {
    let prof = profile("gaussian-bump", 3.0);
    let f = solve_heat(&prof, &uniform_grid(0.0, 1.0, 3), &[0.0]).unwrap();
    let csv = f.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,y,u_s,dy_u_s,dyy_u_s"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn path_matches_per_slice_root_finding() {
    let prof = profile("gaussian-bump", 3.0);
    let f = solve_heat(&prof, &uniform_grid(0.0, 8.0, 401), &uniform_grid(0.0, 0.05, 11)).unwrap();
    let path = track_critical_point(&f, prof.a0, 0.1).unwrap();
    assert_eq!(path.a[0], prof.a0);
    assert_eq!(path.lambda[0], prof.curvature);
    for p in &path.points {
        let r = critical_point_at(&f.flow, p.t, p.a, 0.05).unwrap();
        assert!((r - p.a).abs() < 1e-8, "t={} {}", p.t, r - p.a);
        let q = path.at(p.t).unwrap();
        assert!(f.flow.jet(p.t, q.a).unwrap()[1].abs() < 1e-10);
    }
    // empirical: the symmetric bump flattens monotonically
    assert!(path.lambda.windows(2).all(|w| w[1].abs() <= w[0].abs()));
}

#[test]
fn flattening_bump_loses_its_critical_point() {
    let prof = profile("gaussian-bump", 1.0);
    let t = uniform_grid(0.0, 0.25, 51);
    let f = solve_heat(&prof, &uniform_grid(0.0, 8.0, 401), &t).unwrap();
    let err = track_critical_point(&f, prof.a0, 0.1).unwrap_err();
    let LabError::CurvatureVanished { t: t_hit } = err else { panic!("{err:?}") };
    // oracle: first slice where the per-slice root has |lambda| under the floor
    let floor = 0.1 * prof.curvature.abs();
    let mut a = prof.a0;
    let mut t_oracle = f64::NAN;
    for &tt in &t {
        match critical_point_at(&f.flow, tt, a, 0.2) {
            Ok(r) if f.flow.jet(tt, r).unwrap()[2].abs() >= floor => a = r,
            _ => {
                t_oracle = tt;
                break;
            }
        }
    }
    assert!((t_hit - t_oracle).abs() <= 0.0051, "{t_hit} vs {t_oracle}");
}

#[test]
fn monotone_profile_has_no_critical_point() {
    assert_eq!(make_profile("monotone", &BTreeMap::new()).unwrap_err(), LabError::NoCriticalPoint);
}

#[test]
fn algebraic_tail_is_bounded_against_the_power() {
    let prof = profile("algebraic-bump", 5.0);
    let DecayClass::Algebraic { power } = prof.decay_class else { panic!() };
    let ratios: Vec<f64> = uniform_grid(20.0, 40.0, 201).iter().map(|&y| prof.derivative(y).abs() * y.powf(power)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    assert!(lo > 0.1 && hi < 100.0, "{lo} {hi}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bump_families_satisfy_the_profile_invariants(amp in 1.0f64..8.0, u0 in 0.5f64..2.0, alg in any::<bool>()) {
        let mut p = BTreeMap::new();
        p.insert("amp".to_string(), amp);
        p.insert("u0".to_string(), u0);
        let name = if alg { "algebraic-bump" } else { "gaussian-bump" };
        let prof = make_profile(name, &p).unwrap();
        let d = prof.diagnostics(200.0, 4000);
        prop_assert_eq!(d.at_wall, 0.0);
        prop_assert!(d.slope_at_a0.abs() < 1e-12);
        prop_assert!(prof.curvature < 0.0);
        prop_assert!(d.far_field_gap < 2.0 * (amp + u0) / 200.0);
        prop_assert!(d.sup_deviation_jet.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn kernel_solution_respects_the_maximum_principle(amp in 1.0f64..6.0, t in 0.001f64..1.0, y in 0.0f64..15.0) {
        let prof = profile("gaussian-bump", amp);
        let f = solve_heat(&prof, &[0.0, y], &[t]).unwrap();
        let u = f.jet(0, 1)[0];
        let hi = uniform_grid(0.0, 15.0, 1501).iter().map(|&z| prof.value(z)).fold(prof.u0, f64::max);
        prop_assert!(u >= -1e-10 && u <= hi + 1e-10);
    }
}
