use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use prandtl_lab::eigen::{find_tau, DispersionProblem, Eigenpair};
use prandtl_lab::error::LabError;
use prandtl_lab::modes::{
    assemble_frozen, assemble_mode, corrector, Ansatz, Background, CorrectorSeed, Mode, ModeParams,
};
use prandtl_lab::norms::weighted_sup;
use prandtl_lab::profiles::{make_profile, solve_heat, track_critical_point, CriticalPath, HeatFlowField, ShearProfile};
use prandtl_lab::quad::{adaptive, uniform_grid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

struct Setup {
    profile: ShearProfile,
    field: HeatFlowField,
    path: CriticalPath,
    pair: Eigenpair,
}

fn profile(name: &str) -> ShearProfile {
    let mut p = BTreeMap::new();
    p.insert("amp".to_string(), 3.0);
    make_profile(name, &p).unwrap()
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let profile = profile("gaussian-bump");
        let y = uniform_grid(0.0, 8.0, 1601);
        let t = uniform_grid(0.0, 0.25, 51);
        let field = solve_heat(&profile, &y, &t).unwrap();
        let path = track_critical_point(&field, profile.a0, 0.1).unwrap();
        let pair = find_tau(&DispersionProblem::default()).unwrap();
        Setup { profile, field, path, pair }
    })
}

fn params(n: u32) -> ModeParams {
    let s = setup();
    ModeParams::standard(n, s.path.min_a(), s.profile.a0, false).unwrap()
}

#[test]
fn bump_corrector_is_a_normalized_ramp() {
    let y = uniform_grid(0.0, 3.0, 301);
    let v = corrector(CorrectorSeed::Bump { lo: 1.0, hi: 2.0 }, &y).unwrap();
    for (yy, j) in y.iter().zip(&v) {
        if *yy <= 1.0 {
            assert_eq!(j[0], 0.0);
        }
        if *yy >= 2.0 {
            assert_eq!(j[0], 1.0);
        }
    }
    assert!(v.windows(2).all(|w| w[1][0] >= w[0][0]));
    assert_eq!((v[0][0], v[0][1]), (0.0, 0.0));
}

#[test]
fn odd_seed_has_zero_mass() {
    let err = corrector(CorrectorSeed::Dipole { lo: 1.0, hi: 2.0 }, &[0.0, 1.0]).unwrap_err();
    assert_eq!(err, LabError::ZeroMass);
}

#[test]
fn corrector_matches_adaptive_antiderivative() {
    let seed = CorrectorSeed::Bump { lo: 0.7, hi: 2.3 };
    let y = uniform_grid(0.0, 3.0, 50);
    let v = corrector(seed, &y).unwrap();
    let (mass, _) = adaptive(0.7, 2.3, 1e-14, |x| seed.jet(x)[0]);
    for (yy, j) in y.iter().zip(&v) {
        let (num, _) = if *yy > 0.7 {
            adaptive(0.7, yy.min(2.3), 1e-14, |x| seed.jet(x)[0])
        } else {
            (0.0, 0.0)
        };
        assert!((j[0] - num / mass).abs() < 1e-10, "{yy}");
    }
}

#[test]
fn frozen_mode_at_time_zero_is_the_corrector() {
    let s = setup();
    let p = params(64);
    let y = uniform_grid(0.0, 8.0, 801);
    let f = assemble_frozen(&p, &s.profile, &s.pair, &y, 0.0, Ansatz::Corrected).unwrap();
    let c = corrector(p.seed, &y).unwrap();
    for (pt, j) in f.points.iter().zip(&c) {
        assert_eq!(pt.u[0], Complex64::from(p.eps() * j[1]));
    }
}

#[test]
fn frozen_shear_layer_grows_at_the_scaled_rate() {
    let s = setup();
    let p = params(128);
    let y = uniform_grid(0.0, 8.0, 801);
    let (t1, t2) = (0.05, 0.2);
    let f1 = assemble_frozen(&p, &s.profile, &s.pair, &y, t1, Ansatz::Corrected).unwrap();
    let f2 = assemble_frozen(&p, &s.profile, &s.pair, &y, t2, Ansatz::Corrected).unwrap();
    let rate = (0.5 * s.profile.curvature.abs()).sqrt() * (-s.pair.tau.im) * p.k().sqrt();
    let want = (rate * (t2 - t1)).exp() * t2 / t1;
    for (a, b) in f1.points.iter().zip(&f2.points) {
        if a.u_shear_layer.norm() > 1e-12 {
            let got = b.u_shear_layer.norm() / a.u_shear_layer.norm();
            assert!((got / want - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn frozen_mode_inherits_the_algebraic_tail() {
    let s = setup();
    let prof = profile("algebraic-bump");
    let p = ModeParams::standard(64, prof.a0, prof.a0, true).unwrap();
    let y = uniform_grid(0.0, 80.0, 8001);
    let f = assemble_frozen(&p, &prof, &s.pair, &y, 0.1, Ansatz::Corrected).unwrap();
    let half = y.len() / 2;
    let ratios: Vec<f64> = (half..y.len())
        .map(|i| f.points[i].u[0].norm() / prof.jet(y[i])[1].abs())
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    assert!(lo > 0.0 && hi / lo < 1.0 + 1e-9);
}

#[test]
fn initial_data_is_linear_in_eps() {
    let s = setup();
    for alpha in [0.0, 1.0, 2.0] {
        let ratios: Vec<f64> = [64u32, 128, 256, 512]
            .iter()
            .map(|&n| {
                let p = params(n);
                let f = assemble_mode(&p, &s.field, &s.path, &s.pair, 0.0).unwrap();
                f.u_norm_w2(alpha) / p.eps()
            })
            .collect();
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn no_slip_and_jump_cancellation() {
    let s = setup();
    for n in [64u32, 256] {
        let p = params(n);
        let mode = Mode::new(p, &s.pair, Background::Evolving(&s.path), Ansatz::Corrected).unwrap();
        for t in [0.0, 0.07, 0.13, 0.25] {
            let f = assemble_mode(&p, &s.field, &s.path, &s.pair, t).unwrap();
            assert_eq!(f.points[0].u[0], Complex64::from(0.0));
            assert_eq!(f.points[0].v[0], Complex64::from(0.0));
            for j in mode.jump_at_critical(t).unwrap() {
                assert!(j.norm() < 1e-8, "n={n} t={t} {j}");
            }
        }
    }
}

#[test]
fn divergence_identity_converges() {
    let s = setup();
    let p = params(128);
    let mode = Mode::new(p, &s.pair, Background::Evolving(&s.path), Ansatz::Corrected).unwrap();
    let defect = |ny: usize| {
        let y = uniform_grid(0.0, 8.0, ny);
        let f = mode.field(&y, 0.1).unwrap();
        let scale = weighted_sup(&y, &f.u(), 0.0) * p.k();
        f.divergence_defect() / scale
    };
    let (d1, d2) = (defect(801), defect(1601));
    assert!(d2 < 1e-3, "{d2}");
    assert!(d1 / d2 > 3.5, "{d1} {d2}");
}

#[test]
fn residual_split_and_far_field() {
    let s = setup();
    let p = params(128);
    let (lo, hi) = p.seed.support();
    for t in [0.0, 0.1, 0.2] {
        let f = assemble_mode(&p, &s.field, &s.path, &s.pair, t).unwrap();
        let r = f.residual();
        let scale = r.norm(0.0).max(1e-300);
        assert!(r.split_defect() < 1e-12 * scale.max(1.0));
        let edge = hi.max(f.layer.a + p.cutoff.outer);
        for (yy, b) in r.y.iter().zip(&r.bar) {
            if *yy > edge {
                assert_eq!(*b, Complex64::from(0.0), "y={yy}");
            }
        }
        assert!(lo > f.layer.a);
    }
}

/// `∂_t U + i k u_s U + V ∂_y u_s - ∂_y^2 U` by differences of the assembled mode.
fn residual_by_differences(mode: &Mode, heat: &HeatFlowField, t: f64, y: f64) -> Complex64 {
    let u_at = |tt: f64, yy: f64| {
        let st = mode.layer(tt).unwrap();
        mode.point(&st, yy, true).unwrap()
    };
    let d_t = |h: f64| (u_at(t + h, y).u[0] - u_at(t - h, y).u[0]) / (2.0 * h);
    let d_yy = |h: f64| (u_at(t, y + h).u[0] - u_at(t, y).u[0] * 2.0 + u_at(t, y - h).u[0]) / (h * h);
    let ut = (d_t(1e-4) * 4.0 - d_t(2e-4)) / 3.0;
    let uyy = (d_yy(1e-3) * 4.0 - d_yy(2e-3)) / 3.0;
    let p = u_at(t, y);
    let us = heat.flow.jet(t, y).unwrap();
    ut + I * mode.params.k() * us[0] * p.u[0] + p.v[0] * us[1] - uyy
}

#[test]
fn residual_matches_finite_differences() {
    let s = setup();
    let p = params(64);
    let mode = Mode::new(p, &s.pair, Background::Evolving(&s.path), Ansatz::Corrected).unwrap();
    let t = 0.1;
    let st = mode.layer(t).unwrap();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for y in [0.3, 0.9, st.a - 0.3, st.a - 0.05, st.a + 0.02, st.a + 0.4, 2.5, 3.3, 4.0, 6.0] {
        let fd = residual_by_differences(&mode, &s.field, t, y);
        let exact = mode.point(&st, y, true).unwrap();
        worst = worst.max((fd - exact.residual).norm());
        scale = scale.max(exact.u_t.norm());
    }
    assert!(worst < 1e-5 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn plain_ansatz_carries_the_profile_tail() {
    let s = setup();
    let prof = profile("algebraic-bump");
    let p = ModeParams::standard(64, prof.a0, prof.a0, true).unwrap();
    let norm = |ymax: f64, ansatz: Ansatz| {
        let y = uniform_grid(0.0, ymax, (ymax * 50.0) as usize + 1);
        let f = assemble_frozen(&p, &prof, &s.pair, &y, 0.0, ansatz).unwrap();
        f.u_norm_w2(1.0)
    };
    let (a, b) = (norm(20.0, Ansatz::Plain), norm(40.0, Ansatz::Plain));
    assert!(b / a > 1e6);
    let (c, d) = (norm(20.0, Ansatz::Corrected), norm(40.0, Ansatz::Corrected));
    assert!((c / d - 1.0).abs() < 0.01);
}
