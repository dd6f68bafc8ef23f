use std::collections::BTreeMap;

use num_complex::Complex64;
use prandtl_lab::evolve::{
    evolve, inviscid_exact, step, FourierModeState, Scheme, Shear, SolverConfig,
};
use prandtl_lab::norms::{tail_class, TailClass};
use prandtl_lab::profiles::{make_profile, ShearProfile};
use prandtl_lab::quad::uniform_grid;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn profile(name: &str, amp: f64) -> ShearProfile {
    let mut p = BTreeMap::new();
    p.insert("amp".to_string(), amp);
    make_profile(name, &p).unwrap()
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn heat_error(ny: usize, dt: f64) -> f64 {
    let y = uniform_grid(0.0, 10.0, ny);
    let u0: Vec<Complex64> = y.iter().map(|y| c(y * (-y * y).exp(), 0.0)).collect();
    let shear = Shear::constant(0.0, &y);
    let state = FourierModeState::new(0.0, 0.0, &y, u0).unwrap();
    let cfg = SolverConfig { dt, scheme: Scheme::ImexCn, c_cfl: 0.5 };
    let t = 0.5;
    let out = evolve(&state, &shear, &cfg, t, false).unwrap().final_state.physical();
    let s = 1.0 + 4.0 * t;
    let exact: Vec<Complex64> = y.iter().map(|y| c(y * s.powf(-1.5) * (-y * y / s).exp(), 0.0)).collect();
    sup_diff(&out, &exact)
}

#[test]
fn zero_wavenumber_is_the_heat_equation() {
    let e1 = heat_error(201, 0.02);
    let e2 = heat_error(401, 0.01);
    let e3 = heat_error(801, 0.005);
    assert!(e3 < 1e-5, "{e3}");
    let (p1, p2) = ((e1 / e2).log2(), (e2 / e3).log2());
    assert!(p1 > 1.8 && p2 > 1.8, "orders {p1} {p2}");
}

#[test]
fn zero_data_stays_zero() {
    let y = uniform_grid(0.0, 8.0, 200);
    let shear = Shear::frozen(&profile("gaussian-bump", 3.0), &y);
    let state = FourierModeState::new(16.0, 0.0, &y, vec![c(0.0, 0.0); y.len()]).unwrap();
    let cfg = SolverConfig { dt: 1e-3, scheme: Scheme::ImexCn, c_cfl: 0.5 };
    let out = evolve(&state, &shear, &cfg, 0.1, false).unwrap();
    assert!(out.final_state.physical().iter().all(|v| *v == c(0.0, 0.0)));
}

fn smooth_data(y: f64) -> Complex64 {
    c(y * y * (-y * y).exp(), 0.5 * y * (-(y - 1.0).powi(2)).exp())
}

fn inviscid_error(ny: usize, dt: f64, prof: &ShearProfile, k: f64, t: f64) -> f64 {
    let y = uniform_grid(0.0, 8.0, ny);
    let shear = Shear::frozen(prof, &y);
    let u0: Vec<Complex64> = y.iter().map(|&y| smooth_data(y)).collect();
    let state = FourierModeState::new(k, 0.0, &y, u0).unwrap();
    let cfg = SolverConfig { dt, scheme: Scheme::Inviscid, c_cfl: 0.5 };
    let num = evolve(&state, &shear, &cfg, t, false).unwrap().final_state;
    let jet = |z: f64| {
        let j = prof.jet(z);
        [j[0], j[1]]
    };
    let exact = inviscid_exact(smooth_data, jet, &y, k, t).unwrap();
    sup_diff(&num.physical(), &exact.u_hat)
}

#[test]
fn inviscid_solver_converges_to_the_closed_form() {
    let prof = profile("gaussian-bump", 3.0);
    let (k, t) = (4.0, 0.5);
    let e1 = inviscid_error(201, 4e-3, &prof, k, t);
    let e2 = inviscid_error(401, 2e-3, &prof, k, t);
    let e3 = inviscid_error(801, 1e-3, &prof, k, t);
    let (p1, p2) = ((e1 / e2).log2(), (e2 / e3).log2());
    assert!(p1 >= 1.9 && p2 >= 1.9, "errors {e1:e} {e2:e} {e3:e}, orders {p1} {p2}");
}

#[test]
fn closed_form_constant_shear_is_a_phase() {
    let y = uniform_grid(0.0, 6.0, 300);
    let (k, t, speed) = (7.0, 0.8, 1.3);
    let exact = inviscid_exact(smooth_data, |_| [speed, 0.0], &y, k, t).unwrap();
    for (yy, u) in y.iter().zip(&exact.u_hat) {
        let want = (c(0.0, -k * speed * t)).exp() * smooth_data(*yy);
        assert!((u - want).norm() < 1e-10);
    }
    let id = inviscid_exact(smooth_data, |_| [speed, 0.0], &y, k, 0.0).unwrap();
    for (yy, u) in y.iter().zip(&id.u_hat) {
        assert!((u - smooth_data(*yy)).norm() < 1e-15);
    }
}

#[test]
fn evolution_is_linear() {
    let prof = profile("algebraic-bump", 3.0);
    let y = uniform_grid(0.0, 8.0, 400);
    let shear = Shear::frozen(&prof, &y);
    let f: Vec<Complex64> = y.iter().map(|&y| smooth_data(y)).collect();
    let g: Vec<Complex64> = y.iter().map(|&y| c(0.0, y * (-(y - 2.0).powi(2)).exp())).collect();
    let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
    let mix: Vec<Complex64> = f.iter().zip(&g).map(|(f, g)| a * f + b * g).collect();
    let cfg = SolverConfig { dt: 2e-4, scheme: Scheme::ImexCn, c_cfl: 0.5 };
    let run = |u: Vec<Complex64>| {
        let s = FourierModeState::new(32.0, 0.0, &y, u).unwrap();
        evolve(&s, &shear, &cfg, 0.05, false).unwrap().final_state.physical()
    };
    let (uf, ug, um) = (run(f), run(g), run(mix));
    let comb: Vec<Complex64> = uf.iter().zip(&ug).map(|(f, g)| a * f + b * g).collect();
    let scale = um.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(sup_diff(&um, &comb) < 1e-12 * scale);
}

#[test]
fn renormalized_and_raw_runs_agree() {
    let prof = profile("gaussian-bump", 3.0);
    let y = uniform_grid(0.0, 8.0, 400);
    let shear = Shear::frozen(&prof, &y);
    let u0: Vec<Complex64> = y.iter().map(|&y| smooth_data(y)).collect();
    let state = FourierModeState::new(24.0, 0.0, &y, u0).unwrap();
    let cfg = SolverConfig { dt: 5e-4, scheme: Scheme::ImexCn, c_cfl: 0.5 };
    let raw = evolve(&state, &shear, &cfg, 0.2, false).unwrap();
    let ren = evolve(&state, &shear, &cfg, 0.2, true).unwrap();
    for (a, b) in raw.log_norm.iter().zip(&ren.log_norm) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(sup_diff(&raw.final_state.physical(), &ren.final_state.physical()) < 1e-10);
}

#[test]
fn single_step_keeps_no_slip_and_divergence() {
    let prof = profile("gaussian-bump", 3.0);
    let y = uniform_grid(0.0, 8.0, 400);
    let shear = Shear::frozen(&prof, &y);
    let u0: Vec<Complex64> = y.iter().map(|&y| smooth_data(y)).collect();
    let state = FourierModeState::new(10.0, 0.0, &y, u0).unwrap();
    let cfg = SolverConfig { dt: 1e-3, scheme: Scheme::ImexCn, c_cfl: 0.5 };
    let next = step(&state, &shear, &cfg).unwrap();
    assert_eq!(next.u_hat[0], c(0.0, 0.0));
    assert_eq!(next.v_hat[0], c(0.0, 0.0));
    let dy = next.dy;
    for j in 1..y.len() {
        let dv = (next.v_hat[j] - next.v_hat[j - 1]) / dy;
        let mean = (next.u_hat[j] + next.u_hat[j - 1]) * 0.5;
        assert!((dv + c(0.0, 10.0) * mean).norm() < 1e-12);
    }
}

#[test]
fn gaussian_data_inherits_the_algebraic_tail() {
    let prof = profile("algebraic-bump", 3.0);
    let y = uniform_grid(0.0, 60.0, 6000);
    let gauss = |z: f64| c(z * (-z * z).exp(), 0.0);
    let jet = |z: f64| {
        let j = prof.jet(z);
        [j[0], j[1]]
    };
    let sol = inviscid_exact(gauss, jet, &y, 4.0, 0.5).unwrap();
    let du: Vec<f64> = y.iter().map(|&z| prof.jet(z)[1]).collect();
    let want = tail_class(&y, &du).unwrap();
    let got = tail_class(&y, &sol.u_hat).unwrap();
    match (want, got) {
        (TailClass::Algebraic { power: p }, TailClass::Algebraic { power: q }) => {
            assert!((p - q).abs() < 0.2, "{p} vs {q}");
        }
        other => panic!("unexpected classes {other:?}"),
    }
    // ratio to U' is asymptotically constant on the far half-grid
    let half = y.len() / 2;
    let ratios: Vec<f64> = (half..y.len()).map(|i| sol.u_hat[i].norm() / du[i].abs()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    assert!(lo > 0.0 && hi / lo < 1.01);
}
