//! Browser bindings: each operation takes plain arguments and returns a JSON string.
//!
//! The `*_json` functions are ordinary Rust and are what the native tests call;
//! the `#[wasm_bindgen]` wrappers only translate errors.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use prandtl_lab::eigen::{find_tau, scale_factor, DispersionProblem, Eigenpair};
use prandtl_lab::evolve::{frozen_spectrum, measure_growth, Shear, StepRule};
use prandtl_lab::modes::{corrector, CorrectorSeed};
use prandtl_lab::profiles::{critical_point_at, make_profile, HeatFlow, ShearProfile};
use prandtl_lab::quad::uniform_grid;
use prandtl_lab::{LabError, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const PLOT_POINTS: usize = 300;
const Y_MAX: f64 = 8.0;

fn thin<T: Copy>(v: &[T]) -> Vec<T> {
    let step = v.len().div_ceil(PLOT_POINTS).max(1);
    v.iter().step_by(step).copied().collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| LabError::Io(e.to_string()))
}

fn default_pair() -> Result<&'static Eigenpair> {
    static PAIR: OnceLock<Eigenpair> = OnceLock::new();
    if let Some(p) = PAIR.get() {
        return Ok(p);
    }
    let p = find_tau(&DispersionProblem::default())?;
    Ok(PAIR.get_or_init(|| p))
}

fn profile(family: &str, amp: f64) -> Result<ShearProfile> {
    let mut params = BTreeMap::new();
    params.insert("amp".to_string(), amp);
    make_profile(family, &params)
}

#[derive(Serialize)]
struct EigenView {
    tau: [f64; 2],
    residual_norm: f64,
    matching_residual: f64,
    /// `[V], [V'], [V'']` across `z = 0`.
    jumps: [[f64; 2]; 3],
    roots: Vec<[f64; 2]>,
    z: Vec<f64>,
    v_re: Vec<f64>,
    v_im: Vec<f64>,
}

/// Solve the shear-layer dispersion problem. `problem` is a JSON object whose
/// missing fields take their defaults (`"{}"` is the default problem).
pub fn eigen_json(problem: &str) -> Result<String> {
    let problem: DispersionProblem =
        serde_json::from_str(problem).map_err(|e| LabError::InvalidParameter(format!("problem: {e}")))?;
    let pair = find_tau(&problem)?;
    let c = |z: Complex64| [z.re, z.im];
    let v = pair.v_samples();
    let z = thin(&pair.z);
    let v = thin(&v);
    to_json(&EigenView {
        tau: c(pair.tau),
        residual_norm: pair.residual_norm,
        matching_residual: pair.matching_residual,
        jumps: pair.jumps().map(c),
        roots: pair.roots.iter().copied().map(c).collect(),
        v_re: v.iter().map(|x| x.re).collect(),
        v_im: v.iter().map(|x| x.im).collect(),
        z,
    })
}

#[derive(Serialize)]
struct ProfileView {
    a0: f64,
    curvature: f64,
    y: Vec<f64>,
    u_initial: Vec<f64>,
    u_final: Vec<f64>,
    /// Critical path `(t, a(t), lambda(t))` up to where it was followed.
    path: Vec<[f64; 3]>,
    /// Set when the path stopped before `t_final`.
    stopped: Option<String>,
    rate0: f64,
}

/// Initial profile, its heat evolution at `t_final` and the critical path on `[0, t_final]`.
pub fn profile_json(family: &str, amp: f64, t_final: f64, steps: usize) -> Result<String> {
    if !(t_final > 0.0) || steps == 0 {
        return Err(LabError::InvalidParameter("need t_final > 0 and steps >= 1".into()));
    }
    let prof = profile(family, amp)?;
    let flow = HeatFlow::new(prof);
    let y = uniform_grid(0.0, Y_MAX, PLOT_POINTS);
    let u_initial = y.iter().map(|&v| prof.jet(v)[0]).collect();
    let u_final = y.iter().map(|&v| flow.jet(t_final, v).map(|j| j[0])).collect::<Result<_>>()?;
    let mut path = vec![[0.0, prof.a0, prof.curvature]];
    let mut stopped = None;
    let mut a = prof.a0;
    for t in uniform_grid(0.0, t_final, steps).into_iter().skip(1) {
        let next = critical_point_at(&flow, t, a, 0.05).and_then(|a| {
            let lam = flow.jet(t, a)?[2];
            if lam < 0.0 {
                Ok((a, lam))
            } else {
                Err(LabError::CurvatureVanished { t })
            }
        });
        match next {
            Ok((na, lam)) => {
                a = na;
                path.push([t, na, lam]);
            }
            Err(e) => {
                stopped = Some(e.to_string());
                break;
            }
        }
    }
    let pair = default_pair()?;
    to_json(&ProfileView {
        a0: prof.a0,
        curvature: prof.curvature,
        y,
        u_initial,
        u_final,
        path,
        stopped,
        rate0: scale_factor(prof.curvature) * pair.tau.im.abs(),
    })
}

#[derive(Serialize)]
struct GrowthView {
    k: f64,
    /// `sqrt(k) |Im tau_phys(0)|`.
    predicted: f64,
    /// Real part of the rightmost frozen-coefficient eigenvalue.
    spectral: f64,
    measured: f64,
    t: Vec<f64>,
    log_norm: Vec<f64>,
}

/// Initial data for the frozen-shear evolution: `"mode"` is the mode's own
/// `eps v'` corrector, `"critical"` a bump centred on the critical point.
fn initial_data(init: &str, prof: &ShearProfile, k: f64, y: &[f64]) -> Result<Vec<Complex64>> {
    match init {
        "mode" => {
            let lo = prof.a0 + 1.5;
            let c = corrector(CorrectorSeed::Bump { lo, hi: lo + 1.0 }, y)?;
            Ok(c.iter().map(|j| Complex64::from(j[1] / k)).collect())
        }
        "critical" => Ok(y
            .iter()
            .map(|&v| Complex64::from(v * (-((v - prof.a0) / 0.3).powi(2)).exp()))
            .collect()),
        other => Err(LabError::InvalidParameter(format!("unknown initial data {other:?}"))),
    }
}

/// Evolve one Fourier mode in `x` on the frozen initial shear and compare the
/// fitted rate with the frozen spectrum and the layer prediction.
pub fn growth_json(family: &str, amp: f64, k: f64, t_final: f64, init: &str) -> Result<String> {
    if !(k > 0.0 && t_final > 0.0) {
        return Err(LabError::InvalidParameter("need k > 0 and t_final > 0".into()));
    }
    let prof = profile(family, amp)?;
    let pair = default_pair()?;
    let y = uniform_grid(0.0, Y_MAX, 800);
    let shear = Shear::frozen(&prof, &y);
    let run = measure_growth(&shear, initial_data(init, &prof, k, &y)?, k, t_final, &StepRule::default(), (0.5, 1.0))?;
    let spectral = frozen_spectrum(&prof, k, Y_MAX, 160)?.re;
    let tr = &run.trajectory;
    to_json(&GrowthView {
        k,
        predicted: k.sqrt() * scale_factor(prof.curvature) * pair.tau.im.abs(),
        spectral,
        measured: run.row.rate,
        t: thin(&tr.t),
        log_norm: thin(&tr.log_norm),
    })
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn solve_eigen(problem: &str) -> std::result::Result<String, JsError> {
    js(eigen_json(problem))
}

#[wasm_bindgen]
pub fn explore_profile(family: &str, amp: f64, t_final: f64, steps: usize) -> std::result::Result<String, JsError> {
    js(profile_json(family, amp, t_final, steps))
}

#[wasm_bindgen]
pub fn frozen_growth(family: &str, amp: f64, k: f64, t_final: f64, init: &str) -> std::result::Result<String, JsError> {
    js(growth_json(family, amp, k, t_final, init))
}
