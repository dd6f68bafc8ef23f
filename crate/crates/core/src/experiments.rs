//! Canned experiments. Each returns a serializable report carrying its own checks.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridConfig, ProfileSpec, RunConfig};
use crate::eigen::{collocation_eigenvalues, find_tau, scale_eigendata, DispersionProblem, Eigenpair, ScaledEigendata};
use crate::error::{LabError, Result};
use crate::evolve::{
    evolve, frozen_spectrum, inviscid_exact, measure_growth, operator_growth_probe, FourierModeState, ProbeRow,
    ProbeSetting, Scheme, Shear, SolverConfig, Trajectory,
};
use crate::modes::{assemble_frozen, assemble_mode, Ansatz, Background, Cutoff, CorrectorSeed, Mode, ModeParams};
use crate::norms::{tail_class, weighted_sup, GrowthReport, GrowthRow, TailClass};
use crate::profiles::{critical_point_at, solve_heat, track_critical_point, CriticalPath, HeatFlow, HeatFlowField, Jet, ShearProfile};
use crate::quad::uniform_grid;

/// Thresholds used by the checks below.
pub const TOL_ODE: f64 = 1e-8;
pub const TOL_JUMP: f64 = 1e-8;
pub const TOL_COLLOCATION: f64 = 1e-4;
pub const TOL_DRIFT: f64 = 1e-6;
pub const TOL_SELF_SIMILAR: f64 = 1e-8;
pub const TOL_PDE: f64 = 1e-6;
pub const TOL_PATH: f64 = 1e-8;
pub const MIN_INVISCID_ORDER: f64 = 1.9;
pub const TOL_CONSTANT_SHEAR: f64 = 1e-10;
pub const TOL_INITIAL_RATIO: f64 = 1e-12;
pub const TOL_DIVERGENCE: f64 = 1e-3;
pub const MIN_DIVERGENCE_RATIO: f64 = 3.5;
pub const TOL_SPLIT: f64 = 1e-10;
pub const TOL_TAIL_POWER: f64 = 0.2;

/// Every threshold of a run, for the manifest.
pub fn tolerances(cfg: &RunConfig) -> Vec<(String, f64)> {
    let mut v: Vec<(&str, f64)> = vec![
        ("ode_residual", TOL_ODE),
        ("jump", TOL_JUMP),
        ("collocation_gap", TOL_COLLOCATION),
        ("refinement_drift", TOL_DRIFT),
        ("self_similar", TOL_SELF_SIMILAR),
        ("heat_residual", TOL_PDE),
        ("path_rootfind", TOL_PATH),
        ("inviscid_order_min", MIN_INVISCID_ORDER),
        ("constant_shear", TOL_CONSTANT_SHEAR),
        ("initial_ratio", TOL_INITIAL_RATIO),
        ("divergence_relative", TOL_DIVERGENCE),
        ("divergence_halving_ratio_min", MIN_DIVERGENCE_RATIO),
        ("residual_split", TOL_SPLIT),
        ("tail_power", TOL_TAIL_POWER),
    ];
    v.extend([
        ("plateau", cfg.mode.plateau_tol),
        ("growth_exponent_lo", cfg.growth.exponent_band.0),
        ("growth_exponent_hi", cfg.growth.exponent_band.1),
        ("growth_rate", cfg.growth.rate_tol),
        ("probe", cfg.probe.tol),
    ]);
    v.into_iter().map(|(k, x)| (k.to_string(), x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.to_string(), pass, detail }
}

fn tagged(family: &str, checks: Vec<Check>) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{} ({family})", c.name);
            c
        })
        .collect()
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Profile, heat flow, critical path and scaled eigendata for one shear layer.
pub struct Pipeline {
    pub spec: ProfileSpec,
    pub profile: ShearProfile,
    pub field: HeatFlowField,
    pub path: CriticalPath,
    pub scaled: ScaledEigendata,
}

impl Pipeline {
    pub fn build(spec: &ProfileSpec, grid: &GridConfig, pair: &Eigenpair) -> Result<Self> {
        let profile = spec.build()?;
        let y = uniform_grid(0.0, grid.y_max, grid.ny - 1);
        let t = uniform_grid(0.0, grid.t0, grid.nt - 1);
        let field = solve_heat(&profile, &y, &t)?;
        let path = track_critical_point(&field, profile.a0, grid.curvature_floor)?;
        let scaled = scale_eigendata(pair, &path);
        Ok(Self { spec: spec.clone(), profile, field, path, scaled })
    }

    pub fn family(&self) -> &str {
        &self.spec.family
    }

    /// `|Im tau_phys(0)|`.
    pub fn rate0(&self) -> f64 {
        -self.scaled.tau_phys[0].im
    }

    pub fn sigma0(&self, factor: f64) -> f64 {
        factor * self.scaled.max_growth()
    }

    pub fn mode_params(&self, cfg: &RunConfig, n: u32) -> Result<ModeParams> {
        let d = self.path.min_a().min(1.0);
        let cutoff = Cutoff::new(cfg.mode.cutoff.0 * d, cfg.mode.cutoff.1 * d)?;
        let seed = cfg.mode.seed.unwrap_or_else(|| {
            let lo = self.profile.a0 + cutoff.outer + 0.5;
            CorrectorSeed::Bump { lo, hi: lo + 1.0 }
        });
        ModeParams::new(n, cutoff, seed, false)
    }

    /// Background jets on the field grid at time `t`.
    fn jets(&self, t: f64) -> Result<Vec<Jet>> {
        let flow = &self.field.flow;
        self.field.y.iter().map(|&y| flow.jet(t, y)).collect()
    }
}

/// Build one pipeline per configured profile.
pub fn pipelines(cfg: &RunConfig, pair: &Eigenpair) -> Result<Vec<Pipeline>> {
    cfg.profiles.iter().map(|s| Pipeline::build(s, &cfg.grid, pair)).collect()
}

// ---------------------------------------------------------------- eigen

#[derive(Debug, Clone, Serialize)]
pub struct Refinement {
    pub label: String,
    pub tau: Complex64,
    pub drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub tau: Complex64,
    pub residual_norm: f64,
    pub matching_residual: f64,
    /// `|[V] + tau|`, `|[V']|`, `|[V''] - 2|`.
    pub jump_errors: [f64; 3],
    pub roots: Vec<Complex64>,
    pub collocation_tau: Option<Complex64>,
    pub collocation_gap: f64,
    pub refinement: Vec<Refinement>,
    pub tail_decay_rate: f64,
    pub checks: Vec<Check>,
}

pub const COLLOCATION_NODES: usize = 120;
pub const COLLOCATION_HALF_WIDTH: f64 = 8.0;

pub fn run_eigen(problem: &DispersionProblem) -> Result<(Eigenpair, EigenReport)> {
    let pair = find_tau(problem)?;
    let j = pair.jumps();
    let curvature_jump = -2.0 * problem.sign;
    let jump_errors = [(j[0] + pair.tau).norm(), j[1].norm(), (j[2] - curvature_jump).norm()];

    let coll = collocation_eigenvalues(problem.sign, COLLOCATION_HALF_WIDTH, COLLOCATION_NODES);
    let collocation_tau = coll
        .iter()
        .copied()
        .filter(|e| e.im < 0.0)
        .min_by(|a, b| (a - pair.tau).norm().total_cmp(&(b - pair.tau).norm()));
    let collocation_gap = collocation_tau.map_or(f64::INFINITY, |c| (c - pair.tau).norm());

    let variants = [
        ("step/2", DispersionProblem { step: 0.5 * problem.step, ..*problem }),
        ("z_max/2", DispersionProblem { z_max: 0.5 * problem.z_max, ..*problem }),
    ];
    let refinement: Vec<Refinement> = variants
        .par_iter()
        .map(|(label, p)| {
            let tau = find_tau(p)?.tau;
            Ok(Refinement { label: label.to_string(), tau, drift: (tau - pair.tau).norm() })
        })
        .collect::<Result<_>>()?;
    let drift = refinement.iter().map(|r| r.drift).fold(0.0, f64::max);

    let checks = vec![
        check("eigenvalue in lower half-plane", pair.tau.im < 0.0, format!("tau = {:.12}", pair.tau)),
        check(
            "ODE residual < 1e-8",
            pair.residual_norm < TOL_ODE,
            format!("{:.3e}", pair.residual_norm),
        ),
        check(
            "jump identities to 1e-8",
            jump_errors.iter().all(|e| *e < TOL_JUMP),
            format!("[V]+tau {:.2e}, [V'] {:.2e}, [V'']-2 {:.2e}", jump_errors[0], jump_errors[1], jump_errors[2]),
        ),
        check(
            "collocation oracle agrees to 1e-4",
            collocation_gap < TOL_COLLOCATION,
            format!("gap {collocation_gap:.3e}"),
        ),
        check("refinement drift < 1e-6", drift < TOL_DRIFT, format!("{drift:.3e}")),
    ];
    let report = EigenReport {
        tau: pair.tau,
        residual_norm: pair.residual_norm,
        matching_residual: pair.matching_residual,
        jump_errors,
        roots: pair.roots.clone(),
        collocation_tau,
        collocation_gap,
        refinement,
        tail_decay_rate: pair.tail_decay_rate(),
        checks,
    };
    Ok((pair, report))
}

/// Flat JSON layout of an eigenpair.
#[derive(Debug, Clone, Serialize)]
pub struct EigenExport {
    pub tau_re: f64,
    pub tau_im: f64,
    pub residual_norm: f64,
    pub z_grid: Vec<f64>,
    #[serde(rename = "W_re")]
    pub w_re: Vec<f64>,
    #[serde(rename = "W_im")]
    pub w_im: Vec<f64>,
    #[serde(rename = "V_re")]
    pub v_re: Vec<f64>,
    #[serde(rename = "V_im")]
    pub v_im: Vec<f64>,
}

impl EigenExport {
    pub fn new(pair: &Eigenpair) -> Self {
        let v = pair.v_samples();
        Self {
            tau_re: pair.tau.re,
            tau_im: pair.tau.im,
            residual_norm: pair.residual_norm,
            z_grid: pair.z.clone(),
            w_re: pair.w.iter().map(|w| w[0].re).collect(),
            w_im: pair.w.iter().map(|w| w[0].im).collect(),
            v_re: v.iter().map(|c| c.re).collect(),
            v_im: v.iter().map(|c| c.im).collect(),
        }
    }
}

/// CSV rows `z, W, V` (real and imaginary parts).
pub fn eigen_csv(pair: &Eigenpair) -> String {
    let mut s = String::from("z,W_re,W_im,V_re,V_im\n");
    let v = pair.v_samples();
    for ((z, w), v) in pair.z.iter().zip(&pair.w).zip(&v) {
        s.push_str(&format!("{z:.6},{:.12e},{:.12e},{:.12e},{:.12e}\n", w[0].re, w[0].im, v.re, v.im));
    }
    s
}

// ---------------------------------------------------------------- heat

#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub t: f64,
    pub a: f64,
    pub a_dot: f64,
    pub lambda: f64,
    pub growth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatReport {
    pub family: String,
    pub a0: f64,
    pub lambda0: f64,
    pub horizon: f64,
    pub heat_residual: f64,
    pub self_similar_error: f64,
    pub rootfind_gap: f64,
    pub path: Vec<PathRow>,
    pub checks: Vec<Check>,
}

/// Kernel quadrature applied to `erf(y/2)` against the closed form `erf(y / (2 sqrt(1+t)))`.
pub fn self_similar_error(flow: &HeatFlow) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in [0.01, 0.05, 0.1, 0.25, 1.0] {
        for y in uniform_grid(0.0, 12.0, 97) {
            let got = flow.evolve_odd(|z| libm::erf(0.5 * z), t, y)?;
            let want = libm::erf(y / (2.0 * (1.0 + t as f64).sqrt()));
            worst = worst.max((got[0] - want).abs());
        }
    }
    Ok(worst)
}

pub fn run_heat(p: &Pipeline) -> Result<HeatReport> {
    let heat_residual = p.field.heat_residual()?;
    let self_similar = self_similar_error(&p.field.flow)?;
    let gaps: Vec<f64> = p
        .path
        .points
        .par_iter()
        .map(|q| critical_point_at(&p.field.flow, q.t, q.a, 0.05).map(|r| (r - q.a).abs()))
        .collect::<Result<_>>()?;
    let rootfind_gap = gaps.iter().copied().fold(0.0, f64::max);
    let path = p
        .path
        .points
        .iter()
        .zip(&p.scaled.tau_phys)
        .map(|(q, tp)| PathRow { t: q.t, a: q.a, a_dot: q.a_dot, lambda: q.lambda, growth: -tp.im })
        .collect();
    let checks = vec![
        check(
            "erf self-similar case to 1e-8",
            self_similar <= TOL_SELF_SIMILAR,
            format!("{self_similar:.3e}"),
        ),
        check("heat residual < 1e-6", heat_residual < TOL_PDE, format!("{heat_residual:.3e}")),
        check(
            "a(t) vs per-slice root-find < 1e-8",
            rootfind_gap < TOL_PATH,
            format!("{rootfind_gap:.3e} over [0, {}]", p.path.horizon),
        ),
    ];
    let checks = tagged(p.family(), checks);
    Ok(HeatReport {
        family: p.family().to_string(),
        a0: p.profile.a0,
        lambda0: p.profile.curvature,
        horizon: p.path.horizon,
        heat_residual,
        self_similar_error: self_similar,
        rootfind_gap,
        path,
        checks,
    })
}

// ---------------------------------------------------------------- inviscid oracle

#[derive(Debug, Clone, Serialize)]
pub struct InviscidReport {
    pub family: String,
    pub k: f64,
    pub t: f64,
    /// `(grid intervals, dt, sup error against the closed form)`.
    pub errors: Vec<(usize, f64, f64)>,
    pub orders: Vec<f64>,
    pub constant_shear_error: f64,
    pub checks: Vec<Check>,
}

fn oracle_data(y: f64) -> Complex64 {
    Complex64::new(y * y * (-y * y).exp(), 0.5 * y * (-(y - 1.0).powi(2)).exp())
}

/// Diffusion-off solver against the closed-form inviscid solution under grid and step refinement.
pub fn run_inviscid(profile: &ShearProfile, family: &str) -> Result<InviscidReport> {
    let (k, t, y_max) = (4.0, 0.5, 8.0);
    let jet = |z: f64| {
        let j = profile.jet(z);
        [j[0], j[1]]
    };
    let levels = [(200usize, 4e-3), (400, 2e-3), (800, 1e-3)];
    let errors: Vec<(usize, f64, f64)> = levels
        .par_iter()
        .map(|&(ny, dt)| {
            let y = uniform_grid(0.0, y_max, ny);
            let shear = Shear::frozen(profile, &y);
            let u0 = y.iter().map(|&z| oracle_data(z)).collect();
            let state = FourierModeState::new(k, 0.0, &y, u0)?;
            let cfg = SolverConfig { dt, scheme: Scheme::Inviscid, c_cfl: 0.5 };
            let num = evolve(&state, &shear, &cfg, t, false)?.final_state.physical();
            let exact = inviscid_exact(oracle_data, jet, &y, k, t)?;
            let e = num.iter().zip(&exact.u_hat).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok((ny, dt, e))
        })
        .collect::<Result<_>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0].2 / w[1].2).log2()).collect();

    let (speed, kc, tc) = (1.3, 7.0, 0.8);
    let y = uniform_grid(0.0, 6.0, 300);
    let exact = inviscid_exact(oracle_data, |_| [speed, 0.0], &y, kc, tc)?;
    let constant_shear_error = y
        .iter()
        .zip(&exact.u_hat)
        .map(|(&z, u)| (u - Complex64::new(0.0, -kc * speed * tc).exp() * oracle_data(z)).norm())
        .fold(0.0, f64::max);
    let worst_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![
        check(
            "diffusion-off order >= 1.9 over two refinements",
            worst_order >= MIN_INVISCID_ORDER,
            format!(
                "errors {:?}, orders {:?}",
                errors.iter().map(|e| format!("{:.3e}", e.2)).collect::<Vec<_>>(),
                orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
            ),
        ),
        check(
            "constant-shear closed form to 1e-10",
            constant_shear_error < TOL_CONSTANT_SHEAR,
            format!("{constant_shear_error:.2e}"),
        ),
    ];
    Ok(InviscidReport { family: family.to_string(), k, t, errors, orders, constant_shear_error, checks })
}

// ---------------------------------------------------------------- mode

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub n: u32,
    pub t: f64,
    /// `‖U‖_{W_0^{2,∞}}`.
    pub norm_w2: f64,
    /// Largest jump of `V, V_y, V_yy` at `a(t)`.
    pub jump: f64,
    /// Divergence defect relative to `k sup|U|`.
    pub divergence: f64,
    pub split_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialRow {
    pub alpha: f64,
    /// `(n, ‖U(0)‖_{W_alpha^{2,∞}} / eps)`.
    pub ratios: Vec<(u32, f64)>,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub family: String,
    pub sigma0: f64,
    /// `sup ‖U‖_{W_0^{2,∞}} e^{-sigma0 t / sqrt(eps)}` over the sweep.
    pub c0: f64,
    pub initial: Vec<InitialRow>,
    pub rows: Vec<ModeRow>,
    /// Ratio of divergence defects under grid halving.
    pub divergence_refinement: f64,
    pub checks: Vec<Check>,
}

fn relative_spread(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn sample_times(cfg: &RunConfig, p: &Pipeline) -> Vec<f64> {
    uniform_grid(0.0, p.path.horizon.min(cfg.grid.t0), cfg.mode.t_samples - 1)
}

pub fn run_mode(cfg: &RunConfig, p: &Pipeline, pair: &Eigenpair) -> Result<(ModeReport, Vec<(u32, String)>)> {
    let times = sample_times(cfg, p);
    let sigma0 = p.sigma0(cfg.mode.sigma0_factor);
    let y = &p.field.y;
    let jets: Vec<Vec<Jet>> = times.par_iter().map(|&t| p.jets(t)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut initial_norms: Vec<Vec<(u32, f64)>> = vec![Vec::new(); cfg.mode.alphas.len()];
    let mut csvs = Vec::new();
    for &n in &cfg.mode.n {
        let params = p.mode_params(cfg, n)?;
        let mode = Mode::new(params, pair, Background::Evolving(&p.path), Ansatz::Corrected)?;
        let per_t: Vec<(ModeRow, Option<String>, Vec<f64>)> = times
            .par_iter()
            .zip(&jets)
            .map(|(&t, j)| {
                let f = mode.field_from_jets(y, t, j)?;
                let jump = mode.jump_at_critical(t)?.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let scale = params.k() * weighted_sup(y, &f.u(), 0.0);
                let init = if t == 0.0 {
                    cfg.mode.alphas.iter().map(|&a| f.u_norm_w2(a) / params.eps()).collect()
                } else {
                    Vec::new()
                };
                let row = ModeRow {
                    n,
                    t,
                    norm_w2: f.u_norm_w2(0.0),
                    jump,
                    divergence: if scale > 0.0 { f.divergence_defect() / scale } else { 0.0 },
                    split_defect: f.residual().split_defect(),
                };
                let csv = (t == *times.last().unwrap()).then(|| f.to_csv());
                Ok((row, csv, init))
            })
            .collect::<Result<_>>()?;
        for (row, csv, init) in per_t {
            for (i, v) in init.into_iter().enumerate() {
                initial_norms[i].push((n, v));
            }
            if let Some(c) = csv {
                csvs.push((n, c));
            }
            rows.push(row);
        }
    }
    let initial: Vec<InitialRow> = cfg
        .mode
        .alphas
        .iter()
        .zip(initial_norms)
        .map(|(&alpha, ratios)| {
            let vals: Vec<f64> = ratios.iter().map(|r| r.1).collect();
            InitialRow { alpha, spread: relative_spread(&vals), ratios }
        })
        .collect();
    let c0 = rows
        .iter()
        .map(|r| r.norm_w2 * (-sigma0 * r.t * (r.n as f64).sqrt()).exp())
        .fold(0.0, f64::max);

    // grid halving at the middle of the sweep
    let n_mid = cfg.mode.n[0];
    let t_mid = times[times.len() / 2];
    let mode = Mode::new(p.mode_params(cfg, n_mid)?, pair, Background::Evolving(&p.path), Ansatz::Corrected)?;
    let defect = |intervals: usize| -> Result<f64> {
        let yy = uniform_grid(0.0, cfg.grid.y_max, intervals);
        let f = mode.field(&yy, t_mid)?;
        Ok(f.divergence_defect() / (n_mid as f64 * weighted_sup(&yy, &f.u(), 0.0)))
    };
    let (d1, d2) = (defect(cfg.grid.ny - 1)?, defect(2 * (cfg.grid.ny - 1))?);
    let divergence_refinement = d1 / d2;

    let worst_jump = rows.iter().map(|r| r.jump).fold(0.0, f64::max);
    let worst_div = rows.iter().map(|r| r.divergence).fold(0.0, f64::max);
    let worst_split = rows.iter().map(|r| r.split_defect).fold(0.0, f64::max);
    let worst_initial = initial.iter().map(|r| r.spread).fold(0.0, f64::max);
    let checks = vec![
        check(
            "initial norm / eps constant to 1e-12",
            worst_initial < TOL_INITIAL_RATIO,
            format!("max relative spread {worst_initial:.2e}"),
        ),
        check("jump cancellation at a(t) to 1e-8", worst_jump < TOL_JUMP, format!("{worst_jump:.2e}")),
        check(
            "divergence identity to discretization tolerance",
            worst_div < TOL_DIVERGENCE && divergence_refinement > MIN_DIVERGENCE_RATIO,
            format!("max relative defect {worst_div:.2e}, halving ratio {divergence_refinement:.2}"),
        ),
        check("residual split identity", worst_split < TOL_SPLIT, format!("{worst_split:.2e}")),
    ];
    let checks = tagged(p.family(), checks);
    Ok((
        ModeReport {
            family: p.family().to_string(),
            sigma0,
            c0,
            initial,
            rows,
            divergence_refinement,
            checks,
        },
        csvs,
    ))
}

// ---------------------------------------------------------------- residual scan

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub n: u32,
    pub alpha: f64,
    /// `sup_t ‖R(t)‖_{W_alpha^{0,∞}} e^{-sigma0 t / sqrt(eps)}`.
    pub sup: f64,
    pub t_at_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Plateau {
    pub alpha: f64,
    pub mean: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualScan {
    pub family: String,
    pub sigma0: f64,
    pub c1: f64,
    pub rows: Vec<ResidualRow>,
    pub plateau: Vec<Plateau>,
    pub checks: Vec<Check>,
}

pub fn run_residual_scan(cfg: &RunConfig, p: &Pipeline, pair: &Eigenpair) -> Result<ResidualScan> {
    let times = sample_times(cfg, p);
    let sigma0 = p.sigma0(cfg.mode.sigma0_factor);
    let y = &p.field.y;
    let alphas = &cfg.mode.alphas;
    let jets: Vec<Vec<Jet>> = times.par_iter().map(|&t| p.jets(t)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n in &cfg.mode.n {
        let params = p.mode_params(cfg, n)?;
        let mode = Mode::new(params, pair, Background::Evolving(&p.path), Ansatz::Corrected)?;
        let damp = |t: f64| (-sigma0 * t * params.k().sqrt()).exp();
        let norms: Vec<Vec<f64>> = times
            .par_iter()
            .zip(&jets)
            .map(|(&t, j)| {
                let r = mode.field_from_jets(y, t, j)?.residual();
                Ok(alphas.iter().map(|&a| r.norm(a) * damp(t)).collect())
            })
            .collect::<Result<_>>()?;
        for (ia, &alpha) in alphas.iter().enumerate() {
            let (it, sup) = norms
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v[ia]))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            rows.push(ResidualRow { n, alpha, sup, t_at_sup: times[it] });
        }
    }
    let plateau: Vec<Plateau> = alphas
        .iter()
        .map(|&alpha| {
            let v: Vec<f64> = rows.iter().filter(|r| r.alpha == alpha).map(|r| r.sup).collect();
            Plateau { alpha, mean: v.iter().sum::<f64>() / v.len() as f64, spread: relative_spread(&v) }
        })
        .collect();
    let c1 = rows.iter().map(|r| r.sup).fold(0.0, f64::max);
    let tol = cfg.mode.plateau_tol;
    let checks: Vec<Check> = plateau
        .iter()
        .map(|pl| {
            check(
                &format!("residual plateau within ±{:.0}% (alpha = {})", 100.0 * tol, pl.alpha),
                pl.spread < tol,
                format!("mean {:.4e}, max deviation {:.1}%", pl.mean, 100.0 * pl.spread),
            )
        })
        .collect();
    let checks = tagged(p.family(), checks);
    Ok(ResidualScan { family: p.family().to_string(), sigma0, c1, rows, plateau, checks })
}

// ---------------------------------------------------------------- decay obstruction

#[derive(Debug, Clone, Serialize)]
pub struct Obstruction {
    pub family: String,
    pub k: f64,
    pub t: f64,
    pub profile_tail: TailClass,
    pub solution_tail: TailClass,
    /// `(y_max, ‖U_old(0)‖_{W_1^{2,∞}})`.
    pub old_norms: Vec<(f64, f64)>,
    /// `(alpha, [(y_max, ‖U_new(0)‖_{W_alpha^{2,∞}})])`.
    pub new_norms: Vec<(f64, Vec<(f64, f64)>)>,
    pub checks: Vec<Check>,
}

pub const OBSTRUCTION_HEIGHTS: [f64; 3] = [20.0, 40.0, 80.0];

pub fn run_obstruction(cfg: &RunConfig, pair: &Eigenpair) -> Result<Obstruction> {
    let spec = cfg
        .profiles
        .iter()
        .find(|s| s.family == "algebraic-bump")
        .cloned()
        .unwrap_or_else(|| ProfileSpec::new("algebraic-bump", 5.0));
    let prof = spec.build()?;
    let (k, t) = (8.0, 0.5);
    let y = uniform_grid(0.0, 60.0, 6000);
    let gauss = |z: f64| Complex64::new(z * (-z * z).exp(), 0.0);
    let jet = |z: f64| {
        let j = prof.jet(z);
        [j[0], j[1]]
    };
    let sol = inviscid_exact(gauss, jet, &y, k, t)?;
    let du: Vec<f64> = y.iter().map(|&z| prof.jet(z)[1]).collect();
    let profile_tail = tail_class(&y, &du)?;
    let solution_tail = tail_class(&y, &sol.u_hat)?;

    let params = {
        let d = prof.a0.min(1.0);
        let cutoff = Cutoff::new(cfg.mode.cutoff.0 * d, cfg.mode.cutoff.1 * d)?;
        let lo = prof.a0 + cutoff.outer + 0.5;
        ModeParams::new(cfg.mode.n[0], cutoff, CorrectorSeed::Bump { lo, hi: lo + 1.0 }, true)?
    };
    let norm_at = |h: f64, ansatz: Ansatz, alpha: f64| -> Result<f64> {
        let yy = uniform_grid(0.0, h, (h * 50.0) as usize + 1);
        Ok(assemble_frozen(&params, &prof, pair, &yy, 0.0, ansatz)?.u_norm_w2(alpha))
    };
    let old_norms: Vec<(f64, f64)> = OBSTRUCTION_HEIGHTS
        .iter()
        .map(|&h| Ok((h, norm_at(h, Ansatz::Plain, 1.0)?)))
        .collect::<Result<_>>()?;
    let new_norms: Vec<(f64, Vec<(f64, f64)>)> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&a| {
            let v = OBSTRUCTION_HEIGHTS
                .iter()
                .map(|&h| Ok((h, norm_at(h, Ansatz::Corrected, a)?)))
                .collect::<Result<_>>()?;
            Ok((a, v))
        })
        .collect::<Result<_>>()?;

    let tail_ok = match (profile_tail, solution_tail) {
        (TailClass::Algebraic { power: p }, TailClass::Algebraic { power: q }) => (p - q).abs() <= TOL_TAIL_POWER,
        _ => false,
    };
    let old_div = old_norms.windows(2).all(|w| w[1].1 > 1e3 * w[0].1);
    let new_finite = new_norms.iter().all(|(_, v)| {
        let vals: Vec<f64> = v.iter().map(|x| x.1).collect();
        vals.iter().all(|x| x.is_finite()) && relative_spread(&vals) < 0.01
    });
    let checks = vec![
        check(
            "inviscid tail classified like U_s'",
            tail_ok,
            format!("U_s': {profile_tail:?}, solution: {solution_tail:?}"),
        ),
        check(
            "old ansatz W_1 norm diverges with the grid",
            old_div,
            format!("{old_norms:?}"),
        ),
        check(
            "new ansatz initial norm finite for alpha = 0, 1, 2",
            new_finite,
            format!("{:?}", new_norms.iter().map(|(a, v)| (*a, v.last().unwrap().1)).collect::<Vec<_>>()),
        ),
    ];
    Ok(Obstruction { family: spec.family, k, t, profile_tail, solution_tail, old_norms, new_norms, checks })
}

// ---------------------------------------------------------------- growth scan

#[derive(Debug, Clone, Serialize)]
pub struct GrowthEntry {
    pub k: f64,
    pub rate: f64,
    pub rate_over_sqrt_k: f64,
    /// `rate / (sqrt(k) |Im tau_phys(0)|)`.
    pub ratio: f64,
    /// Rightmost real part of the frozen operator's spectrum at `t = 0`.
    pub spectral_rate: Option<f64>,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightCheck {
    pub k: f64,
    pub rate: f64,
    pub rate_doubled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyGrowth {
    pub family: String,
    pub rate0: f64,
    pub report: GrowthReport,
    pub entries: Vec<GrowthEntry>,
    /// Mean of `rate / sqrt(k)` over the scan.
    pub measured_rate: f64,
    pub height: Option<HeightCheck>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthScan {
    pub families: Vec<FamilyGrowth>,
    pub checks: Vec<Check>,
}

fn initial_data(cfg: &RunConfig, p: &Pipeline, pair: &Eigenpair, n: u32) -> Result<Vec<Complex64>> {
    Ok(assemble_mode(&p.mode_params(cfg, n)?, &p.field, &p.path, pair, 0.0)?.u())
}

pub fn run_growth_family(
    cfg: &RunConfig,
    p: &Pipeline,
    pair: &Eigenpair,
    check_height: bool,
) -> Result<(FamilyGrowth, Vec<Trajectory>)> {
    let g = &cfg.growth;
    let shear = Shear::heat(&p.field);
    let t_final = p.path.horizon;
    let runs: Vec<_> = g
        .k
        .par_iter()
        .map(|&n| {
            let init = initial_data(cfg, p, pair, n)?;
            let run = measure_growth(&shear, init, n as f64, t_final, &cfg.solver, g.window)?;
            let spectral = if g.spectrum_nodes > 0 {
                Some(frozen_spectrum(&p.profile, n as f64, g.spectrum_y_max, g.spectrum_nodes)?.re)
            } else {
                None
            };
            Ok((run, spectral))
        })
        .collect::<Result<_>>()?;
    let rate0 = p.rate0();
    let entries: Vec<GrowthEntry> = runs
        .iter()
        .map(|(r, s)| GrowthEntry {
            k: r.row.k,
            rate: r.row.rate,
            rate_over_sqrt_k: r.row.rate / r.row.k.sqrt(),
            ratio: r.row.rate / (r.row.k.sqrt() * rate0),
            spectral_rate: *s,
            fit_residual: r.row.fit_residual,
        })
        .collect();
    let rows: Vec<GrowthRow> = runs.iter().map(|(r, _)| r.row.clone()).collect();
    let report = GrowthReport::from_rows(rows, p.sigma0(cfg.mode.sigma0_factor));
    let measured_rate = entries.iter().map(|e| e.rate_over_sqrt_k).sum::<f64>() / entries.len().max(1) as f64;

    let height = if check_height {
        let k_max = *g.k.iter().max().unwrap();
        let grid = GridConfig { y_max: 2.0 * cfg.grid.y_max, ny: 2 * cfg.grid.ny - 1, ..cfg.grid };
        let tall = Pipeline::build(&p.spec, &grid, pair)?;
        let init = initial_data(cfg, &tall, pair, k_max)?;
        let run = measure_growth(&Shear::heat(&tall.field), init, k_max as f64, t_final, &cfg.solver, g.window)?;
        let base = runs.iter().find(|(r, _)| r.row.k == k_max as f64).unwrap();
        Some(HeightCheck { k: k_max as f64, rate: base.0.row.rate, rate_doubled: run.row.rate })
    } else {
        None
    };

    let (lo, hi) = g.exponent_band;
    let exponent = match &report.power_law {
        Some(pl) => check(
            &format!("power-law exponent in [{lo}, {hi}] ({})", p.family()),
            pl.exponent >= lo && pl.exponent <= hi,
            format!("p = {:.4}", pl.exponent),
        ),
        None => check(
            &format!("power-law exponent in [{lo}, {hi}] ({})", p.family()),
            false,
            format!(
                "no fit: {} (rates {:?})",
                report.power_law_error.as_deref().unwrap_or("?"),
                entries.iter().map(|e| format!("{:.3}", e.rate)).collect::<Vec<_>>()
            ),
        ),
    };
    let worst = entries.iter().map(|e| (e.ratio - 1.0).abs()).fold(0.0, f64::max);
    let rate_check = check(
        &format!("sigma(k)/sqrt(k) within {:.0}% of |Im tau_phys(0)| ({})", 100.0 * g.rate_tol, p.family()),
        worst <= g.rate_tol,
        format!(
            "|Im tau_phys(0)| = {rate0:.4}, ratios {:?}",
            entries.iter().map(|e| format!("{:.3}", e.ratio)).collect::<Vec<_>>()
        ),
    );
    let trajectories = runs.into_iter().map(|(r, _)| r.trajectory).collect();
    Ok((
        FamilyGrowth {
            family: p.family().to_string(),
            rate0,
            report,
            entries,
            measured_rate,
            height,
            checks: vec![exponent, rate_check],
        },
        trajectories,
    ))
}

pub fn run_growth_scan(
    cfg: &RunConfig,
    pipes: &[Pipeline],
    pair: &Eigenpair,
    check_height: bool,
) -> Result<(GrowthScan, Vec<Vec<Trajectory>>)> {
    let mut families = Vec::new();
    let mut trajs = Vec::new();
    for p in pipes {
        let (f, t) = run_growth_family(cfg, p, pair, check_height)?;
        families.push(f);
        trajs.push(t);
    }
    let checks = families.iter().flat_map(|f| f.checks.clone()).collect();
    Ok((GrowthScan { families, checks }, trajs))
}

// ---------------------------------------------------------------- probe

#[derive(Debug, Clone, Serialize)]
pub struct FamilyProbe {
    pub family: String,
    pub measured_rate: f64,
    pub status: String,
    /// Raw amplification (`m = alpha = mu = sigma = 0`) at the probe time.
    pub raw: Vec<ProbeRow>,
    pub below: Vec<ProbeRow>,
    pub above: Vec<ProbeRow>,
    /// Rows at the snapshot times with `sigma` below the rate.
    pub snapshots: Vec<ProbeRow>,
    pub log_gain: f64,
    pub required_log_gain: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub families: Vec<FamilyProbe>,
    pub checks: Vec<Check>,
}

pub fn run_probe_family(cfg: &RunConfig, p: &Pipeline, pair: &Eigenpair, measured_rate: f64) -> Result<FamilyProbe> {
    let pc = &cfg.probe;
    let shear = Shear::heat(&p.field);
    let init = |n: u32| initial_data(cfg, p, pair, n);
    let raw_setting = ProbeSetting { m: 0.0, alpha: 0.0, mu: 0.0, sigma: 0.0 };
    let raw = operator_growth_probe(&shear, init, &pc.k, pc.t, &[raw_setting], &cfg.solver)?;
    let name_inc = format!("rho increasing with the required gain at sigma = {}·rate ({})", pc.sigma_factors.0, p.family());
    let name_tame = format!("rho non-increasing at sigma = {}·rate ({})", pc.sigma_factors.1, p.family());
    let k_lo = *pc.k.iter().min().unwrap() as f64;
    let k_hi = *pc.k.iter().max().unwrap() as f64;
    if !(measured_rate > 0.0) {
        let detail = format!("no positive growth rate measured (rate = {measured_rate:.4})");
        return Ok(FamilyProbe {
            family: p.family().to_string(),
            measured_rate,
            status: "no positive growth rate measured".into(),
            raw,
            below: Vec::new(),
            above: Vec::new(),
            snapshots: Vec::new(),
            log_gain: f64::NAN,
            required_log_gain: f64::NAN,
            checks: vec![check(&name_inc, false, detail.clone()), check(&name_tame, false, detail)],
        });
    }
    let setting = |f: f64| ProbeSetting { m: pc.m, alpha: pc.alpha, mu: pc.mu, sigma: f * measured_rate };
    let rows = operator_growth_probe(
        &shear,
        init,
        &pc.k,
        pc.t,
        &[setting(pc.sigma_factors.0), setting(pc.sigma_factors.1)],
        &cfg.solver,
    )?;
    let nk = pc.k.len();
    let (below, above) = (rows[..nk].to_vec(), rows[nk..].to_vec());
    let mut snapshots = Vec::new();
    for &ts in &pc.snapshots {
        snapshots.extend(operator_growth_probe(&shear, init, &pc.k, ts, &[setting(pc.sigma_factors.0)], &cfg.solver)?);
    }
    let increasing = below.windows(2).all(|w| w[1].log_rho > w[0].log_rho);
    let log_gain = below.last().unwrap().log_rho - below[0].log_rho;
    let required_log_gain = 0.25 * measured_rate * (k_hi.sqrt() - k_lo.sqrt()) * pc.t;
    let tame = above.windows(2).all(|w| w[1].log_rho <= w[0].log_rho);
    let checks = vec![
        check(
            &name_inc,
            increasing && log_gain >= required_log_gain,
            format!("monotone {increasing}, log gain {log_gain:.4} vs required {required_log_gain:.4}"),
        ),
        check(
            &name_tame,
            tame,
            format!("log rho {:?}", above.iter().map(|r| format!("{:.3}", r.log_rho)).collect::<Vec<_>>()),
        ),
    ];
    Ok(FamilyProbe {
        family: p.family().to_string(),
        measured_rate,
        status: "measured".into(),
        raw,
        below,
        above,
        snapshots,
        log_gain,
        required_log_gain,
        checks,
    })
}

pub fn run_probe(cfg: &RunConfig, pipes: &[Pipeline], pair: &Eigenpair, growth: &GrowthScan) -> Result<ProbeReport> {
    let mut families = Vec::new();
    for p in pipes {
        let rate = growth
            .families
            .iter()
            .find(|f| f.family == p.family())
            .map(|f| f.measured_rate)
            .ok_or_else(|| LabError::InvalidParameter(format!("no growth scan for {}", p.family())))?;
        families.push(run_probe_family(cfg, p, pair, rate)?);
    }
    let checks = families.iter().flat_map(|f| f.checks.clone()).collect();
    Ok(ProbeReport { families, checks })
}
