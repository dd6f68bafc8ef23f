//! Single x-Fourier modes of the linearized Prandtl equations, advanced in time.

use std::borrow::Cow;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::{fit_rate, weighted_sup, GrowthRow};
use crate::profiles::{HeatFlowField, ShearProfile};
use crate::quad::GaussLegendre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const OVERFLOW_GUARD: f64 = 1e250;

/// Background shear on a uniform `y` grid.
#[derive(Debug, Clone)]
pub enum Shear<'a> {
    /// Time-dependent heat flow, interpolated in `t`.
    Heat(&'a HeatFlowField),
    /// `(u, u_y)` held fixed in time.
    Frozen { y: Vec<f64>, values: Vec<[f64; 2]> },
}

impl<'a> Shear<'a> {
    pub fn heat(field: &'a HeatFlowField) -> Self {
        Shear::Heat(field)
    }

    pub fn frozen(profile: &ShearProfile, y: &[f64]) -> Self {
        Shear::Frozen {
            y: y.to_vec(),
            values: y.iter().map(|&v| {
                let j = profile.jet(v);
                [j[0], j[1]]
            }).collect(),
        }
    }

    /// Frozen at a constant speed (`u_y = 0`).
    pub fn constant(c: f64, y: &[f64]) -> Self {
        Shear::Frozen { y: y.to_vec(), values: vec![[c, 0.0]; y.len()] }
    }

    pub fn y(&self) -> &[f64] {
        match self {
            Shear::Heat(f) => &f.y,
            Shear::Frozen { y, .. } => y,
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            Shear::Heat(f) => f.horizon(),
            Shear::Frozen { .. } => f64::INFINITY,
        }
    }

    pub fn slice(&self, t: f64) -> Cow<'_, [[f64; 2]]> {
        match self {
            Shear::Heat(f) => Cow::Owned(f.slice_at(t)),
            Shear::Frozen { values, .. } => Cow::Borrowed(values),
        }
    }

    /// `sup |u_s|` over the grid and the time range.
    pub fn sup_speed(&self) -> f64 {
        match self {
            Shear::Heat(f) => f.jets.iter().map(|j| j[0].abs()).fold(0.0, f64::max),
            Shear::Frozen { values, .. } => values.iter().map(|v| v[0].abs()).fold(0.0, f64::max),
        }
    }
}

/// Time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Crank–Nicolson diffusion with Adams–Bashforth transport.
    ImexCn,
    /// Diffusion switched off.
    Inviscid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub c_cfl: f64,
}

/// Rule turning a wavenumber into a [`SolverConfig`]: `dt = dt_factor / (k sup|u_s|)`, capped at `dt_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepRule {
    pub dt_factor: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
    pub c_cfl: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            dt_factor: 0.05,
            dt_max: 1e-3,
            scheme: Scheme::ImexCn,
            c_cfl: 0.5,
        }
    }
}

impl StepRule {
    pub fn config(&self, k: f64, sup_speed: f64) -> SolverConfig {
        let dt = if k * sup_speed > 0.0 {
            (self.dt_factor / (k * sup_speed)).min(self.dt_max)
        } else {
            self.dt_max
        };
        SolverConfig { dt, scheme: self.scheme, c_cfl: self.c_cfl }
    }
}

/// One Fourier mode `e^{ikx} û(t, y)`; `û` is stored divided by `e^{log_scale}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierModeState {
    pub k: f64,
    pub t: f64,
    pub dy: f64,
    pub u_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
    pub log_scale: f64,
}

impl FourierModeState {
    pub fn new(k: f64, t: f64, y: &[f64], u_hat: Vec<Complex64>) -> Result<Self> {
        if y.len() != u_hat.len() || y.len() < 3 {
            return Err(LabError::InvalidParameter("mode profile does not match the grid".into()));
        }
        let dy = y[1] - y[0];
        let v_hat = vertical(k, dy, &u_hat);
        Ok(Self { k, t, dy, u_hat, v_hat, log_scale: 0.0 })
    }

    /// `log sup |û|` including the accumulated scale.
    pub fn log_sup(&self) -> f64 {
        self.log_scale + self.u_hat.iter().map(|c| c.norm()).fold(0.0, f64::max).ln()
    }

    /// `û` with the scale put back.
    pub fn physical(&self) -> Vec<Complex64> {
        let s = self.log_scale.exp();
        self.u_hat.iter().map(|c| c * s).collect()
    }

    fn rescale(&mut self, by: f64) {
        for c in self.u_hat.iter_mut().chain(self.v_hat.iter_mut()) {
            *c /= by;
        }
        self.log_scale += by.ln();
    }
}

/// `v̂ = -ik ∫_0^y û` by the trapezoid rule.
pub fn vertical(k: f64, dy: f64, u: &[Complex64]) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(u.len());
    let mut acc = ZERO;
    v.push(ZERO);
    for w in u.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * dy);
        v.push(acc * (-I * k));
    }
    v
}

/// Explicit part `-ik u_s û - v̂ ∂_y u_s`.
fn transport(k: f64, u: &[Complex64], v: &[Complex64], shear: &[[f64; 2]]) -> Vec<Complex64> {
    u.iter()
        .zip(v)
        .zip(shear)
        .map(|((&uu, &vv), s)| -I * k * s[0] * uu - vv * s[1])
        .collect()
}

/// Factored `I - r D2` on the interior nodes (Dirichlet at both ends).
struct Tridiagonal {
    r: f64,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl Tridiagonal {
    fn new(r: f64, n: usize) -> Self {
        let (a, b) = (-r, 1.0 + 2.0 * r);
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        for i in 0..n {
            let d = if i == 0 { b } else { b - a * c_prime[i - 1] };
            denom[i] = d;
            c_prime[i] = a / d;
        }
        Self { r, c_prime, denom }
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        let a = -self.r;
        rhs[0] /= self.denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * a) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * self.c_prime[i];
        }
    }
}

/// Multistep integrator: Heun on the first step, Adams–Bashforth 2 afterwards.
pub struct Integrator<'s, 'a> {
    shear: &'s Shear<'a>,
    config: SolverConfig,
    solver: Option<Tridiagonal>,
    history: Option<Vec<Complex64>>,
}

impl<'s, 'a> Integrator<'s, 'a> {
    pub fn new(shear: &'s Shear<'a>, config: SolverConfig, k: f64) -> Result<Self> {
        let sup = shear.sup_speed();
        if k * sup > 0.0 && config.dt > config.c_cfl / (k * sup) {
            return Err(LabError::CflViolation { dt: config.dt, limit: config.c_cfl / (k * sup) });
        }
        if !(config.dt > 0.0) {
            return Err(LabError::InvalidParameter(format!("dt = {} must be positive", config.dt)));
        }
        let y = shear.y();
        let dy = y[1] - y[0];
        let solver = match config.scheme {
            Scheme::ImexCn => Some(Tridiagonal::new(0.5 * config.dt / (dy * dy), y.len() - 2)),
            Scheme::Inviscid => None,
        };
        Ok(Self { shear, config, solver, history: None })
    }

    /// Advance by one step of size `config.dt`.
    pub fn step(&mut self, state: &mut FourierModeState) -> Result<()> {
        let dt = self.config.dt;
        let t1 = state.t + dt;
        if t1 > self.shear.horizon() + 1e-12 {
            return Err(LabError::HorizonExceeded { t: t1, horizon: self.shear.horizon() });
        }
        let k = state.k;
        let s0 = self.shear.slice(state.t);
        let n0 = transport(k, &state.u_hat, &state.v_hat, &s0);
        let next = match self.history.take() {
            Some(prev) => {
                let ex: Vec<Complex64> = n0.iter().zip(&prev).map(|(a, b)| a * 1.5 - b * 0.5).collect();
                self.implicit(state, &ex)
            }
            None => {
                let pred = self.implicit(state, &n0);
                let s1 = self.shear.slice(t1);
                let vp = vertical(k, state.dy, &pred);
                let n1 = transport(k, &pred, &vp, &s1);
                let avg: Vec<Complex64> = n0.iter().zip(&n1).map(|(a, b)| (a + b) * 0.5).collect();
                self.implicit(state, &avg)
            }
        };
        self.history = Some(n0);
        if next.iter().any(|c| !(c.norm() < OVERFLOW_GUARD)) {
            return Err(LabError::NonFiniteState { t: t1 });
        }
        state.v_hat = vertical(k, state.dy, &next);
        state.u_hat = next;
        state.t = t1;
        Ok(())
    }

    /// `(I - dt/2 D2)^{-1} [(I + dt/2 D2) û + dt N]`, or `û + dt N` without diffusion.
    fn implicit(&self, state: &FourierModeState, explicit: &[Complex64]) -> Vec<Complex64> {
        let dt = self.config.dt;
        let u = &state.u_hat;
        let n = u.len();
        match &self.solver {
            None => u.iter().zip(explicit).map(|(a, b)| a + b * dt).collect(),
            Some(tri) => {
                let r = tri.r;
                let mut rhs: Vec<Complex64> = (1..n - 1)
                    .map(|j| u[j] + (u[j - 1] - u[j] * 2.0 + u[j + 1]) * r + explicit[j] * dt)
                    .collect();
                tri.solve(&mut rhs);
                let mut out = Vec::with_capacity(n);
                out.push(ZERO);
                out.extend(rhs);
                out.push(ZERO);
                out
            }
        }
    }

    /// Scale the stored history along with a renormalized state.
    fn rescale_history(&mut self, by: f64) {
        if let Some(h) = self.history.as_mut() {
            for c in h.iter_mut() {
                *c /= by;
            }
        }
    }
}

/// Single self-starting step.
pub fn step(state: &FourierModeState, shear: &Shear, config: &SolverConfig) -> Result<FourierModeState> {
    let mut s = state.clone();
    Integrator::new(shear, *config, state.k)?.step(&mut s)?;
    Ok(s)
}

/// Log-norm history of an evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub k: f64,
    pub t: Vec<f64>,
    /// `log sup_y |û(t, y)|`.
    pub log_norm: Vec<f64>,
    pub final_state: FourierModeState,
}

impl Trajectory {
    /// CSV rows `t, log_norm, slope` with a centered slope estimate.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,log_norm,slope\n");
        let n = self.t.len();
        for i in 0..n {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let slope = if b > a {
                (self.log_norm[b] - self.log_norm[a]) / (self.t[b] - self.t[a])
            } else {
                0.0
            };
            s.push_str(&format!("{:.8},{:.12e},{:.8e}\n", self.t[i], self.log_norm[i], slope));
        }
        s
    }
}

/// Repeated stepping to `t_final` (the step is shrunk to land on it exactly).
///
/// With `renormalize`, `û` is rescaled to unit sup-norm after every step and the
/// logarithms of the factors are accumulated in `log_scale`.
pub fn evolve(
    state0: &FourierModeState,
    shear: &Shear,
    config: &SolverConfig,
    t_final: f64,
    renormalize: bool,
) -> Result<Trajectory> {
    if t_final > shear.horizon() + 1e-12 {
        return Err(LabError::HorizonExceeded { t: t_final, horizon: shear.horizon() });
    }
    let span = t_final - state0.t;
    let steps = ((span / config.dt).ceil() as usize).max(1);
    let cfg = SolverConfig { dt: span / steps as f64, ..*config };
    let mut integ = Integrator::new(shear, cfg, state0.k)?;
    let mut state = state0.clone();
    let mut t = vec![state.t];
    let mut log_norm = vec![state.log_sup()];
    for i in 0..steps {
        integ.step(&mut state)?;
        if i + 1 == steps {
            state.t = t_final;
        }
        if renormalize {
            let s = state.u_hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if s > 0.0 {
                state.rescale(s);
                integ.rescale_history(s);
            }
        }
        t.push(state.t);
        log_norm.push(state.log_sup());
    }
    Ok(Trajectory { k: state0.k, t, log_norm, final_state: state })
}

/// Closed-form inviscid solution around a frozen shear `U`:
/// `û = e^{-ikUt} û0 + t U' ik ∫_0^y e^{-ikU(z)t} û0(z) dz`.
pub fn inviscid_exact<F, G>(u0: F, shear: G, y: &[f64], k: f64, t: f64) -> Result<FourierModeState>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> [f64; 2],
{
    let gl = GaussLegendre::new(10);
    let e = |z: f64| (-I * k * shear(z)[0] * t).exp() * u0(z);
    // Cumulative `∫ E` and `∫ U E` with one 10-point panel per cell, split in two.
    let (mut ie, mut iue) = (vec![ZERO], vec![ZERO]);
    let (mut acc_e, mut acc_ue) = (ZERO, ZERO);
    for w in y.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        for (lo, hi) in [(w[0], m), (m, w[1])] {
            acc_e += gl.integrate(lo, hi, e);
            acc_ue += gl.integrate(lo, hi, |z| e(z) * shear(z)[0]);
        }
        ie.push(acc_e);
        iue.push(acc_ue);
    }
    let mut u = Vec::with_capacity(y.len());
    let mut v = Vec::with_capacity(y.len());
    for (i, &yy) in y.iter().enumerate() {
        let [uu, du] = shear(yy);
        u.push(e(yy) + I * k * t * du * ie[i]);
        v.push(-I * k * ie[i] + k * k * t * (uu * ie[i] - iue[i]));
    }
    Ok(FourierModeState { k, t, dy: y[1] - y[0], u_hat: u, v_hat: v, log_scale: 0.0 })
}

/// Fitted growth of one wavenumber.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRun {
    pub row: GrowthRow,
    pub trajectory: Trajectory,
}

/// Evolve `init` to `t_final` with renormalization and fit the log-norm slope
/// over `window` (fractions of `t_final`).
pub fn measure_growth(
    shear: &Shear,
    init: Vec<Complex64>,
    k: f64,
    t_final: f64,
    rule: &StepRule,
    window: (f64, f64),
) -> Result<GrowthRun> {
    let state = FourierModeState::new(k, 0.0, shear.y(), init)?;
    let cfg = rule.config(k, shear.sup_speed());
    let traj = evolve(&state, shear, &cfg, t_final, true)?;
    let win = (window.0 * t_final, window.1 * t_final);
    let (rate, res) = fit_rate(&traj.t, &traj.log_norm, win)?;
    Ok(GrowthRun {
        row: GrowthRow { k, rate, window: win, fit_residual: res },
        trajectory: traj,
    })
}

/// Rightmost eigenvalue of the frozen-coefficient operator
/// `û ↦ -ik U û + ik U' ∫_0^y û + ∂_y^2 û` on `n` interior nodes of `[0, y_max]`
/// (Dirichlet ends, trapezoid `v̂`), by a dense complex Schur decomposition.
pub fn frozen_spectrum(profile: &ShearProfile, k: f64, y_max: f64, n: usize) -> Result<Complex64> {
    if n < 4 || !(y_max > 0.0) {
        return Err(LabError::InvalidParameter("spectrum grid too small".into()));
    }
    let h = y_max / (n + 1) as f64;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let j = profile.jet(h * (i + 1) as f64);
        let src = I * (k * j[1] * h);
        for c in 0..i {
            a[(i, c)] += src;
        }
        a[(i, i)] += src * 0.5 - I * (k * j[0]) - 2.0 / (h * h);
        if i > 0 {
            a[(i, i - 1)] += Complex64::from(1.0 / (h * h));
        }
        if i + 1 < n {
            a[(i, i + 1)] += Complex64::from(1.0 / (h * h));
        }
    }
    let ev = a.schur().eigenvalues().ok_or(LabError::NonFiniteState { t: 0.0 })?;
    ev.iter()
        .copied()
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .ok_or(LabError::NonFiniteState { t: 0.0 })
}

/// One probe setting `(m, alpha, mu, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSetting {
    pub m: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub k: f64,
    pub t: f64,
    pub m: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub log_rho: f64,
    pub rho: f64,
}

/// Probe ratio
/// `rho = e^{-sigma sqrt(k) t} (1+k^2)^{(m-mu)/2} ‖û(t)‖_{W_0} / ((1+k^2)^{m/2} ‖û(0)‖_{W_alpha})`
/// for every wavenumber and setting. `init(k)` gives the initial profile.
pub fn operator_growth_probe<F>(
    shear: &Shear,
    init: F,
    ks: &[u32],
    t: f64,
    settings: &[ProbeSetting],
    rule: &StepRule,
) -> Result<Vec<ProbeRow>>
where
    F: Fn(u32) -> Result<Vec<Complex64>> + Sync,
{
    let y = shear.y();
    let per_k: Vec<(f64, Vec<Complex64>, f64)> = ks
        .par_iter()
        .map(|&n| {
            let u0 = init(n)?;
            let k = n as f64;
            let state = FourierModeState::new(k, 0.0, y, u0.clone())?;
            let traj = evolve(&state, shear, &rule.config(k, shear.sup_speed()), t, true)?;
            Ok((k, u0, traj.final_state.log_sup()))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for s in settings {
        for (k, u0, log_final) in &per_k {
            let log_rho = log_final - weighted_sup(y, u0, s.alpha).ln() - s.sigma * k.sqrt() * t
                - 0.5 * s.mu * (1.0 + k * k).ln();
            rows.push(ProbeRow {
                k: *k,
                t,
                m: s.m,
                alpha: s.alpha,
                mu: s.mu,
                sigma: s.sigma,
                log_rho,
                rho: log_rho.exp(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::uniform_grid;

    #[test]
    fn thomas_inverts_the_operator() {
        let r = 0.7;
        let n = 6;
        let tri = Tridiagonal::new(r, n);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b: Vec<Complex64> = (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { ZERO };
                let right = if i + 1 < n { x[i + 1] } else { ZERO };
                x[i] * (1.0 + 2.0 * r) - (left + right) * r
            })
            .collect();
        tri.solve(&mut b);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn vertical_velocity_of_a_constant() {
        let v = vertical(2.0, 0.5, &[Complex64::new(1.0, 0.0); 5]);
        assert!((v[4] - Complex64::new(0.0, -4.0)).norm() < 1e-15);
    }

    #[test]
    fn cfl_guard_fires() {
        let y = uniform_grid(0.0, 1.0, 11);
        let shear = Shear::constant(2.0, &y);
        let cfg = SolverConfig { dt: 0.1, scheme: Scheme::ImexCn, c_cfl: 0.5 };
        assert!(matches!(Integrator::new(&shear, cfg, 10.0), Err(LabError::CflViolation { .. })));
    }
}
