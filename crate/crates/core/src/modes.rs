//! Growing-mode approximate solutions: regular part, shear layer, compact corrector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::Eigenpair;
use crate::error::{LabError, Result};
use crate::norms::weighted_sup;
use crate::profiles::{CriticalPath, HeatFlowField, Jet, ShearProfile};
use crate::quad::GaussLegendre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Smoothstep truncation: `1` on `|s| <= inner`, `0` on `|s| >= outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(LabError::InvalidParameter(format!(
                "cutoff needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(Self { inner, outer })
    }

    /// `(phi, phi', phi'', phi''')` at offset `s`.
    pub fn jet(&self, s: f64) -> [f64; 4] {
        let d = s.abs();
        if d <= self.inner {
            return [1.0, 0.0, 0.0, 0.0];
        }
        if d >= self.outer {
            return [0.0; 4];
        }
        let l = self.outer - self.inner;
        let r = (d - self.inner) / l;
        let sg = s.signum();
        let r2 = r * r;
        let step = r2 * r * (10.0 - 15.0 * r + 6.0 * r2);
        let d1 = 30.0 * r2 * (1.0 - r) * (1.0 - r);
        let d2 = 60.0 * r - 180.0 * r2 + 120.0 * r2 * r;
        let d3 = 60.0 - 360.0 * r + 360.0 * r2;
        [1.0 - step, -sg * d1 / l, -d2 / (l * l), -sg * d3 / (l * l * l)]
    }
}

/// Compactly supported seed `f` for the corrector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrectorSeed {
    /// `(s (1 - s))^3` with `s = (y - lo) / (hi - lo)`.
    Bump { lo: f64, hi: f64 },
    /// A bump on the lower half minus a bump on the upper half (zero mass).
    Dipole { lo: f64, hi: f64 },
}

fn bump_jet(s: f64) -> [f64; 3] {
    if s <= 0.0 || s >= 1.0 {
        return [0.0; 3];
    }
    let g = s - s * s;
    let g1 = 1.0 - 2.0 * s;
    [g * g * g, 3.0 * g * g * g1, 6.0 * g * g1 * g1 - 6.0 * g * g]
}

fn bump_primitive(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let s4 = s * s * s * s;
    s4 * (0.25 + s * (-0.6 + s * (0.5 - s / 7.0)))
}

impl CorrectorSeed {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            CorrectorSeed::Bump { lo, hi } | CorrectorSeed::Dipole { lo, hi } => (lo, hi),
        }
    }

    /// `(f, f', f'')` at `y`.
    pub fn jet(&self, y: f64) -> [f64; 3] {
        match *self {
            CorrectorSeed::Bump { lo, hi } => {
                let l = hi - lo;
                let b = bump_jet((y - lo) / l);
                [b[0], b[1] / l, b[2] / (l * l)]
            }
            CorrectorSeed::Dipole { lo, hi } => {
                let m = 0.5 * (lo + hi);
                let a = CorrectorSeed::Bump { lo, hi: m }.jet(y);
                let b = CorrectorSeed::Bump { lo: m, hi }.jet(y);
                [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
            }
        }
    }

    /// `∫_0^y f`, in closed form.
    pub fn primitive(&self, y: f64) -> f64 {
        match *self {
            CorrectorSeed::Bump { lo, hi } => (hi - lo) * bump_primitive((y - lo) / (hi - lo)),
            CorrectorSeed::Dipole { lo, hi } => {
                let m = 0.5 * (lo + hi);
                CorrectorSeed::Bump { lo, hi: m }.primitive(y) - CorrectorSeed::Bump { lo: m, hi }.primitive(y)
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.primitive(self.support().1)
    }
}

/// Normalized antiderivative `ṽ = ∫_0^y f / ∫ f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corrector {
    pub seed: CorrectorSeed,
    pub mass: f64,
}

impl Corrector {
    pub fn new(seed: CorrectorSeed) -> Result<Self> {
        let (lo, hi) = seed.support();
        if !(lo > 0.0 && hi > lo) {
            return Err(LabError::InvalidParameter(format!(
                "corrector support [{lo}, {hi}] must lie in (0, inf)"
            )));
        }
        let mass = seed.mass();
        if mass.abs() <= 1e-12 * (hi - lo) {
            return Err(LabError::ZeroMass);
        }
        Ok(Self { seed, mass })
    }

    /// `(ṽ, ṽ', ṽ'', ṽ''')` at `y`.
    pub fn jet(&self, y: f64) -> [f64; 4] {
        let f = self.seed.jet(y);
        [self.seed.primitive(y) / self.mass, f[0] / self.mass, f[1] / self.mass, f[2] / self.mass]
    }
}

/// Corrector profile sampled on a grid.
pub fn corrector(seed: CorrectorSeed, y: &[f64]) -> Result<Vec<[f64; 4]>> {
    let c = Corrector::new(seed)?;
    Ok(y.iter().map(|&yy| c.jet(yy)).collect())
}

/// Parameters of one growing mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    /// Wavenumber `n = 1/eps`.
    pub n: u32,
    pub cutoff: Cutoff,
    pub seed: CorrectorSeed,
    pub frozen: bool,
}

impl ModeParams {
    pub fn new(n: u32, cutoff: Cutoff, seed: CorrectorSeed, frozen: bool) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidParameter("wavenumber n must be >= 1".into()));
        }
        let c = Corrector::new(seed)?;
        if c.mass <= 0.0 {
            return Err(LabError::InvalidParameter("corrector seed must have positive mass".into()));
        }
        Ok(Self { n, cutoff, seed, frozen })
    }

    /// Default cutoff `(0.5, 1.0) * min(a_min, 1)` and a bump on
    /// `[a0 + outer + 0.5, a0 + outer + 1.5]`.
    pub fn standard(n: u32, a_min: f64, a0: f64, frozen: bool) -> Result<Self> {
        let d = a_min.min(1.0);
        let cutoff = Cutoff::new(0.5 * d, d)?;
        let lo = a0 + d + 0.5;
        Self::new(n, cutoff, CorrectorSeed::Bump { lo, hi: lo + 1.0 }, frozen)
    }

    pub fn eps(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn k(&self) -> f64 {
        self.n as f64
    }
}

/// Which tangential profile builds the mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ansatz {
    /// Compact corrector plus `t` times the eigenmode.
    Corrected,
    /// The eigenmode alone, with its `U_s'`-like tail.
    Plain,
}

/// Critical-layer data at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerState {
    pub t: f64,
    pub a: f64,
    pub a_dot: f64,
    pub lambda: f64,
    pub lambda_dot: f64,
    pub u_at_a: f64,
    /// `|lambda / 2|`.
    pub kappa: f64,
    /// Shear-layer amplitude `eps^{1/2} kappa^{1/2}`.
    pub amp: f64,
    /// Inner scale `kappa^{1/4} eps^{-1/4}`.
    pub beta: f64,
    pub amp_dot: f64,
    pub beta_dot: f64,
    pub w: Complex64,
    /// `k ∫_0^t w`.
    pub phase_integral: Complex64,
}

impl LayerState {
    pub fn phase(&self) -> Complex64 {
        (I * self.phase_integral).exp()
    }
}

/// Background shear seen by a mode.
#[derive(Clone, Copy)]
pub enum Background<'a> {
    Frozen(&'a ShearProfile),
    Evolving(&'a CriticalPath),
}

impl Background<'_> {
    pub fn jet(&self, t: f64, y: f64) -> Result<Jet> {
        match self {
            Background::Frozen(p) => Ok(p.jet(y)),
            Background::Evolving(path) => path.flow().jet(t, y),
        }
    }

    fn raw(&self, t: f64) -> Result<(f64, f64, f64, f64, f64)> {
        match self {
            Background::Frozen(p) => Ok((p.a0, 0.0, p.curvature, 0.0, p.value(p.a0))),
            Background::Evolving(path) => {
                let q = path.at(t)?;
                Ok((q.a, q.a_dot, q.lambda, q.lambda_dot, q.u_at_a))
            }
        }
    }

    fn horizon(&self) -> f64 {
        match self {
            Background::Frozen(_) => f64::INFINITY,
            Background::Evolving(path) => path.horizon,
        }
    }
}

/// Evaluator of the approximate solution for one wavenumber.
pub struct Mode<'a> {
    pub params: ModeParams,
    pub pair: &'a Eigenpair,
    pub background: Background<'a>,
    pub corrector: Corrector,
    pub ansatz: Ansatz,
}

/// Everything about the mode at one `(t, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePoint {
    /// `U, U_y, U_yy`.
    pub u: [Complex64; 3],
    /// `V, V_y, V_yy`.
    pub v: [Complex64; 3],
    pub u_t: Complex64,
    pub u_corrector: Complex64,
    pub u_regular: Complex64,
    pub u_shear_layer: Complex64,
    pub residual: Complex64,
    pub residual_bar: Complex64,
    pub residual_tilde: Complex64,
    pub tilde_taylor: Complex64,
    pub tilde_time: Complex64,
    pub tilde_cutoff: Complex64,
}

impl<'a> Mode<'a> {
    pub fn new(params: ModeParams, pair: &'a Eigenpair, background: Background<'a>, ansatz: Ansatz) -> Result<Self> {
        Ok(Self {
            corrector: Corrector::new(params.seed)?,
            params,
            pair,
            background,
            ansatz,
        })
    }

    /// Layer data at `t`, with the phase integral by 8-point Gauss–Legendre panels.
    pub fn layer(&self, t: f64) -> Result<LayerState> {
        if t < 0.0 || t > self.background.horizon() + 1e-12 {
            return Err(LabError::HorizonExceeded { t, horizon: self.background.horizon() });
        }
        let eps = self.params.eps();
        let k = self.params.k();
        let tau = self.pair.tau;
        let w_at = |s: f64| -> Result<Complex64> {
            let (_, _, lam, _, ua) = self.background.raw(s)?;
            Ok(-ua + tau * (eps.sqrt() * (0.5 * lam.abs()).sqrt()))
        };
        let phase_integral = match self.background {
            Background::Frozen(_) => w_at(0.0)? * (k * t),
            Background::Evolving(path) => {
                let gl = GaussLegendre::new(8);
                let mut acc = ZERO;
                for win in path.t.windows(2) {
                    let (lo, hi) = (win[0], win[1].min(t));
                    if hi <= lo {
                        break;
                    }
                    for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                        let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                        acc += w_at(s)? * (0.5 * (hi - lo) * wt);
                    }
                }
                acc * k
            }
        };
        let (a, a_dot, lambda, lambda_dot, u_at_a) = self.background.raw(t)?;
        let kappa = 0.5 * lambda.abs();
        let kappa_dot = -0.5 * lambda_dot;
        let amp = (eps * kappa).sqrt();
        let beta = (kappa / eps).powf(0.25);
        Ok(LayerState {
            t,
            a,
            a_dot,
            lambda,
            lambda_dot,
            u_at_a,
            kappa,
            amp,
            beta,
            amp_dot: eps.sqrt() * 0.5 * kappa_dot / kappa.sqrt(),
            beta_dot: eps.powf(-0.25) * 0.25 * kappa_dot * kappa.powf(-0.75),
            w: -u_at_a + tau * amp,
            phase_integral,
        })
    }

    /// Evaluate at `y`; at `y = a` exactly, `right` selects the side of the jump.
    pub fn point(&self, st: &LayerState, y: f64, right: bool) -> Result<ModePoint> {
        let us = self.background.jet(st.t, y)?;
        Ok(self.point_with(st, &us, y, right))
    }

    fn point_with(&self, st: &LayerState, us: &Jet, y: f64, right: bool) -> ModePoint {
        let eps = self.params.eps();
        let k = self.params.k();
        let t = st.t;
        let tau = self.pair.tau;
        let s = y - st.a;
        let above = s > 0.0 || (s == 0.0 && right);
        let h = if above { 1.0 } else { 0.0 };

        // Regular part and its y-derivatives up to third order.
        let vreg = [
            (us[0] - st.u_at_a + tau * st.amp) * h,
            Complex64::from(us[1] * h),
            Complex64::from(us[2] * h),
            Complex64::from(us[3] * h),
        ];
        // `∂_t ∂_y v_reg = ∂_t ∂_y u_s = ∂_y^3 u_s` above `a`.
        let vreg_ty = Complex64::from(us[3] * h);

        // Shear layer `A phi(s) V(beta s)`.
        let (vsl, vsl_ty) = self.shear_layer(st, s, above);

        let c = self.corrector.jet(y);
        let v = [vreg[0] + vsl[0], vreg[1] + vsl[1], vreg[2] + vsl[2], vreg[3] + vsl[3]];
        let v_ty = vreg_ty + vsl_ty;
        let p = st.phase();
        let tc = Complex64::from(t);
        let (u, vv, u_t, u_cor);
        match self.ansatz {
            Ansatz::Corrected => {
                u_cor = p * (eps * c[1]);
                u = [
                    p * (eps * c[1] + I * tc * v[1]),
                    p * (eps * c[2] + I * tc * v[2]),
                    p * (eps * c[3] + I * tc * v[3]),
                ];
                vv = [
                    p * (-I * c[0] + k * tc * v[0]),
                    p * (-I * c[1] + k * tc * v[1]),
                    p * (-I * c[2] + k * tc * v[2]),
                ];
                u_t = p * (I * k * st.w * (eps * c[1] + I * tc * v[1]) + I * v[1] + I * tc * v_ty);
            }
            Ansatz::Plain => {
                u_cor = ZERO;
                u = [p * (I * v[1]), p * (I * v[2]), p * (I * v[3])];
                vv = [p * (k * v[0]), p * (k * v[1]), p * (k * v[2])];
                u_t = p * (I * k * st.w * I * v[1] + I * v_ty);
            }
        }
        let residual = u_t + I * k * us[0] * u[0] + vv[0] * us[1] - u[2];

        let (bar, tilde, taylor, time, cut) = match self.ansatz {
            Ansatz::Corrected => {
                let bar = p * (I * (st.w + us[0]) * c[1] - I * us[1] * c[0] - eps * c[3] + I * v[1]);
                let tilde = p * (-k * (st.w + us[0]) * vsl[1] + k * us[1] * vsl[0] + I * vsl_ty - I * vsl[3]);
                let taylor = p
                    * (-k * (us[0] - st.u_at_a - 0.5 * st.lambda * s * s) * vsl[1]
                        + k * (us[1] - st.lambda * s) * vsl[0]);
                let time = p * (I * vsl_ty);
                (bar, tilde, taylor, time, tilde - taylor - time)
            }
            Ansatz::Plain => (ZERO, ZERO, ZERO, ZERO, ZERO),
        };
        ModePoint {
            u,
            v: vv,
            u_t,
            u_corrector: u_cor,
            u_regular: match self.ansatz {
                Ansatz::Corrected => p * (I * tc * vreg[1]),
                Ansatz::Plain => p * (I * vreg[1]),
            },
            u_shear_layer: match self.ansatz {
                Ansatz::Corrected => p * (I * tc * vsl[1]),
                Ansatz::Plain => p * (I * vsl[1]),
            },
            residual,
            residual_bar: bar,
            residual_tilde: tilde,
            tilde_taylor: taylor,
            tilde_time: time,
            tilde_cutoff: cut,
        }
    }

    /// `(v_sl, ∂_y v_sl, ∂_y^2 v_sl, ∂_y^3 v_sl)` and `∂_t ∂_y v_sl` at offset `s`.
    fn shear_layer(&self, st: &LayerState, s: f64, above: bool) -> ([Complex64; 4], Complex64) {
        // Frozen modes use the untruncated layer.
        let phi = if self.params.frozen {
            [1.0, 0.0, 0.0, 0.0]
        } else {
            self.params.cutoff.jet(s)
        };
        if phi == [0.0; 4] {
            return ([ZERO; 4], ZERO);
        }
        let b = st.beta;
        let z = b * s;
        let vz = self.pair.v_one_sided(z, above);
        let amp = st.amp;
        let out = [
            vz[0] * (amp * phi[0]),
            (vz[0] * phi[1] + vz[1] * (phi[0] * b)) * amp,
            (vz[0] * phi[2] + vz[1] * (2.0 * phi[1] * b) + vz[2] * (phi[0] * b * b)) * amp,
            (vz[0] * phi[3] + vz[1] * (3.0 * phi[2] * b) + vz[2] * (3.0 * phi[1] * b * b) + vz[3] * (phi[0] * b * b * b))
                * amp,
        ];
        let z_t = st.beta_dot * s - b * st.a_dot;
        let vy_over_amp = vz[0] * phi[1] + vz[1] * (phi[0] * b);
        let d_t = vz[0] * (-st.a_dot * phi[2])
            + vz[1] * (phi[1] * z_t)
            + vz[1] * (-st.a_dot * b * phi[1])
            + vz[1] * (phi[0] * st.beta_dot)
            + vz[2] * (phi[0] * b * z_t);
        (out, vy_over_amp * st.amp_dot + d_t * amp)
    }

    /// Assemble on a grid at time `t`.
    pub fn field(&self, y: &[f64], t: f64) -> Result<ModeField> {
        let st = self.layer(t)?;
        let jets: Vec<Jet> = y.iter().map(|&yy| self.background.jet(t, yy)).collect::<Result<_>>()?;
        Ok(self.field_with(y, &st, &jets))
    }

    /// Assemble at `t` from precomputed background jets on `y`.
    pub fn field_from_jets(&self, y: &[f64], t: f64, jets: &[Jet]) -> Result<ModeField> {
        if jets.len() != y.len() {
            return Err(LabError::InvalidParameter("one background jet per grid point required".into()));
        }
        let st = self.layer(t)?;
        Ok(self.field_with(y, &st, jets))
    }

    fn field_with(&self, y: &[f64], st: &LayerState, jets: &[Jet]) -> ModeField {
        let points: Vec<ModePoint> = y
            .iter()
            .zip(jets)
            .map(|(&yy, j)| self.point_with(st, j, yy, true))
            .collect();
        ModeField {
            n: self.params.n,
            t: st.t,
            ansatz: self.ansatz,
            frozen: self.params.frozen,
            layer: *st,
            y: y.to_vec(),
            points,
        }
    }

    /// `(V, V_y, V_yy)` right minus left of `a(t)`.
    pub fn jump_at_critical(&self, t: f64) -> Result<[Complex64; 3]> {
        let st = self.layer(t)?;
        let r = self.point(&st, st.a, true)?;
        let l = self.point(&st, st.a, false)?;
        Ok([r.v[0] - l.v[0], r.v[1] - l.v[1], r.v[2] - l.v[2]])
    }
}

/// Mode sampled on a grid at one time.
#[derive(Debug, Clone)]
pub struct ModeField {
    pub n: u32,
    pub t: f64,
    pub ansatz: Ansatz,
    pub frozen: bool,
    pub layer: LayerState,
    pub y: Vec<f64>,
    pub points: Vec<ModePoint>,
}

impl ModeField {
    pub fn u(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.u[0]).collect()
    }

    pub fn v(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.v[0]).collect()
    }

    /// `max(|U|, |U_y|, |U_yy|)` weighted by `e^{alpha y}`.
    pub fn u_norm_w2(&self, alpha: f64) -> f64 {
        (0..3)
            .map(|d| {
                let f: Vec<Complex64> = self.points.iter().map(|p| p.u[d]).collect();
                weighted_sup(&self.y, &f, alpha)
            })
            .fold(0.0, f64::max)
    }

    /// Largest gap between a centered difference of `V` and `-i k U`, over interior nodes.
    pub fn divergence_defect(&self) -> f64 {
        let k = self.n as f64;
        let mut worst = 0.0f64;
        for i in 1..self.y.len() - 1 {
            let h = self.y[i + 1] - self.y[i - 1];
            let dv = (self.points[i + 1].v[0] - self.points[i - 1].v[0]) / h;
            worst = worst.max((dv + I * k * self.points[i].u[0]).norm());
        }
        worst
    }

    pub fn residual(&self) -> ResidualField {
        ResidualField {
            t: self.t,
            y: self.y.clone(),
            total: self.points.iter().map(|p| p.residual).collect(),
            bar: self.points.iter().map(|p| p.residual_bar).collect(),
            tilde: self.points.iter().map(|p| p.residual_tilde).collect(),
            tilde_taylor: self.points.iter().map(|p| p.tilde_taylor).collect(),
            tilde_time: self.points.iter().map(|p| p.tilde_time).collect(),
            tilde_cutoff: self.points.iter().map(|p| p.tilde_cutoff).collect(),
        }
    }

    /// CSV rows `y, Re/Im` of `U`, `V` and the three tangential parts.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "y,U_re,U_im,V_re,V_im,U_corrector_re,U_corrector_im,U_regular_re,U_regular_im,U_shear_layer_re,U_shear_layer_im\n",
        );
        for (y, p) in self.y.iter().zip(&self.points) {
            s.push_str(&format!("{y:.6}"));
            for c in [p.u[0], p.v[0], p.u_corrector, p.u_regular, p.u_shear_layer] {
                s.push_str(&format!(",{:.12e},{:.12e}", c.re, c.im));
            }
            s.push('\n');
        }
        s
    }
}

/// Remainder `R = ∂_t U + i k u_s U + V ∂_y u_s - ∂_y^2 U` and its split.
#[derive(Debug, Clone)]
pub struct ResidualField {
    pub t: f64,
    pub y: Vec<f64>,
    pub total: Vec<Complex64>,
    pub bar: Vec<Complex64>,
    pub tilde: Vec<Complex64>,
    /// Taylor-defect terms of `tilde`.
    pub tilde_taylor: Vec<Complex64>,
    /// `i ∂_t ∂_y v_sl` term of `tilde`.
    pub tilde_time: Vec<Complex64>,
    /// What is left of `tilde`: terms carrying derivatives of the cutoff.
    pub tilde_cutoff: Vec<Complex64>,
}

impl ResidualField {
    pub fn norm(&self, alpha: f64) -> f64 {
        weighted_sup(&self.y, &self.total, alpha)
    }

    /// `max |R - (bar + t tilde)|`.
    pub fn split_defect(&self) -> f64 {
        self.total
            .iter()
            .zip(self.bar.iter().zip(&self.tilde))
            .map(|(r, (b, t))| (r - b - t * self.t).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,R_re,R_im,Rbar_re,Rbar_im,Rtilde_re,Rtilde_im\n");
        for i in 0..self.y.len() {
            s.push_str(&format!(
                "{:.6},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.y[i],
                self.total[i].re,
                self.total[i].im,
                self.bar[i].re,
                self.bar[i].im,
                self.tilde[i].re,
                self.tilde[i].im
            ));
        }
        s
    }
}

/// Frozen-coefficient mode around the initial profile.
pub fn assemble_frozen(
    params: &ModeParams,
    profile: &ShearProfile,
    pair: &Eigenpair,
    y: &[f64],
    t: f64,
    ansatz: Ansatz,
) -> Result<ModeField> {
    let mut p = *params;
    p.frozen = true;
    Mode::new(p, pair, Background::Frozen(profile), ansatz)?.field(y, t)
}

/// Mode around the heat flow, evaluated on the field's `y` grid.
pub fn assemble_mode(
    params: &ModeParams,
    field: &HeatFlowField,
    path: &CriticalPath,
    pair: &Eigenpair,
    t: f64,
) -> Result<ModeField> {
    let mut p = *params;
    p.frozen = false;
    check_support(&p, field.y_max())?;
    Mode::new(p, pair, Background::Evolving(path), Ansatz::Corrected)?.field(&field.y, t)
}

/// Remainder of the mode at time `t`.
pub fn residual(
    params: &ModeParams,
    field: &HeatFlowField,
    path: &CriticalPath,
    pair: &Eigenpair,
    t: f64,
) -> Result<ResidualField> {
    Ok(assemble_mode(params, field, path, pair, t)?.residual())
}

fn check_support(p: &ModeParams, y_max: f64) -> Result<()> {
    let (_, hi) = p.seed.support();
    if hi >= y_max {
        return Err(LabError::InvalidParameter(format!(
            "corrector support ends at {hi}, beyond the grid edge {y_max}"
        )));
    }
    Ok(())
}
