//! Initial shear layers, the half-line heat flow they generate, and the
//! critical point carried along by that flow.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::GaussLegendre;

/// Values `(f, f', f'', f''', f'''')` at a point.
pub type Jet = [f64; 5];

/// How `U_s - U0` approaches zero far from the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum DecayClass {
    Exponential { rate: f64 },
    Algebraic { power: f64 },
    Gaussian,
}

/// Built-in initial shear layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `U0 (1 - e^{-y}) + A y^2 e^{-y^2}`
    GaussianBump { u0: f64, amp: f64 },
    /// `U0 y^2 / (1 + y^2) + A y / (1 + y^2)`
    AlgebraicBump { u0: f64, amp: f64 },
    /// `U0 erf(y / 2)`
    Monotone { u0: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianBump { .. } => "gaussian-bump",
            Family::AlgebraicBump { .. } => "algebraic-bump",
            Family::Monotone { .. } => "monotone",
        }
    }

    pub fn u0(&self) -> f64 {
        match *self {
            Family::GaussianBump { u0, .. } | Family::AlgebraicBump { u0, .. } | Family::Monotone { u0 } => u0,
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            Family::GaussianBump { .. } => DecayClass::Exponential { rate: 1.0 },
            Family::AlgebraicBump { .. } => DecayClass::Algebraic { power: 2.0 },
            Family::Monotone { .. } => DecayClass::Gaussian,
        }
    }

    /// `U_s` and its first four derivatives.
    pub fn jet(&self, y: f64) -> Jet {
        match *self {
            Family::GaussianBump { u0, amp } => {
                let e = (-y).exp();
                let b = y2_gauss_jet(y);
                [
                    u0 * (1.0 - e) + amp * b[0],
                    u0 * e + amp * b[1],
                    -u0 * e + amp * b[2],
                    u0 * e + amp * b[3],
                    -u0 * e + amp * b[4],
                ]
            }
            Family::AlgebraicBump { u0, amp } => {
                // 1/(y - i) has derivatives (-1)^n n! (y - i)^{-(n+1)};
                // its real part is y/(1+y^2) and its imaginary part 1/(1+y^2).
                let z = Complex64::new(y, -1.0);
                let mut out = [0.0; 5];
                let mut fact = 1.0;
                for (n, o) in out.iter_mut().enumerate() {
                    if n > 0 {
                        fact *= -(n as f64);
                    }
                    let d = z.powi(-(n as i32 + 1)) * fact;
                    // y^2/(1+y^2) = 1 - 1/(1+y^2)
                    let ramp = if n == 0 { 1.0 - d.im } else { -d.im };
                    *o = u0 * ramp + amp * d.re;
                }
                out
            }
            Family::Monotone { u0 } => {
                let e = erf_ramp_jet(y, 2.0);
                e.map(|v| u0 * v)
            }
        }
    }

    /// `U_s(y) - U0 erf(y/2)`, the part of the profile evolved by quadrature.
    fn remainder(&self, y: f64) -> f64 {
        match *self {
            Family::Monotone { .. } => 0.0,
            _ => self.jet(y)[0] - self.u0() * libm::erf(0.5 * y),
        }
    }
}

/// Derivatives of `y^2 e^{-y^2}` up to fourth order.
fn y2_gauss_jet(y: f64) -> Jet {
    let g = (-y * y).exp();
    let y2 = y * y;
    let y4 = y2 * y2;
    [
        y2 * g,
        (2.0 * y - 2.0 * y * y2) * g,
        (2.0 - 10.0 * y2 + 4.0 * y4) * g,
        (-24.0 * y + 36.0 * y * y2 - 8.0 * y * y4) * g,
        (-24.0 + 156.0 * y2 - 112.0 * y4 + 16.0 * y4 * y2) * g,
    ]
}

/// Physicists' Hermite polynomials `H_0..H_4` at `x`.
fn hermite(x: f64) -> [f64; 5] {
    let mut h = [1.0, 2.0 * x, 0.0, 0.0, 0.0];
    for n in 1..4 {
        h[n + 1] = 2.0 * x * h[n] - 2.0 * n as f64 * h[n - 1];
    }
    h
}

/// `erf(y / s)` and its first four `y`-derivatives.
fn erf_ramp_jet(y: f64, s: f64) -> Jet {
    let x = y / s;
    let g = (-x * x).exp() * 2.0 / (PI.sqrt() * s);
    let h = hermite(x);
    [
        libm::erf(x),
        g,
        -g * h[1] / s,
        g * h[2] / (s * s),
        -g * h[3] / (s * s * s),
    ]
}

pub const CRITICAL_SCAN_MAX: f64 = 30.0;
pub const CRITICAL_SCAN_STEP: f64 = 1e-3;
pub const DEGENERACY_TOL: f64 = 1e-8;

/// An initial shear layer with a located non-degenerate maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    pub family: Family,
    pub u0: f64,
    pub decay_class: DecayClass,
    /// First interior critical point with negative curvature.
    pub a0: f64,
    /// `U_s''(a0)`, negative.
    pub curvature: f64,
}

impl ShearProfile {
    pub fn jet(&self, y: f64) -> Jet {
        self.family.jet(y)
    }

    pub fn value(&self, y: f64) -> f64 {
        self.family.jet(y)[0]
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.family.jet(y)[1]
    }

    /// Sampled invariant diagnostics on `[0, y_max]`.
    pub fn diagnostics(&self, y_max: f64, n: usize) -> ProfileDiagnostics {
        let mut sup_dev = [0.0f64; 5];
        for i in 0..=n {
            let y = y_max * i as f64 / n as f64;
            let mut j = self.jet(y);
            j[0] -= self.u0;
            for k in 0..5 {
                sup_dev[k] = sup_dev[k].max(j[k].abs());
            }
        }
        ProfileDiagnostics {
            at_wall: self.value(0.0),
            far_field_gap: (self.value(y_max) - self.u0).abs(),
            slope_at_a0: self.derivative(self.a0),
            sup_deviation_jet: sup_dev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDiagnostics {
    pub at_wall: f64,
    pub far_field_gap: f64,
    pub slope_at_a0: f64,
    /// `sup |d^k (U_s - U0)|`, `k = 0..4`.
    pub sup_deviation_jet: [f64; 5],
}

/// Build a profile from a family name and parameter map.
///
/// Recognized parameters: `u0` (default 1) and `amp` (default 1).
pub fn make_profile(family: &str, params: &BTreeMap<String, f64>) -> Result<ShearProfile> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let u0 = get("u0", 1.0);
    if !(u0 > 0.0) {
        return Err(LabError::InvalidParameter(format!("u0 = {u0} must be positive")));
    }
    for key in params.keys() {
        if key != "u0" && key != "amp" {
            return Err(LabError::InvalidParameter(format!("unknown profile parameter `{key}`")));
        }
    }
    let fam = match family {
        "gaussian-bump" => Family::GaussianBump { u0, amp: get("amp", 1.0) },
        "algebraic-bump" => Family::AlgebraicBump { u0, amp: get("amp", 1.0) },
        "monotone" => Family::Monotone { u0 },
        other => return Err(LabError::UnknownFamily(other.to_string())),
    };
    from_family(fam)
}

/// Locate the critical point by a dense scan of `U_s'` with bisection polish.
pub fn from_family(family: Family) -> Result<ShearProfile> {
    let d = |y: f64| family.jet(y)[1];
    let n = (CRITICAL_SCAN_MAX / CRITICAL_SCAN_STEP) as usize;
    let mut prev_y = CRITICAL_SCAN_STEP;
    let mut prev = d(prev_y);
    for i in 2..=n {
        let y = i as f64 * CRITICAL_SCAN_STEP;
        let cur = d(y);
        if prev > 0.0 && cur <= 0.0 {
            let a = bisect(d, prev_y, y);
            let curvature = family.jet(a)[2];
            if curvature.abs() < DEGENERACY_TOL {
                return Err(LabError::DegenerateCritical { a, curvature });
            }
            return Ok(ShearProfile {
                family,
                u0: family.u0(),
                decay_class: family.decay_class(),
                a0: a,
                curvature,
            });
        }
        prev = cur;
        prev_y = y;
    }
    Err(LabError::NoCriticalPoint)
}

/// Sign-change bisection down to rounding level.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Relative tolerance accepted from the kernel quadrature.
pub const HEAT_QUAD_TOL: f64 = 1e-10;
/// Half-width of the kernel support, in units of `2 sqrt(t)`.
const KERNEL_REACH: f64 = 9.0;

/// Exact half-line heat flow issued from a shear profile.
///
/// `U_s = U0 erf(y/2) + r(y)`. The erf ramp evolves in closed form to
/// `U0 erf(y / (2 sqrt(1+t)))`; the remainder is extended oddly to the line and
/// convolved with the Gaussian kernel, so `u(t, 0) = 0` holds exactly.
#[derive(Debug, Clone)]
pub struct HeatFlow {
    pub profile: ShearProfile,
    hermite_rule: Arc<(Vec<f64>, Vec<f64>)>,
    hermite_check: Arc<(Vec<f64>, Vec<f64>)>,
    legendre: Arc<GaussLegendre>,
}

impl HeatFlow {
    pub fn new(profile: ShearProfile) -> Self {
        Self {
            profile,
            hermite_rule: Arc::new(gauss_hermite(48)),
            hermite_check: Arc::new(gauss_hermite(36)),
            legendre: Arc::new(GaussLegendre::new(10)),
        }
    }

    /// `u_s(t, y)` and its first four `y`-derivatives.
    pub fn jet(&self, t: f64, y: f64) -> Result<Jet> {
        if t <= 0.0 {
            return Ok(self.profile.jet(y));
        }
        let u0 = self.profile.u0;
        let ramp = erf_ramp_jet(y, 2.0 * (1.0 + t).sqrt()).map(|v| v * u0);
        if matches!(self.profile.family, Family::Monotone { .. }) {
            return Ok(ramp);
        }
        let family = self.profile.family;
        let rem = self.evolve_odd(|z| family.remainder(z), t, y)?;
        let mut out = ramp;
        for k in 0..5 {
            out[k] += rem[k];
        }
        Ok(out)
    }

    /// Heat flow at `(t, y)` of the odd extension of `r`, with four `y`-derivatives,
    /// by Gaussian-kernel quadrature.
    pub fn evolve_odd<R: Fn(f64) -> f64>(&self, r: R, t: f64, y: f64) -> Result<Jet> {
        if t <= 0.0 {
            return Err(LabError::InvalidParameter("kernel quadrature needs t > 0".into()));
        }
        let sig = 2.0 * t.sqrt();
        let (rem, est) = if y >= KERNEL_REACH * sig {
            self.remainder_hermite(&r, y, sig)
        } else {
            self.remainder_legendre(&r, y, sig)
        };
        let scale = 1.0 + rem[0].abs();
        if !(est <= HEAT_QUAD_TOL * scale) {
            return Err(LabError::QuadratureFailure { t, y, estimate: est });
        }
        Ok(rem)
    }

    /// `∂_t u_s = ∂_y^2 u_s`.
    pub fn time_derivative(&self, t: f64, y: f64) -> Result<f64> {
        Ok(self.jet(t, y)?[2])
    }

    /// Full-line Gauss–Hermite form; the reflected image is negligible here.
    fn remainder_hermite<R: Fn(f64) -> f64>(&self, rem: &R, y: f64, sig: f64) -> (Jet, f64) {
        // ∂_y^k ∫ G(y - z) r(z) dz = (-σ)^{-k} π^{-1/2} ∫ e^{-ξ^2} H_k(ξ) r(y - σ ξ) dξ
        let eval = |rule: &(Vec<f64>, Vec<f64>)| -> Jet {
            let mut acc = [0.0; 5];
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let r = rem(y - sig * x);
                let h = hermite(*x);
                for k in 0..5 {
                    acc[k] += w * h[k] * r;
                }
            }
            let mut s = 1.0 / PI.sqrt();
            for a in acc.iter_mut() {
                *a *= s;
                s /= -sig;
            }
            acc
        };
        let fine = eval(&self.hermite_rule);
        let coarse = eval(&self.hermite_check);
        (fine, (fine[0] - coarse[0]).abs())
    }

    /// Composite Gauss–Legendre over `z ∈ [0, y + reach]` with the odd image.
    fn remainder_legendre<R: Fn(f64) -> f64>(&self, rem: &R, y: f64, sig: f64) -> (Jet, f64) {
        let hi = y + KERNEL_REACH * sig;
        let lo = (y - KERNEL_REACH * sig).max(0.0);
        let kernel = |z: f64| -> Jet {
            let r = rem(z);
            let mut out = [0.0; 5];
            let (xa, xb) = ((y - z) / sig, (y + z) / sig);
            let (ha, hb) = (hermite(xa), hermite(xb));
            let (ga, gb) = ((-xa * xa).exp(), (-xb * xb).exp());
            let mut s = 1.0 / (sig * PI.sqrt());
            for k in 0..5 {
                // G^{(k)}(x) = (-1)^k σ^{-k} H_k(x/σ) e^{-(x/σ)^2} / (σ √π)
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out[k] = sign * s * (ha[k] * ga - hb[k] * gb) * r;
                s /= sig;
            }
            out
        };
        let integrate = |a: f64, b: f64, width: f64| -> Jet {
            let panels = (((b - a) / width).ceil() as usize).max(1);
            let h = (b - a) / panels as f64;
            let mut acc = [0.0; 5];
            for p in 0..panels {
                let lo = a + h * p as f64;
                let mid = lo + 0.5 * h;
                for (x, w) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                    let v = kernel(mid + 0.5 * h * x);
                    for k in 0..5 {
                        acc[k] += 0.5 * h * w * v[k];
                    }
                }
            }
            acc
        };
        // Direct term lives on [lo, hi]; the image term only near the wall.
        let mut fine = integrate(lo, hi, 0.5 * sig);
        let mut coarse = integrate(lo, hi, sig);
        if lo > 0.0 {
            let img_hi = (KERNEL_REACH * sig - y).max(0.0).min(lo);
            if img_hi > 0.0 {
                let a = integrate(0.0, img_hi, 0.5 * sig);
                let b = integrate(0.0, img_hi, sig);
                for k in 0..5 {
                    fine[k] += a[k];
                    coarse[k] += b[k];
                }
            }
        }
        (fine, (fine[0] - coarse[0]).abs())
    }
}

/// Gauss–Hermite nodes and weights (weight `e^{-x^2}`) by Golub–Welsch.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Background flow sampled on a space-time grid.
#[derive(Debug, Clone)]
pub struct HeatFlowField {
    pub flow: HeatFlow,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    /// `jets[it * ny + iy]` holds `u_s` and four `y`-derivatives.
    pub jets: Vec<Jet>,
}

impl HeatFlowField {
    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn y_max(&self) -> f64 {
        *self.y.last().unwrap()
    }

    pub fn horizon(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn jet(&self, it: usize, iy: usize) -> &Jet {
        &self.jets[it * self.ny() + iy]
    }

    /// `∂_t u_s` on the grid (equal to the computed `∂_y^2 u_s`).
    pub fn time_derivative(&self, it: usize, iy: usize) -> f64 {
        self.jet(it, iy)[2]
    }

    /// Slice of `(u_s, ∂_y u_s)` at an arbitrary time, by cubic Hermite
    /// interpolation in `t` using `∂_t ∂_y^k u_s = ∂_y^{k+2} u_s`.
    pub fn slice_at(&self, t: f64) -> Vec<[f64; 2]> {
        let nt = self.t.len();
        if nt == 1 || t <= self.t[0] {
            return (0..self.ny()).map(|iy| {
                let j = self.jet(0, iy);
                [j[0], j[1]]
            }).collect();
        }
        let dt = self.t[1] - self.t[0];
        let i = (((t - self.t[0]) / dt).floor() as usize).min(nt - 2);
        let s = ((t - self.t[i]) / dt).clamp(0.0, 1.0);
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        (0..self.ny())
            .map(|iy| {
                let a = self.jet(i, iy);
                let b = self.jet(i + 1, iy);
                let mut out = [0.0; 2];
                for k in 0..2 {
                    out[k] = h00 * a[k] + h10 * dt * a[k + 2] + h01 * b[k] + h11 * dt * b[k + 2];
                }
                out
            })
            .collect()
    }

    /// Sup over interior grid points of `|∂_t u_s - ∂_y^2 u_s|`, with `∂_t`
    /// taken by centered differences in time.
    /// `sup |∂_t u_s - ∂_y^2 u_s|` over interior nodes with `t > 0`, the time derivative taken by
    /// a fourth-order central difference of the kernel solution with step `t / 100`.
    pub fn heat_residual(&self) -> Result<f64> {
        let ny = self.ny();
        let per_slice: Result<Vec<f64>> = self.t[1..]
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                let h = 0.01 * t;
                let mut worst = 0.0f64;
                for iy in 1..ny - 1 {
                    let y = self.y[iy];
                    let u = |s: f64| self.flow.jet(t + s * h, y).map(|j| j[0]);
                    let dudt = (8.0 * (u(1.0)? - u(-1.0)?) - (u(2.0)? - u(-2.0)?)) / (12.0 * h);
                    worst = worst.max((dudt - self.jet(i + 1, iy)[2]).abs());
                }
                Ok(worst)
            })
            .collect();
        Ok(per_slice?.into_iter().fold(0.0, f64::max))
    }

    /// CSV rows `t,y,u_s,du,d2u`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,y,u_s,dy_u_s,dyy_u_s\n");
        for (it, &t) in self.t.iter().enumerate() {
            for (iy, &y) in self.y.iter().enumerate() {
                let j = self.jet(it, iy);
                s.push_str(&format!("{t:.6},{y:.6},{:.12e},{:.12e},{:.12e}\n", j[0], j[1], j[2]));
            }
        }
        s
    }
}

/// Evaluate the heat flow on the product grid (time slices in parallel).
pub fn solve_heat(profile: &ShearProfile, y: &[f64], t: &[f64]) -> Result<HeatFlowField> {
    if y.len() < 2 || t.is_empty() {
        return Err(LabError::InvalidParameter("grids need points".into()));
    }
    let flow = HeatFlow::new(*profile);
    let slices: Result<Vec<Vec<Jet>>> = t
        .par_iter()
        .map(|&tt| y.iter().map(|&yy| flow.jet(tt, yy)).collect())
        .collect();
    let jets = slices?.into_iter().flatten().collect();
    Ok(HeatFlowField {
        flow,
        y: y.to_vec(),
        t: t.to_vec(),
        jets,
    })
}

pub const DEFAULT_CURVATURE_FLOOR: f64 = 0.1;

/// State of the critical point at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub a: f64,
    /// `a'(t) = -∂_y^3 u_s / ∂_y^2 u_s` at `(t, a)`.
    pub a_dot: f64,
    /// `∂_y^2 u_s(t, a)`.
    pub lambda: f64,
    pub lambda_dot: f64,
    /// `u_s(t, a)`.
    pub u_at_a: f64,
    /// Full jet of `u_s` at `(t, a)`.
    pub jet: Jet,
}

fn path_point(flow: &HeatFlow, t: f64, a: f64) -> Result<PathPoint> {
    let j = flow.jet(t, a)?;
    let a_dot = -j[3] / j[2];
    Ok(PathPoint {
        t,
        a,
        a_dot,
        lambda: j[2],
        lambda_dot: j[4] + j[3] * a_dot,
        u_at_a: j[0],
        jet: j,
    })
}

/// Critical point trajectory `a(t)` with the curvature `lambda(t)` along it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPath {
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub lambda: Vec<f64>,
    pub points: Vec<PathPoint>,
    pub horizon: f64,
    #[serde(skip)]
    flow: Option<HeatFlow>,
}

impl CriticalPath {
    pub fn flow(&self) -> &HeatFlow {
        self.flow.as_ref().expect("path carries its flow")
    }

    /// Path state at arbitrary `t`: Hermite interpolation of `a` and `a'`, then Newton on `∂_y u_s = 0`.
    pub fn at(&self, t: f64) -> Result<PathPoint> {
        if t > self.horizon + 1e-12 || t < 0.0 {
            return Err(LabError::HorizonExceeded { t, horizon: self.horizon });
        }
        let n = self.t.len();
        if n == 1 {
            return Ok(self.points[0]);
        }
        let dt = self.t[1] - self.t[0];
        let i = ((t / dt).floor() as usize).min(n - 2);
        let s = ((t - self.t[i]) / dt).clamp(0.0, 1.0);
        let (p, q) = (&self.points[i], &self.points[i + 1]);
        let mut a = (2.0 * s * s * s - 3.0 * s * s + 1.0) * p.a
            + (s * s * s - 2.0 * s * s + s) * dt * p.a_dot
            + (-2.0 * s * s * s + 3.0 * s * s) * q.a
            + (s * s * s - s * s) * dt * q.a_dot;
        // Newton polish onto the root of ∂_y u_s(t, ·)
        for _ in 0..3 {
            let j = self.flow().jet(t, a)?;
            let step = j[1] / j[2];
            a -= step;
            if step.abs() < 1e-15 * a.abs().max(1.0) {
                break;
            }
        }
        path_point(self.flow(), t, a)
    }

    pub fn min_a(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_a(&self) -> f64 {
        self.a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// RK4 substeps per interval of the field's time grid.
pub const PATH_SUBSTEPS: usize = 4;

/// Integrate `a' = -∂_t ∂_y u_s / ∂_y^2 u_s` with classical RK4 over the field's time grid.
///
/// Fails with [`LabError::CurvatureVanished`] as soon as `|lambda|` drops under
/// `floor_ratio * |lambda(0)|`.
pub fn track_critical_point(field: &HeatFlowField, a0: f64, floor_ratio: f64) -> Result<CriticalPath> {
    let flow = &field.flow;
    let first = path_point(flow, field.t[0], a0)?;
    if !(first.lambda < 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "curvature at a0 = {a0} is {} (must be negative)",
            first.lambda
        )));
    }
    let floor = floor_ratio * first.lambda.abs();
    let rate = |t: f64, a: f64| -> Result<f64> {
        let j = flow.jet(t, a)?;
        if j[2].abs() < floor {
            return Err(LabError::CurvatureVanished { t });
        }
        Ok(-j[3] / j[2])
    };
    let mut points = vec![first];
    let mut a = a0;
    for w in field.t.windows(2) {
        let h = (w[1] - w[0]) / PATH_SUBSTEPS as f64;
        for i in 0..PATH_SUBSTEPS {
            let t = w[0] + h * i as f64;
            let k1 = rate(t, a)?;
            let k2 = rate(t + 0.5 * h, a + 0.5 * h * k1)?;
            let k3 = rate(t + 0.5 * h, a + 0.5 * h * k2)?;
            let k4 = rate(t + h, a + h * k3)?;
            a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let p = path_point(flow, w[1], a)?;
        if p.lambda.abs() < floor || p.lambda >= 0.0 {
            return Err(LabError::CurvatureVanished { t: w[1] });
        }
        points.push(p);
    }
    Ok(CriticalPath {
        t: field.t.clone(),
        a: points.iter().map(|p| p.a).collect(),
        lambda: points.iter().map(|p| p.lambda).collect(),
        horizon: *field.t.last().unwrap(),
        points,
        flow: Some(flow.clone()),
    })
}

/// Root of `∂_y u_s(t, ·)` near `guess`, by bracketing and bisection.
pub fn critical_point_at(flow: &HeatFlow, t: f64, guess: f64, half_width: f64) -> Result<f64> {
    let d = |y: f64| flow.jet(t, y).map(|j| j[1]).unwrap_or(f64::NAN);
    let n = 200;
    let lo = (guess - half_width).max(1e-6);
    let h = (guess + half_width - lo) / n as f64;
    let mut best: Option<f64> = None;
    let mut prev = d(lo);
    for i in 1..=n {
        let y = lo + h * i as f64;
        let cur = d(y);
        if prev > 0.0 && cur <= 0.0 {
            let root = bisect(d, y - h, y);
            if best.is_none_or(|b| (root - guess).abs() < (b - guess).abs()) {
                best = Some(root);
            }
        }
        prev = cur;
    }
    best.ok_or(LabError::NoCriticalPoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::uniform_grid;

    fn fd_check(f: Family, y: f64) {
        let h = 1e-4;
        let j = f.jet(y);
        for k in 0..4 {
            let fd = (f.jet(y + h)[k] - f.jet(y - h)[k]) / (2.0 * h);
            assert!((fd - j[k + 1]).abs() < 1e-6 * (1.0 + j[k + 1].abs()), "{f:?} k={k} y={y}");
        }
    }

    #[test]
    fn family_jets_are_consistent() {
        for y in [0.3, 1.0, 2.2, 5.0] {
            fd_check(Family::GaussianBump { u0: 1.0, amp: 1.0 }, y);
            fd_check(Family::AlgebraicBump { u0: 1.0, amp: 1.0 }, y);
            fd_check(Family::Monotone { u0: 1.3 }, y);
        }
    }

    #[test]
    fn families_vanish_at_wall() {
        for f in [
            Family::GaussianBump { u0: 1.0, amp: 1.0 },
            Family::AlgebraicBump { u0: 1.0, amp: 1.0 },
            Family::Monotone { u0: 1.0 },
        ] {
            assert_eq!(f.jet(0.0)[0], 0.0);
        }
    }

    #[test]
    fn monotone_profile_rejected() {
        let err = make_profile("monotone", &BTreeMap::new()).unwrap_err();
        assert_eq!(err, LabError::NoCriticalPoint);
    }

    #[test]
    fn unknown_family_and_parameter() {
        assert!(matches!(make_profile("blasius", &BTreeMap::new()), Err(LabError::UnknownFamily(_))));
        let mut p = BTreeMap::new();
        p.insert("width".to_string(), 2.0);
        assert!(matches!(make_profile("gaussian-bump", &p), Err(LabError::InvalidParameter(_))));
    }

    #[test]
    fn algebraic_bump_critical_point_is_one_plus_sqrt_two() {
        // U' ∝ 1 + 2y - y^2 for u0 = amp = 1.
        let p = make_profile("algebraic-bump", &BTreeMap::new()).unwrap();
        assert!((p.a0 - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!(p.curvature < 0.0);
    }

    #[test]
    fn hermite_rule_is_exact_on_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn erf_profile_is_self_similar() {
        let p = ShearProfile {
            family: Family::Monotone { u0: 1.0 },
            u0: 1.0,
            decay_class: DecayClass::Gaussian,
            a0: 1.0,
            curvature: -1.0,
        };
        let flow = HeatFlow::new(p);
        for &t in &[0.0, 0.1, 0.25] {
            for &y in &[0.0, 0.5, 3.0] {
                let u = flow.jet(t, y).unwrap()[0];
                assert!((u - libm::erf(y / (2.0 * (1.0 + t as f64).sqrt()))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn field_interpolation_matches_direct_evaluation() {
        let p = make_profile("gaussian-bump", &BTreeMap::new()).unwrap();
        let y = uniform_grid(0.0, 6.0, 60);
        let t = uniform_grid(0.0, 0.1, 20);
        let field = solve_heat(&p, &y, &t).unwrap();
        let s = field.slice_at(0.0337);
        // Away from the wall: the profiles do not satisfy U''(0) = 0, so u_s has
        // an initial corner layer at y = 0.
        for (iy, &yy) in y.iter().enumerate().skip(5) {
            let d = field.flow.jet(0.0337, yy).unwrap();
            assert!((s[iy][0] - d[0]).abs() < 1e-8, "y={yy}");
            assert!((s[iy][1] - d[1]).abs() < 1e-7, "y={yy}");
        }
    }
}
