//! Weighted norms on half-line grids, growth-rate fits and tail classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Anything with a modulus.
pub trait Magnitude: Copy {
    fn magnitude(self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormFlavor {
    WeightedSup,
    ModeHm,
}

/// Parameters of a weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub alpha: f64,
    pub m: f64,
    pub mu: f64,
    pub flavor: NormFlavor,
}

impl NormSpec {
    pub fn new(alpha: f64, m: f64, mu: f64, flavor: NormFlavor) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(LabError::InvalidParameter(format!("alpha = {alpha} must be >= 0")));
        }
        if !(m >= 0.0) {
            return Err(LabError::InvalidParameter(format!("m = {m} must be >= 0")));
        }
        if !(0.0..0.5).contains(&mu) {
            return Err(LabError::InvalidParameter(format!("mu = {mu} must lie in [0, 1/2)")));
        }
        Ok(Self { alpha, m, mu, flavor })
    }

    pub fn eval<T: Magnitude>(&self, y: &[f64], f: &[T], k: f64) -> f64 {
        match self.flavor {
            NormFlavor::WeightedSup => weighted_sup(y, f, self.alpha),
            NormFlavor::ModeHm => mode_sobolev(y, f, k, self.m, self.alpha),
        }
    }
}

/// `max_j e^{alpha y_j} |f_j|`, the grid proxy for the `W_alpha^{0,inf}` norm.
pub fn weighted_sup<T: Magnitude>(y: &[f64], f: &[T], alpha: f64) -> f64 {
    y.iter()
        .zip(f)
        .map(|(&y, &v)| {
            let m = v.magnitude();
            if m == 0.0 { 0.0 } else { (alpha * y).exp() * m }
        })
        .fold(0.0, f64::max)
}

/// `W_alpha^{m,inf}` norm from sampled derivatives `derivs[i] = f^{(i)}`.
///
/// Takes the maximum over `j <= m` of `sup |d^j (e^{alpha y} f)|`.
pub fn weighted_sobolev(y: &[f64], derivs: &[Vec<Complex64>], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for j in 0..derivs.len() {
        let mut binom = 1.0;
        let mut coeffs = Vec::with_capacity(j + 1);
        for i in 0..=j {
            coeffs.push(binom * alpha.powi((j - i) as i32));
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        for (idx, &yy) in y.iter().enumerate() {
            let mut acc = Complex64::default();
            for (i, c) in coeffs.iter().enumerate() {
                acc += derivs[i][idx] * *c;
            }
            if acc.norm() > 0.0 {
                best = best.max((alpha * yy).exp() * acc.norm());
            }
        }
    }
    best
}

/// Single-mode `H_alpha^m` norm: `(1 + k^2)^{m/2} ||f||_{W_alpha^{0,inf}}`.
pub fn mode_sobolev<T: Magnitude>(y: &[f64], f: &[T], k: f64, m: f64, alpha: f64) -> f64 {
    (1.0 + k * k).powf(0.5 * m) * weighted_sup(y, f, alpha)
}

/// Ordinary least-squares line; returns `(slope, intercept, rms residual)`.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Minimum number of samples accepted by [`fit_rate`].
pub const MIN_FIT_SAMPLES: usize = 8;

/// Slope of `log ||u||` against `t` over `[window.0, window.1]`.
pub fn fit_rate(t: &[f64], log_norm: &[f64], window: (f64, f64)) -> Result<(f64, f64)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(log_norm)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(LabError::WindowTooShort {
            got: xs.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let (slope, _, res) = least_squares_line(&xs, &ys);
    Ok((slope, res))
}

/// Log–log power-law fit `sigma = c k^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
}

pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerLaw> {
    let mut ks: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ks.dedup();
    if pairs.len() < 4 || ks.len() < 4 || pairs.iter().any(|p| p.0 <= 0.0 || p.1 <= 0.0) {
        return Err(LabError::InsufficientData {
            got: ks.len(),
            need: 4,
        });
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (p, c, res) = least_squares_line(&x, &y);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let rss = res * res * n;
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(PowerLaw {
        exponent: p,
        prefactor: c.exp(),
        residual: res,
        stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum TailClass {
    Exponential { rate: f64 },
    Algebraic { power: f64 },
    Faster,
}

pub const TAIL_FLOOR: f64 = 1e-14;

/// Classify the decay of `|f|` on the far half of the grid.
///
/// Fits `log|f|` against `y` (exponential) and against `log(1 + y)` (algebraic) and
/// keeps the smaller residual. A clearly concave `log|f|` in `y` is reported as
/// faster than any exponential.
pub fn tail_class<T: Magnitude>(y: &[f64], f: &[T]) -> Result<TailClass> {
    let ymax = y.iter().copied().fold(f64::MIN, f64::max);
    let (mut ys, mut logs) = (Vec::new(), Vec::new());
    for (&yy, &v) in y.iter().zip(f) {
        let m = v.magnitude();
        if yy >= 0.5 * ymax && yy > 0.0 && m > TAIL_FLOOR {
            ys.push(yy);
            logs.push(m.ln());
        }
    }
    if ys.len() < MIN_FIT_SAMPLES {
        return Err(LabError::TailBelowFloor);
    }
    let (se, _, re) = least_squares_line(&ys, &logs);
    let logy: Vec<f64> = ys.iter().map(|v| v.ln_1p()).collect();
    let (sa, _, ra) = least_squares_line(&logy, &logs);
    // Quadratic-in-y check for super-exponential decay.
    let (qa, rq) = quadratic_fit(&ys, &logs);
    if qa < 0.0 && rq < 1e-2 * re.min(ra) && rq < 1e-6_f64.max(1e-3 * re) {
        return Ok(TailClass::Faster);
    }
    if re <= ra {
        Ok(TailClass::Exponential { rate: -se })
    } else {
        Ok(TailClass::Algebraic { power: -sa })
    }
}

/// Leading coefficient and rms residual of a least-squares parabola.
fn quadratic_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let u = xi - mx;
        let row = nalgebra::Vector3::new(1.0, u, u * u);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let Some(c) = ata.lu().solve(&aty) else {
        return (0.0, f64::INFINITY);
    };
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let u = xi - mx;
            (yi - c[0] - c[1] * u - c[2] * u * u).powi(2)
        })
        .sum();
    (c[2], (rss / n as f64).sqrt())
}

/// One row of a growth scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: f64,
    pub rate: f64,
    pub window: (f64, f64),
    pub fit_residual: f64,
}

/// Fitted rates across wavenumbers with the power-law summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub power_law: Option<PowerLaw>,
    /// Set when the power law could not be fitted.
    pub power_law_error: Option<String>,
    pub sigma0: f64,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
}

impl GrowthReport {
    pub fn from_rows(rows: Vec<GrowthRow>, sigma0: f64) -> Self {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.k, r.rate)).collect();
        let (power_law, power_law_error) = match fit_power_law(&pairs) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.kind().to_string())),
        };
        Self {
            rows,
            power_law,
            power_law_error,
            sigma0,
            c0: None,
            c1: None,
        }
    }
}
