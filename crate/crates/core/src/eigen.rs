//! The shear-layer dispersion problem.
//!
//! For a complex `tau` and curvature sign `s`, the profile `W` solves
//!
//! ```text
//! (tau + s z^2)^2 W' + i ((tau + s z^2) W)''' = 0,   W(-inf) = 0,  W(+inf) = 1.
//! ```
//!
//! Writing `q = tau + s z^2` and `Phi = q W`, the equation becomes the linear
//! third-order system `Phi''' = i (q Phi' - 2 s z Phi)`. `q` itself is an exact
//! solution, and at large `|z|` the remaining two solutions behave like
//! `exp(±mu z^2 / 2)` with `mu^2 = i s`. An eigenfunction is therefore the
//! decaying solution on the left, and `q` plus the decaying solution on the
//! right, glued with C^2 continuity at the matching point.
//!
//! Tails are shot inward from `±Z`, where the decaying branch is the dominant
//! one, so the integration purifies itself.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ode::{Dopri5, State};
use crate::profiles::CriticalPath;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Rectangle of the complex plane scanned for eigenvalue seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for SearchRect {
    fn default() -> Self {
        Self {
            re_min: -5.0,
            re_max: 5.0,
            im_min: -5.0,
            im_max: -0.05,
            n_re: 21,
            n_im: 11,
        }
    }
}

impl SearchRect {
    fn contains(&self, tau: Complex64) -> bool {
        tau.re >= self.re_min && tau.re <= self.re_max && tau.im >= self.im_min && tau.im <= self.im_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionProblem {
    /// Sign of the curvature at the critical point, `-1` or `+1`.
    pub sign: f64,
    /// Half-width of the truncated domain.
    pub z_max: f64,
    /// Spacing of the output grid.
    pub step: f64,
    /// Spacing used while scanning seeds.
    pub seed_step: f64,
    pub z_match: f64,
    pub rtol: f64,
    pub tol_match: f64,
    pub search: SearchRect,
}

impl Default for DispersionProblem {
    fn default() -> Self {
        Self {
            sign: -1.0,
            z_max: 12.0,
            step: 1e-3,
            seed_step: 2e-2,
            z_match: 0.0,
            rtol: 1e-10,
            tol_match: 1e-10,
            search: SearchRect::default(),
        }
    }
}

impl DispersionProblem {
    fn validate(&self) -> Result<()> {
        if self.sign.abs() != 1.0 {
            return Err(LabError::InvalidParameter("sign must be +1 or -1".into()));
        }
        if !(self.step > 0.0 && self.seed_step > 0.0 && self.z_max > 2.0) {
            return Err(LabError::InvalidParameter("grid sizes must be positive".into()));
        }
        if self.z_match.abs() >= self.z_max - 1.5 {
            return Err(LabError::InvalidParameter("matching point too close to the tails".into()));
        }
        Ok(())
    }

    /// Uniform grid on `[-Z, Z]` at spacing `h`; returns the grid and the matching index.
    fn grid(&self, h: f64) -> (Vec<f64>, usize) {
        let n = (2.0 * self.z_max / h).round() as usize;
        let h = 2.0 * self.z_max / n as f64;
        let z: Vec<f64> = (0..=n).map(|i| -self.z_max + h * i as f64).collect();
        let m = ((self.z_match + self.z_max) / h).round() as usize;
        (z, m)
    }

    fn mu(&self) -> Complex64 {
        -(I * self.sign).sqrt()
    }

    /// Two-term WKB log-derivative of the selected branch.
    fn log_derivative(&self, tau: Complex64, z: f64, branch: Branch) -> Complex64 {
        let mu = match branch {
            Branch::Decaying => self.mu(),
            Branch::Growing => -self.mu(),
        };
        let c1 = (tau * mu * self.sign - 5.0) * 0.5;
        mu * z + c1 / z
    }
}

/// `q = tau + s z^2` with its first two derivatives.
fn q_jet(tau: Complex64, sign: f64, z: f64) -> [Complex64; 3] {
    [
        tau + sign * z * z,
        Complex64::new(2.0 * sign * z, 0.0),
        Complex64::new(2.0 * sign, 0.0),
    ]
}

fn rhs(tau: Complex64, sign: f64) -> impl Fn(f64, &State<3>) -> State<3> {
    move |z, y| {
        let q = tau + sign * z * z;
        [y[1], y[2], I * (q * y[1] - y[0] * (2.0 * sign * z))]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Decaying,
    Growing,
}

/// One tail solution `(Phi, Phi', Phi'')` on grid nodes, ordered by increasing `z`.
///
/// On the right the stored function is `Phi - q = q (W - 1)`.
#[derive(Debug, Clone)]
pub struct TailSolution {
    pub side: Side,
    pub z: Vec<f64>,
    pub jet: Vec<State<3>>,
}

impl TailSolution {
    /// Value at the matching end (largest `z` on the left, smallest on the right).
    pub fn at_match(&self) -> State<3> {
        match self.side {
            Side::Left => *self.jet.last().unwrap(),
            Side::Right => self.jet[0],
        }
    }
}

/// Integrate one tail inward from `±Z` to the matching point.
pub fn shoot_tail(
    tau: Complex64,
    problem: &DispersionProblem,
    side: Side,
    branch: Branch,
    h: f64,
) -> Result<TailSolution> {
    if tau.im == 0.0 {
        return Err(LabError::InvalidParameter(
            "tau on the real axis: the growth/decay selection degenerates".into(),
        ));
    }
    problem.validate()?;
    let (grid, m) = problem.grid(h);
    let f = rhs(tau, problem.sign);
    let solver = Dopri5 {
        rtol: problem.rtol,
        ..Dopri5::default()
    };
    let order: Vec<usize> = match side {
        Side::Right => (m..grid.len()).rev().collect(),
        Side::Left => (0..=m).collect(),
    };
    let z0 = grid[order[0]];
    let lam = problem.log_derivative(tau, z0, branch);
    let dlam = match branch {
        Branch::Decaying => problem.mu(),
        Branch::Growing => -problem.mu(),
    } - ((tau * problem.mu() * problem.sign - 5.0) * 0.5) / (z0 * z0);
    let mut y: State<3> = [Complex64::new(1.0, 0.0), lam, lam * lam + dlam];
    let check_z = z0 - z0.signum();
    let mut jets = Vec::with_capacity(order.len());
    jets.push(y);
    let mut checked = false;
    for w in order.windows(2) {
        let (za, zb) = (grid[w[0]], grid[w[1]]);
        y = solver
            .advance(&f, za, zb, &y)
            .ok_or(LabError::TailBlowup { z: zb })?;
        if y[0].norm() > 1e280 {
            return Err(LabError::TailBlowup { z: zb });
        }
        if !checked && (zb - check_z) * z0.signum() <= 0.0 {
            checked = true;
            let expect = problem.log_derivative(tau, zb, branch);
            let got = y[1] / y[0];
            if (got - expect).norm() > 0.1 * expect.norm() {
                return Err(LabError::TailBlowup { z: zb });
            }
        }
        jets.push(y);
    }
    if side == Side::Right {
        jets.reverse();
    }
    let z = match side {
        Side::Right => grid[m..].to_vec(),
        Side::Left => grid[..=m].to_vec(),
    };
    Ok(TailSolution { side, z, jet: jets })
}

/// Decaying tails on both sides at the problem's output spacing.
pub fn shoot_tails(tau: Complex64, problem: &DispersionProblem) -> Result<(TailSolution, TailSolution)> {
    let left = shoot_tail(tau, problem, Side::Left, Branch::Decaying, problem.step)?;
    let right = shoot_tail(tau, problem, Side::Right, Branch::Decaying, problem.step)?;
    Ok((left, right))
}

fn det3(c0: &State<3>, c1: &State<3>, c2: &State<3>) -> Complex64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

fn norm3(v: &State<3>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized C^2 gluing defect at the matching point.
///
/// Each tail is scaled to unit length, so the value is a determinant of unit
/// columns and is zero exactly when `tau` is an eigenvalue.
pub fn matching_defect(tau: Complex64, problem: &DispersionProblem) -> Result<Complex64> {
    defect_at_step(tau, problem, problem.step)
}

fn defect_at_step(tau: Complex64, problem: &DispersionProblem, h: f64) -> Result<Complex64> {
    let left = shoot_tail(tau, problem, Side::Left, Branch::Decaying, h)?;
    let right = shoot_tail(tau, problem, Side::Right, Branch::Decaying, h)?;
    Ok(defect_from_tails(tau, problem, &left, &right))
}

fn defect_from_tails(
    tau: Complex64,
    problem: &DispersionProblem,
    left: &TailSolution,
    right: &TailSolution,
) -> Complex64 {
    let l = left.at_match();
    let r = right.at_match();
    let b = q_jet(tau, problem.sign, problem.z_match);
    det3(&l, &r, &b) / (norm3(&l) * norm3(&r) * norm3(&b))
}

fn newton(
    mut tau: Complex64,
    problem: &DispersionProblem,
    h: f64,
    tol: f64,
) -> Option<Complex64> {
    for _ in 0..60 {
        let f0 = defect_at_step(tau, problem, h).ok()?;
        if f0.norm() < 1e-15 {
            return Some(tau);
        }
        let d = 1e-7 * tau.norm().max(1.0);
        let fr = defect_at_step(tau + d, problem, h).ok()?;
        let fi = defect_at_step(tau + I * d, problem, h).ok()?;
        let (jr, ji) = ((fr - f0) / d, (fi - f0) / d);
        // Real 2x2 Jacobian: columns d f / d Re tau, d f / d Im tau.
        let (a, b, c, e) = (jr.re, ji.re, jr.im, ji.im);
        let det = a * e - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dre = (e * f0.re - b * f0.im) / det;
        let dim = (-c * f0.re + a * f0.im) / det;
        let mut step = Complex64::new(dre, dim);
        if step.norm() > 1.0 {
            step *= 1.0 / step.norm();
        }
        tau -= step;
        if !tau.re.is_finite() || tau.im == 0.0 || tau.norm() > 50.0 {
            return None;
        }
        if step.norm() < tol {
            return Some(tau);
        }
    }
    None
}

/// Eigenvalue and assembled profiles of the dispersion problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenpair {
    pub tau: Complex64,
    pub sign: f64,
    pub z_match: f64,
    pub z: Vec<f64>,
    /// `Phi = q W` and its first two derivatives (smooth across the matching point).
    pub phi: Vec<[Complex64; 3]>,
    /// `W`, `W'`, `W''`.
    pub w: Vec<[Complex64; 3]>,
    /// One-sided jets of `V` at `z = 0`: `(V, V', V'')` from the left and from the right.
    pub v_left_at_zero: [Complex64; 3],
    pub v_right_at_zero: [Complex64; 3],
    /// Sup over the grid of the ODE residual and the gluing mismatch.
    pub residual_norm: f64,
    /// Mismatch of the two tail reconstructions at the matching point.
    pub matching_residual: f64,
    pub defect_norm: f64,
    /// Every root located in the search rectangle (before the `Im < 0` filter).
    pub roots: Vec<Complex64>,
}

impl Eigenpair {
    pub fn grid_step(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// Jumps `([V], [V'], [V''])` across `z = 0`.
    pub fn jumps(&self) -> [Complex64; 3] {
        let mut j = [Complex64::default(); 3];
        for (k, jk) in j.iter_mut().enumerate() {
            *jk = self.v_right_at_zero[k] - self.v_left_at_zero[k];
        }
        j
    }

    /// `Phi` and its derivatives up to third order at any `z` (zero outside the grid on the left).
    pub fn phi_at(&self, z: f64) -> [Complex64; 4] {
        let z0 = self.z[0];
        let zn = *self.z.last().unwrap();
        let q = q_jet(self.tau, self.sign, z);
        if z <= z0 {
            return [Complex64::default(); 4];
        }
        if z >= zn {
            return [q[0], q[1], q[2], Complex64::default()];
        }
        let h = self.grid_step();
        let i = (((z - z0) / h).floor() as usize).min(self.z.len() - 2);
        let t = (z - self.z[i]) / h;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let c0 = p0[0];
        let c1 = p0[1] * h;
        let c2 = p0[2] * (0.5 * h * h);
        let pp = p1[0] - c0 - c1 - c2;
        let dd = p1[1] * h - c1 - c2 * 2.0;
        let ss = p1[2] * (h * h) - c2 * 2.0;
        let c3 = pp * 10.0 - dd * 4.0 + ss * 0.5;
        let c4 = pp * -15.0 + dd * 7.0 - ss;
        let c5 = pp * 6.0 - dd * 3.0 + ss * 0.5;
        let v = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let d1 = c1 + t * (c2 * 2.0 + t * (c3 * 3.0 + t * (c4 * 4.0 + t * c5 * 5.0)));
        let d2 = c2 * 2.0 + t * (c3 * 6.0 + t * (c4 * 12.0 + t * c5 * 20.0));
        let d1 = d1 / h;
        let d2 = d2 / (h * h);
        let d3 = I * (q[0] * d1 - v * (2.0 * self.sign * z));
        [v, d1, d2, d3]
    }

    /// Shear-layer profile `V = Phi - 1_{z>0} q` and derivatives up to third order.
    pub fn v_at(&self, z: f64) -> [Complex64; 4] {
        self.v_one_sided(z, z > 0.0)
    }

    /// `V` with the side of the jump at `z = 0` chosen explicitly.
    pub fn v_one_sided(&self, z: f64, right: bool) -> [Complex64; 4] {
        let mut p = self.phi_at(z);
        if right {
            let q = q_jet(self.tau, self.sign, z);
            for k in 0..3 {
                p[k] -= q[k];
            }
        }
        if z >= *self.z.last().unwrap() {
            return [Complex64::default(); 4];
        }
        p
    }

    /// `V` sampled on the grid.
    pub fn v_samples(&self) -> Vec<Complex64> {
        self.z
            .iter()
            .zip(&self.phi)
            .map(|(&z, p)| {
                if z > 0.0 {
                    p[0] - q_jet(self.tau, self.sign, z)[0]
                } else {
                    p[0]
                }
            })
            .collect()
    }

    /// Decay rate `c` of a fitted envelope `|V| ≲ exp(-c |z|)` on the outer thirds of the grid.
    pub fn tail_decay_rate(&self) -> f64 {
        let zmax = *self.z.last().unwrap();
        let v = self.v_samples();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (&z, val) in self.z.iter().zip(&v) {
            if z.abs() >= zmax / 3.0 && val.norm() > 1e-200 {
                xs.push(z.abs());
                ys.push(val.norm().ln());
            }
        }
        -crate::norms::least_squares_line(&xs, &ys).0
    }

    /// Sup over the grid of `|q^2 W' + i (qW)'''|` using integrator derivatives.
    pub fn ode_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, &z) in self.z.iter().enumerate() {
            let q = q_jet(self.tau, self.sign, z);
            let [w, w1, w2] = self.w[k];
            let p = self.phi[k];
            let phi3 = I * (q[0] * p[1] - p[0] * (2.0 * self.sign * z));
            // W''' recovered from Phi''' = 3 q'' W' + 3 q' W'' + q W'''.
            let w3 = (phi3 - q[2] * w1 * 3.0 - q[1] * w2 * 3.0) / q[0];
            let third = q[2] * w1 * 3.0 + q[1] * w2 * 3.0 + q[0] * w3;
            let res = q[0] * q[0] * w1 + I * third;
            let scale = 1.0 + (q[0] * q[0] * w1).norm();
            worst = worst.max(res.norm() / scale);
            let _ = w;
        }
        worst
    }
}

/// Locate the eigenvalue with the most negative imaginary part and assemble `W` and `V`.
pub fn find_tau(problem: &DispersionProblem) -> Result<Eigenpair> {
    problem.validate()?;
    let rect = problem.search;
    let seeds: Vec<Complex64> = (0..rect.n_im)
        .flat_map(|j| {
            (0..rect.n_re).map(move |i| {
                let re = rect.re_min + (rect.re_max - rect.re_min) * i as f64 / (rect.n_re.max(2) - 1) as f64;
                let im = rect.im_min + (rect.im_max - rect.im_min) * j as f64 / (rect.n_im.max(2) - 1) as f64;
                Complex64::new(re, im)
            })
        })
        .collect();
    let values: Vec<f64> = seeds
        .par_iter()
        .map(|&tau| {
            defect_at_step(tau, problem, problem.seed_step)
                .map(|d| d.norm())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    // Local minima of |defect| over the seed lattice.
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= rect.n_re as isize || j >= rect.n_im as isize {
            f64::INFINITY
        } else {
            values[j as usize * rect.n_re + i as usize]
        }
    };
    let mut starts = Vec::new();
    for j in 0..rect.n_im as isize {
        for i in 0..rect.n_re as isize {
            let v = at(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for dj in -1..=1 {
                for di in -1..=1 {
                    if (di, dj) != (0, 0) && at(i + di, j + dj) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push(seeds[j as usize * rect.n_re + i as usize]);
            }
        }
    }
    let found: Vec<Complex64> = starts
        .par_iter()
        .filter_map(|&s| {
            let coarse = newton(s, problem, problem.seed_step, 1e-8)?;
            newton(coarse, problem, problem.step, 1e-13)
        })
        .collect();
    let mut roots: Vec<Complex64> = Vec::new();
    for r in found {
        let d = defect_at_step(r, problem, problem.step).map(|d| d.norm()).unwrap_or(f64::INFINITY);
        if d < problem.tol_match && rect.contains(r) && roots.iter().all(|o| (o - r).norm() > 1e-6) {
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap().then(a.re.partial_cmp(&b.re).unwrap()));
    let tau = *roots.iter().find(|r| r.im < 0.0).ok_or(LabError::NoRootFound)?;
    let mut pair = assemble(tau, problem)?;
    pair.roots = roots;
    Ok(pair)
}

/// Build the eigenpair profiles for a converged `tau`.
pub fn assemble(tau: Complex64, problem: &DispersionProblem) -> Result<Eigenpair> {
    let (left, right) = shoot_tails(tau, problem)?;
    let defect = defect_from_tails(tau, problem, &left, &right);
    let l = left.at_match();
    let r = right.at_match();
    let b = q_jet(tau, problem.sign, problem.z_match);
    // Least squares for c_L L - c_R R = b.
    let a = DMatrix::from_fn(3, 2, |i, j| if j == 0 { l[i] } else { -r[i] });
    let rhs_v = DVector::from_fn(3, |i, _| b[i]);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&rhs_v, 1e-300)
        .map_err(|e| LabError::InvalidParameter(e.to_string()))?;
    let (cl, cr) = (c[0], c[1]);
    let mismatch = (&a * &c - &rhs_v).norm() / norm3(&b);

    let mut z = left.z.clone();
    z.extend_from_slice(&right.z[1..]);
    let mut phi = Vec::with_capacity(z.len());
    for j in &left.jet {
        phi.push([j[0] * cl, j[1] * cl, j[2] * cl]);
    }
    for (zz, j) in right.z.iter().zip(&right.jet).skip(1) {
        let q = q_jet(tau, problem.sign, *zz);
        phi.push([q[0] + j[0] * cr, q[1] + j[1] * cr, q[2] + j[2] * cr]);
    }
    let w: Vec<[Complex64; 3]> = z
        .iter()
        .zip(&phi)
        .map(|(&zz, p)| {
            let q = q_jet(tau, problem.sign, zz);
            let w0 = p[0] / q[0];
            let w1 = (p[1] - q[1] * w0) / q[0];
            let w2 = (p[2] - q[1] * w1 * 2.0 - q[2] * w0) / q[0];
            [w0, w1, w2]
        })
        .collect();

    // One-sided V data at z = 0.
    let jet_at = |sol: &TailSolution, c: Complex64, add_q: bool| -> Option<[Complex64; 3]> {
        let k = sol.z.iter().position(|&x| x.abs() < 1e-12)?;
        let j = sol.jet[k];
        let _ = add_q;
        Some([j[0] * c, j[1] * c, j[2] * c])
    };
    let (v_left, v_right) = if problem.z_match.abs() < 1e-12 {
        // Right tail stores Phi - q, which is V itself for z > 0.
        (jet_at(&left, cl, false).unwrap(), jet_at(&right, cr, false).unwrap())
    } else {
        // Zero lies inside one tail, where Phi is smooth: the jumps are those of 1_{z>0} q.
        let k = z.iter().position(|&x| x.abs() < 1e-9).unwrap();
        let p = phi[k];
        let q = q_jet(tau, problem.sign, 0.0);
        (p, [p[0] - q[0], p[1] - q[1], p[2] - q[2]])
    };

    let mut pair = Eigenpair {
        tau,
        sign: problem.sign,
        z_match: problem.z_match,
        z,
        phi,
        w,
        v_left_at_zero: v_left,
        v_right_at_zero: v_right,
        residual_norm: 0.0,
        matching_residual: mismatch,
        defect_norm: defect.norm(),
        roots: vec![tau],
    };
    pair.residual_norm = pair.ode_residual().max(mismatch);
    Ok(pair)
}

/// Physically scaled eigenvalue along a critical path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledEigendata {
    pub tau: Complex64,
    pub t: Vec<f64>,
    /// `|lambda/2|^{1/2} tau`.
    pub tau_phys: Vec<Complex64>,
    /// `|lambda/2|^{-1/4}`.
    pub length: Vec<f64>,
}

impl ScaledEigendata {
    pub fn max_growth(&self) -> f64 {
        self.tau_phys.iter().map(|t| -t.im).fold(0.0, f64::max)
    }
}

pub fn scale_factor(lambda: f64) -> f64 {
    (lambda.abs() * 0.5).sqrt()
}

pub fn scale_eigendata(pair: &Eigenpair, path: &CriticalPath) -> ScaledEigendata {
    let tau_phys = path.lambda.iter().map(|&l| pair.tau * scale_factor(l)).collect();
    let length = path.lambda.iter().map(|&l| (l.abs() * 0.5).powf(-0.25)).collect();
    ScaledEigendata {
        tau: pair.tau,
        t: path.t.clone(),
        tau_phys,
        length,
    }
}

/// Independent route: Chebyshev collocation of the equation for `G = W'`,
///
/// ```text
/// tau^2 G + tau (2 s z^2 G + i G'') + (z^4 G + 6 i s G + 6 i s z G' + i s z^2 G'') = 0,
/// ```
///
/// with `G(±L) = 0`, linearized to a standard eigenproblem of size `2(n-1)`.
pub fn collocation_eigenvalues(sign: f64, half_width: f64, n: usize) -> Vec<Complex64> {
    let (x, d) = chebyshev(n);
    let scale = 1.0 / half_width;
    let z: Vec<f64> = x.iter().map(|&x| x * half_width).collect();
    let d1 = d.map(|v| v * scale);
    let d2 = &d1 * &d1;
    let m = n - 1;
    let mut m0 = DMatrix::<Complex64>::zeros(m, m);
    let mut m1 = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        let zi = z[i + 1];
        for j in 0..m {
            let id = if i == j { 1.0 } else { 0.0 };
            let a1 = d1[(i + 1, j + 1)];
            let a2 = d2[(i + 1, j + 1)];
            m1[(i, j)] = Complex64::new(2.0 * sign * zi * zi * id, a2);
            m0[(i, j)] = Complex64::new(zi.powi(4) * id, 0.0)
                + I * (6.0 * sign * id + 6.0 * sign * zi * a1 + sign * zi * zi * a2);
        }
    }
    let mut comp = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        comp[(i, m + i)] = Complex64::new(1.0, 0.0);
        for j in 0..m {
            comp[(m + i, j)] = -m0[(i, j)];
            comp[(m + i, m + j)] = -m1[(i, j)];
        }
    }
    comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Chebyshev–Gauss–Lobatto points on [-1, 1] (descending) and the differentiation matrix.
fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let c = |i: usize| -> f64 {
        let base = if i == 0 || i == n { 2.0 } else { 1.0 };
        if i % 2 == 0 { base } else { -base }
    };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (x, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_tau_rejected() {
        let p = DispersionProblem::default();
        let err = shoot_tails(Complex64::new(1.0, 0.0), &p).unwrap_err();
        assert!(matches!(err, LabError::InvalidParameter(_)));
    }

    #[test]
    fn swapped_branch_blows_up() {
        let p = DispersionProblem::default();
        let err = shoot_tail(Complex64::new(0.0, -1.0), &p, Side::Right, Branch::Growing, 1e-2).unwrap_err();
        assert!(matches!(err, LabError::TailBlowup { .. }));
        let err = shoot_tail(Complex64::new(0.0, -1.0), &p, Side::Left, Branch::Growing, 1e-2).unwrap_err();
        assert!(matches!(err, LabError::TailBlowup { .. }));
    }

    #[test]
    fn scaling_examples() {
        assert!((scale_factor(-2.0) - 1.0).abs() < 1e-15);
        assert!((scale_factor(-8.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_differentiates_cubic() {
        let (x, d) = chebyshev(12);
        let f = DVector::from_iterator(13, x.iter().map(|&x| x * x * x));
        let df = &d * f;
        for (xi, v) in x.iter().zip(df.iter()) {
            assert!((v - 3.0 * xi * xi).abs() < 1e-11);
        }
    }
}
