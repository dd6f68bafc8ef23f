//! Gauss–Legendre rules, composite panels and adaptive bisection.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]` with a single panel.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Integrate over `[a, b]` split into `panels` equal panels.
    pub fn composite<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + h * p as f64;
            acc = acc + self.integrate(lo, lo + h, &mut f);
        }
        acc
    }

    /// Running integral `∫_{x_0}^{x_j} f` at every node of `grid`, one panel per cell.
    pub fn cumulative<T, F>(&self, grid: &[f64], mut f: F) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = T::default();
        out.push(acc);
        for w in grid.windows(2) {
            acc = acc + self.integrate(w[0], w[1], &mut f);
            out.push(acc);
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive bisection with a 10-point Gauss–Legendre panel against its two halves.
///
/// Returns the integral and the final error estimate.
pub fn adaptive<F>(a: f64, b: f64, tol: f64, f: F) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let rule = GaussLegendre::new(10);
    fn recurse<F: Fn(f64) -> f64>(
        rule: &GaussLegendre,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left: f64 = rule.integrate(a, m, f);
        let right: f64 = rule.integrate(m, b, f);
        let err = (left + right - whole).abs();
        if err <= tol || depth >= 40 {
            return (left + right, err);
        }
        let (l, el) = recurse(rule, f, a, m, left, 0.5 * tol, depth + 1);
        let (r, er) = recurse(rule, f, m, b, right, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
    let whole: f64 = rule.integrate(a, b, &f);
    recurse(&rule, &f, a, b, whole, tol, 0)
}

/// Uniform grid of `n + 1` points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n).map(|i| a + h * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the exactness limit for 8 nodes
        let got: f64 = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((got - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let (v, _) = adaptive(-10.0, 10.0, 1e-13, |x| (-x * x * 50.0).exp());
        assert!((v - (PI / 50.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let rule = GaussLegendre::new(6);
        let grid = uniform_grid(0.0, 3.0, 30);
        let c: Vec<f64> = rule.cumulative(&grid, f64::sin);
        for (x, v) in grid.iter().zip(&c) {
            assert!((v - (1.0 - x.cos())).abs() < 1e-13);
        }
    }
}
