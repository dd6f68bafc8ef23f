//! Embedded Dormand–Prince 5(4) stepping for small complex systems.

use num_complex::Complex64;

pub type State<const N: usize> = [Complex64; N];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_substeps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-300,
            max_substeps: 10_000,
        }
    }
}

impl Dopri5 {
    /// One embedded step; returns the 5th-order solution and the scaled error norm.
    fn trial<const N: usize, F>(&self, f: &F, x: f64, y: &State<N>, h: f64) -> (State<N>, f64)
    where
        F: Fn(f64, &State<N>) -> State<N>,
    {
        let mut k = [[Complex64::default(); N]; 7];
        for s in 0..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += kj[i] * (h * a);
                    }
                }
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut d5 = Complex64::default();
            let mut d4 = Complex64::default();
            for s in 0..7 {
                d5 += k[s][i] * B5[s];
                d4 += k[s][i] * B4[s];
            }
            y5[i] += d5 * h;
            let scale = self.atol + self.rtol * y[i].norm().max(y5[i].norm());
            err = err.max(((d5 - d4) * h).norm() / scale);
        }
        (y5, err)
    }

    /// Advance `y` from `x0` to `x1`, subdividing until the local error passes.
    ///
    /// Returns `None` if the substep budget runs out or the state stops being finite.
    pub fn advance<const N: usize, F>(&self, f: &F, x0: f64, x1: f64, y: &State<N>) -> Option<State<N>>
    where
        F: Fn(f64, &State<N>) -> State<N>,
    {
        let mut x = x0;
        let mut cur = *y;
        let mut h = x1 - x0;
        let mut used = 0;
        while (x1 - x).abs() > 1e-15 * (1.0 + x1.abs()) {
            if (x + h - x1) * h.signum() > 0.0 {
                h = x1 - x;
            }
            let (next, err) = self.trial(f, x, &cur, h);
            used += 1;
            if used > self.max_substeps || !err.is_finite() {
                return None;
            }
            if err <= 1.0 {
                x += h;
                cur = next;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
                h *= grow;
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.2);
            }
        }
        cur.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_matches_closed_form() {
        // y'' = -y as a complex first-order system.
        let f = |_x: f64, y: &State<2>| [y[1], -y[0]];
        let solver = Dopri5::default();
        let mut y = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut x = 0.0;
        for _ in 0..100 {
            y = solver.advance(&f, x, x + 0.1, &y).unwrap();
            x += 0.1;
        }
        assert!((y[0].re - 10f64.cos()).abs() < 1e-9);
        assert!((y[1].re + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn complex_exponential_growth() {
        let lam = Complex64::new(-0.5, 2.0);
        let f = move |_x: f64, y: &State<1>| [y[0] * lam];
        let y = Dopri5::default()
            .advance(&f, 0.0, 3.0, &[Complex64::new(1.0, 0.0)])
            .unwrap();
        let exact = (lam * 3.0).exp();
        assert!((y[0] - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn integrates_backwards() {
        let f = |_x: f64, y: &State<1>| [y[0]];
        let y = Dopri5::default()
            .advance(&f, 1.0, 0.0, &[Complex64::new(1.0f64.exp(), 0.0)])
            .unwrap();
        assert!((y[0].re - 1.0).abs() < 1e-10);
    }
}
