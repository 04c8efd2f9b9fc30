//! Adaptive Dormand–Prince 5(4) stepping for complex ODEs in a real parameter.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dopri {
    /// Local error bound per unit of the parameter.
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri {
    fn default() -> Self {
        Dopri { tol: 1e-10, max_step: std::f64::consts::PI / 50.0, max_steps: 200_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl Dopri {
    /// Integrates `y' = f(s, y)` from `s0` to `s1`. `f` may refuse a state by
    /// returning an error, which aborts the integration.
    pub fn solve<F>(&self, f: F, s0: f64, s1: f64, y0: &[Complex64]) -> Result<Vec<Complex64>>
    where
        F: Fn(f64, &[Complex64]) -> Result<Vec<Complex64>>,
    {
        let span = s1 - s0;
        if span == 0.0 {
            return Ok(y0.to_vec());
        }
        let dir = span.signum();
        let mut s = s0;
        let mut y = y0.to_vec();
        let mut h = self.max_step.min(span.abs()) * 0.1;
        let mut k1 = f(s, &y)?;
        for _ in 0..self.max_steps {
            let rest = (s1 - s).abs();
            if rest <= 1e-14 * span.abs() {
                return Ok(y);
            }
            h = h.min(rest).min(self.max_step);
            let hs = dir * h;
            let mut k = vec![k1.clone()];
            for i in 1..7 {
                let yi: Vec<Complex64> = (0..y.len())
                    .map(|j| y[j] + hs * (0..i).map(|m| A[i][m] * k[m][j]).sum::<Complex64>())
                    .collect();
                k.push(f(s + C[i] * hs, &yi)?);
            }
            let y5: Vec<Complex64> =
                (0..y.len()).map(|j| y[j] + hs * (0..7).map(|m| B5[m] * k[m][j]).sum::<Complex64>()).collect();
            let err = (0..y.len())
                .map(|j| {
                    let e = hs * (0..7).map(|m| (B5[m] - B4[m]) * k[m][j]).sum::<Complex64>();
                    e.norm() / (h * self.tol * (1.0 + y[j].norm().max(y5[j].norm())))
                })
                .fold(0.0, f64::max);
            if !err.is_finite() {
                h *= 0.25;
                if h < 1e-14 {
                    return Err(Error::Numeric(format!("step size underflow at s = {s}")));
                }
                continue;
            }
            if err <= 1.0 {
                s += hs;
                y = y5;
                k1 = k.swap_remove(6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h < 1e-14 {
                return Err(Error::Numeric(format!("step size underflow at s = {s}")));
            }
        }
        Err(Error::Numeric(format!("step budget exhausted at s = {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_around_a_circle() {
        let i = Complex64::i();
        let y = Dopri::default()
            .solve(|_, y| Ok(vec![i * y[0]]), 0.0, 2.0 * std::f64::consts::PI, &[Complex64::new(1.0, 0.0)])
            .unwrap();
        assert!((y[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn backwards_integration() {
        let y = Dopri::default().solve(|_, y| Ok(vec![y[0]]), 1.0, 0.0, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn refusal_propagates() {
        let r = Dopri::default().solve(
            |s, y| if s > 0.5 { Err(Error::Numeric("stop".into())) } else { Ok(vec![y[0]]) },
            0.0,
            1.0,
            &[Complex64::new(1.0, 0.0)],
        );
        assert!(r.is_err());
    }
}
