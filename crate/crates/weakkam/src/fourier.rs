//! Truncated real Fourier series on T^d.
//!
//! f(x) = c0 + sum_m [ a_m cos(2π m·x) + b_m sin(2π m·x) ], m ∈ Z^d \ {0}.
//! These are the periodic building blocks for potentials, vector fields and
//! primitives of exact one-forms. Evaluation accepts lifted coordinates:
//! periodicity is automatic.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub mode: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub modes: Vec<FourierMode>,
}

impl FourierSeries {
    pub fn zero(_dim: usize) -> Self {
        FourierSeries::default()
    }

    pub fn constant(c: f64) -> Self {
        FourierSeries { constant: c, modes: Vec::new() }
    }

    /// One-dimensional helper: mode k with given cos/sin coefficients.
    pub fn mode1(k: i32, cos: f64, sin: f64) -> Self {
        FourierSeries { constant: 0.0, modes: vec![FourierMode { mode: vec![k], cos, sin }] }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    pub fn push(&mut self, mode: Vec<i32>, cos: f64, sin: f64) {
        self.modes.push(FourierMode { mode, cos, sin });
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.modes.iter().all(|m| m.cos == 0.0 && m.sin == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut out = self.constant;
        for m in &self.modes {
            let phase = TAU * dot_im(&m.mode, x);
            out += m.cos * phase.cos() + m.sin * phase.sin();
        }
        out
    }

    /// Gradient with respect to x.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for m in &self.modes {
            let phase = TAU * dot_im(&m.mode, x);
            let d = -m.cos * phase.sin() + m.sin * phase.cos();
            for (o, &mi) in out.iter_mut().zip(&m.mode) {
                *o += TAU * mi as f64 * d;
            }
        }
    }

    pub fn grad_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.grad(x, &mut out);
        out
    }

    /// Hessian with respect to x (row-major d x d).
    pub fn hess(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        out.fill(0.0);
        for m in &self.modes {
            let phase = TAU * dot_im(&m.mode, x);
            let s = -m.cos * phase.cos() - m.sin * phase.sin();
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] += TAU * TAU * (m.mode[i] * m.mode[j]) as f64 * s;
                }
            }
        }
    }

    /// Third-derivative contraction T_ij = Σ_k w_k ∂³f/∂x_k∂x_i∂x_j
    /// (row-major d x d). Used for the x-Hessian of shifted Lagrangians.
    pub fn third_contract(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        let d = x.len();
        out.fill(0.0);
        for m in &self.modes {
            let phase = TAU * dot_im(&m.mode, x);
            // d³/dφ³ of (a cos φ + b sin φ) = a sin φ − b cos φ
            let s = m.cos * phase.sin() - m.sin * phase.cos();
            let mw: f64 = m.mode.iter().zip(w).map(|(k, wi)| *k as f64 * wi).sum();
            let factor = TAU * TAU * TAU * mw * s;
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] += factor * (m.mode[i] * m.mode[j]) as f64;
                }
            }
        }
    }

    /// Largest mode order, used to size audit grids.
    pub fn max_order(&self) -> i32 {
        self.modes.iter().flat_map(|m| m.mode.iter().map(|k| k.abs())).max().unwrap_or(0)
    }
}

fn dot_im(m: &[i32], x: &[f64]) -> f64 {
    m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(f: &FourierSeries, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f.eval(&xp) - f.eval(&xm)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut f = FourierSeries::constant(0.3);
        f.push(vec![1, 0], 0.5, -0.2);
        f.push(vec![2, -1], -0.1, 0.7);
        let x = [0.13, 0.77];
        let g = f.grad_vec(&x);
        let gfd = fd_grad(&f, &x);
        for (a, b) in g.iter().zip(&gfd) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        let mut h = [0.0; 4];
        f.hess(&x, &mut h);
        // hessian row 0 vs finite difference of grad
        let eps = 1e-6;
        let gp = f.grad_vec(&[x[0] + eps, x[1]]);
        let gm = f.grad_vec(&[x[0] - eps, x[1]]);
        assert!((h[0] - (gp[0] - gm[0]) / (2.0 * eps)).abs() < 1e-5);
        assert!((h[1] - (gp[1] - gm[1]) / (2.0 * eps)).abs() < 1e-5);
    }

    #[test]
    fn periodicity() {
        let f = FourierSeries::mode1(2, 0.4, 0.1);
        assert!((f.eval(&[0.3]) - f.eval(&[5.3])).abs() < 1e-12);
    }
}
