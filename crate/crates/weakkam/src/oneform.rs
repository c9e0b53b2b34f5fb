//! Closed 1-forms on T^d: a cohomology vector plus an exact part.
//!
//! η(x) = c + ∇f(x) with f periodic (stored as a truncated Fourier series of
//! the primitive). The exact part has zero mean by construction and the loop
//! integrals over the fundamental cycles equal the components of c.

use crate::fourier::FourierSeries;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    cohomology: Vec<f64>,
    primitive: FourierSeries,
}

impl OneForm {
    /// The constant representative of class c (exact part zero).
    pub fn constant(c: Vec<f64>) -> Self {
        OneForm { cohomology: c, primitive: FourierSeries::default() }
    }

    /// d = 1 convenience: η = c dx.
    pub fn constant1(c: f64) -> Self {
        OneForm::constant(vec![c])
    }

    /// η = c + df with primitive f.
    pub fn with_primitive(c: Vec<f64>, f: FourierSeries) -> Self {
        OneForm { cohomology: c, primitive: f }
    }

    /// An exact form df (cohomology class zero).
    pub fn exact(dim: usize, f: FourierSeries) -> Self {
        OneForm { cohomology: vec![0.0; dim], primitive: f }
    }

    pub fn dim(&self) -> usize {
        self.cohomology.len()
    }

    pub fn cohomology(&self) -> &[f64] {
        &self.cohomology
    }

    pub fn primitive(&self) -> &FourierSeries {
        &self.primitive
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.primitive.grad(x, out);
        for (o, c) in out.iter_mut().zip(&self.cohomology) {
            *o += c;
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(x, &mut out);
        out
    }

    /// ⟨η(x), v⟩, the fiberwise-linear function η̂.
    pub fn pair(&self, x: &[f64], v: &[f64]) -> f64 {
        let mut e = vec![0.0; self.dim()];
        self.eval(x, &mut e);
        e.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Jacobian of η, which is the Hessian of the primitive (row-major).
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        self.primitive.hess(x, out);
    }

    pub fn negated(&self) -> OneForm {
        let mut f = self.primitive.clone();
        f.constant = -f.constant;
        for m in &mut f.modes {
            m.cos = -m.cos;
            m.sin = -m.sin;
        }
        OneForm {
            cohomology: self.cohomology.iter().map(|c| -c).collect(),
            primitive: f,
        }
    }

    /// Pointwise sum of two closed forms (classes add, primitives add).
    pub fn add(&self, other: &OneForm) -> OneForm {
        assert_eq!(self.dim(), other.dim());
        let mut f = self.primitive.clone();
        f.constant += other.primitive.constant;
        for m in &other.primitive.modes {
            if let Some(existing) = f.modes.iter_mut().find(|e| e.mode == m.mode) {
                existing.cos += m.cos;
                existing.sin += m.sin;
            } else {
                f.modes.push(m.clone());
            }
        }
        OneForm {
            cohomology: self.cohomology.iter().zip(&other.cohomology).map(|(a, b)| a + b).collect(),
            primitive: f,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_part_has_zero_mean() {
        let form = OneForm::with_primitive(vec![1.5], FourierSeries::mode1(2, 0.3, -0.4));
        let n = 1000;
        let mean: f64 = (0..n)
            .map(|i| form.eval_vec(&[i as f64 / n as f64])[0] - 1.5)
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 1e-12, "mean {mean}");
    }

    #[test]
    fn loop_integral_equals_cohomology() {
        // integrate η along the fundamental cycle x(t) = t
        let form = OneForm::with_primitive(vec![0.7], FourierSeries::mode1(1, 0.2, 0.5));
        let n = 4096;
        let dt = 1.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let x = [(i as f64 + 0.5) * dt];
            total += form.eval_vec(&x)[0] * dt;
        }
        assert!((total - 0.7).abs() < 1e-10, "loop integral {total}");
    }
}
