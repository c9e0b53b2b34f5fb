//! Generic smooth minimization: L-BFGS (two-loop recursion, history 8) with
//! a backtracking Armijo line search and steepest-descent fallback.

pub struct LbfgsOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { grad_tol: 1e-8, max_iter: 2000 }
    }
}

pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimize `f(x, grad_out) -> value` starting from `x0`.
pub fn minimize<F: FnMut(&[f64], &mut [f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &LbfgsOptions,
) -> LbfgsResult {
    const HISTORY: usize = 8;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut value = f(&x, &mut grad);

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];

    for iter in 0..opts.max_iter {
        let gnorm = norm(&grad);
        if gnorm <= opts.grad_tol {
            return LbfgsResult { x, value, grad_norm: gnorm, converged: true, iterations: iter };
        }

        dir.copy_from_slice(&grad);
        if !s_hist.is_empty() {
            let mut alphas = vec![0.0; s_hist.len()];
            for i in (0..s_hist.len()).rev() {
                let a = rho_hist[i] * dot(&s_hist[i], &dir);
                alphas[i] = a;
                axpy(-a, &y_hist[i], &mut dir);
            }
            let last = s_hist.len() - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            for d in dir.iter_mut() {
                *d *= gamma.max(1e-12);
            }
            for i in 0..s_hist.len() {
                let b = rho_hist[i] * dot(&y_hist[i], &dir);
                axpy(alphas[i] - b, &s_hist[i], &mut dir);
            }
        }
        let mut slope = -dot(&grad, &dir);
        if slope >= 0.0 {
            dir.copy_from_slice(&grad);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            slope = -dot(&grad, &dir);
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..45 {
            for i in 0..n {
                trial[i] = x[i] - step * dir[i];
            }
            let trial_value = f(&trial, &mut trial_grad);
            if trial_value <= value + 1e-4 * step * slope {
                let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| trial_grad[i] - grad[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-14 {
                    if s_hist.len() == HISTORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                    rho_hist.push(1.0 / sy);
                    s_hist.push(s);
                    y_hist.push(y);
                }
                x.copy_from_slice(&trial);
                grad.copy_from_slice(&trial_grad);
                value = trial_value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // line-search stall: floating-point limit reached
            let gnorm = norm(&grad);
            return LbfgsResult {
                x,
                value,
                grad_norm: gnorm,
                converged: gnorm <= opts.grad_tol * 100.0,
                iterations: iter,
            };
        }
    }
    let gnorm = norm(&grad);
    LbfgsResult {
        x,
        value,
        grad_norm: gnorm,
        converged: gnorm <= opts.grad_tol * 100.0,
        iterations: opts.max_iter,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_stiff_quadratic() {
        // f = ½ Σ k²·x_k²: condition number 10⁴
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for (k, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                let w = ((k + 1) * (k + 1)) as f64;
                v += 0.5 * w * xi * xi;
                *gi = w * xi;
            }
            v
        };
        let x0 = vec![1.0; 100];
        let r = minimize(f, &x0, &LbfgsOptions::default());
        assert!(r.converged);
        assert!(r.value < 1e-10, "value {}", r.value);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let r = minimize(f, &[-1.2, 1.0], &LbfgsOptions { grad_tol: 1e-10, max_iter: 5000 });
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }
}
