//! Tonelli Lagrangian models on T^d × R^d and the Fenchel-Legendre duality
//! between the Lagrangian and Hamiltonian pictures.
//!
//! Built-in families carry closed-form derivatives. A model may be shifted by
//! a closed one-form (L_η = L − η̂), which leaves the Euler-Lagrange flow and
//! the fiber Hessian untouched but reweights minimizers.

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::oneform::OneForm;
use crate::torus::TorusPoint;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

/// Family tag, mirrored in model definition files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "riemannian-flat")]
    RiemannianFlat,
    #[serde(rename = "mechanical-pendulum")]
    MechanicalPendulum,
    #[serde(rename = "mechanical-custom")]
    MechanicalCustom,
    #[serde(rename = "mane-vectorfield")]
    ManeVectorField,
    #[serde(rename = "custom")]
    Custom,
}

type DynField = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type DynVecField = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum BaseForm {
    /// L = (m/2)‖v‖²
    Flat { dim: usize, mass: f64 },
    /// L = (m/2)‖v‖² + U(x)
    Mechanical { dim: usize, mass: f64, potential: FourierSeries },
    /// L = ½‖v − X(x)‖², X_i given as Fourier series (with constants)
    Mane { dim: usize, field: Vec<FourierSeries> },
    /// user-supplied callables, audited at construction
    Custom {
        dim: usize,
        eval: DynField,
        grad_x: DynVecField,
        grad_v: DynVecField,
        hess_vv: Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>,
    },
}

/// A Tonelli Lagrangian, possibly shifted by a closed one-form.
#[derive(Clone)]
pub struct LagrangianModel {
    base: BaseForm,
    family: Family,
    shift: Option<OneForm>,
}

impl std::fmt::Debug for LagrangianModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianModel")
            .field("family", &self.family)
            .field("dim", &self.dim())
            .field("shifted", &self.shift.is_some())
            .finish()
    }
}

impl LagrangianModel {
    /// L = ½‖v‖² on T^d.
    pub fn free(dim: usize) -> Self {
        LagrangianModel {
            base: BaseForm::Flat { dim, mass: 1.0 },
            family: Family::RiemannianFlat,
            shift: None,
        }
    }

    /// The simple pendulum L = ½v² + (1 − cos 2πx).
    pub fn pendulum() -> Self {
        Self::pendulum_family(1.0, 1)
    }

    /// Two-well variant L = ½v² + (1 − cos 4πx).
    pub fn doubled_pendulum() -> Self {
        Self::pendulum_family(1.0, 2)
    }

    /// L = ½v² + a(1 − cos 2πk x) on T^1.
    pub fn pendulum_family(amplitude: f64, harmonics: i32) -> Self {
        let potential =
            FourierSeries::mode1(harmonics, -amplitude, 0.0).with_constant(amplitude);
        LagrangianModel {
            base: BaseForm::Mechanical { dim: 1, mass: 1.0, potential },
            family: Family::MechanicalPendulum,
            shift: None,
        }
    }

    /// L = (m/2)‖v‖² + U(x) with a Fourier potential.
    pub fn mechanical(dim: usize, mass: f64, potential: FourierSeries) -> Self {
        LagrangianModel {
            base: BaseForm::Mechanical { dim, mass, potential },
            family: Family::MechanicalCustom,
            shift: None,
        }
    }

    /// Mañé Lagrangian L = ½‖v − X(x)‖², one Fourier series per component.
    pub fn mane(field: Vec<FourierSeries>) -> Self {
        let dim = field.len();
        LagrangianModel { base: BaseForm::Mane { dim, field }, family: Family::ManeVectorField, shift: None }
    }

    /// A custom model from callables. The derivative consistency audit runs
    /// immediately; Newton-based conjugation needs trustworthy derivatives.
    pub fn custom(
        dim: usize,
        eval: DynField,
        grad_x: DynVecField,
        grad_v: DynVecField,
        hess_vv: Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>,
    ) -> Result<Self> {
        let model = LagrangianModel {
            base: BaseForm::Custom { dim, eval, grad_x, grad_v, hess_vv },
            family: Family::Custom,
            shift: None,
        };
        model.audit_derivative_consistency(1e-5)?;
        model.audit_convexity()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        match &self.base {
            BaseForm::Flat { dim, .. }
            | BaseForm::Mechanical { dim, .. }
            | BaseForm::Mane { dim, .. }
            | BaseForm::Custom { dim, .. } => *dim,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn shift(&self) -> Option<&OneForm> {
        self.shift.as_ref()
    }

    /// L(x, v); lifted coordinates are fine, periodicity is built in.
    pub fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        let base = match &self.base {
            BaseForm::Flat { mass, .. } => 0.5 * mass * sq_norm(v),
            BaseForm::Mechanical { mass, potential, .. } => {
                0.5 * mass * sq_norm(v) + potential.eval(x)
            }
            BaseForm::Mane { field, .. } => {
                0.5 * v
                    .iter()
                    .zip(field)
                    .map(|(vi, xi)| {
                        let d = vi - xi.eval(x);
                        d * d
                    })
                    .sum::<f64>()
            }
            BaseForm::Custom { eval, .. } => eval(x, v),
        };
        match &self.shift {
            Some(form) => base - form.pair(x, v),
            None => base,
        }
    }

    /// ∂L/∂x.
    pub fn grad_x(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = match &self.base {
            BaseForm::Flat { .. } => vec![0.0; d],
            BaseForm::Mechanical { potential, .. } => potential.grad_vec(x),
            BaseForm::Mane { field, .. } => {
                // ∂/∂x_j ½Σ_i (v_i−X_i)² = −Σ_i (v_i−X_i) ∂X_i/∂x_j
                let mut out = vec![0.0; d];
                let mut gi = vec![0.0; d];
                for (i, xi) in field.iter().enumerate() {
                    let diff = v[i] - xi.eval(x);
                    xi.grad(x, &mut gi);
                    for j in 0..d {
                        out[j] -= diff * gi[j];
                    }
                }
                out
            }
            BaseForm::Custom { grad_x, .. } => grad_x(x, v),
        };
        if let Some(form) = &self.shift {
            // ∂/∂x_j ⟨η(x), v⟩ = (Jη(x) v)_j, Jη = Hess of the primitive
            let mut jac = vec![0.0; d * d];
            form.jacobian(x, &mut jac);
            for j in 0..d {
                let mut s = 0.0;
                for i in 0..d {
                    // Hess f is symmetric; row j
                    s += jac[j * d + i] * v[i];
                }
                out[j] -= s;
            }
        }
        out
    }

    /// ∂L/∂v, i.e. the conjugate momentum.
    pub fn grad_v(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = match &self.base {
            BaseForm::Flat { mass, .. } => v.iter().map(|vi| mass * vi).collect(),
            BaseForm::Mechanical { mass, .. } => v.iter().map(|vi| mass * vi).collect(),
            BaseForm::Mane { field, .. } => {
                v.iter().zip(field).map(|(vi, xi)| vi - xi.eval(x)).collect::<Vec<_>>()
            }
            BaseForm::Custom { grad_v, .. } => grad_v(x, v),
        };
        if let Some(form) = &self.shift {
            let e = form.eval_vec(x);
            for (o, ei) in out.iter_mut().zip(&e) {
                *o -= ei;
            }
        }
        out
    }

    /// ∂²L/∂v² as a dense matrix (shift-invariant).
    pub fn hess_vv(&self, x: &[f64], v: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        match &self.base {
            BaseForm::Flat { mass, .. } | BaseForm::Mechanical { mass, .. } => {
                DMatrix::identity(d, d) * *mass
            }
            BaseForm::Mane { .. } => DMatrix::identity(d, d),
            BaseForm::Custom { hess_vv, .. } => hess_vv(x, v),
        }
    }

    /// ∂(grad_v)/∂x, the mixed block needed to solve the Euler-Lagrange
    /// system for the acceleration. Finite differences for custom models.
    pub fn dgradv_dx(&self, x: &[f64], v: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = match &self.base {
            BaseForm::Flat { .. } | BaseForm::Mechanical { .. } => DMatrix::zeros(d, d),
            BaseForm::Mane { field, .. } => {
                // grad_v_i = v_i − X_i(x) ⇒ ∂/∂x_j = −∂X_i/∂x_j
                let mut m = DMatrix::zeros(d, d);
                let mut gi = vec![0.0; d];
                for (i, xi) in field.iter().enumerate() {
                    xi.grad(x, &mut gi);
                    for j in 0..d {
                        m[(i, j)] = -gi[j];
                    }
                }
                m
            }
            BaseForm::Custom { grad_v, .. } => {
                let mut m = DMatrix::zeros(d, d);
                let h = 1e-6;
                for j in 0..d {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += h;
                    xm[j] -= h;
                    let gp = grad_v(&xp, v);
                    let gm = grad_v(&xm, v);
                    for i in 0..d {
                        m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                m
            }
        };
        if let Some(form) = &self.shift {
            let mut jac = vec![0.0; d * d];
            form.jacobian(x, &mut jac);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] -= jac[i * d + j];
                }
            }
        }
        out
    }

    /// ∂²L/∂x², the base-Hessian block of the action Hessian.
    /// Finite differences for custom models.
    pub fn hess_xx(&self, x: &[f64], v: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = match &self.base {
            BaseForm::Flat { .. } => DMatrix::zeros(d, d),
            BaseForm::Mechanical { potential, .. } => {
                let mut h = vec![0.0; d * d];
                potential.hess(x, &mut h);
                DMatrix::from_row_slice(d, d, &h)
            }
            BaseForm::Mane { field, .. } => {
                // ½Σ_k (v_k − X_k)²: ∂²/∂x∂x = Σ_k [∇X_k ∇X_kᵀ − (v_k−X_k) Hess X_k]
                let mut m = DMatrix::zeros(d, d);
                let mut g = vec![0.0; d];
                let mut h = vec![0.0; d * d];
                for (k, xk) in field.iter().enumerate() {
                    xk.grad(x, &mut g);
                    xk.hess(x, &mut h);
                    let diff = v[k] - xk.eval(x);
                    for i in 0..d {
                        for j in 0..d {
                            m[(i, j)] += g[i] * g[j] - diff * h[i * d + j];
                        }
                    }
                }
                m
            }
            BaseForm::Custom { grad_x, .. } => {
                let mut m = DMatrix::zeros(d, d);
                let h = 1e-5;
                for j in 0..d {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += h;
                    xm[j] -= h;
                    let gp = grad_x(&xp, v);
                    let gm = grad_x(&xm, v);
                    for i in 0..d {
                        m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                m
            }
        };
        if let Some(form) = &self.shift {
            // −∂²(η·v)/∂x∂x = −Σ_k v_k ∂³f/∂x_k∂x_i∂x_j
            let mut t = vec![0.0; d * d];
            form.primitive().third_contract(x, v, &mut t);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] -= t[i * d + j];
                }
            }
        }
        out
    }

    /// E(x, v) = ⟨∂L/∂v, v⟩ − L. Invariant under closed shifts.
    pub fn energy(&self, x: &[f64], v: &[f64]) -> f64 {
        let p = self.grad_v(x, v);
        p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - self.eval(x, v)
    }

    /// Allocation-free 1d fast path: (L, ∂L/∂x, ∂L/∂v) at a point.
    pub fn eval_grads_1d(&self, x: f64, v: f64) -> (f64, f64, f64) {
        debug_assert_eq!(self.dim(), 1);
        let xs = [x];
        let (mut l, mut lx, mut lv) = match &self.base {
            BaseForm::Flat { mass, .. } => (0.5 * mass * v * v, 0.0, mass * v),
            BaseForm::Mechanical { mass, potential, .. } => {
                let mut g = [0.0];
                potential.grad(&xs, &mut g);
                (0.5 * mass * v * v + potential.eval(&xs), g[0], mass * v)
            }
            BaseForm::Mane { field, .. } => {
                let xf = &field[0];
                let mut g = [0.0];
                xf.grad(&xs, &mut g);
                let diff = v - xf.eval(&xs);
                (0.5 * diff * diff, -diff * g[0], diff)
            }
            BaseForm::Custom { eval, grad_x, grad_v, .. } => {
                let vs = [v];
                (eval(&xs, &vs), grad_x(&xs, &vs)[0], grad_v(&xs, &vs)[0])
            }
        };
        if let Some(form) = &self.shift {
            let mut eta = [0.0];
            form.eval(&xs, &mut eta);
            let mut hf = [0.0];
            form.primitive().hess(&xs, &mut hf);
            l -= eta[0] * v;
            lx -= hf[0] * v;
            lv -= eta[0];
        }
        (l, lx, lv)
    }

    /// Allocation-free 1d fast path: (∂²L/∂x², ∂²L/∂x∂v, ∂²L/∂v²).
    pub fn second_derivs_1d(&self, x: f64, v: f64) -> (f64, f64, f64) {
        debug_assert_eq!(self.dim(), 1);
        let xs = [x];
        let (mut lxx, mut lxv, lvv) = match &self.base {
            BaseForm::Flat { mass, .. } => (0.0, 0.0, *mass),
            BaseForm::Mechanical { mass, potential, .. } => {
                let mut h = [0.0];
                potential.hess(&xs, &mut h);
                (h[0], 0.0, *mass)
            }
            BaseForm::Mane { field, .. } => {
                let xf = &field[0];
                let mut g = [0.0];
                let mut h = [0.0];
                xf.grad(&xs, &mut g);
                xf.hess(&xs, &mut h);
                let diff = v - xf.eval(&xs);
                (g[0] * g[0] - diff * h[0], -g[0], 1.0)
            }
            BaseForm::Custom { .. } => {
                let vs = [v];
                let hxx = self_hess_xx_custom(self, &xs, &vs);
                let m = self.dgradv_dx(&xs, &vs);
                let hvv = self.hess_vv(&xs, &vs);
                // shift already handled inside those generic paths
                return (hxx, m[(0, 0)], hvv[(0, 0)]);
            }
        };
        if let Some(form) = &self.shift {
            let vs = [v];
            let mut hf = [0.0];
            form.primitive().hess(&xs, &mut hf);
            lxv -= hf[0];
            let mut t = [0.0];
            form.primitive().third_contract(&xs, &vs, &mut t);
            lxx -= t[0];
        }
        (lxx, lxv, lvv)
    }

    /// Legendre transform: (x, v) ↦ (x, ∂L/∂v(x, v)).
    pub fn legendre_transform(&self, x: &TorusPoint, v: &[f64]) -> CotangentPoint {
        CotangentPoint { x: x.clone(), p: self.grad_v(x.coords(), v) }
    }

    /// Inverse fiber map: solve ∂L/∂v(x, v) = p by damped Newton.
    ///
    /// Initial guess v₀ = hess_vv(x, 0)⁻¹ p (exact for quadratic fibers).
    pub fn inverse_legendre(&self, q: &CotangentPoint) -> Result<(TorusPoint, Vec<f64>)> {
        let v = self.fiber_maximizer(q.x.coords(), &q.p)?;
        Ok((q.x.clone(), v))
    }

    /// H(x, p) = sup_v { ⟨p, v⟩ − L(x, v) }, with the maximizing velocity.
    pub fn fenchel_hamiltonian(&self, q: &CotangentPoint) -> Result<f64> {
        let (h, _) = self.fenchel_hamiltonian_with_velocity(q)?;
        Ok(h)
    }

    pub fn fenchel_hamiltonian_with_velocity(&self, q: &CotangentPoint) -> Result<(f64, Vec<f64>)> {
        let x = q.x.coords();
        let v = self.fiber_maximizer(x, &q.p)?;
        let h = dot(&q.p, &v) - self.eval(x, &v);
        Ok((h, v))
    }

    /// Raw-coordinate Hamiltonian for hot paths.
    pub fn hamiltonian(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        let v = self.fiber_maximizer(x, p)?;
        Ok(dot(p, &v) - self.eval(x, &v))
    }

    /// Newton solve of grad_v(x, v) = p. Strict convexity gives a unique
    /// root; a damped step handles far initial guesses.
    fn fiber_maximizer(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let h0 = self.hess_vv(x, &vec![0.0; d]);
        let p_vec = DVector::from_column_slice(p);
        let lu = h0.clone().lu();
        let mut v: Vec<f64> = match lu.solve(&p_vec) {
            Some(sol) => sol.iter().copied().collect(),
            None => return Err(Error::SingularHessian(x.to_vec())),
        };
        let mut res = residual(self, x, &v, p);
        let mut res_norm = norm(&res);
        for _ in 0..NEWTON_MAX_ITER {
            if res_norm <= NEWTON_TOL {
                return Ok(v);
            }
            let hess = self.hess_vv(x, &v);
            let step = match hess.lu().solve(&DVector::from_column_slice(&res)) {
                Some(s) => s,
                None => return Err(Error::SingularHessian(x.to_vec())),
            };
            // full step, damped while the residual grows
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> =
                    v.iter().zip(step.iter()).map(|(vi, si)| vi - lambda * si).collect();
                let trial_res = residual(self, x, &trial, p);
                let trial_norm = norm(&trial_res);
                if trial_norm < res_norm || lambda < 1e-12 {
                    v = trial;
                    res = trial_res;
                    res_norm = trial_norm;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if res_norm <= NEWTON_TOL {
            Ok(v)
        } else {
            Err(Error::NoConvergence(format!(
                "fiber newton residual {res_norm:.3e} at x = {x:?}"
            )))
        }
    }

    /// L_η = L − η̂. Shifting twice composes by adding the forms; the
    /// shift-by-c-then-by-(−c) round trip is exact.
    pub fn shift_by_one_form(&self, form: &OneForm) -> LagrangianModel {
        assert_eq!(self.dim(), form.dim());
        let shift = match &self.shift {
            Some(existing) => existing.add(form),
            None => form.clone(),
        };
        let shift = if shift.cohomology().iter().all(|c| *c == 0.0) && shift.primitive().is_zero()
        {
            None
        } else {
            Some(shift)
        };
        LagrangianModel { base: self.base.clone(), family: self.family, shift }
    }

    /// Smallest eigenvalue of hess_vv over a sample grid; must be positive.
    pub fn audit_convexity(&self) -> Result<f64> {
        let d = self.dim();
        let mut min_eig = f64::INFINITY;
        for (x, v) in sample_points(d) {
            let h = self.hess_vv(&x, &v);
            let sym = (&h + h.transpose()) * 0.5;
            let eigs = sym.symmetric_eigenvalues();
            for e in eigs.iter() {
                min_eig = min_eig.min(*e);
            }
        }
        if min_eig > 0.0 {
            Ok(min_eig)
        } else {
            Err(Error::AuditFailed(format!(
                "fiber hessian not positive definite (min eigenvalue {min_eig:.3e})"
            )))
        }
    }

    /// Finite-difference audit of grad_x / grad_v against eval.
    pub fn audit_derivative_consistency(&self, tol: f64) -> Result<f64> {
        let d = self.dim();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for (x, v) in sample_points(d) {
            let gx = self.grad_x(&x, &v);
            let gv = self.grad_v(&x, &v);
            for i in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (self.eval(&xp, &v) - self.eval(&xm, &v)) / (2.0 * h);
                worst = worst.max((fd - gx[i]).abs());
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[i] += h;
                vm[i] -= h;
                let fd = (self.eval(&x, &vp) - self.eval(&x, &vm)) / (2.0 * h);
                worst = worst.max((fd - gv[i]).abs());
            }
        }
        if worst <= tol {
            Ok(worst)
        } else {
            Err(Error::AuditFailed(format!(
                "derivatives inconsistent with eval: max deviation {worst:.3e} > {tol:.1e}"
            )))
        }
    }

    /// A canonical description string for cache keys. `None` for custom
    /// models (closures cannot be fingerprinted, so they are never cached).
    pub fn signature(&self) -> Option<String> {
        let base = match &self.base {
            BaseForm::Flat { dim, mass } => format!("flat:d{dim}:m{mass:.17e}"),
            BaseForm::Mechanical { dim, mass, potential } => {
                format!("mech:d{dim}:m{mass:.17e}:U{}", fourier_sig(potential))
            }
            BaseForm::Mane { dim, field } => {
                let comps: Vec<String> = field.iter().map(fourier_sig).collect();
                format!("mane:d{dim}:X[{}]", comps.join("|"))
            }
            BaseForm::Custom { .. } => return None,
        };
        let shift = match &self.shift {
            Some(form) => {
                let c: Vec<String> =
                    form.cohomology().iter().map(|x| format!("{x:.17e}")).collect();
                format!(":eta:c[{}]:f{}", c.join(","), fourier_sig(form.primitive()))
            }
            None => String::new(),
        };
        Some(format!("{base}{shift}"))
    }

    /// Sampled superlinearity witness: for each requested slope A, the least
    /// B with L(x, v) ≥ A‖v‖ − B over the sampled ball ‖v‖ ≤ v_max.
    /// A finite audit is a witness, not a proof.
    pub fn superlinearity_witness(&self, slopes: &[f64], v_max: f64) -> Vec<(f64, f64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for &a in slopes {
            let mut b = 0.0f64;
            for (x, mut v) in sample_points(d) {
                for scale in [0.25, 0.5, 1.0] {
                    for vi in v.iter_mut() {
                        *vi *= scale * v_max / 3.0;
                    }
                    let n = norm(&v);
                    if n <= v_max {
                        b = b.max(a * n - self.eval(&x, &v));
                    }
                }
            }
            out.push((a, b));
        }
        out
    }
}

/// A point (x, p) of the cotangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub x: TorusPoint,
    pub p: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(x: TorusPoint, p: Vec<f64>) -> Self {
        CotangentPoint { x, p }
    }
}

fn self_hess_xx_custom(model: &LagrangianModel, x: &[f64], v: &[f64]) -> f64 {
    model.hess_xx(x, v)[(0, 0)]
}

fn fourier_sig(f: &FourierSeries) -> String {
    let mut parts = vec![format!("{:.17e}", f.constant)];
    for m in &f.modes {
        parts.push(format!("{:?}:{:.17e}:{:.17e}", m.mode, m.cos, m.sin));
    }
    parts.join(";")
}

fn residual(model: &LagrangianModel, x: &[f64], v: &[f64], p: &[f64]) -> Vec<f64> {
    let g = model.grad_v(x, v);
    g.iter().zip(p).map(|(a, b)| a - b).collect()
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn norm(v: &[f64]) -> f64 {
    sq_norm(v).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic low-discrepancy-ish sample of (x, v) pairs for audits.
fn sample_points(d: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let golden = 0.6180339887498949;
    for k in 0..24 {
        let x: Vec<f64> = (0..d).map(|i| ((k as f64 + 1.0) * golden * (i as f64 + 1.0)) % 1.0).collect();
        let v: Vec<f64> =
            (0..d).map(|i| 6.0 * ((((k + 7) as f64) * golden * (i as f64 + 2.0)) % 1.0) - 3.0).collect();
        out.push((x, v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> TorusPoint {
        TorusPoint::new(vec![x])
    }

    #[test]
    fn fenchel_hamiltonian_examples() {
        let free = LagrangianModel::free(1);
        let h = free.fenchel_hamiltonian(&CotangentPoint::new(pt(0.3), vec![0.8])).unwrap();
        assert!((h - 0.32).abs() < 1e-12);

        let pend = LagrangianModel::pendulum();
        let h = pend.fenchel_hamiltonian(&CotangentPoint::new(pt(0.0), vec![0.0])).unwrap();
        assert!(h.abs() < 1e-12);
        let h = pend.fenchel_hamiltonian(&CotangentPoint::new(pt(0.5), vec![1.0])).unwrap();
        assert!((h - (-1.5)).abs() < 1e-12);
    }

    #[test]
    fn legendre_examples() {
        let free = LagrangianModel::free(1);
        let q = free.legendre_transform(&pt(0.2), &[1.5]);
        assert!((q.p[0] - 1.5).abs() < 1e-15);

        let pend = LagrangianModel::pendulum();
        let q = pend.legendre_transform(&pt(0.25), &[-2.0]);
        assert!((q.p[0] + 2.0).abs() < 1e-15);

        // Mañé with X ≡ 0.5: p = v − X
        let mane = LagrangianModel::mane(vec![FourierSeries::constant(0.5)]);
        let q = mane.legendre_transform(&pt(0.1), &[0.5]);
        assert!(q.p[0].abs() < 1e-15);
    }

    #[test]
    fn inverse_legendre_round_trip() {
        let pend = LagrangianModel::pendulum();
        let q = CotangentPoint::new(pt(0.5), vec![2.0]);
        let (x, v) = pend.inverse_legendre(&q).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        let back = pend.legendre_transform(&x, &v);
        assert!((back.p[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_legendre_random_round_trips() {
        // 10^3 random samples, max error < 1e-10 (DERIVED oracle: p = v for
        // quadratic fibers, so Newton must reproduce the analytic inverse)
        let pend = LagrangianModel::pendulum();
        let mut worst = 0.0f64;
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..1000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 11) as f64 / (1u64 << 53) as f64;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = 8.0 * ((state >> 11) as f64 / (1u64 << 53) as f64) - 4.0;
            let (_, v) = pend.inverse_legendre(&CotangentPoint::new(pt(x), vec![p])).unwrap();
            worst = worst.max((v[0] - p).abs());
        }
        assert!(worst < 1e-10, "max error {worst}");
    }

    #[test]
    fn energy_examples() {
        let pend = LagrangianModel::pendulum();
        assert!(pend.energy(&[0.0], &[0.0]).abs() < 1e-15);
        assert!((pend.energy(&[0.5], &[0.0]) + 2.0).abs() < 1e-12);
        let free = LagrangianModel::free(1);
        assert!((free.energy(&[0.37], &[0.7]) - 0.245).abs() < 1e-15);
        // E = H ∘ Legendre
        let x = pt(0.3);
        let v = [1.2];
        let q = pend.legendre_transform(&x, &v);
        let h = pend.fenchel_hamiltonian(&q).unwrap();
        assert!((pend.energy(&[0.3], &v) - h).abs() < 1e-10);
    }

    #[test]
    fn shift_examples() {
        let free = LagrangianModel::free(1);
        let shifted = free.shift_by_one_form(&OneForm::constant1(1.0));
        // L_η(x, v) = ½v² − v
        assert!((shifted.eval(&[0.4], &[2.0]) - (2.0 - 2.0)).abs() < 1e-15);
        // involution: shift by c then −c
        let back = shifted.shift_by_one_form(&OneForm::constant1(-1.0));
        for k in 0..10 {
            let x = [k as f64 / 10.0];
            let v = [k as f64 / 3.0 - 1.5];
            assert_eq!(back.eval(&x, &v), free.eval(&x, &v));
        }
        assert!(back.shift().is_none());
    }

    #[test]
    fn shift_consistency_hamiltonian() {
        // H_η(x, p) = H(x, η(x) + p)
        let pend = LagrangianModel::pendulum();
        let form = OneForm::with_primitive(vec![0.8], FourierSeries::mode1(1, 0.0, 0.1));
        let shifted = pend.shift_by_one_form(&form);
        for k in 0..12 {
            let x = pt(k as f64 / 12.0);
            let p = 0.3 * k as f64 - 1.7;
            let lhs = shifted.fenchel_hamiltonian(&CotangentPoint::new(x.clone(), vec![p])).unwrap();
            let eta = form.eval_vec(x.coords());
            let rhs = pend
                .fenchel_hamiltonian(&CotangentPoint::new(x, vec![eta[0] + p]))
                .unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn fenchel_inequality_holds() {
        let pend = LagrangianModel::pendulum();
        for k in 0..10 {
            let x = k as f64 / 10.0;
            for j in 0..10 {
                let v = 0.8 * j as f64 - 4.0;
                for i in 0..10 {
                    let p = 0.9 * i as f64 - 4.5;
                    let l = pend.eval(&[x], &[v]);
                    let h = pend
                        .fenchel_hamiltonian(&CotangentPoint::new(pt(x), vec![p]))
                        .unwrap();
                    let gap = l + h - p * v;
                    assert!(gap >= -1e-12, "fenchel violated by {gap}");
                    // equality iff p = grad_v
                    let pv = pend.grad_v(&[x], &[v])[0];
                    if (p - pv).abs() < 1e-9 {
                        assert!(gap.abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn duality_round_trip_recovers_lagrangian() {
        // L(x,v) = sup_p { pv − H(x,p) }: evaluate the conjugate of H by
        // Newton on p (H strictly convex in p) and compare with eval.
        let pend = LagrangianModel::pendulum();
        for k in 0..8 {
            let x = k as f64 / 8.0;
            for j in 0..8 {
                let v = j as f64 - 3.5;
                // optimal p satisfies ∂H/∂p = v i.e. p = grad_v(x, v)
                let p = pend.grad_v(&[x], &[v]);
                let h = pend
                    .fenchel_hamiltonian(&CotangentPoint::new(pt(x), p.clone()))
                    .unwrap();
                let l_back = p[0] * v - h;
                assert!((l_back - pend.eval(&[x], &[v])).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn audits_pass_for_builtins() {
        for model in [
            LagrangianModel::free(2),
            LagrangianModel::pendulum(),
            LagrangianModel::doubled_pendulum(),
            LagrangianModel::mane(vec![FourierSeries::mode1(1, 0.3, 0.0).with_constant(0.5)]),
        ] {
            assert!(model.audit_convexity().unwrap() > 0.0);
            assert!(model.audit_derivative_consistency(1e-5).is_ok());
            let w = model.superlinearity_witness(&[1.0, 5.0], 10.0);
            assert_eq!(w.len(), 2);
        }
    }

    #[test]
    fn custom_model_with_bad_derivatives_is_rejected() {
        let eval: DynField = Arc::new(|_x, v| 0.5 * v[0] * v[0]);
        let grad_x: DynVecField = Arc::new(|_x, _v| vec![0.0]);
        // wrong by a factor of 2
        let grad_v: DynVecField = Arc::new(|_x, v| vec![2.0 * v[0]]);
        let hess = Arc::new(|_x: &[f64], _v: &[f64]| DMatrix::from_element(1, 1, 1.0));
        assert!(LagrangianModel::custom(1, eval, grad_x, grad_v, hess).is_err());
    }
}
