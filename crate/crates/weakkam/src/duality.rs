//! Mather's α function by three independent routes, β by Fenchel
//! conjugation of an α table, subderivatives and flat-piece detection, and
//! the occupation-measure linear program whose minimizers feed the Mather
//! sets.
//!
//! Routes for α(c):
//!  1. critical value: bisection on k over the negative-loop test;
//!  2. closed-measure LP: minimize Σ μ·L_η over nonnegative grid weights
//!     with Σμ = 1 and Fourier closedness constraints, α = −optimum;
//!  3. inf–max: minimize max_x H(x, c + u′(x)) over truncated Fourier u by
//!     annealed soft-max descent.

use crate::action::{loop_table, mane_critical_value_refined, ActionOptions, LoopTable};
use crate::dynamics::OccupationMeasure;
use crate::error::{Error, Result};
use crate::lagrangian::{CotangentPoint, LagrangianModel};
use crate::lp::{self, ColumnOracle};
use crate::oneform::OneForm;
use crate::torus::TorusPoint;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::TAU;

/// Which computation produced an α value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AlphaRoute {
    #[serde(rename = "critical-value")]
    CriticalValue,
    #[serde(rename = "closed-measure-lp")]
    ClosedMeasureLp,
    #[serde(rename = "inf-max-subsolution")]
    InfMaxSubsolution,
}

impl AlphaRoute {
    pub const ALL: [AlphaRoute; 3] =
        [AlphaRoute::CriticalValue, AlphaRoute::ClosedMeasureLp, AlphaRoute::InfMaxSubsolution];

    pub fn name(&self) -> &'static str {
        match self {
            AlphaRoute::CriticalValue => "critical-value",
            AlphaRoute::ClosedMeasureLp => "closed-measure-lp",
            AlphaRoute::InfMaxSubsolution => "inf-max-subsolution",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlphaSample {
    pub c: Vec<f64>,
    pub value: f64,
    pub route: AlphaRoute,
    /// route-specific convergence diagnostic (bisection width, LP pivot
    /// count, final descent step)
    pub residual: f64,
}

/// Grid specification for the occupation-measure LP.
#[derive(Clone, Debug, Serialize)]
pub struct LpGridSpec {
    /// x resolution per axis
    pub x_res: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// v resolution per axis
    pub v_res: usize,
    /// closedness constraints for Fourier test functions up to this order
    pub fourier_order: i32,
    /// LP weights above this threshold count as support atoms
    pub support_threshold: f64,
}

impl LpGridSpec {
    pub fn default_1d() -> Self {
        LpGridSpec {
            x_res: 64,
            v_min: -4.0,
            v_max: 4.0,
            v_res: 65,
            fourier_order: 8,
            support_threshold: 1e-8,
        }
    }

    /// Finer velocity grid for set-extraction runs (support location needs
    /// v-steps below the Hausdorff tolerances).
    pub fn fine_1d() -> Self {
        LpGridSpec { v_res: 129, ..LpGridSpec::default_1d() }
    }

    pub fn for_dim(d: usize) -> Self {
        match d {
            1 => LpGridSpec::default_1d(),
            2 => LpGridSpec {
                x_res: 4,
                v_min: -2.0,
                v_max: 2.0,
                v_res: 161,
                fourier_order: 1,
                support_threshold: 1e-8,
            },
            _ => LpGridSpec {
                x_res: 8,
                v_min: -3.0,
                v_max: 3.0,
                v_res: 33,
                fourier_order: 2,
                support_threshold: 1e-8,
            },
        }
    }
}

/// Canonical nonzero integer modes with |m|∞ ≤ order (first nonzero
/// component positive, so ±m are not both listed).
fn canonical_modes(d: usize, order: i32) -> Vec<Vec<i32>> {
    let mut all = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &all {
            for k in -order..=order {
                let mut q = p.clone();
                q.push(k);
                next.push(q);
            }
        }
        all = next;
    }
    all.into_iter()
        .filter(|m| {
            match m.iter().find(|k| **k != 0) {
                Some(first) => *first > 0,
                None => false,
            }
        })
        .collect()
}

/// Column oracle for the closed-measure LP: columns are grid atoms
/// (x_i, v_j), rows are [normalization; per mode, the cos- and sin-test
/// closedness functionals Σ μ ∇f_m(x)·v].
struct OccupationLp {
    n_x: usize,
    n_v: usize,
    n_modes: usize,
    costs: Vec<f64>,
    /// per (mode, x): sin(2π m·x) and cos(2π m·x)
    sin_mx: Vec<f64>,
    cos_mx: Vec<f64>,
    /// per (mode, v): 2π m·v
    mv: Vec<f64>,
}

impl OccupationLp {
    fn build(model: &LagrangianModel, form: &OneForm, grid: &LpGridSpec) -> (Self, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let d = model.dim();
        let xs = lattice(d, grid.x_res, 0.0, 1.0, false);
        let vs = lattice(d, grid.v_res, grid.v_min, grid.v_max, true);
        let modes = canonical_modes(d, grid.fourier_order);
        let n_x = xs.len();
        let n_v = vs.len();
        let n_modes = modes.len();

        let mut costs = Vec::with_capacity(n_x * n_v);
        for x in &xs {
            let mut eta = vec![0.0; d];
            form.eval(x, &mut eta);
            for v in &vs {
                let lv = model.eval(x, v) - eta.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
                costs.push(lv);
            }
        }
        let mut sin_mx = vec![0.0; n_modes * n_x];
        let mut cos_mx = vec![0.0; n_modes * n_x];
        for (mi, m) in modes.iter().enumerate() {
            for (xi, x) in xs.iter().enumerate() {
                let phase = TAU * m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>();
                sin_mx[mi * n_x + xi] = phase.sin();
                cos_mx[mi * n_x + xi] = phase.cos();
            }
        }
        let mut mv = vec![0.0; n_modes * n_v];
        for (mi, m) in modes.iter().enumerate() {
            for (vi, v) in vs.iter().enumerate() {
                mv[mi * n_v + vi] = TAU * m.iter().zip(v).map(|(a, b)| *a as f64 * b).sum::<f64>();
            }
        }
        (OccupationLp { n_x, n_v, n_modes, costs, sin_mx, cos_mx, mv }, xs, vs)
    }
}

impl ColumnOracle for OccupationLp {
    fn n_rows(&self) -> usize {
        1 + 2 * self.n_modes
    }
    fn n_cols(&self) -> usize {
        self.n_x * self.n_v
    }
    fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        let xi = j / self.n_v;
        let vi = j % self.n_v;
        out[0] = 1.0;
        for mi in 0..self.n_modes {
            let t = self.mv[mi * self.n_v + vi];
            // f = cos(2πm·x): ∇f·v = −sin(2πm·x)·(2π m·v)
            out[1 + 2 * mi] = -self.sin_mx[mi * self.n_x + xi] * t;
            // f = sin(2πm·x): ∇f·v = cos(2πm·x)·(2π m·v)
            out[2 + 2 * mi] = self.cos_mx[mi * self.n_x + xi] * t;
        }
    }
    fn rhs(&self, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = 1.0;
    }
}

/// Uniform lattice in [lo, hi]^d (endpoint included when `closed`, else the
/// periodic convention [lo, hi)).
fn lattice(d: usize, res: usize, lo: f64, hi: f64, closed: bool) -> Vec<Vec<f64>> {
    let steps: Vec<f64> = (0..res)
        .map(|i| {
            if closed {
                lo + (hi - lo) * i as f64 / (res - 1) as f64
            } else {
                lo + (hi - lo) * i as f64 / res as f64
            }
        })
        .collect();
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &out {
            for s in &steps {
                let mut q = p.clone();
                q.push(*s);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Solve the closed-measure LP; returns −optimum (= α) and the minimizing
/// measure.
pub fn mather_measure_lp(
    model: &LagrangianModel,
    form: &OneForm,
    grid: &LpGridSpec,
) -> Result<(f64, OccupationMeasure, usize)> {
    let (oracle, xs, vs) = OccupationLp::build(model, form, grid);
    let sol = lp::solve(&oracle)?;
    let mut atoms = Vec::new();
    for (j, w) in &sol.support {
        if *w >= grid.support_threshold {
            let xi = j / oracle.n_v;
            let vi = j % oracle.n_v;
            atoms.push((TorusPoint::new(xs[xi].clone()), vs[vi].clone(), *w));
        }
    }
    Ok((-sol.objective, OccupationMeasure { atoms }, sol.iterations))
}

/// Options for the inf–max route.
#[derive(Clone, Debug)]
pub struct InfMaxOptions {
    pub fourier_order: i32,
    pub grid_res: usize,
    pub temperatures: Vec<f64>,
    pub iters_per_temperature: usize,
    pub learning_rate: f64,
}

impl Default for InfMaxOptions {
    fn default() -> Self {
        InfMaxOptions {
            fourier_order: 16,
            grid_res: 256,
            temperatures: vec![10.0, 30.0, 100.0, 300.0, 1000.0],
            iters_per_temperature: 250,
            learning_rate: 0.05,
        }
    }
}

/// α(c) = inf_u max_x H(x, c + d_x u): soft-max descent over Fourier
/// coefficients of u, temperature annealed so the soft-max approaches the
/// inf–max from above. Returns (hard max at the converged u, last step).
pub fn alpha_inf_max(
    model: &LagrangianModel,
    c: &[f64],
    opts: &InfMaxOptions,
) -> Result<(f64, f64)> {
    let d = model.dim();
    let grid_res = if d == 1 { opts.grid_res } else { 48 };
    let xs = lattice(d, grid_res, 0.0, 1.0, false);
    let modes = canonical_modes(d, if d == 1 { opts.fourier_order } else { 4 });
    let n_params = 2 * modes.len();

    // precompute mode phases on the grid
    let n_g = xs.len();
    let mut sin_gx = vec![0.0; modes.len() * n_g];
    let mut cos_gx = vec![0.0; modes.len() * n_g];
    for (mi, m) in modes.iter().enumerate() {
        for (gi, x) in xs.iter().enumerate() {
            let phase = TAU * m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>();
            sin_gx[mi * n_g + gi] = phase.sin();
            cos_gx[mi * n_g + gi] = phase.cos();
        }
    }

    // u(x) = Σ a_m cos + b_m sin ⇒ ∇u(x) = Σ 2π m (−a_m sin + b_m cos)
    let grad_u = |params: &[f64], gi: usize, out: &mut [f64]| {
        out.fill(0.0);
        for (mi, m) in modes.iter().enumerate() {
            let a = params[2 * mi];
            let b = params[2 * mi + 1];
            let s = -a * sin_gx[mi * n_g + gi] + b * cos_gx[mi * n_g + gi];
            for (o, k) in out.iter_mut().zip(m) {
                *o += TAU * *k as f64 * s;
            }
        }
    };

    let mut params = vec![0.0; n_params];
    let mut last_step = 0.0;

    // per-temperature L-BFGS on the soft-max
    // F_τ(u) = (1/τ)·ln Σ_g exp(τ·H(x_g, c + u′(x_g)));
    // ∂F/∂a = Σ_g w_g ⟨v*_g, ∂(∇u)(x_g)/∂a⟩ with w_g the softmax weights
    // and v* = ∂H/∂p the fiber maximizer
    for &temp in &opts.temperatures {
        let objective = |p: &[f64], grad: &mut [f64]| -> f64 {
            let mut du = vec![0.0; d];
            let mut h_vals = vec![0.0; n_g];
            let mut v_stars: Vec<Vec<f64>> = vec![vec![0.0; d]; n_g];
            let mut h_max = f64::NEG_INFINITY;
            for (gi, x) in xs.iter().enumerate() {
                grad_u(p, gi, &mut du);
                let mom: Vec<f64> = c.iter().zip(&du).map(|(a, b)| a + b).collect();
                let q = CotangentPoint::new(TorusPoint::new(x.clone()), mom);
                let (h, v) = model
                    .fenchel_hamiltonian_with_velocity(&q)
                    .expect("fiber newton failed inside inf-max descent");
                h_vals[gi] = h;
                v_stars[gi] = v;
                h_max = h_max.max(h);
            }
            let mut z = 0.0;
            for h in &h_vals {
                z += ((h - h_max) * temp).exp();
            }
            grad.fill(0.0);
            for gi in 0..n_g {
                let w = ((h_vals[gi] - h_max) * temp).exp() / z;
                if w < 1e-14 {
                    continue;
                }
                for (mi, m) in modes.iter().enumerate() {
                    let mv: f64 =
                        m.iter().zip(&v_stars[gi]).map(|(a, b)| TAU * *a as f64 * b).sum();
                    grad[2 * mi] += w * (-sin_gx[mi * n_g + gi]) * mv;
                    grad[2 * mi + 1] += w * cos_gx[mi * n_g + gi] * mv;
                }
            }
            h_max + z.ln() / temp
        };
        let result = crate::optim::minimize(
            objective,
            &params,
            &crate::optim::LbfgsOptions {
                grad_tol: 1e-9,
                max_iter: opts.iters_per_temperature,
            },
        );
        params = result.x;
        last_step = result.grad_norm;
    }

    // hard max at the converged u
    let mut du = vec![0.0; d];
    let mut h_max = f64::NEG_INFINITY;
    for (gi, x) in xs.iter().enumerate() {
        grad_u(&params, gi, &mut du);
        let p: Vec<f64> = c.iter().zip(&du).map(|(a, b)| a + b).collect();
        let h = model.hamiltonian(x, &p)?;
        h_max = h_max.max(h);
    }
    Ok((h_max, last_step))
}

/// Bundled per-route options.
#[derive(Clone, Debug)]
pub struct DualityOptions {
    pub action: ActionOptions,
    pub lp: LpGridSpec,
    pub infmax: InfMaxOptions,
}

impl DualityOptions {
    pub fn for_model(model: &LagrangianModel) -> Self {
        DualityOptions {
            action: ActionOptions::coarse(),
            lp: LpGridSpec::for_dim(model.dim()),
            infmax: InfMaxOptions::default(),
        }
    }
}

/// α(c) by the requested route.
pub fn alpha(
    model: &LagrangianModel,
    c: &[f64],
    route: AlphaRoute,
    opts: &DualityOptions,
) -> Result<AlphaSample> {
    match route {
        AlphaRoute::CriticalValue => {
            let table = loop_table(model, &opts.action)?;
            let v = mane_critical_value_refined(model, &table, c, &opts.action)?;
            Ok(AlphaSample { c: c.to_vec(), value: v, route, residual: 1e-4 })
        }
        AlphaRoute::ClosedMeasureLp => {
            let form = OneForm::constant(c.to_vec());
            let (a, _, iters) = mather_measure_lp(model, &form, &opts.lp)?;
            Ok(AlphaSample { c: c.to_vec(), value: a, route, residual: iters as f64 })
        }
        AlphaRoute::InfMaxSubsolution => {
            let (a, step) = alpha_inf_max(model, c, &opts.infmax)?;
            Ok(AlphaSample { c: c.to_vec(), value: a, route, residual: step })
        }
    }
}

/// α evaluated with a shared loop table (cheap across a c-sweep).
pub fn alpha_critical_with_table(
    model: &LagrangianModel,
    table: &LoopTable,
    c: &[f64],
    opts: &ActionOptions,
) -> Result<f64> {
    mane_critical_value_refined(model, table, c, opts)
}

/// A sampled α graph. The d = 1 accessors assume sorted distinct c values.
#[derive(Clone, Debug)]
pub struct AlphaTable {
    pub dim: usize,
    pub points: Vec<(Vec<f64>, f64)>,
}

impl AlphaTable {
    pub fn from_1d(mut samples: Vec<(f64, f64)>) -> Self {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        AlphaTable { dim: 1, points: samples.into_iter().map(|(c, a)| (vec![c], a)).collect() }
    }

    pub fn as_1d(&self) -> Vec<(f64, f64)> {
        assert_eq!(self.dim, 1);
        self.points.iter().map(|(c, a)| (c[0], *a)).collect()
    }

    /// Build a table over a 1d c-grid with the critical-value route (the
    /// loop table is shared across the sweep).
    pub fn build_1d(model: &LagrangianModel, cs: &[f64], opts: &ActionOptions) -> Result<Self> {
        let table = loop_table(model, opts)?;
        let mut samples = Vec::with_capacity(cs.len());
        for &c in cs {
            samples.push((c, mane_critical_value_refined(model, &table, &[c], opts)?));
        }
        Ok(AlphaTable::from_1d(samples))
    }
}

#[derive(Clone, Debug)]
pub struct BetaSample {
    pub h: Vec<f64>,
    pub value: f64,
    /// argmax of ⟨c,h⟩ − α(c) (the supporting cohomology class)
    pub supporting_c: Vec<f64>,
}

/// β(h) = max_c (⟨c,h⟩ − α(c)) over the table with local quadratic
/// refinement. Errors with `SupOnBoundary` when the argmax touches the
/// table's bounding box.
pub fn beta(table: &AlphaTable, h: &[f64]) -> Result<BetaSample> {
    let score = |c: &[f64], a: f64| dot(c, h) - a;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for (i, (c, a)) in table.points.iter().enumerate() {
        let s = score(c, *a);
        if s > best {
            best = s;
            best_i = i;
        }
    }
    let c_star = table.points[best_i].0.clone();
    // boundary check against the axis-aligned bounding box
    for axis in 0..table.dim {
        let lo = table.points.iter().map(|(c, _)| c[axis]).fold(f64::INFINITY, f64::min);
        let hi = table.points.iter().map(|(c, _)| c[axis]).fold(f64::NEG_INFINITY, f64::max);
        if (c_star[axis] - lo).abs() < 1e-12 || (c_star[axis] - hi).abs() < 1e-12 {
            return Err(Error::SupOnBoundary);
        }
    }

    // local quadratic fit of α around the argmax, then maximize analytically
    let mut neighbors: Vec<(Vec<f64>, f64)> = table
        .points
        .iter()
        .map(|(c, a)| (c.clone(), *a))
        .collect();
    neighbors.sort_by(|a, b| {
        dist2(&a.0, &c_star).partial_cmp(&dist2(&b.0, &c_star)).unwrap()
    });
    let d = table.dim;
    let n_fit = (2 * d + 1 + d * (d + 1) / 2).max(3).min(neighbors.len());
    let use_pts = &neighbors[..n_fit.max(3 * d).min(neighbors.len())];
    if let Some((value, c_refined)) = quadratic_refine(use_pts, &c_star, h) {
        Ok(BetaSample { h: h.to_vec(), value, supporting_c: c_refined })
    } else {
        Ok(BetaSample { h: h.to_vec(), value: best, supporting_c: c_star })
    }
}

/// Least-squares quadratic α ≈ q(c) on the neighbourhood, maximize
/// ⟨c,h⟩ − q(c). Falls back (None) when the fit is not concave-compatible
/// or the stationary point leaves the neighbourhood.
fn quadratic_refine(
    pts: &[(Vec<f64>, f64)],
    center: &[f64],
    h: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let d = center.len();
    let n_coef = 1 + d + d * (d + 1) / 2;
    if pts.len() < n_coef {
        return None;
    }
    let mut a = DMatrix::zeros(pts.len(), n_coef);
    let mut b = DVector::zeros(pts.len());
    for (r, (c, val)) in pts.iter().enumerate() {
        let dc: Vec<f64> = c.iter().zip(center).map(|(x, y)| x - y).collect();
        let mut col = 0;
        a[(r, col)] = 1.0;
        col += 1;
        for i in 0..d {
            a[(r, col)] = dc[i];
            col += 1;
        }
        for i in 0..d {
            for j in i..d {
                a[(r, col)] = if i == j { 0.5 * dc[i] * dc[i] } else { dc[i] * dc[j] };
                col += 1;
            }
        }
        b[r] = *val;
    }
    let svd = a.svd(true, true);
    let coef = svd.solve(&b, 1e-12).ok()?;
    // assemble gradient g and hessian Q of q at center
    let mut g = vec![0.0; d];
    for i in 0..d {
        g[i] = coef[1 + i];
    }
    let mut q = DMatrix::zeros(d, d);
    let mut col = 1 + d;
    for i in 0..d {
        for j in i..d {
            let v = coef[col];
            q[(i, j)] = v;
            q[(j, i)] = v;
            col += 1;
        }
    }
    // maximize ⟨c,h⟩ − q(c): Q (c−c0) = h − g
    let rhs = DVector::from_iterator(d, h.iter().zip(&g).map(|(a, b)| a - b));
    let sol = q.clone().lu().solve(&rhs)?;
    // stationary point must be a max of the concave objective: Q must be PSD
    let eigs = (&q + q.transpose()).scale(0.5).symmetric_eigenvalues();
    if eigs.iter().any(|e| *e < -1e-9) {
        return None;
    }
    let radius = pts.iter().map(|(c, _)| dist2(c, center).sqrt()).fold(0.0, f64::max);
    if sol.norm() > radius {
        return None;
    }
    let c_star: Vec<f64> = center.iter().zip(sol.iter()).map(|(a, b)| a + b).collect();
    // q at c_star
    let mut qv = coef[0];
    for i in 0..d {
        qv += g[i] * sol[i];
    }
    qv += 0.5 * (q * &sol).dot(&sol);
    Some((dot(&c_star, h) - qv, c_star))
}

/// One-sided difference quotients of a 1d α table with Richardson
/// extrapolation; flats collapse to the exact one-sided slopes.
pub fn subderivative_interval(table: &AlphaTable, c: f64) -> Result<(f64, f64)> {
    let pts = table.as_1d();
    let idx = pts
        .iter()
        .position(|(ci, _)| (ci - c).abs() < 1e-9)
        .ok_or_else(|| Error::BadInput(format!("c = {c} not a table node")))?;
    if idx < 2 || idx + 2 >= pts.len() {
        return Err(Error::BadInput("c too close to the table boundary".into()));
    }
    let a = |i: usize| pts[i].1;
    let cgrid = |i: usize| pts[i].0;
    // left: D1 with steps δ and 2δ, Richardson: 2·D(δ) − D(2δ)
    let d1l = (a(idx) - a(idx - 1)) / (cgrid(idx) - cgrid(idx - 1));
    let d2l = (a(idx) - a(idx - 2)) / (cgrid(idx) - cgrid(idx - 2));
    let left = 2.0 * d1l - d2l;
    let d1r = (a(idx + 1) - a(idx)) / (cgrid(idx + 1) - cgrid(idx));
    let d2r = (a(idx + 2) - a(idx)) / (cgrid(idx + 2) - cgrid(idx));
    let right = 2.0 * d1r - d2r;
    Ok((left, right))
}

/// ∂β(0) equals the flat of α through its minimum: {c : α(c) ≤ α(0) + tol},
/// edges located by linear interpolation of the table.
pub fn beta_subderivative_at_zero(table: &AlphaTable, tol: f64) -> Result<(f64, f64)> {
    let pts = table.as_1d();
    let zero_idx = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.abs().partial_cmp(&b.1 .0.abs()).unwrap())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::BadInput("empty table".into()))?;
    let a0 = pts[zero_idx].1;
    let level = a0 + tol;
    // walk right
    let mut hi = pts[zero_idx].0;
    for w in zero_idx..pts.len() - 1 {
        if pts[w + 1].1 > level {
            let (c0, v0) = pts[w];
            let (c1, v1) = pts[w + 1];
            hi = c0 + (level - v0) / (v1 - v0) * (c1 - c0);
            break;
        }
        hi = pts[w + 1].0;
    }
    let mut lo = pts[zero_idx].0;
    for w in (1..=zero_idx).rev() {
        if pts[w - 1].1 > level {
            let (c0, v0) = pts[w];
            let (c1, v1) = pts[w - 1];
            lo = c0 + (level - v0) / (v1 - v0) * (c1 - c0);
            break;
        }
        lo = pts[w - 1].0;
    }
    Ok((lo, hi))
}

/// Locate an edge of the α flat by bisecting the critical-value route on c:
/// the largest c with α(c) ≤ threshold. A shared loop table makes each α
/// evaluation a cheap table scan.
pub fn flat_edge(
    model: &LagrangianModel,
    direction: f64,
    threshold: f64,
    c_max: f64,
    opts: &ActionOptions,
) -> Result<f64> {
    let table = loop_table(model, opts)?;
    let alpha_at = |c: f64| -> Result<f64> {
        mane_critical_value_refined(model, &table, &[direction * c], opts)
    };
    let mut lo = 0.0;
    let mut hi = c_max;
    if alpha_at(hi)? <= threshold {
        return Ok(direction * hi);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if alpha_at(mid)? <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-5 {
            break;
        }
    }
    Ok(direction * 0.5 * (lo + hi))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_of_exact_quadratic_table() {
        // α(c) = ½c²: β(h) = ½h², supporting c = h
        let cs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let table =
            AlphaTable::from_1d(cs.iter().map(|&c| (c, 0.5 * c * c)).collect());
        let b = beta(&table, &[0.7]).unwrap();
        assert!((b.value - 0.245).abs() < 1e-9, "beta {}", b.value);
        assert!((b.supporting_c[0] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn beta_on_boundary_is_an_error() {
        let cs: Vec<f64> = (0..11).map(|i| -0.5 + 0.1 * i as f64).collect();
        let table = AlphaTable::from_1d(cs.iter().map(|&c| (c, 0.5 * c * c)).collect());
        assert!(matches!(beta(&table, &[5.0]), Err(Error::SupOnBoundary)));
    }

    #[test]
    fn subderivative_of_exact_quadratic() {
        let cs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let table = AlphaTable::from_1d(cs.iter().map(|&c| (c, 0.5 * c * c)).collect());
        let (lo, hi) = subderivative_interval(&table, 1.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-6, "left {lo}");
        assert!((hi - 1.0).abs() < 1e-6, "right {hi}");
    }

    #[test]
    fn flat_detection_on_synthetic_pendulum_alpha() {
        // synthetic α: 0 on [−edge, edge], quadratic growth outside
        let edge = 4.0 / std::f64::consts::PI;
        let cs: Vec<f64> = (0..81).map(|i| -2.0 + 0.05 * i as f64).collect();
        let table = AlphaTable::from_1d(
            cs.iter()
                .map(|&c| {
                    let ex = (c.abs() - edge).max(0.0);
                    (c, 0.8 * ex * ex)
                })
                .collect(),
        );
        let (lo, hi) = beta_subderivative_at_zero(&table, 1e-4).unwrap();
        assert!((hi - edge).abs() < 0.05, "hi {hi}");
        assert!((lo + edge).abs() < 0.05, "lo {lo}");
    }

    #[test]
    fn lp_route_free_model() {
        // α(c) = ½c² for the integrable flat model
        let free = LagrangianModel::free(1);
        let grid = LpGridSpec { x_res: 16, v_res: 33, v_min: -2.0, v_max: 2.0, fourier_order: 4, support_threshold: 1e-8 };
        let form = OneForm::constant1(1.0);
        let (a, mu, _) = mather_measure_lp(&free, &form, &grid).unwrap();
        assert!((a - 0.5).abs() < 1e-6, "alpha {a}");
        // support concentrated on v = 1
        for (_, v, _) in &mu.atoms {
            assert!((v[0] - 1.0).abs() < 1e-9, "atom velocity {}", v[0]);
        }
        let rho = mu.rotation_vector();
        assert!((rho[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn infmax_route_free_model() {
        let free = LagrangianModel::free(1);
        let opts = InfMaxOptions { iters_per_temperature: 120, ..Default::default() };
        let (a, _) = alpha_inf_max(&free, &[1.0], &opts).unwrap();
        assert!((a - 0.5).abs() < 1e-6, "alpha {a}");
    }

    #[test]
    fn canonical_modes_have_no_sign_duplicates() {
        let modes = canonical_modes(2, 1);
        assert_eq!(modes.len(), 4); // (0,1), (1,-1), (1,0), (1,1)
        for m in &modes {
            let neg: Vec<i32> = m.iter().map(|k| -k).collect();
            assert!(!modes.contains(&neg));
        }
    }
}
