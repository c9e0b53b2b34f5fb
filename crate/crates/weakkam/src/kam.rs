//! Weak KAM solutions by discrete Lax-Oleinik iteration: kernel assembly
//! and caching, the value-iteration fixed point, critical-subsolution
//! residuals, and backward calibrated orbits.
//!
//! The kernel h_{η,τ}(x_i, y_j) on the periodic grid is the expensive part;
//! it is assembled once per (model, form, grid, τ), cached in memory and on
//! disk (binary table + JSON sidecar) keyed by a content hash of the
//! configuration. Iteration itself is a cheap min-plus matrix-vector sweep.

use crate::dynamics::Orbit;
use crate::error::{Error, Result};
use crate::lagrangian::LagrangianModel;
use crate::oneform::OneForm;
use crate::path::{minimize_multistart, LiftedPath, MinimizeOptions};
use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

/// A periodic scalar field on a uniform d = 1 grid (node i at x = i/res).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(res: usize) -> Self {
        GridField { values: vec![0.0; res] }
    }

    pub fn res(&self) -> usize {
        self.values.len()
    }

    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 / self.res() as f64
    }

    /// Value at an arbitrary point by periodic linear interpolation.
    pub fn interp(&self, x: f64) -> f64 {
        let n = self.res();
        let s = (x - x.floor()) * n as f64;
        let i = s.floor() as usize % n;
        let frac = s - s.floor();
        self.values[i] * (1.0 - frac) + self.values[(i + 1) % n] * frac
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete Lax-Oleinik kernel: values[i * res + j] = h_{η,τ}(x_i, x_j),
/// with the minimizing winding stored for orbit extraction.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub res: usize,
    pub tau: f64,
    pub values: Vec<f64>,
    pub windings: Vec<i8>,
}

impl KernelTable {
    pub fn at(&self, from: usize, to: usize) -> f64 {
        self.values[from * self.res + to]
    }
}

#[derive(Clone, Debug)]
pub struct WeakKamOptions {
    pub grid_res: usize,
    pub tau: f64,
    /// path segments per kernel entry
    pub segments: usize,
    pub winding_radius: i64,
    pub max_sweeps: usize,
    pub residual_tol: f64,
    /// anchor node for the normalization u(anchor) = 0
    pub anchor: usize,
    pub seed: u64,
}

impl Default for WeakKamOptions {
    fn default() -> Self {
        WeakKamOptions {
            grid_res: 256,
            tau: 1.0,
            segments: 32,
            winding_radius: 2,
            max_sweeps: 2000,
            residual_tol: 1e-3,
            anchor: 0,
            seed: 0,
        }
    }
}

static KERNEL_CACHE: Lazy<Mutex<HashMap<String, Arc<KernelTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Serialize, Deserialize)]
struct KernelSidecar {
    res: usize,
    tau: f64,
    segments: usize,
    winding_radius: i64,
    model_hash: String,
}

fn cache_dir() -> PathBuf {
    match std::env::var_os("WEAKKAM_CACHE_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => std::env::temp_dir().join("weakkam-kernel-cache"),
    }
}

fn kernel_key(model: &LagrangianModel, form: &OneForm, opts: &WeakKamOptions) -> Option<String> {
    let sig = model.signature()?;
    let c: Vec<String> = form.cohomology().iter().map(|x| format!("{x:.17e}")).collect();
    let desc = format!(
        "{sig}|form:c[{}]|res{}|tau{:.17e}|seg{}|rad{}|seed{}",
        c.join(","),
        opts.grid_res,
        opts.tau,
        opts.segments,
        opts.winding_radius,
        opts.seed,
    );
    let mut hasher = Sha256::new();
    hasher.update(desc.as_bytes());
    Some(format!("{:x}", hasher.finalize()))
}

fn load_kernel_from_disk(key: &str, opts: &WeakKamOptions) -> Option<KernelTable> {
    let dir = cache_dir();
    let side: KernelSidecar =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{key}.json"))).ok()?)
            .ok()?;
    if side.res != opts.grid_res || (side.tau - opts.tau).abs() > 1e-15 {
        return None;
    }
    let bytes = std::fs::read(dir.join(format!("{key}.bin"))).ok()?;
    let n = side.res * side.res;
    if bytes.len() != n * 8 + n {
        return None;
    }
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut buf = [0u8; 8];
        buf.copy_from_slice(&bytes[i * 8..(i + 1) * 8]);
        values.push(f64::from_le_bytes(buf));
    }
    let windings: Vec<i8> = bytes[n * 8..].iter().map(|b| *b as i8).collect();
    Some(KernelTable { res: side.res, tau: side.tau, values, windings })
}

fn store_kernel_to_disk(key: &str, kernel: &KernelTable, model_hash: &str, opts: &WeakKamOptions) {
    let dir = cache_dir();
    if std::fs::create_dir_all(&dir).is_err() {
        return;
    }
    let mut bytes = Vec::with_capacity(kernel.values.len() * 9);
    for v in &kernel.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend(kernel.windings.iter().map(|w| *w as u8));
    let side = KernelSidecar {
        res: kernel.res,
        tau: kernel.tau,
        segments: opts.segments,
        winding_radius: opts.winding_radius,
        model_hash: model_hash.to_string(),
    };
    // write-then-rename keeps concurrent runs from reading torn files
    let tmp_bin = dir.join(format!("{key}.bin.tmp{}", std::process::id()));
    let tmp_json = dir.join(format!("{key}.json.tmp{}", std::process::id()));
    if std::fs::write(&tmp_bin, &bytes).is_ok()
        && std::fs::write(&tmp_json, serde_json::to_string(&side).unwrap()).is_ok()
    {
        let _ = std::fs::rename(&tmp_bin, dir.join(format!("{key}.bin")));
        let _ = std::fs::rename(&tmp_json, dir.join(format!("{key}.json")));
    }
}

/// Assemble (or fetch) the fixed-time action kernel on the grid.
pub fn assemble_kernel(
    model: &LagrangianModel,
    form: &OneForm,
    opts: &WeakKamOptions,
) -> Result<Arc<KernelTable>> {
    if model.dim() != 1 {
        return Err(Error::Unsupported("the Lax-Oleinik grid solver is d = 1".into()));
    }
    let key = kernel_key(model, form, opts);
    if let Some(k) = &key {
        if let Some(hit) = KERNEL_CACHE.lock().unwrap().get(k) {
            return Ok(hit.clone());
        }
        if let Some(disk) = load_kernel_from_disk(k, opts) {
            let arc = Arc::new(disk);
            KERNEL_CACHE.lock().unwrap().insert(k.clone(), arc.clone());
            return Ok(arc);
        }
    }

    let shifted = model.shift_by_one_form(form);
    let n = opts.grid_res;
    let tau = opts.tau;
    let c = form.cohomology()[0];
    let mopts = MinimizeOptions { grad_tol: 1e-8, max_iter: 3000 };
    let radius = opts.winding_radius;

    // rows are independent; each row sweeps its targets with warm starts
    let rows: Result<Vec<(Vec<f64>, Vec<i8>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            let mut row = vec![0.0; n];
            let mut wrow = vec![0i8; n];
            // per-winding warm path, keyed by offset from the drift center
            let mut warm: HashMap<i64, LiftedPath> = HashMap::new();
            for j in 0..n {
                let y = j as f64 / n as f64;
                let center = (c * tau - (y - x)).round() as i64;
                let mut best = f64::INFINITY;
                let mut best_w = 0i64;
                for dw in -radius..=radius {
                    let w = center + dw;
                    let target = y + w as f64;
                    let extra: Vec<LiftedPath> =
                        warm.get(&dw).map(|p| p.clone()).into_iter().collect();
                    let m = minimize_multistart(
                        &shifted,
                        &[x],
                        &[target],
                        tau,
                        opts.segments,
                        if extra.is_empty() { 2 } else { 1 },
                        opts.seed,
                        &extra,
                        &mopts,
                    )?;
                    warm.insert(dw, m.path.clone());
                    if m.action < best {
                        best = m.action;
                        best_w = w;
                    }
                }
                row[j] = best;
                wrow[j] = best_w.clamp(i8::MIN as i64, i8::MAX as i64) as i8;
            }
            Ok((row, wrow))
        })
        .collect();
    let rows = rows?;
    let mut values = Vec::with_capacity(n * n);
    let mut windings = Vec::with_capacity(n * n);
    for (row, wrow) in rows {
        values.extend(row);
        windings.extend(wrow);
    }
    let kernel = Arc::new(KernelTable { res: n, tau, values, windings });
    if let Some(k) = key {
        store_kernel_to_disk(&k, &kernel, &model.signature().unwrap_or_default(), opts);
        KERNEL_CACHE.lock().unwrap().insert(k, kernel.clone());
    }
    Ok(kernel)
}

/// One Lax-Oleinik sweep: (T_τ u)(y) = min_x [u(x) + h_{η,τ}(x, y)].
/// Monotone and commutes with adding constants.
pub fn lax_oleinik_step(u: &GridField, kernel: &KernelTable) -> GridField {
    let n = kernel.res;
    assert_eq!(u.res(), n, "field and kernel grids must agree");
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let mut best = f64::INFINITY;
            for i in 0..n {
                let v = u.values[i] + kernel.values[i * n + j];
                if v < best {
                    best = v;
                }
            }
            best
        })
        .collect();
    GridField { values }
}

/// Convenience wrapper assembling the kernel behind the scenes.
pub fn lax_oleinik_step_for(
    model: &LagrangianModel,
    form: &OneForm,
    u: &GridField,
    opts: &WeakKamOptions,
) -> Result<GridField> {
    let kernel = assemble_kernel(model, form, opts)?;
    Ok(lax_oleinik_step(u, &kernel))
}

/// A converged weak KAM solution of negative type.
#[derive(Clone, Debug)]
pub struct WeakKamSolution {
    pub u: GridField,
    pub alpha_estimate: f64,
    pub residual: f64,
    pub sweeps: usize,
    pub residual_history: Vec<f64>,
}

/// Iterate u ← T_τ u with anchor renormalization until the fixed-point
/// defect max |T_τ u − u + α τ| drops below tolerance; the per-sweep uniform
/// shift estimates α(c).
pub fn solve_weak_kam(
    model: &LagrangianModel,
    form: &OneForm,
    opts: &WeakKamOptions,
) -> Result<WeakKamSolution> {
    let kernel = assemble_kernel(model, form, opts)?;
    solve_weak_kam_with_kernel(&kernel, opts)
}

pub fn solve_weak_kam_with_kernel(
    kernel: &KernelTable,
    opts: &WeakKamOptions,
) -> Result<WeakKamSolution> {
    let mut u = GridField::zeros(kernel.res);
    let mut history = Vec::new();
    for sweep in 1..=opts.max_sweeps {
        let w = lax_oleinik_step(&u, kernel);
        let shift = w.values[opts.anchor] - u.values[opts.anchor];
        let alpha_estimate = -shift / kernel.tau;
        let residual = (0..kernel.res)
            .map(|j| (w.values[j] - u.values[j] + alpha_estimate * kernel.tau).abs())
            .fold(0.0, f64::max);
        history.push(residual);
        let anchor_val = w.values[opts.anchor];
        u = GridField { values: w.values.iter().map(|v| v - anchor_val).collect() };
        if residual <= opts.residual_tol {
            return Ok(WeakKamSolution {
                u,
                alpha_estimate,
                residual,
                sweeps: sweep,
                residual_history: history,
            });
        }
    }
    Err(Error::NotConverged(format!(
        "weak KAM iteration: residual history tail {:?}",
        &history[history.len().saturating_sub(5)..]
    )))
}

/// Critical-subsolution residual field: H(x, η(x) + u′(x)) − α(c) by
/// centered differences, with kink nodes (left/right difference
/// disagreement above 10× the median) excluded from the max and flagged.
pub struct SubsolutionResidual {
    pub max_off_kinks: f64,
    pub field: Vec<f64>,
    pub kink: Vec<bool>,
}

pub fn subsolution_residual(
    model: &LagrangianModel,
    form: &OneForm,
    u: &GridField,
    alpha_c: f64,
) -> Result<SubsolutionResidual> {
    let n = u.res();
    let dx = 1.0 / n as f64;
    let mut disagreements = Vec::with_capacity(n);
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for j in 0..n {
        let um = u.values[(j + n - 1) % n];
        let up = u.values[(j + 1) % n];
        left[j] = (u.values[j] - um) / dx;
        right[j] = (up - u.values[j]) / dx;
        disagreements.push((left[j] - right[j]).abs());
    }
    let mut sorted = disagreements.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2].max(1e-12);

    let mut field = vec![0.0; n];
    let mut kink = vec![false; n];
    let mut max_off = f64::NEG_INFINITY;
    for j in 0..n {
        let x = [u.node_x(j)];
        let eta = form.eval_vec(&x);
        let du = 0.5 * (left[j] + right[j]);
        let h = model.hamiltonian(&x, &[eta[0] + du])?;
        field[j] = h - alpha_c;
        kink[j] = disagreements[j] > 10.0 * median;
        if !kink[j] {
            max_off = max_off.max(field[j]);
        }
    }
    Ok(SubsolutionResidual { max_off_kinks: max_off, field, kink })
}

/// Ties among argmin candidates recorded during orbit extraction.
#[derive(Clone, Debug)]
pub struct ArgminTie {
    pub step: usize,
    pub candidates: Vec<usize>,
}

pub struct CalibratedOrbit {
    pub orbit: Orbit,
    pub ties: Vec<ArgminTie>,
    /// calibration defect |u(γ(b)) − u(γ(a)) − action − α(b−a)| per step
    pub max_calibration_defect: f64,
}

/// Backward minimizing characteristic through x0: repeatedly select the
/// argmin x of u(x) + h_{η,τ}(x, y) and concatenate the re-minimized
/// segments. Ties are reported and resolved lexicographically (smallest
/// grid index).
pub fn extract_calibrated_orbit(
    model: &LagrangianModel,
    form: &OneForm,
    solution: &WeakKamSolution,
    alpha_c: f64,
    x0: f64,
    backward_steps: usize,
    opts: &WeakKamOptions,
) -> Result<CalibratedOrbit> {
    let kernel = assemble_kernel(model, form, opts)?;
    let shifted = model.shift_by_one_form(form);
    let n = kernel.res;
    let u = &solution.u;
    let tie_tol = 1e-9;

    // snap the query point to its grid node
    let mut node = ((x0 - x0.floor()) * n as f64).round() as usize % n;
    let mut lifted_end = node as f64 / n as f64;
    let mut ties = Vec::new();
    let mut segments: Vec<LiftedPath> = Vec::new();
    let mopts = MinimizeOptions { grad_tol: 1e-8, max_iter: 3000 };
    let mut max_defect = 0.0f64;

    for step in 0..backward_steps {
        let mut best = f64::INFINITY;
        let mut best_i = 0usize;
        let mut candidates = Vec::new();
        for i in 0..n {
            let v = u.values[i] + kernel.at(i, node);
            if v < best - tie_tol {
                best = v;
                best_i = i;
                candidates = vec![i];
            } else if (v - best).abs() <= tie_tol {
                candidates.push(i);
            }
        }
        if candidates.len() > 1 {
            best_i = *candidates.iter().min().unwrap();
            ties.push(ArgminTie { step, candidates });
        }
        let w = kernel.windings[best_i * n + node] as f64;
        let from = best_i as f64 / n as f64;
        let to = node as f64 / n as f64 + w;
        let m = minimize_multistart(
            &shifted,
            &[from],
            &[to],
            kernel.tau,
            opts.segments,
            2,
            opts.seed,
            &[],
            &mopts,
        )?;
        // calibration identity over this segment
        let defect = (u.values[node] - u.values[best_i]
            - (m.action + alpha_c * kernel.tau))
            .abs();
        max_defect = max_defect.max(defect);
        // express the segment in the running lifted frame (its end must sit
        // at lifted_end)
        let offset = lifted_end - to;
        let mut seg = m.path.clone();
        for v in seg.nodes.iter_mut() {
            *v += offset;
        }
        lifted_end = seg.nodes[0];
        segments.push(seg);
        node = best_i;
    }

    // assemble the orbit from earliest to latest
    segments.reverse();
    let total = backward_steps as f64 * kernel.tau;
    let dt = kernel.tau / opts.segments as f64;
    let mut times = Vec::new();
    let mut positions: Vec<Vec<f64>> = Vec::new();
    for (si, seg) in segments.iter().enumerate() {
        let t0 = -total + si as f64 * kernel.tau;
        let skip = if si == 0 { 0 } else { 1 };
        for k in skip..=seg.n_segments() {
            times.push(t0 + k as f64 * dt);
            positions.push(vec![seg.nodes[k]]);
        }
    }
    // velocities by central differences, endpoints one-sided
    let m = positions.len();
    let mut velocities = Vec::with_capacity(m);
    for i in 0..m {
        let v = if i == 0 {
            (positions[1][0] - positions[0][0]) / dt
        } else if i == m - 1 {
            (positions[m - 1][0] - positions[m - 2][0]) / dt
        } else {
            (positions[i + 1][0] - positions[i - 1][0]) / (2.0 * dt)
        };
        velocities.push(vec![v]);
    }
    let energy_trace: Vec<f64> = positions
        .iter()
        .zip(&velocities)
        .map(|(x, v)| model.energy(x, v))
        .collect();
    Ok(CalibratedOrbit {
        orbit: Orbit { times, positions, velocities, energy_trace },
        ties,
        max_calibration_defect: max_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_opts() -> WeakKamOptions {
        WeakKamOptions { grid_res: 48, segments: 16, ..Default::default() }
    }

    #[test]
    fn free_kernel_and_constant_solution() {
        // free with c = 1: u ≡ const solves the cell problem at α = ½
        let free = LagrangianModel::free(1);
        let form = OneForm::constant1(1.0);
        let opts = small_opts();
        let sol = solve_weak_kam(&free, &form, &opts).unwrap();
        assert!((sol.alpha_estimate - 0.5).abs() < 2e-3, "alpha {}", sol.alpha_estimate);
        let spread = sol
            .u
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        assert!(spread.1 - spread.0 < 5e-3, "u should be ~constant: {spread:?}");
    }

    #[test]
    fn step_is_monotone_and_commutes_with_constants() {
        let free = LagrangianModel::free(1);
        let form = OneForm::constant1(0.0);
        let opts = small_opts();
        let kernel = assemble_kernel(&free, &form, &opts).unwrap();
        let n = opts.grid_res;
        let u = GridField {
            values: (0..n).map(|i| (std::f64::consts::TAU * i as f64 / n as f64).sin()).collect(),
        };
        let w = GridField { values: u.values.iter().map(|v| v + 0.3).collect() };
        let tu = lax_oleinik_step(&u, &kernel);
        let tw = lax_oleinik_step(&w, &kernel);
        for (a, b) in tu.values.iter().zip(&tw.values) {
            assert!(b >= a, "monotonicity violated");
            assert!((b - a - 0.3).abs() < 1e-12, "constant commutation violated");
        }
    }

    #[test]
    fn subsolution_residual_of_zero_field_pendulum() {
        // u ≡ 0 at c = 0: residual field is H(x, 0) = −(1 − cos 2πx) ≤ 0
        let pend = LagrangianModel::pendulum();
        let form = OneForm::constant1(0.0);
        let u = GridField::zeros(64);
        let r = subsolution_residual(&pend, &form, &u, 0.0).unwrap();
        assert!(r.max_off_kinks.abs() < 1e-12, "max {}", r.max_off_kinks);
        for (j, f) in r.field.iter().enumerate() {
            let x = j as f64 / 64.0;
            let expected = -(1.0 - (std::f64::consts::TAU * x).cos());
            assert!((f - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn free_subsolution_residual_is_exactly_zero() {
        let free = LagrangianModel::free(1);
        let form = OneForm::constant1(1.0);
        let u = GridField::zeros(32);
        let r = subsolution_residual(&free, &form, &u, 0.5).unwrap();
        assert!(r.max_off_kinks.abs() < 1e-12);
    }
}
