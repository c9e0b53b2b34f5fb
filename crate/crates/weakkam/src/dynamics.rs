//! Euler-Lagrange flow integration, lifted orbits, occupation measures,
//! rotation vectors and average actions.
//!
//! Positions accumulate in R^d (never wrapped) so rotation vectors are exact;
//! wrapping happens only when the periodic data L, η, f are evaluated — which
//! the Fourier-based models do implicitly.

use crate::error::{Error, Result};
use crate::lagrangian::LagrangianModel;
use crate::oneform::OneForm;
use crate::torus::TorusPoint;
use nalgebra::DVector;

/// A numerically integrated Euler-Lagrange orbit on the universal cover.
#[derive(Clone, Debug)]
pub struct Orbit {
    /// uniform time grid t0..tN
    pub times: Vec<f64>,
    /// lifted positions in R^d
    pub positions: Vec<Vec<f64>>,
    /// velocities in R^d
    pub velocities: Vec<Vec<f64>>,
    /// E(x_i, v_i) per node
    pub energy_trace: Vec<f64>,
}

impl Orbit {
    pub fn total_time(&self) -> f64 {
        *self.times.last().unwrap() - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> (&[f64], &[f64]) {
        (self.positions.last().unwrap(), self.velocities.last().unwrap())
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy_trace[0];
        self.energy_trace.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// Right-hand side of the second-order system: solve
/// hess_vv(x,v) a = grad_x(x,v) − dgradv_dx(x,v) v for the acceleration.
fn acceleration(model: &LagrangianModel, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let gx = model.grad_x(x, v);
    let m = model.dgradv_dx(x, v);
    let mv = &m * DVector::from_column_slice(v);
    let rhs = DVector::from_column_slice(&gx) - mv;
    let hess = model.hess_vv(x, v);
    match hess.lu().solve(&rhs) {
        Some(a) => Ok(a.iter().copied().collect()),
        None => Err(Error::SingularHessian(x.to_vec())),
    }
}

/// Classical fourth-order one-step integration of the Euler-Lagrange flow
/// with fixed dt. Energy drift is the accept/reject criterion: exceeding
/// `drift_bound` (relative) aborts with `EnergyDriftExceeded`.
pub fn integrate_el_flow(
    model: &LagrangianModel,
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Orbit> {
    integrate_el_flow_with_bound(model, x0, v0, t_end, dt, 1e-6)
}

pub fn integrate_el_flow_with_bound(
    model: &LagrangianModel,
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    dt: f64,
    drift_bound: f64,
) -> Result<Orbit> {
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::BadInput(format!("need dt > 0 and t_end > 0, got {dt}, {t_end}")));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let d = model.dim();

    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    let e0 = model.energy(&x, &v);
    let scale = e0.abs().max(1.0);

    let mut orbit = Orbit {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
        energy_trace: Vec::with_capacity(steps + 1),
    };
    orbit.times.push(0.0);
    orbit.positions.push(x.clone());
    orbit.velocities.push(v.clone());
    orbit.energy_trace.push(e0);

    let mut k_x = vec![vec![0.0; d]; 4];
    let mut k_v = vec![vec![0.0; d]; 4];
    for step in 1..=steps {
        // k1..k4 for the first-order system (x' = v, v' = a(x, v))
        let stage = |xs: &[f64], vs: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
            Ok((vs.to_vec(), acceleration(model, xs, vs)?))
        };
        let (kx1, kv1) = stage(&x, &v)?;
        let xt: Vec<f64> = x.iter().zip(&kx1).map(|(a, k)| a + 0.5 * dt * k).collect();
        let vt: Vec<f64> = v.iter().zip(&kv1).map(|(a, k)| a + 0.5 * dt * k).collect();
        let (kx2, kv2) = stage(&xt, &vt)?;
        let xt: Vec<f64> = x.iter().zip(&kx2).map(|(a, k)| a + 0.5 * dt * k).collect();
        let vt: Vec<f64> = v.iter().zip(&kv2).map(|(a, k)| a + 0.5 * dt * k).collect();
        let (kx3, kv3) = stage(&xt, &vt)?;
        let xt: Vec<f64> = x.iter().zip(&kx3).map(|(a, k)| a + dt * k).collect();
        let vt: Vec<f64> = v.iter().zip(&kv3).map(|(a, k)| a + dt * k).collect();
        let (kx4, kv4) = stage(&xt, &vt)?;
        k_x[0] = kx1;
        k_x[1] = kx2;
        k_x[2] = kx3;
        k_x[3] = kx4;
        k_v[0] = kv1;
        k_v[1] = kv2;
        k_v[2] = kv3;
        k_v[3] = kv4;
        for i in 0..d {
            x[i] += dt / 6.0 * (k_x[0][i] + 2.0 * k_x[1][i] + 2.0 * k_x[2][i] + k_x[3][i]);
            v[i] += dt / 6.0 * (k_v[0][i] + 2.0 * k_v[1][i] + 2.0 * k_v[2][i] + k_v[3][i]);
        }
        let e = model.energy(&x, &v);
        let drift = (e - e0).abs() / scale;
        if drift > drift_bound {
            return Err(Error::EnergyDriftExceeded { drift, bound: drift_bound });
        }
        orbit.times.push(step as f64 * dt);
        orbit.positions.push(x.clone());
        orbit.velocities.push(v.clone());
        orbit.energy_trace.push(e);
    }
    Ok(orbit)
}

/// ρ = (lifted displacement) / (total time).
pub fn rotation_vector_of_orbit(orbit: &Orbit) -> Vec<f64> {
    let t = orbit.total_time();
    assert!(t > 0.0, "orbit must span positive time");
    let first = &orbit.positions[0];
    let last = orbit.positions.last().unwrap();
    first.iter().zip(last).map(|(a, b)| (b - a) / t).collect()
}

/// A probability measure given by weighted atoms in phase space.
#[derive(Clone, Debug)]
pub struct OccupationMeasure {
    pub atoms: Vec<(TorusPoint, Vec<f64>, f64)>,
}

impl OccupationMeasure {
    pub fn dirac(x: TorusPoint, v: Vec<f64>) -> Self {
        OccupationMeasure { atoms: vec![(x, v, 1.0)] }
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|(_, _, w)| w).sum()
    }

    /// ∫ f dμ for a phase-space observable.
    pub fn integrate<F: Fn(&TorusPoint, &[f64]) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|(x, v, w)| w * f(x, v)).sum()
    }

    /// ρ(μ) = ∫ v dμ.
    pub fn rotation_vector(&self) -> Vec<f64> {
        let d = self.atoms.first().map(|(_, v, _)| v.len()).unwrap_or(0);
        let mut out = vec![0.0; d];
        for (_, v, w) in &self.atoms {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += w * vi;
            }
        }
        out
    }

    /// Convex combination a·μ + (1−a)·ν.
    pub fn mix(&self, other: &OccupationMeasure, a: f64) -> OccupationMeasure {
        let mut atoms: Vec<_> =
            self.atoms.iter().map(|(x, v, w)| (x.clone(), v.clone(), a * w)).collect();
        atoms.extend(other.atoms.iter().map(|(x, v, w)| (x.clone(), v.clone(), (1.0 - a) * w)));
        OccupationMeasure { atoms }
    }
}

/// Time-average measure of an orbit: atoms at the orbit samples with
/// uniform weights and trapezoid end-correction.
pub fn occupation_measure(orbit: &Orbit) -> OccupationMeasure {
    let n = orbit.len();
    assert!(n > 0, "orbit must be nonempty");
    if n == 1 {
        return OccupationMeasure::dirac(
            TorusPoint::new(orbit.positions[0].clone()),
            orbit.velocities[0].clone(),
        );
    }
    let mut atoms = Vec::with_capacity(n);
    let denom = (n - 1) as f64;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 / denom } else { 1.0 / denom };
        atoms.push((TorusPoint::new(orbit.positions[i].clone()), orbit.velocities[i].clone(), w));
    }
    OccupationMeasure { atoms }
}

/// A_{L_η}(μ) = Σ w_i (L(x_i, v_i) − η(x_i)·v_i).
pub fn average_action(
    measure: &OccupationMeasure,
    model: &LagrangianModel,
    form: &OneForm,
) -> f64 {
    measure.integrate(|x, v| model.eval(x.coords(), v) - form.pair(x.coords(), v))
}

/// |Σ w_i ∇f(x_i)·v_i| for a periodic test function f. Decays as O(1/T)
/// along occupation measures of orbits; zero for invariant measures.
pub fn closedness_defect(
    measure: &OccupationMeasure,
    f: &crate::fourier::FourierSeries,
) -> f64 {
    let d = measure.atoms.first().map(|(x, _, _)| x.dim()).unwrap_or(0);
    let mut g = vec![0.0; d];
    let mut total = 0.0;
    for (x, v, w) in &measure.atoms {
        f.grad(x.coords(), &mut g);
        total += w * g.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
    total.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierSeries;

    #[test]
    fn pendulum_fixed_points_stay_fixed() {
        let pend = LagrangianModel::pendulum();
        let orbit = integrate_el_flow(&pend, &[0.5], &[0.0], 5.0, 1e-3).unwrap();
        let (x, v) = orbit.last_state();
        assert!((x[0] - 0.5).abs() < 1e-12);
        assert!(v[0].abs() < 1e-12);
    }

    #[test]
    fn free_orbit_travels_in_a_straight_line() {
        let free = LagrangianModel::free(1);
        let orbit = integrate_el_flow(&free, &[0.0], &[0.7], 10.0, 1e-3).unwrap();
        let (x, _) = orbit.last_state();
        assert!((x[0] - 7.0).abs() < 1e-9);
        let rho = rotation_vector_of_orbit(&orbit);
        assert!((rho[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn separatrix_approaches_the_next_well() {
        // energy-0 orbit from (0.5, 2): approaches lifted position 1 with
        // velocity → 0. The approach is asymptotic and the separatrix is
        // unstable, so the claim is tested through monotone decay of the
        // speed on a capped horizon, not through infinite time.
        let pend = LagrangianModel::pendulum();
        let orbit = integrate_el_flow(&pend, &[0.5], &[2.0], 2.0, 1e-3).unwrap();
        let (x, v) = orbit.last_state();
        assert!((x[0] - 1.0).abs() < 1e-3, "x = {}", x[0]);
        assert!(v[0].abs() < 1e-2, "v = {}", v[0]);
        for w in orbit.velocities.windows(2) {
            assert!(w[1][0].abs() <= w[0][0].abs() + 1e-12, "speed must decay");
        }
        // closed form v(x) = 2 sin(πx) along the approach
        for i in (0..orbit.len()).step_by(200) {
            let xi = orbit.positions[i][0];
            let vi = orbit.velocities[i][0];
            let expected = 2.0 * (std::f64::consts::PI * xi).sin();
            assert!((vi - expected).abs() < 1e-5, "at x={xi}: v={vi} vs {expected}");
        }
    }

    #[test]
    fn energy_conservation_pendulum_long_run() {
        let pend = LagrangianModel::pendulum();
        let orbit = integrate_el_flow(&pend, &[0.0], &[2.4], 100.0, 1e-3).unwrap();
        assert!(orbit.max_energy_drift() / orbit.energy_trace[0].abs().max(1.0) <= 1e-6);
    }

    #[test]
    fn occupation_measure_of_fixed_point_is_dirac_like() {
        let pend = LagrangianModel::pendulum();
        let orbit = integrate_el_flow(&pend, &[0.5], &[0.0], 1.0, 1e-2).unwrap();
        let mu = occupation_measure(&orbit);
        assert!((mu.total_weight() - 1.0).abs() < 1e-12);
        let mean_v = mu.rotation_vector();
        assert!(mean_v[0].abs() < 1e-14);
        // single effective atom: every atom sits at (0.5, 0)
        for (x, v, _) in &mu.atoms {
            assert!((x.coords()[0] - 0.5).abs() < 1e-12);
            assert!(v[0].abs() < 1e-12);
        }
    }

    #[test]
    fn free_measure_mean_velocity() {
        let free = LagrangianModel::free(1);
        let orbit = integrate_el_flow(&free, &[0.0], &[0.7], 10.0, 1e-3).unwrap();
        let mu = occupation_measure(&orbit);
        let mean = mu.integrate(|_, v| v[0]);
        assert!((mean - 0.7).abs() < 1e-13);
    }

    #[test]
    fn average_action_pendulum_fixed_points() {
        let pend = LagrangianModel::pendulum();
        let zero = OneForm::constant1(0.0);
        let d0 = OccupationMeasure::dirac(TorusPoint::from(0.0), vec![0.0]);
        assert!(average_action(&d0, &pend, &zero).abs() < 1e-15);
        let dhalf = OccupationMeasure::dirac(TorusPoint::from(0.5), vec![0.0]);
        assert!((average_action(&dhalf, &pend, &zero) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closedness_defect_fixed_point_zero() {
        let mu = OccupationMeasure::dirac(TorusPoint::from(0.3), vec![0.0]);
        let f = FourierSeries::mode1(1, 0.0, 1.0);
        assert_eq!(closedness_defect(&mu, &f), 0.0);
    }

    #[test]
    fn closedness_defect_free_orbit_boundary_bound() {
        // non-integer winding: defect bounded by |f(end) − f(start)| / T
        let free = LagrangianModel::free(1);
        let orbit = integrate_el_flow(&free, &[0.0], &[0.7], 10.5, 1e-3).unwrap();
        let mu = occupation_measure(&orbit);
        let f = FourierSeries::mode1(1, 0.0, 1.0);
        let defect = closedness_defect(&mu, &f);
        assert!(defect <= 0.1, "defect {defect}");
        assert!(defect > 1e-4, "free non-winding orbit should have O(1/T) defect");
    }

    #[test]
    fn rotation_vector_is_affine_in_the_measure() {
        let pend = LagrangianModel::pendulum();
        let o1 = integrate_el_flow(&pend, &[0.0], &[2.2], 8.0, 1e-3).unwrap();
        let o2 = integrate_el_flow(&pend, &[0.0], &[-2.2], 8.0, 1e-3).unwrap();
        let m1 = occupation_measure(&o1);
        let m2 = occupation_measure(&o2);
        let a = 0.3;
        let mixed = m1.mix(&m2, a);
        let r1 = m1.rotation_vector()[0];
        let r2 = m2.rotation_vector()[0];
        let rm = mixed.rotation_vector()[0];
        assert!((rm - (a * r1 + (1.0 - a) * r2)).abs() < 1e-12);
    }

    #[test]
    fn exact_shift_preserves_trajectories() {
        // L and L_{df} have the same Euler-Lagrange flow
        let pend = LagrangianModel::pendulum();
        let form = OneForm::exact(1, FourierSeries::mode1(1, 0.0, 0.1));
        let shifted = pend.shift_by_one_form(&form);
        let o1 = integrate_el_flow(&pend, &[0.3], &[0.7], 5.0, 1e-3).unwrap();
        let o2 = integrate_el_flow(&shifted, &[0.3], &[0.7], 5.0, 1e-3).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in o1.positions.iter().zip(&o2.positions) {
            worst = worst.max((a[0] - b[0]).abs());
        }
        assert!(worst < 1e-8, "trajectory deviation {worst}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let pend = LagrangianModel::pendulum();
        assert!(matches!(
            integrate_el_flow(&pend, &[0.0], &[1.0], -1.0, 1e-3),
            Err(Error::BadInput(_))
        ));
    }
}
