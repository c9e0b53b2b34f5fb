//! Independent reference computations used to pin expected values in tests.
//!
//! Everything here is deliberately primitive: adaptive Simpson quadrature,
//! bisection, closed-form pendulum identities and a brute-force lattice
//! dynamic program for fixed-time minimal actions. None of it shares code
//! with the main library, so agreement between the two is meaningful.

use std::f64::consts::PI;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth > 50 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, flm, 0.5 * tol, depth + 1)
                + rec(f, m, fm, b, fb, right, frm, 0.5 * tol, depth + 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, fm, tol, 0)
}

/// Bisection for a root of `f` on a bracketing interval, to width `tol`.
///
/// Panics if the interval does not bracket a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo * fhi <= 0.0,
        "bisect: no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
    );
    let increasing = fhi >= flo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm >= 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Oracles for the mechanical family L = ½v² + a(1 − cos(2πk x)).
///
/// `k = 1, a = 1` is the simple pendulum, `k = 2, a = 1` the two-well variant.
#[derive(Clone, Copy, Debug)]
pub struct PendulumOracle {
    pub amplitude: f64,
    pub harmonics: u32,
}

impl PendulumOracle {
    pub fn simple() -> Self {
        PendulumOracle { amplitude: 1.0, harmonics: 1 }
    }

    pub fn doubled() -> Self {
        PendulumOracle { amplitude: 1.0, harmonics: 2 }
    }

    /// Potential U(x) = a(1 − cos(2πk x)).
    pub fn potential(&self, x: f64) -> f64 {
        self.amplitude * (1.0 - (2.0 * PI * self.harmonics as f64 * x).cos())
    }

    /// Speed on the energy-E shell: v(x) = sqrt(2(E + U(x))), E ≥ 0.
    pub fn shell_speed(&self, energy: f64, x: f64) -> f64 {
        (2.0 * (energy + self.potential(x))).sqrt()
    }

    /// Period of the rotation orbit of energy E > 0:
    /// T(E) = ∫₀¹ dx / sqrt(2[(1+E) − cos 2πx]) for the simple pendulum,
    /// generalised to the family via the shell speed.
    pub fn period(&self, energy: f64) -> f64 {
        quad(&|x| 1.0 / self.shell_speed(energy, x), 0.0, 1.0, 1e-12)
    }

    /// Cohomology (signed area) of the upper rotation orbit of energy E > 0:
    /// c⁺(E) = ∫₀¹ sqrt(2[(1+E) − cos 2πx]) dx for the simple pendulum.
    pub fn cohomology(&self, energy: f64) -> f64 {
        quad(&|x| self.shell_speed(energy, x), 0.0, 1.0, 1e-12)
    }

    /// Inverse of `cohomology`: the energy E with c⁺(E) = c, valid for
    /// c above the separatrix area. This is α(c) outside the flat.
    pub fn energy_for_cohomology(&self, c: f64) -> f64 {
        assert!(c > self.separatrix_area());
        let mut hi = 1.0;
        while self.cohomology(hi) < c {
            hi *= 2.0;
        }
        bisect(&|e| self.cohomology(e) - c, 1e-9, hi, 1e-12)
    }

    /// Area under the upper separatrix, ∫₀¹ sqrt(2U(x)) dx: the edge of the
    /// flat piece of α. Equals 4/π for both the simple and doubled pendulum.
    pub fn separatrix_area(&self) -> f64 {
        quad(&|x| (2.0 * self.potential(x)).sqrt(), 0.0, 1.0, 1e-12)
    }

    /// Zero-energy minimal action between two points of the same well
    /// boundary, ∫ sqrt(2U) along the monotone branch from x to y
    /// (x, y in [0,1], integrated left-to-right with sign by direction).
    pub fn separatrix_action(&self, x: f64, y: f64) -> f64 {
        quad(&|s| (2.0 * self.potential(s)).sqrt(), x, y, 1e-12).abs()
    }

    /// Peierls barrier h(x, x) oracle at c = 0 for x in (0,1): the cheapest
    /// zero-energy excursion from x back to x through a potential minimum.
    /// For the simple pendulum h(½,½) = 2·(2/π).
    pub fn barrier_through_minimum(&self, x: f64) -> f64 {
        // go down to the nearest zero of U and come back, both sides allowed
        let right = self.separatrix_action(x, 1.0) + self.separatrix_action(0.0, x);
        let left = self.separatrix_action(0.0, x) + self.separatrix_action(x, 1.0);
        right.min(left)
    }

    /// β(h) for |h| > 0 via the closed form c⁺(E(1/|h|))·|h| − E(1/|h|),
    /// where E(T) inverts the period function.
    pub fn beta(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        let t = 1.0 / h.abs();
        let e = self.energy_for_period(t);
        self.cohomology(e) * h.abs() - e
    }

    /// Inverse of `period`: energy of the rotation orbit with period T.
    pub fn energy_for_period(&self, t: f64) -> f64 {
        // period decreases in E
        let mut hi = 1.0;
        while self.period(hi) > t {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        while self.period(lo) < t {
            lo /= 2.0;
        }
        bisect(&|e| self.period(e) - t, lo, hi, 1e-12)
    }
}

/// Brute-force fixed-time minimal action on a (time × space) lattice.
///
/// Minimises the midpoint-rule action of L(x, v) = ½v² + U(x) − η·v over all
/// lattice paths from `x0` to `x1` (positions in the universal cover) with
/// `steps` uniform time steps and `nodes` spatial nodes spanning
/// [lo, hi] ⊂ R. Transitions are limited to |Δx| ≤ vmax·Δt.
pub struct LatticeDp<'a> {
    pub potential: &'a dyn Fn(f64) -> f64,
    pub eta: &'a dyn Fn(f64) -> f64,
    pub vmax: f64,
}

impl<'a> LatticeDp<'a> {
    pub fn min_action(
        &self,
        x0: f64,
        x1: f64,
        t_total: f64,
        steps: usize,
        lo: f64,
        hi: f64,
        nodes: usize,
    ) -> f64 {
        let dt = t_total / steps as f64;
        let dx = (hi - lo) / (nodes - 1) as f64;
        let xs: Vec<f64> = (0..nodes).map(|i| lo + i as f64 * dx).collect();
        let reach = ((self.vmax * dt / dx).ceil() as usize).max(1);
        let lag = |xm: f64, v: f64| 0.5 * v * v + (self.potential)(xm) - (self.eta)(xm) * v;

        let big = f64::INFINITY;
        let mut cost = vec![big; nodes];
        // seed: one transition from the exact endpoint x0 into the lattice
        for (j, &xj) in xs.iter().enumerate() {
            if (xj - x0).abs() <= self.vmax * dt {
                let v = (xj - x0) / dt;
                cost[j] = dt * lag(0.5 * (x0 + xj), v);
            }
        }
        let mut next = vec![big; nodes];
        for _ in 1..steps.saturating_sub(1) {
            for n in next.iter_mut() {
                *n = big;
            }
            for j in 0..nodes {
                if cost[j] == big {
                    continue;
                }
                let kmin = j.saturating_sub(reach);
                let kmax = (j + reach).min(nodes - 1);
                for k in kmin..=kmax {
                    let v = (xs[k] - xs[j]) / dt;
                    let c = cost[j] + dt * lag(0.5 * (xs[j] + xs[k]), v);
                    if c < next[k] {
                        next[k] = c;
                    }
                }
            }
            std::mem::swap(&mut cost, &mut next);
        }
        // close onto the exact endpoint x1
        let mut best = big;
        for (j, &xj) in xs.iter().enumerate() {
            if cost[j] < big && (x1 - xj).abs() <= self.vmax * dt {
                let v = (x1 - xj) / dt;
                let c = cost[j] + dt * lag(0.5 * (xj + x1), v);
                if c < best {
                    best = c;
                }
            }
        }
        best
    }
}

/// One-sided finite-difference rotation check used by orbit tests:
/// displacement per unit time of a sampled lift.
pub fn displacement_rate(lift_start: f64, lift_end: f64, t: f64) -> f64 {
    (lift_end - lift_start) / t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_matches_closed_forms() {
        let v = quad(&|x: f64| x.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
        let v = quad(&|x: f64| (2.0 * (1.0 - (2.0 * PI * x).cos())).sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 4.0 / PI).abs() < 1e-9, "separatrix area {v}");
    }

    #[test]
    fn pendulum_identities() {
        let p = PendulumOracle::simple();
        assert!((p.separatrix_area() - 4.0 / PI).abs() < 1e-9);
        assert!((p.period(1.0) - 0.527324307415734).abs() < 1e-9);
        assert!((p.cohomology(1.0) - 1.966685301550330).abs() < 1e-9);
        assert!((p.energy_for_cohomology(2.0) - 1.063795422862204).abs() < 1e-8);
        assert!((p.separatrix_action(0.0, 0.5) - 2.0 / PI).abs() < 1e-9);
        // doubled pendulum has the same separatrix area
        let d = PendulumOracle::doubled();
        assert!((d.separatrix_area() - 4.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn period_inversion_round_trips() {
        let p = PendulumOracle::simple();
        let e = p.energy_for_period(0.527324307415734);
        assert!((e - 1.0).abs() < 1e-7, "E(T(1)) = {e}");
    }

    #[test]
    fn lattice_dp_free_particle() {
        // L = ½v², from 0 to 0.5 in time 1: true minimum is 0.125.
        // Geometry keeps the velocity quantum dx/dt = 0.25 a divisor of 0.5.
        let zero = |_: f64| 0.0;
        let dp = LatticeDp { potential: &zero, eta: &zero, vmax: 4.0 };
        let a = dp.min_action(0.0, 0.5, 1.0, 100, -0.5, 1.0, 601);
        assert!((a - 0.125).abs() < 5e-3, "dp action {a}");
    }
}
