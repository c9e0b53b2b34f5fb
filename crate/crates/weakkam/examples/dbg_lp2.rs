use weakkam::lp::{self, ColumnOracle};
use std::f64::consts::TAU;

// pendulum occupation LP built directly for instrumentation
struct P { n_x: usize, n_v: usize, k: i32, c: f64 }
impl P {
    fn x(&self, i: usize) -> f64 { i as f64 / self.n_x as f64 }
    fn v(&self, j: usize) -> f64 { -4.0 + 8.0 * j as f64 / (self.n_v - 1) as f64 }
}
impl ColumnOracle for P {
    fn n_rows(&self) -> usize { 1 + 2 * self.k as usize }
    fn n_cols(&self) -> usize { self.n_x * self.n_v }
    fn cost(&self, j: usize) -> f64 {
        let (x, v) = (self.x(j / self.n_v), self.v(j % self.n_v));
        0.5 * v * v + 1.0 - (TAU * x).cos() - self.c * v
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        let (x, v) = (self.x(j / self.n_v), self.v(j % self.n_v));
        out[0] = 1.0;
        for m in 1..=self.k {
            let ph = TAU * m as f64 * x;
            out[2 * m as usize - 1] = -ph.sin() * TAU * m as f64 * v;
            out[2 * m as usize] = ph.cos() * TAU * m as f64 * v;
        }
    }
    fn rhs(&self, out: &mut [f64]) { out.fill(0.0); out[0] = 1.0; }
}

fn main() {
    for (nx, nv, k) in [(32usize, 33usize, 8i32), (48, 49, 8), (64, 65, 8)] {
        let t = std::time::Instant::now();
        match lp::solve(&P { n_x: nx, n_v: nv, k, c: 0.0 }) {
            Ok(s) => println!("{nx}x{nv}: obj={:.8} it={} (phase1 {}) [{:?}]", s.objective, s.iterations, s.phase1_iterations, t.elapsed()),
            Err(e) => println!("{nx}x{nv}: ERR {e} [{:?}]", t.elapsed()),
        }
    }
}
