use weakkam::lagrangian::LagrangianModel;
use weakkam::path::*;

fn main() {
    let pend = LagrangianModel::pendulum();
    for w in [-2.0f64, -1.0, 0.0, 1.0, 2.0] {
        let start = LiftedPath::straight(&[0.25], &[0.25 + w], 5.0, 60);
        let t = std::time::Instant::now();
        match minimize_path(&pend, &start, Boundary::Fixed, &MinimizeOptions::default()) {
            Ok(m) => println!("w={w}: action {:.6} |g|={:.2e} [{:?}]", m.action, m.grad_norm, t.elapsed()),
            Err(e) => println!("w={w}: ERR {e} [{:?}]", t.elapsed()),
        }
        // perturbed variant
        let mut p = LiftedPath::straight(&[0.25], &[0.25 + w], 5.0, 60);
        for i in 1..60 {
            let s = i as f64 / 60.0;
            p.nodes[i] += 0.35 * (std::f64::consts::PI * 2.0 * s).sin();
        }
        let t = std::time::Instant::now();
        match minimize_path(&pend, &p, Boundary::Fixed, &MinimizeOptions::default()) {
            Ok(m) => println!("w={w} pert: action {:.6} |g|={:.2e} [{:?}]", m.action, m.grad_norm, t.elapsed()),
            Err(e) => println!("w={w} pert: ERR {e} [{:?}]", t.elapsed()),
        }
    }
}
