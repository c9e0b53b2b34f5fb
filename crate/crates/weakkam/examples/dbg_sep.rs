fn main() {
    let pend = weakkam::lagrangian::LagrangianModel::pendulum();
    let orbit = weakkam::dynamics::integrate_el_flow(&pend, &[0.5], &[2.0], 6.0, 1e-3).unwrap();
    let (x, v) = orbit.last_state();
    println!("final x={} v={}", x[0], v[0]);
    println!("drift={:e}", orbit.max_energy_drift());
    for i in (0..orbit.len()).step_by(500) {
        let xi = orbit.positions[i][0];
        let vi = orbit.velocities[i][0];
        let expected = 2.0 * (std::f64::consts::PI * xi).sin();
        println!("t={:.1} x={:.6} v={:.8} expected={:.8} diff={:e}", orbit.times[i], xi, vi, expected, (vi-expected).abs());
    }
}
