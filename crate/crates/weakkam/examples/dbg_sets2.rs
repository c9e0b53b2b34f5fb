use std::time::Instant;
use weakkam::lagrangian::LagrangianModel;
use weakkam::sets::*;

fn main() {
    let pend = LagrangianModel::pendulum();
    let pi = std::f64::consts::PI;
    let edge = 4.0 / pi;
    let opts = SetOptions::default(); // x_grid 64

    // c = 4/pi: mane = aubry = upper separatrix
    for (label, c, alpha) in [("pend c=4/pi", edge, 0.0), ("pend c=2", 2.0, 1.0637954228622045)] {
        let t = Instant::now();
        let mane = mane_set(&pend, &[c], alpha, &opts).unwrap();
        println!("{label} mane: {} pts, connected={} [{:?}]", mane.len(), projection_connected(&mane), t.elapsed());
        let neg = mane.points.iter().filter(|p| p.v[0] < 0.0).count();
        println!("   negative-velocity points: {neg}");
        let t = Instant::now();
        let aubry = aubry_set(&pend, &[c], alpha, &opts).unwrap();
        println!("{label} aubry: {} pts [{:?}]", aubry.len(), t.elapsed());
        let g = check_graph_property(&aubry, 50.0);
        println!("   aubry graph: holds={} lipschitz={:.2}", g.holds, g.fitted_lipschitz);
    }

    // doubled pendulum c=0
    let doubled = LagrangianModel::doubled_pendulum();
    let t = Instant::now();
    let mane = mane_set(&doubled, &[0.0], 0.0, &opts).unwrap();
    println!("doubled mane: {} pts over {} base points, connected={} [{:?}]",
        mane.len(), mane.projected().len(), projection_connected(&mane), t.elapsed());
    let g = check_graph_property(&mane, 50.0);
    println!("   mane graph holds={} (want false)", g.holds);
    let t = Instant::now();
    let aubry = aubry_set(&doubled, &[0.0], 0.0, &opts).unwrap();
    println!("doubled aubry: projected {:?} [{:?}]", aubry.projected(), t.elapsed());
}
