use std::time::Instant;
use weakkam::duality::LpGridSpec;
use weakkam::lagrangian::LagrangianModel;
use weakkam::sets::*;

fn main() {
    let pend = LagrangianModel::pendulum();
    let pi = std::f64::consts::PI;

    // Mather sets via LP
    for (c, grid) in [(0.0, LpGridSpec::default_1d()), (1.2, LpGridSpec::default_1d()), (2.0, LpGridSpec::fine_1d())] {
        let t = Instant::now();
        let set = mather_set(&pend, &[c], &grid).unwrap();
        println!("mather c={c}: {} points [{:?}]", set.len(), t.elapsed());
        if set.len() <= 4 {
            for p in &set.points {
                println!("   ({:.4}, {:.4}) E={:.4}", p.x.coords()[0], p.v[0], p.energy);
            }
        } else {
            // check against the graph v = sqrt(2(1+E*) - 2cos 2pi x)
            let estar = 1.0637954228622045;
            let mut worst = 0.0f64;
            for p in &set.points {
                let expect = (2.0*(1.0+estar) - 2.0*(2.0*pi*p.x.coords()[0]).cos()).sqrt();
                worst = worst.max((p.v[0] - expect).abs());
            }
            println!("   max |v - graph| = {worst:.4}");
        }
    }

    // Mane set at c=0 -> {(0,0)}
    let opts = SetOptions { x_grid: 32, ..Default::default() };
    let t = Instant::now();
    let mane = mane_set(&pend, &[0.0], 0.0, &opts).unwrap();
    println!("mane c=0: {} points [{:?}]", mane.len(), t.elapsed());
    for p in mane.points.iter().take(5) {
        println!("   ({:.4}, {:.4})", p.x.coords()[0], p.v[0]);
    }

    // Aubry set at c=0 -> {(0,0)}
    let t = Instant::now();
    let aubry = aubry_set(&pend, &[0.0], 0.0, &opts).unwrap();
    println!("aubry c=0: {} points [{:?}]", aubry.len(), t.elapsed());
    for p in aubry.points.iter().take(5) {
        println!("   ({:.4}, {:.4})", p.x.coords()[0], p.v[0]);
    }
}
