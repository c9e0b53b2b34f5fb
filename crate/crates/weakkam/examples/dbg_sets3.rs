use weakkam::lagrangian::LagrangianModel;
use weakkam::sets::*;

fn main() {
    let pend = LagrangianModel::pendulum();
    let estar = 1.0637954228622045;
    let opts = SetOptions { x_grid: 8, ..Default::default() };
    let mane = mane_set(&pend, &[2.0], estar, &opts).unwrap();
    println!("c=2 x_grid=8: {} members:", mane.len());
    for p in &mane.points {
        println!("  ({:.4}, {:.4})", p.x.coords()[0], p.v[0]);
    }
}
