use weakkam::duality::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;

fn main() {
    let pend = LagrangianModel::pendulum();
    for (xr, vr, k) in [(8usize, 9usize, 2i32), (16, 17, 4), (32, 33, 8), (64, 65, 8)] {
        let grid = LpGridSpec { x_res: xr, v_res: vr, v_min: -4.0, v_max: 4.0, fourier_order: k, support_threshold: 1e-8 };
        match mather_measure_lp(&pend, &OneForm::constant1(0.0), &grid) {
            Ok((a, mu, it)) => println!("{xr}x{vr} K={k}: alpha={a:.6} atoms={} iters={it}", mu.atoms.len()),
            Err(e) => println!("{xr}x{vr} K={k}: ERROR {e}"),
        }
    }
}
