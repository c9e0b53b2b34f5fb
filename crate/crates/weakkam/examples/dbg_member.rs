use std::time::Instant;
use weakkam::action::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;
use weakkam::sets::*;
use weakkam::torus::TorusPoint;

fn main() {
    let pend = LagrangianModel::pendulum();
    let opts = SetOptions { x_grid: 4, ..Default::default() };

    // time the loop table
    let t = Instant::now();
    let _table = loop_table(&pend, &opts.action).unwrap();
    println!("table [{:?}]", t.elapsed());

    // a tiny mane_set run: 4 grid points
    let t = Instant::now();
    let m = mane_set(&pend, &[0.0], 0.0, &opts).unwrap();
    println!("mane 4 pts: {} members [{:?}]", m.len(), t.elapsed());

    // direct phi timing for a member-like pair
    let opts2 = opts.action.clone();
    let t = Instant::now();
    let table = loop_table(&pend, &opts2).unwrap();
    let v = mane_potential_with_table(&pend, &OneForm::constant1(0.0), 0.0,
        &TorusPoint::from(0.0), &TorusPoint::from(0.97), &opts2, &table).unwrap();
    println!("phi(0,0.97) = {:.6} [{:?}]", v.value(), t.elapsed());
}
