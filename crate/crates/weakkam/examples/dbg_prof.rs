use std::time::Instant;
use weakkam::action::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;
use weakkam::torus::TorusPoint;

fn main() {
    let pend = LagrangianModel::pendulum();
    let form = OneForm::constant1(0.0);
    let mut opts = ActionOptions::coarse();
    opts.t_grid_count = 20;

    let t = Instant::now();
    let table = loop_table(&pend, &opts).unwrap();
    println!("loop table [{:?}]", t.elapsed());

    for (a, b) in [(0.3, 0.9), (0.0, 0.5), (0.25, 0.2501)] {
        let t = Instant::now();
        let v = mane_potential_with_table(&pend, &form, 0.0, &TorusPoint::from(a), &TorusPoint::from(b), &opts, &table).unwrap();
        println!("phi({a},{b}) = {:.6} argminT={:.3?} [{:?}]", v.value(), v.argmin_t, t.elapsed());
    }
    let t = Instant::now();
    let b = peierls_barrier(&pend, &form, 0.0, &TorusPoint::from(0.25), &TorusPoint::from(0.25), &opts).unwrap();
    println!("h(0.25,0.25) = {:.6} rungs={} [{:?}]", b.value, b.ladder.len(), t.elapsed());
}
