use weakkam::action::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;
use weakkam::torus::TorusPoint;

fn main() {
    let pend = LagrangianModel::pendulum();
    let estar = 1.0637954228622045;
    let form = OneForm::constant1(2.0);
    let mut opts = ActionOptions::coarse();
    opts.t_grid_count = 14;
    opts.t_grid_max = 40.0;
    opts.n_starts = 1;
    let table = loop_table(&pend, &opts).unwrap();
    let v = mane_potential_with_table(&pend, &form, estar,
        &TorusPoint::from(0.0), &TorusPoint::from(0.775), &opts, &table).unwrap();
    println!("phi = {:.6} argminT = {:?}", v.value(), v.argmin_t);
    for (t, val) in &v.certificate {
        println!("  T={t:.4} total={val:.6}");
    }
}
