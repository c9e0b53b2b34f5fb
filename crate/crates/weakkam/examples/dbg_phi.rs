use weakkam::action::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;
use weakkam::torus::TorusPoint;

fn main() {
    let free = LagrangianModel::free(1);
    let opts = ActionOptions::default();
    let v = mane_potential(&free, &OneForm::constant1(0.0), 0.5,
        &TorusPoint::from(0.0), &TorusPoint::from(0.25), &opts).unwrap();
    println!("phi = {}, argmin_t = {:?}", v.value(), v.argmin_t);
    for (t, val) in v.certificate.iter() {
        println!("T={t:.4} total={val:.6}");
    }
}
