use std::time::Instant;
use weakkam::action::*;
use weakkam::duality::*;
use weakkam::lagrangian::LagrangianModel;
use weakkam::oneform::OneForm;
use weakkam::torus::TorusPoint;

fn main() {
    let pend = LagrangianModel::pendulum();
    let t0 = Instant::now();

    // LP route at c = 0, 1, 2
    for c in [0.0, 1.0, 2.0] {
        let t = Instant::now();
        let grid = LpGridSpec::default_1d();
        let (a, mu, iters) = mather_measure_lp(&pend, &OneForm::constant1(c), &grid).unwrap();
        println!("LP alpha({c}) = {a:.6} iters={iters} atoms={} [{:?}]", mu.atoms.len(), t.elapsed());
    }

    // critical value route at same
    let t = Instant::now();
    let table = loop_table(&pend, &ActionOptions::coarse()).unwrap();
    println!("loop table: {} entries [{:?}]", table.entries.len(), t.elapsed());
    for c in [0.0f64, 1.0, 2.0, 3.0] {
        let t = Instant::now();
        let a = mane_critical_value_refined(&pend, &table, &[c], &ActionOptions::coarse()).unwrap();
        println!("CV alpha({c}) = {a:.6} [{:?}]", t.elapsed());
    }

    // inf-max route
    for c in [0.0f64, 1.0, 2.0] {
        let t = Instant::now();
        let (a, step) = alpha_inf_max(&pend, &[c], &InfMaxOptions::default()).unwrap();
        println!("IM alpha({c}) = {a:.6} (last step {step:.2e}) [{:?}]", t.elapsed());
    }

    // peierls barrier h(1/2, 1/2) at c=0 -> 4/pi = 1.27324
    let t = Instant::now();
    let opts = ActionOptions::coarse();
    let b = peierls_barrier(&pend, &OneForm::constant1(0.0), 0.0,
        &TorusPoint::from(0.5), &TorusPoint::from(0.5), &opts).unwrap();
    println!("h(0.5,0.5) = {:.6} (target {:.6}) ladder {:?} [{:?}]",
        b.value, 4.0/std::f64::consts::PI, b.ladder, t.elapsed());

    println!("total {:?}", t0.elapsed());
}
