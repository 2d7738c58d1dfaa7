//! Opening machines from a catalogue of types, exact and greedy bin engines.

use gebp::model::{Epsilon, MachineSpec};
use gebp::rational::{format_rational, int, ratio};
use gebp::variant::{pi_eval, pi_inverse, prc_solve, BpucMode, TypedInstance};

fn main() {
    let types = vec![
        MachineSpec::with_rate(int(1), int(1)),
        MachineSpec::with_rate(int(3), ratio(1, 2)),
        MachineSpec::with_rate(int(6), ratio(1, 2)),
    ];
    let jobs = vec![int(2), ratio(3, 2), int(1), ratio(1, 2), ratio(5, 2), int(40)];
    let typed = TypedInstance::new(types, jobs);
    let eps = Epsilon::new(2).unwrap();

    for x in [ratio(1, 10), ratio(1, 2), int(1)] {
        println!("pi({}) = {}", format_rational(&x), format_rational(&pi_eval(&typed.types, eps, &x).unwrap()));
    }
    if let Some(x) = pi_inverse(&typed.types, eps, &int(3)) {
        println!("largest bin load with cost at most 3: {}", format_rational(&x));
    }

    for mode in [BpucMode::Exact, BpucMode::Greedy] {
        let sol = prc_solve(&typed, eps, mode).unwrap();
        println!("{mode:?}: cost {}", format_rational(&sol.cost));
        for m in &sol.machines {
            let tag = if m.dedicated { " (dedicated)" } else { "" };
            println!("  type {} jobs {:?}{tag}", m.type_index, m.jobs);
        }
    }
}
