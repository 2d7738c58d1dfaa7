//! List scheduling and LPT against the optimum on a few classic shapes.

use gebp::baselines::{brute_force, list_scheduling, lpt, DEFAULT_BRUTE_BUDGET};
use gebp::model::{Instance, MachineSpec};
use gebp::rational::{format_rational, int, ratio};

fn report(label: &str, inst: &Instance) {
    let order: Vec<usize> = (0..inst.jobs.len()).collect();
    let ls = list_scheduling(inst, &order);
    let lp = lpt(inst);
    let opt = brute_force(inst, DEFAULT_BRUTE_BUDGET).unwrap();
    println!(
        "{label:<10} list {:>6}  lpt {:>6}  optimum {:>6}",
        format_rational(&ls.cost),
        format_rational(&lp.cost),
        format_rational(&opt.cost)
    );
}

fn main() {
    let unit = MachineSpec::new(int(1), int(1), int(1));
    // Small jobs first fool list scheduling.
    let ebp = Instance::new(vec![unit.clone(), unit], vec![ratio(1, 2), ratio(1, 2), int(1)]);
    report("ebp", &ebp);

    let ubs = Instance::new(
        vec![MachineSpec::with_rate(int(3), int(1)), MachineSpec::with_rate(int(2), int(1))],
        vec![int(2), int(2), ratio(3, 2), ratio(1, 2)],
    );
    report("ubs", &ubs);

    let general = Instance::new(
        vec![MachineSpec::with_rate(int(2), int(2)), MachineSpec::with_rate(int(1), int(1))],
        vec![int(1), int(1), int(1)],
    );
    report("general", &general);
}
