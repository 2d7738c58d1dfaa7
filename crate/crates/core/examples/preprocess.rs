//! Rate normalization and geometric rounding of job sizes.

use gebp::model::{solution_cost, Assignment, Epsilon, Instance, MachineSpec};
use gebp::preprocess::{normalize_sigma, round_jobs, sort_machines};
use gebp::rational::{format_rational, int, ratio};

fn main() {
    let inst = Instance::new(
        vec![MachineSpec::with_rate(int(3), int(2)), MachineSpec::with_rate(int(5), int(4))],
        vec![ratio(7, 3), int(5), ratio(1, 9)],
    );
    let (norm, scale) = normalize_sigma(&inst);
    let a = Assignment::new(vec![0, 1, 1]);
    println!(
        "rate scale {}: cost {} before, {} after",
        format_rational(&scale.sigma_scale),
        format_rational(&solution_cost(&inst, &a).unwrap()),
        format_rational(&solution_cost(&norm, &a).unwrap())
    );

    let eps = Epsilon::new(3).unwrap();
    let (_, rounded) = round_jobs(&norm, eps);
    for r in &rounded {
        println!("{:>6} -> {:>6} (class {:?})", format_rational(&r.original), format_rational(&r.rounded), r.tau);
    }

    let (sorted, perm) = sort_machines(&norm);
    let caps: Vec<String> = sorted.machines.iter().map(|m| format_rational(&m.capacity)).collect();
    println!("sorted capacities {caps:?}, original order {:?}", perm.order);
}
