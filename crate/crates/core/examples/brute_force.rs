//! Exhaustive search with its node count, and what happens when the budget runs out.

use gebp::baselines::{brute_force, BaselineError};
use gebp::model::{Instance, MachineSpec};
use gebp::rational::{format_rational, int, ratio};

fn main() {
    let machines = vec![
        MachineSpec::with_rate(int(2), int(1)),
        MachineSpec::with_rate(int(2), int(1)),
        MachineSpec::with_rate(int(1), int(2)),
    ];
    let jobs: Vec<_> = (1..=8).map(|k| ratio(k, 3)).collect();
    let inst = Instance::new(machines, jobs);

    let r = brute_force(&inst, 1_000_000).unwrap();
    println!("optimum {} after {} nodes", format_rational(&r.cost), r.nodes);
    println!("assignment {:?}", r.assignment.target);

    match brute_force(&inst, 10) {
        Err(BaselineError::Budget { size, budget }) => println!("budget of {budget} nodes too small for a search space of {size}"),
        other => println!("unexpected: {other:?}"),
    }
}
