//! Capacity classes, the deleted residue class and the resulting blocks.

use gebp::model::{Epsilon, Instance, MachineSpec};
use gebp::preprocess::{normalize_sigma, sort_machines};
use gebp::rational::{format_rational, int, ratio, Rational};
use gebp::shifting::{partition_blocks, partition_jobs, select_deletion};

fn main() {
    let eps = Epsilon::new(2).unwrap();
    let machines = vec![
        MachineSpec::with_rate(int(64), int(1)),
        MachineSpec::with_rate(int(40), int(2)),
        MachineSpec::with_rate(int(3), int(1)),
        MachineSpec::with_rate(int(2), int(3)),
        MachineSpec::with_rate(ratio(1, 8), int(1)),
    ];
    let jobs = vec![int(500), int(90), int(10), int(1), ratio(1, 10), ratio(1, 100)];
    let (norm, _) = normalize_sigma(&Instance::new(machines, jobs));
    let (sorted, _) = sort_machines(&norm);

    let c = select_deletion(&sorted.machines, eps).unwrap();
    println!("classes {:?} residues {:?}", c.classes, c.residues);
    println!("t_min {} h {} deleted {:?}", c.t_min, c.h, c.deleted);

    let survivors = c.survivors();
    let caps: Vec<Rational> = survivors.iter().map(|&i| sorted.machines[i].capacity.clone()).collect();
    let blocks = partition_blocks(&caps, eps).unwrap();
    let parts = partition_jobs(&sorted.jobs, &caps, &blocks, eps).unwrap();
    for (q, b) in blocks.blocks.iter().enumerate() {
        let members: Vec<String> = b.positions().map(|k| format_rational(&caps[k])).collect();
        println!("block {q}: capacities {members:?} large {:?} small {:?}", parts.large[q], parts.small[q]);
    }
    println!("top {:?} zero {:?}", parts.top, parts.zero);
}
