//! Approximation scheme on a small mixed instance, compared with the optimum.

use gebp::baselines::{brute_force, DEFAULT_BRUTE_BUDGET};
use gebp::eptas::{self, guarantee};
use gebp::model::{Epsilon, Instance, MachineSpec};
use gebp::rational::{format_rational, int, ratio, to_f64};

fn main() {
    let machines = vec![
        MachineSpec::with_rate(int(4), ratio(1, 2)),
        MachineSpec::with_rate(int(2), int(1)),
        MachineSpec::with_rate(ratio(1, 2), int(3)),
    ];
    let jobs = vec![int(3), ratio(5, 2), int(1), ratio(3, 4), ratio(1, 2), int(2)];
    let inst = Instance::new(machines, jobs);
    let eps = Epsilon::new(2).unwrap();

    let sol = eptas::solve(&inst, eps).expect("solvable");
    let opt = brute_force(&inst, DEFAULT_BRUTE_BUDGET).expect("small enough");
    println!("assignment {:?}", sol.assignment.target);
    println!("cost {} optimum {}", format_rational(&sol.cost), format_rational(&opt.cost));
    println!(
        "ratio {:.4} (guaranteed at most {:.4})",
        to_f64(&(&sol.cost / &opt.cost)),
        to_f64(&guarantee(eps))
    );
    let a = &sol.audit;
    println!(
        "path length {} realized {} ({} blocks, {} nodes, {} subproblems solved)",
        format_rational(&a.path_length),
        format_rational(&a.realized_path_cost),
        a.blocks.len(),
        a.graph_nodes,
        a.aux_solves
    );
}
