//! One block subproblem: large jobs, sand in whole grains and a slack budget.

use gebp::model::{Epsilon, MachineSpec};
use gebp::rational::{format_rational, int, ratio};
use gebp::subproblem::{build_catalog, enumerate_configurations, solve_aux, AuxOptions, AuxProblem};

fn main() {
    let eps = Epsilon::new(2).unwrap();
    let problem = AuxProblem {
        block: 0,
        machines: vec![MachineSpec::with_rate(int(2), int(1)), MachineSpec::with_rate(int(1), int(2))],
        jobs: vec![(0, int(2)), (1, ratio(3, 2)), (2, int(1))],
        sand: int(1),
        slack: int(0),
        eps,
        total_jobs: 3,
    };
    println!("grain {} cap {}", format_rational(&problem.grain()), format_rational(&problem.cap()));

    let catalog = build_catalog(&problem).unwrap();
    let configs = enumerate_configurations(&catalog, &problem.cap(), 10_000).unwrap();
    println!("{} sizes, {} configurations per machine", catalog.len(), configs.len());

    let sol = solve_aux(&problem, AuxOptions::default()).unwrap();
    for ((id, target), _) in sol.job_targets.iter().zip(&problem.jobs) {
        println!("job {id} -> {target:?}");
    }
    let sand: Vec<String> = sol.sand.iter().map(format_rational).collect();
    println!("sand per machine {sand:?}, cost {}", format_rational(&sol.cost));
    sol.check(&problem).unwrap();

    // With a slack budget of one cap, the large job may stay out.
    let loose = AuxProblem { slack: problem.cap(), ..problem };
    let sol = solve_aux(&loose, AuxOptions::default()).unwrap();
    println!("with slack: cost {}, unplaced {}", format_rational(&sol.cost), format_rational(&sol.unplaced_job_mass(&loose)));
}
