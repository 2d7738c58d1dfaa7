//! A hand-built brick program, solved exactly and by local search.

use gebp::nfold::{first_feasible, solve_augmentation, solve_exact, Brick, Column, NfoldProgram, SolveOptions};
use gebp::rational::{format_rational, int};

fn col(entries: [i64; 2], cost: i64) -> Column {
    Column { entries: entries.to_vec(), cost: int(cost) }
}

fn main() {
    let brick = || Brick {
        columns: vec![col([0, 0], 1), col([1, 0], 1), col([0, 1], 2), col([2, 0], 3), col([1, 1], 4)],
    };
    let program = NfoldProgram {
        demands: vec![3, 2],
        slack_weights: vec![1, 2],
        slack_rhs: 1,
        y_upper: 3,
        bricks: vec![brick(), brick(), brick()],
    };
    print!("{}", program.dump());

    let exact = solve_exact(&program, SolveOptions::default()).unwrap();
    println!("exact choice {:?} objective {}", exact.choice, format_rational(&exact.objective));
    program.verify(&exact).unwrap();

    let start = first_feasible(&program).unwrap();
    let local = solve_augmentation(&program, &start).unwrap();
    println!(
        "local search from {} reaches {}",
        format_rational(&start.objective),
        format_rational(&local.objective)
    );
}
