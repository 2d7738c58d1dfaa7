mod common;

use gebp::baselines::{brute_force, list_scheduling, lpt, lpt_order, BaselineError, DEFAULT_BRUTE_BUDGET};
use gebp::harness::gen::{random_instance, rng, GenClass};
use gebp::model::{solution_cost, Instance, MachineSpec};
use gebp::rational::{int, ratio};
use proptest::prelude::*;
use rand::Rng;

fn unit() -> MachineSpec {
    MachineSpec::new(int(1), int(1), int(1))
}

#[test]
fn two_jobs_brute_force() {
    let inst = Instance::new(vec![unit(), MachineSpec::with_rate(int(2), int(1))], vec![int(1), ratio(3, 2)]);
    let b = brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
    assert_eq!(b.cost, common::enumerate_optimum(&inst));
    assert_eq!(solution_cost(&inst, &b.assignment).unwrap(), b.cost);
}

#[test]
fn budget_is_enforced() {
    let inst = Instance::new(vec![unit(); 3], vec![ratio(1, 3); 12]);
    assert!(matches!(brute_force(&inst, 5), Err(BaselineError::Budget { .. })));
    assert!(matches!(brute_force(&Instance::new(vec![], vec![int(1)]), 5), Err(BaselineError::NoMachines)));
}

#[test]
fn lpt_order_is_stable() {
    assert_eq!(lpt_order(&[int(1), int(3), int(1), int(2)]), vec![1, 3, 0, 2]);
}

#[test]
fn greedy_prefers_room() {
    // Both machines see zero marginal cost; the larger one has more room.
    let inst = Instance::new(vec![unit(), MachineSpec::with_rate(int(3), int(1))], vec![ratio(1, 2)]);
    assert_eq!(list_scheduling(&inst, &[0]).assignment.target, vec![1]);
}

proptest! {
    #[test]
    fn brute_force_is_optimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let class = [GenClass::Ebp, GenClass::Ubs, GenClass::General][r.gen_range(0..3)];
        let (n, m) = (r.gen_range(0..=6), r.gen_range(1..=3));
        let inst = random_instance(&mut r, class, n, m);
        let b = brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
        prop_assert_eq!(&b.cost, &common::enumerate_optimum(&inst));
        prop_assert_eq!(solution_cost(&inst, &b.assignment).unwrap(), b.cost);
    }

    #[test]
    fn brute_force_ignores_machine_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, m) = (r.gen_range(1..=6), r.gen_range(2..=3));
        let inst = random_instance(&mut r, GenClass::General, n, m);
        let mut flipped = inst.clone();
        flipped.machines.reverse();
        prop_assert_eq!(
            brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap().cost,
            brute_force(&flipped, DEFAULT_BRUTE_BUDGET).unwrap().cost
        );
    }

    #[test]
    fn heuristic_ratios(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, m) = (r.gen_range(1..=7), r.gen_range(1..=3));
        let ebp = random_instance(&mut r, GenClass::Ebp, n, m);
        let opt = common::enumerate_optimum(&ebp);
        let order: Vec<usize> = (0..n).collect();
        prop_assert!(list_scheduling(&ebp, &order).cost <= ratio(5, 4) * &opt);
        prop_assert!(lpt(&ebp).cost <= ratio(13, 12) * &opt);
        let ubs = random_instance(&mut r, GenClass::Ubs, n, m);
        let u = lpt(&ubs);
        prop_assert!(common::within_ubs_bound(&(&u.cost / common::enumerate_optimum(&ubs))));
        prop_assert_eq!(solution_cost(&ubs, &u.assignment).unwrap(), u.cost);
    }
}
