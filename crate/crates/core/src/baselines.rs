//! Greedy heuristics and exhaustive solvers used as reference points.
//!
//! The greedy rule places each job where the cost grows least. On instances
//! where all machines are (1, 1, 1) this is classical list scheduling.

use num::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{solution_cost, Assignment, Instance, InstanceClass, MachineSpec};
use crate::rational::Rational;
use crate::subproblem::{AuxProblem, AuxSolution};

pub const DEFAULT_BRUTE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("search space of {size} exceeds the budget {budget}")]
    Budget { size: String, budget: u64 },
    #[error("no machines")]
    NoMachines,
    #[error("no feasible solution")]
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicResult {
    pub assignment: Assignment,
    pub cost: Rational,
    pub name: &'static str,
    pub class: InstanceClass,
}

/// Places the jobs in `order` one at a time on the machine whose cost grows
/// least. Ties go to the machine with the most room left below capacity,
/// then to the lowest index.
pub fn list_scheduling(instance: &Instance, order: &[usize]) -> HeuristicResult {
    greedy_in_order(instance, order, "list")
}

/// List scheduling with jobs sorted by non-increasing size (ties by index).
pub fn lpt(instance: &Instance) -> HeuristicResult {
    greedy_in_order(instance, &lpt_order(&instance.jobs), "lpt")
}

pub fn lpt_order(jobs: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by(|&a, &b| jobs[b].cmp(&jobs[a]));
    order
}

fn greedy_in_order(instance: &Instance, order: &[usize], name: &'static str) -> HeuristicResult {
    let m = instance.machines.len();
    assert!(m > 0, "greedy needs at least one machine");
    let mut loads = vec![Rational::zero(); m];
    let mut target = vec![0usize; instance.jobs.len()];
    for &j in order {
        let p = &instance.jobs[j];
        let mut best: Option<(usize, Rational, Rational)> = None;
        for (i, mach) in instance.machines.iter().enumerate() {
            let next = &loads[i] + p;
            let delta = mach.cost_unchecked(&next) - mach.cost_unchecked(&loads[i]);
            let room = &mach.capacity - &loads[i];
            let better = match &best {
                None => true,
                Some((_, d, r)) => delta < *d || (delta == *d && room > *r),
            };
            if better {
                best = Some((i, delta, room));
            }
        }
        let (i, _, _) = best.expect("at least one machine");
        loads[i] += p;
        target[j] = i;
    }
    let assignment = Assignment::new(target);
    let cost = solution_cost(instance, &assignment).expect("greedy assignment is valid");
    HeuristicResult {
        assignment,
        cost,
        name,
        class: InstanceClass::of(&instance.machines),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteResult {
    pub assignment: Assignment,
    pub cost: Rational,
    /// Search nodes visited.
    pub nodes: u64,
}

fn check_budget(base: u64, exp: usize, budget: u64) -> Result<(), BaselineError> {
    let size = (base as f64).powi(exp as i32);
    if size > budget as f64 {
        return Err(BaselineError::Budget {
            size: format!("{base}^{exp}"),
            budget,
        });
    }
    Ok(())
}

/// Exact optimum by depth-first enumeration of all `m^n` assignments with
/// branch and bound. Partial costs already include every fixed cost and can
/// only grow, so they are valid lower bounds.
pub fn brute_force(instance: &Instance, budget: u64) -> Result<BruteResult, BaselineError> {
    let m = instance.machines.len();
    if m == 0 {
        return Err(BaselineError::NoMachines);
    }
    check_budget(m as u64, instance.jobs.len(), budget)?;
    let order = lpt_order(&instance.jobs);
    let start = lpt(instance);
    let mut search = Search {
        machines: &instance.machines,
        jobs: &instance.jobs,
        order: &order,
        loads: vec![Rational::zero(); m],
        costs: instance.machines.iter().map(|mach| mach.fixed_cost.clone()).collect(),
        current: vec![0; instance.jobs.len()],
        best_cost: start.cost,
        best: start.assignment.target,
        nodes: 0,
    };
    let partial = instance.total_fixed_cost();
    search.go(0, partial);
    Ok(BruteResult {
        assignment: Assignment::new(search.best),
        cost: search.best_cost,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    machines: &'a [MachineSpec],
    jobs: &'a [Rational],
    order: &'a [usize],
    loads: Vec<Rational>,
    costs: Vec<Rational>,
    current: Vec<usize>,
    best_cost: Rational,
    best: Vec<usize>,
    nodes: u64,
}

impl Search<'_> {
    fn go(&mut self, depth: usize, partial: Rational) {
        self.nodes += 1;
        if partial >= self.best_cost {
            return;
        }
        if depth == self.order.len() {
            self.best_cost = partial;
            self.best = self.current.clone();
            return;
        }
        let j = self.order[depth];
        let p = self.jobs[j].clone();
        for i in 0..self.machines.len() {
            // An empty machine identical to an earlier empty one gives the same subtree.
            if self.loads[i].is_zero()
                && (0..i).any(|k| self.loads[k].is_zero() && self.machines[k] == self.machines[i])
            {
                continue;
            }
            let old_load = std::mem::replace(&mut self.loads[i], Rational::zero());
            let new_load = &old_load + &p;
            let new_cost = self.machines[i].cost_unchecked(&new_load);
            let next = &partial - &self.costs[i] + &new_cost;
            let old_cost = std::mem::replace(&mut self.costs[i], new_cost);
            self.loads[i] = new_load;
            self.current[j] = i;
            self.go(depth + 1, next);
            self.loads[i] = old_load;
            self.costs[i] = old_cost;
        }
    }
}

/// Exact optimum of a quantized block subproblem by enumerating every job
/// target (a machine or unplaced) and every per-machine count of sand pieces.
pub fn brute_force_aux(problem: &AuxProblem, budget: u64) -> Result<AuxSolution, BaselineError> {
    let m = problem.machines.len();
    if m == 0 {
        return Err(BaselineError::NoMachines);
    }
    let grain = problem.grain();
    let cap = problem.cap();
    let pieces = problem.dummy_count().ok_or(BaselineError::Infeasible)?;
    let k = problem.jobs.len();
    check_budget(m as u64 + 1, k, budget)?;
    let sand_space = (pieces as u64 + 1).checked_pow(m as u32).unwrap_or(u64::MAX);
    let job_space = (m as u64 + 1).pow(k as u32);
    if job_space.saturating_mul(sand_space) > budget {
        return Err(BaselineError::Budget {
            size: format!("{job_space}*{sand_space}"),
            budget,
        });
    }
    let mut best: Option<AuxSolution> = None;
    let mut targets = vec![0usize; k];
    // targets[j] == m means unplaced.
    for code in 0..job_space {
        let mut c = code;
        for t in targets.iter_mut() {
            *t = (c % (m as u64 + 1)) as usize;
            c /= m as u64 + 1;
        }
        let mut job_loads = vec![Rational::zero(); m];
        let mut unplaced = Rational::zero();
        for (t, (_, p)) in targets.iter().zip(&problem.jobs) {
            if *t == m {
                unplaced += p;
            } else {
                job_loads[*t] += p;
            }
        }
        if job_loads.iter().any(|l| l > &cap) {
            continue;
        }
        let mut counts = vec![0i64; m];
        loop {
            let placed: i64 = counts.iter().sum();
            if placed <= pieces {
                let left = &grain * Rational::from_integer((pieces - placed).into()) + &unplaced;
                if left <= problem.slack {
                    let sand: Vec<Rational> = counts
                        .iter()
                        .map(|&n| &grain * Rational::from_integer(n.into()))
                        .collect();
                    let loads: Vec<Rational> = job_loads.iter().zip(&sand).map(|(a, b)| a + b).collect();
                    if loads.iter().all(|l| l <= &cap) {
                        let cost = problem
                            .machines
                            .iter()
                            .zip(&loads)
                            .fold(Rational::zero(), |acc, (mach, l)| acc + mach.cost_unchecked(l));
                        if best.as_ref().is_none_or(|b| cost < b.cost) {
                            best = Some(AuxSolution {
                                job_targets: problem
                                    .jobs
                                    .iter()
                                    .zip(&targets)
                                    .map(|((id, _), &t)| (*id, (t < m).then_some(t)))
                                    .collect(),
                                sand,
                                loads,
                                cost,
                            });
                        }
                    }
                }
            }
            // next sand count vector
            let mut pos = 0;
            while pos < m && counts[pos] == pieces {
                counts[pos] = 0;
                pos += 1;
            }
            if pos == m {
                break;
            }
            counts[pos] += 1;
        }
    }
    best.ok_or(BaselineError::Infeasible)
}

/// Ratio as a float for reporting, `None` when the denominator is not positive.
pub fn ratio_f64(value: &Rational, reference: &Rational) -> Option<f64> {
    reference.is_positive().then(|| (value / reference).to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Epsilon;
    use crate::rational::{int, ratio};

    fn ebp(m: usize, jobs: &[Rational]) -> Instance {
        Instance::new(vec![MachineSpec::new(int(1), int(1), int(1)); m], jobs.to_vec())
    }

    #[test]
    fn list_scheduling_example() {
        let inst = ebp(2, &[ratio(3, 5), ratio(3, 5), ratio(3, 5)]);
        let r = list_scheduling(&inst, &[0, 1, 2]);
        assert_eq!(inst.loads(&r.assignment).unwrap(), vec![ratio(6, 5), ratio(3, 5)]);
        assert_eq!(r.cost, ratio(11, 5));
        assert_eq!(brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap().cost, ratio(11, 5));
        assert_eq!(r.class, InstanceClass::Ebp);
    }

    #[test]
    fn lpt_example() {
        let inst = ebp(2, &[ratio(7, 10), ratio(1, 2), ratio(1, 2)]);
        let r = lpt(&inst);
        assert_eq!(inst.loads(&r.assignment).unwrap(), vec![ratio(7, 10), int(1)]);
        assert_eq!(r.cost, int(2));
        assert_eq!(brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap().cost, int(2));
    }

    #[test]
    fn single_job_and_empty() {
        let inst = Instance::new(
            vec![MachineSpec::new(int(4), int(2), int(2)), MachineSpec::new(int(1), int(1), int(1))],
            vec![int(2)],
        );
        // increases: 0 on the first machine, 1 on the second
        assert_eq!(list_scheduling(&inst, &[0]).assignment.target, vec![0]);
        let empty = ebp(3, &[]);
        assert_eq!(list_scheduling(&empty, &[]).cost, int(3));
        assert_eq!(lpt(&empty).cost, int(3));
        assert_eq!(brute_force(&empty, 10).unwrap().cost, int(3));
    }

    #[test]
    fn lpt_on_sorted_input_is_list_scheduling() {
        let inst = ebp(2, &[int(2), ratio(3, 2), ratio(1, 3)]);
        assert_eq!(lpt(&inst).assignment, list_scheduling(&inst, &[0, 1, 2]).assignment);
        let one = ebp(1, &[int(1), int(2)]);
        assert_eq!(lpt(&one).assignment.target, vec![0, 0]);
    }

    #[test]
    fn brute_force_examples() {
        let inst = ebp(2, &[int(1), int(1)]);
        let r = brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(r.cost, int(2));
        assert_ne!(r.assignment.target[0], r.assignment.target[1]);
        assert!(matches!(brute_force(&ebp(10, &vec![int(1); 8]), 1000), Err(BaselineError::Budget { .. })));
    }

    #[test]
    fn brute_force_beats_every_assignment() {
        let inst = Instance::new(
            vec![MachineSpec::new(int(6), int(2), int(3)), MachineSpec::new(int(1), int(1), int(1))],
            vec![int(1), ratio(5, 2), ratio(1, 2)],
        );
        let best = brute_force(&inst, DEFAULT_BRUTE_BUDGET).unwrap().cost;
        for code in 0..8usize {
            let t: Vec<usize> = (0..3).map(|j| (code >> j) & 1).collect();
            assert!(best <= solution_cost(&inst, &Assignment::new(t)).unwrap());
        }
    }

    fn aux(sizes: &[Rational], sand: Rational, slack: Rational) -> AuxProblem {
        AuxProblem {
            block: 0,
            machines: vec![MachineSpec::new(int(1), int(1), int(1))],
            jobs: sizes.iter().cloned().enumerate().collect(),
            sand,
            slack,
            eps: Epsilon::new(2).unwrap(),
            total_jobs: 4,
        }
    }

    #[test]
    fn brute_force_aux_examples() {
        let s = brute_force_aux(&aux(&[int(1)], int(0), int(0)), 1000).unwrap();
        assert_eq!(s.job_targets, vec![(0, Some(0))]);
        let all = aux(&[int(1), int(1)], int(1), int(4));
        let s = brute_force_aux(&all, 1000).unwrap();
        assert!(s.cost <= int(1));
        assert_eq!(brute_force_aux(&aux(&[int(2), int(2)], int(0), int(0)), 1000), Err(BaselineError::Infeasible));
    }
}
