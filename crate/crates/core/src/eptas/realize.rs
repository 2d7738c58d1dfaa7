//! Turning a shortest path and its block solutions into an integral assignment.

use std::collections::VecDeque;

use num::{Signed, Zero};

use super::{DriverError, Prepared};
use crate::rational::Rational;
use crate::subproblem::AuxSolution;

/// Removes and returns the shortest prefix of `small` whose total size is at
/// least `volume`; all of `small` when even the whole list falls short.
pub fn take_prefix(small: &mut VecDeque<(usize, Rational)>, volume: &Rational) -> Vec<usize> {
    let mut taken = Vec::new();
    let mut total = Rational::zero();
    while &total < volume {
        match small.pop_front() {
            Some((j, p)) => {
                total += p;
                taken.push(j);
            }
            None => break,
        }
    }
    taken
}

/// Builds the assignment (over sorted machine positions) from one block
/// solution per block, `plan[b]` for block `b`.
///
/// Blocks are processed from the one with the smallest capacities upwards.
/// Large jobs follow the block solution; small jobs are laid over the sand
/// volumes machine by machine. Everything left at the end goes to `h`.
pub fn realize(prep: &Prepared, plan: &[&AuxSolution]) -> Result<Vec<usize>, DriverError> {
    let jobs = &prep.work.jobs;
    let mut target: Vec<Option<usize>> = vec![None; jobs.len()];
    for b in (0..prep.kappa()).rev() {
        let sol = plan[b];
        let machines = &prep.block_machines[b];
        for (j, t) in &sol.job_targets {
            if let Some(i) = t {
                target[*j] = Some(machines[*i]);
            }
        }
        let grain = &prep.grains[b];
        let mut small: Vec<(usize, Rational)> = jobs
            .iter()
            .enumerate()
            .filter(|(j, p)| target[*j].is_none() && p.is_positive() && *p <= grain)
            .map(|(j, p)| (j, p.clone()))
            .collect();
        small.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut small: VecDeque<_> = small.into();
        for (pos, &i) in machines.iter().enumerate() {
            if small.is_empty() {
                break;
            }
            for j in take_prefix(&mut small, &sol.sand[pos]) {
                target[j] = Some(i);
            }
        }
    }
    let h = prep.classing.h;
    Ok(target.into_iter().map(|t| t.unwrap_or(h)).collect())
}
