//! Capacity classes, deletion of the cheapest residue class, blocks of
//! machines with similar capacities, and the job partition induced by the
//! blocks.
//!
//! All functions here expect machines sorted by non-increasing capacity and
//! rates normalized so that the smallest one is 1. Blocks are numbered from
//! 0 in code (block 0 holds the largest capacities).

use std::ops::RangeInclusive;

use num::{Signed, Zero};
use thiserror::Error;

use crate::model::{Epsilon, MachineSpec};
use crate::rational::{format_rational, one, pow, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftingError {
    #[error("no machines")]
    NoMachines,
    #[error("no machine has overtime rate 1; normalize rates first")]
    NoUnitRateMachine,
    #[error("capacities are not sorted in non-increasing order at position {0}")]
    Unsorted(usize),
    #[error("capacity must be positive, got {0}")]
    NonPositiveCapacity(String),
    #[error("block {block} has capacity ratio {ratio} above the bound {bound}")]
    BlockRatio {
        block: usize,
        ratio: String,
        bound: String,
    },
    #[error("job {0} falls in no job class")]
    Unclassified(usize),
}

/// Least integer `k` with `(1/eps^2)^k >= capacity`, by exact comparison.
pub fn capacity_class(capacity: &Rational, eps: Epsilon) -> i64 {
    debug_assert!(capacity.is_positive());
    let e = eps.inverse_rational();
    let base = &e * &e;
    let mut k = 0i64;
    let mut power = one();
    if capacity > &power {
        while capacity > &power {
            power *= &base;
            k += 1;
        }
    } else {
        // power = base^k >= capacity; step down while base^(k-1) still is.
        loop {
            let lower = &power / &base;
            if capacity <= &lower {
                power = lower;
                k -= 1;
            } else {
                break;
            }
        }
    }
    k
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacityClassing {
    /// `k_i` per machine.
    pub classes: Vec<i64>,
    /// `k_i mod (1/eps)` per machine, in `0..1/eps`.
    pub residues: Vec<u64>,
    /// Total fixed cost of each residue class.
    pub class_costs: Vec<Rational>,
    pub t_min: u64,
    /// The unit-rate machine that is never deleted.
    pub h: usize,
    /// Machines of the cheapest residue class other than `h`, ascending.
    pub deleted: Vec<usize>,
}

impl CapacityClassing {
    /// Indices of machines that survive the deletion, ascending.
    pub fn survivors(&self) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|i| self.deleted.binary_search(i).is_err())
            .collect()
    }
}

/// Residue with the smallest total fixed cost (ties to the smallest residue)
/// together with the per-residue totals.
pub fn cheapest_residue(residues: &[u64], fixed_costs: &[Rational], modulus: u64) -> (u64, Vec<Rational>) {
    let mut totals = vec![Rational::zero(); modulus as usize];
    for (&t, f) in residues.iter().zip(fixed_costs) {
        totals[t as usize] += f;
    }
    let mut best = 0usize;
    for t in 1..totals.len() {
        if totals[t] < totals[best] {
            best = t;
        }
    }
    (best as u64, totals)
}

pub fn select_deletion(machines: &[MachineSpec], eps: Epsilon) -> Result<CapacityClassing, ShiftingError> {
    if machines.is_empty() {
        return Err(ShiftingError::NoMachines);
    }
    check_sorted(machines.iter().map(|m| &m.capacity))?;
    let unit = one();
    // Largest-capacity unit-rate machine: the first one in sorted order.
    let h = machines
        .iter()
        .position(|m| m.overtime_rate == unit)
        .ok_or(ShiftingError::NoUnitRateMachine)?;
    let modulus = eps.inverse();
    let classes: Vec<i64> = machines.iter().map(|m| capacity_class(&m.capacity, eps)).collect();
    let residues: Vec<u64> = classes
        .iter()
        .map(|k| k.rem_euclid(modulus as i64) as u64)
        .collect();
    let costs: Vec<Rational> = machines.iter().map(|m| m.fixed_cost.clone()).collect();
    let (t_min, class_costs) = cheapest_residue(&residues, &costs, modulus);
    let deleted = residues
        .iter()
        .enumerate()
        .filter(|&(i, &t)| t == t_min && i != h)
        .map(|(i, _)| i)
        .collect();
    Ok(CapacityClassing {
        classes,
        residues,
        class_costs,
        t_min,
        h,
        deleted,
    })
}

fn check_sorted<'a>(caps: impl Iterator<Item = &'a Rational>) -> Result<(), ShiftingError> {
    let mut prev: Option<&Rational> = None;
    for (i, c) in caps.enumerate() {
        if !c.is_positive() {
            return Err(ShiftingError::NonPositiveCapacity(format_rational(c)));
        }
        if let Some(p) = prev {
            if c > p {
                return Err(ShiftingError::Unsorted(i));
            }
        }
        prev = Some(c);
    }
    Ok(())
}

/// A run of consecutive positions `first..=last` in the capacity list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub first: usize,
    pub last: usize,
}

impl Block {
    pub fn positions(&self) -> RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
}

impl BlockPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block that contains position `pos`.
    pub fn block_of(&self, pos: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.positions().contains(&pos))
    }
}

/// Largest allowed capacity ratio inside a block, `(1/eps)^(4/eps)`.
pub fn block_ratio_bound(eps: Epsilon) -> Rational {
    pow(&eps.inverse_rational(), 4 * eps.inverse() as i64)
}

/// Splits a non-increasing capacity list wherever two neighbours differ by a
/// factor of at least `1/eps^2`, then checks the in-block ratio bound.
pub fn partition_blocks(capacities: &[Rational], eps: Epsilon) -> Result<BlockPartition, ShiftingError> {
    if capacities.is_empty() {
        return Err(ShiftingError::NoMachines);
    }
    check_sorted(capacities.iter())?;
    let e = eps.inverse_rational();
    let threshold = &e * &e;
    let mut blocks = Vec::new();
    let mut first = 0;
    for i in 0..capacities.len() - 1 {
        if &capacities[i] / &capacities[i + 1] >= threshold {
            blocks.push(Block { first, last: i });
            first = i + 1;
        }
    }
    blocks.push(Block {
        first,
        last: capacities.len() - 1,
    });
    let bound = block_ratio_bound(eps);
    for (q, b) in blocks.iter().enumerate() {
        let ratio = &capacities[b.first] / &capacities[b.last];
        if ratio > bound {
            return Err(ShiftingError::BlockRatio {
                block: q,
                ratio: format_rational(&ratio),
                bound: format_rational(&bound),
            });
        }
    }
    Ok(BlockPartition { blocks })
}

/// Jobs grouped by the blocks that may process them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JobPartition {
    /// Jobs larger than `c_1 / eps`; only `h` can take them.
    pub top: Vec<usize>,
    /// `large[q]`: sizes in `(eps * c_last(q), c_first(q) / eps]`.
    pub large: Vec<Vec<usize>>,
    /// `small[q]`: sizes in `(c_first(q+1) / eps, eps * c_last(q)]`, with
    /// `c_first` of the block after the last one taken as 0.
    pub small: Vec<Vec<usize>>,
    /// Zero-size jobs.
    pub zero: Vec<usize>,
}

impl JobPartition {
    pub fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.top
            .iter()
            .chain(self.large.iter().flatten())
            .chain(self.small.iter().flatten())
            .chain(&self.zero)
            .copied()
    }
}

pub fn partition_jobs(
    jobs: &[Rational],
    capacities: &[Rational],
    blocks: &BlockPartition,
    eps: Epsilon,
) -> Result<JobPartition, ShiftingError> {
    if capacities.is_empty() || blocks.is_empty() {
        return Err(ShiftingError::NoMachines);
    }
    let e = eps.inverse_rational();
    let eps_v = eps.value();
    let kappa = blocks.len();
    let upper: Vec<Rational> = blocks.blocks.iter().map(|b| &capacities[b.first] * &e).collect();
    let lower: Vec<Rational> = blocks.blocks.iter().map(|b| &capacities[b.last] * &eps_v).collect();
    let mut part = JobPartition {
        large: vec![Vec::new(); kappa],
        small: vec![Vec::new(); kappa],
        ..Default::default()
    };
    for (j, p) in jobs.iter().enumerate() {
        if p.is_zero() {
            part.zero.push(j);
            continue;
        }
        if p > &upper[0] {
            part.top.push(j);
            continue;
        }
        let mut placed = false;
        for q in 0..kappa {
            if p <= &upper[q] && p > &lower[q] {
                part.large[q].push(j);
                placed = true;
                break;
            }
            let next_upper = upper.get(q + 1).cloned().unwrap_or_else(Rational::zero);
            if p > &next_upper && p <= &lower[q] {
                part.small[q].push(j);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(ShiftingError::Unclassified(j));
        }
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn eps2() -> Epsilon {
        Epsilon::new(2).unwrap()
    }

    #[test]
    fn capacity_class_examples() {
        assert_eq!(capacity_class(&int(16), eps2()), 2);
        assert_eq!(capacity_class(&int(5), eps2()), 2);
        assert_eq!(capacity_class(&int(1), eps2()), 0);
        assert_eq!(capacity_class(&int(4), eps2()), 1);
        assert_eq!(capacity_class(&ratio(1, 4), eps2()), -1);
        assert_eq!(capacity_class(&ratio(1, 5), eps2()), -1);
        assert_eq!(capacity_class(&ratio(1, 17), eps2()), -2);
    }

    #[test]
    fn cheapest_residue_example() {
        // classes 2, 3, 4 with fixed costs 5, 1, 5 under modulus 2
        let (t, totals) = cheapest_residue(&[0, 1, 0], &[int(5), int(1), int(5)], 2);
        assert_eq!(t, 1);
        assert_eq!(totals, vec![int(10), int(1)]);
    }

    #[test]
    fn select_deletion_on_class_example() {
        // capacities in classes 4, 3, 2 (sorted descending); fixed costs 5, 1, 5.
        let machines = vec![
            MachineSpec::new(int(5), int(256), ratio(5, 256)),
            MachineSpec::new(int(1), int(64), ratio(1, 64)),
            MachineSpec::new(int(5), int(5), int(1)),
        ];
        let cls = select_deletion(&machines, eps2()).unwrap();
        assert_eq!(cls.classes, vec![4, 3, 2]);
        assert_eq!(cls.t_min, 1);
        assert_eq!(cls.h, 2);
        assert_eq!(cls.deleted, vec![1]);
        assert_eq!(cls.survivors(), vec![0, 2]);
    }

    #[test]
    fn single_class_picks_empty_residue() {
        // both capacities lie in class 1, so residue 0 is empty and costs nothing
        let machines = vec![MachineSpec::with_rate(int(3), int(1)), MachineSpec::with_rate(int(2), int(1))];
        let cls = select_deletion(&machines, eps2()).unwrap();
        assert_eq!(cls.residues, vec![1, 1]);
        assert_eq!(cls.t_min, 0);
        assert!(cls.deleted.is_empty());
    }

    #[test]
    fn h_survives_its_class() {
        let machines = vec![
            MachineSpec::with_rate(int(3), int(1)),
            MachineSpec::with_rate(int(2), int(2)),
            MachineSpec::with_rate(int(1), int(50)),
        ];
        // classes 1, 1, 0; residues 1, 1, 0; costs t0 = 50, t1 = 7 -> t_min = 1
        let cls = select_deletion(&machines, eps2()).unwrap();
        assert_eq!(cls.t_min, 1);
        assert_eq!(cls.h, 0);
        assert_eq!(cls.deleted, vec![1]);
    }

    #[test]
    fn needs_unit_rate_machine() {
        let machines = vec![MachineSpec::with_rate(int(3), int(2))];
        assert_eq!(select_deletion(&machines, eps2()), Err(ShiftingError::NoUnitRateMachine));
    }

    #[test]
    fn block_examples() {
        let caps: Vec<_> = [100, 30, 29, 7, 1].iter().map(|&c| int(c)).collect();
        let bp = partition_blocks(&caps, eps2()).unwrap();
        assert_eq!(
            bp.blocks,
            vec![Block { first: 0, last: 2 }, Block { first: 3, last: 3 }, Block { first: 4, last: 4 }]
        );
        assert_eq!(partition_blocks(&[int(5)], eps2()).unwrap().len(), 1);
        assert_eq!(partition_blocks(&[int(8), int(2)], eps2()).unwrap().len(), 2);
        assert_eq!(partition_blocks(&[int(8), int(3)], eps2()).unwrap().len(), 1);
    }

    #[test]
    fn block_ratio_violation_is_reported() {
        // 3.9 ratio steps never split, but the chain spans far more than 2^8.
        let mut caps = vec![int(1)];
        for _ in 0..6 {
            let next = caps.last().unwrap() * ratio(39, 10);
            caps.push(next);
        }
        caps.reverse();
        assert!(matches!(
            partition_blocks(&caps, eps2()),
            Err(ShiftingError::BlockRatio { block: 0, .. })
        ));
    }

    #[test]
    fn job_partition_examples() {
        let caps = vec![int(4)];
        let bp = partition_blocks(&caps, eps2()).unwrap();
        let jobs = vec![int(10), int(3), int(2), int(0), int(8)];
        let part = partition_jobs(&jobs, &caps, &bp, eps2()).unwrap();
        assert_eq!(part.top, vec![0]);
        assert_eq!(part.large, vec![vec![1, 4]]);
        assert_eq!(part.small, vec![vec![2]]);
        assert_eq!(part.zero, vec![3]);
    }

    #[test]
    fn job_partition_two_blocks() {
        let caps = vec![int(16), int(2)];
        let bp = partition_blocks(&caps, eps2()).unwrap();
        // J_0 > 32; J_1 in (8, 32]; J'_1 in (4, 8]; J_2 in (1, 4]; J'_2 in (0, 1]
        let jobs = vec![int(33), int(9), int(8), int(5), int(4), int(2), int(1), ratio(1, 3)];
        let part = partition_jobs(&jobs, &caps, &bp, eps2()).unwrap();
        assert_eq!(part.top, vec![0]);
        assert_eq!(part.large, vec![vec![1], vec![4, 5]]);
        assert_eq!(part.small, vec![vec![2, 3], vec![6, 7]]);
        let mut all: Vec<_> = part.all().collect();
        all.sort();
        assert_eq!(all, (0..jobs.len()).collect::<Vec<_>>());
    }
}
