//! Reference solvers written independently of the library, plus seeded
//! instance generators shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use gebp::model::{Epsilon, Instance, MachineSpec};
use gebp::nfold::{Brick, Column, NfoldProgram};
use gebp::rational::{int, ratio, Rational};
use gebp::subproblem::AuxProblem;
use gebp::variant::TypedInstance;
use num::{BigInt, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn cost(m: &MachineSpec, load: &Rational) -> Rational {
    if load <= &m.capacity {
        m.fixed_cost.clone()
    } else {
        &m.fixed_cost + &m.overtime_rate * (load - &m.capacity)
    }
}

fn total(values: impl IntoIterator<Item = Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |a, b| a + b)
}

/// Advances a mixed-radix counter; false once it wraps around.
fn step(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// Optimum over all `m^n` assignments.
pub fn enumerate_optimum(inst: &Instance) -> Rational {
    let m = inst.machines.len();
    let n = inst.jobs.len();
    let mut digits = vec![0usize; n];
    let radix = vec![m; n];
    let mut best: Option<Rational> = None;
    loop {
        let mut loads = vec![Rational::zero(); m];
        for (j, &i) in digits.iter().enumerate() {
            loads[i] += &inst.jobs[j];
        }
        let c = total(inst.machines.iter().zip(&loads).map(|(mach, l)| cost(mach, l)));
        if best.as_ref().is_none_or(|b| &c < b) {
            best = Some(c);
        }
        if n == 0 || !step(&mut digits, &radix) {
            break;
        }
    }
    best.expect("at least one assignment")
}

/// Minimum objective over every column choice, `None` if no choice is feasible.
pub fn enumerate_nfold(p: &NfoldProgram) -> Option<Rational> {
    let radix: Vec<usize> = p.bricks.iter().map(|b| b.columns.len()).collect();
    if radix.iter().any(|&r| r == 0) {
        return None;
    }
    let mut digits = vec![0usize; radix.len()];
    let mut best: Option<Rational> = None;
    loop {
        let mut assigned = vec![0i64; p.demands.len()];
        let mut obj = Rational::zero();
        for (b, &k) in digits.iter().enumerate() {
            let col = &p.bricks[b].columns[k];
            for (a, e) in assigned.iter_mut().zip(&col.entries) {
                *a += e;
            }
            obj += &col.cost;
        }
        let y: Vec<i64> = p.demands.iter().zip(&assigned).map(|(d, a)| d - a).collect();
        let weighted: i64 = y.iter().zip(&p.slack_weights).map(|(a, b)| a * b).sum();
        let ok = y.iter().all(|&v| (0..=p.y_upper).contains(&v)) && weighted <= p.slack_rhs;
        if ok && best.as_ref().is_none_or(|b| &obj < b) {
            best = Some(obj);
        }
        if digits.is_empty() || !step(&mut digits, &radix) {
            break;
        }
    }
    best
}

pub fn random_nfold(rng: &mut impl Rng) -> NfoldProgram {
    let rows = rng.gen_range(1..=3);
    let bricks = (0..rng.gen_range(1..=3))
        .map(|_| Brick {
            columns: (0..rng.gen_range(1..=4))
                .map(|_| Column {
                    entries: (0..rows).map(|_| rng.gen_range(0..=3)).collect(),
                    cost: ratio(rng.gen_range(0..=12), rng.gen_range(1..=4)),
                })
                .collect(),
        })
        .collect();
    NfoldProgram {
        demands: (0..rows).map(|_| rng.gen_range(0..=6)).collect(),
        slack_weights: (0..rows).map(|_| rng.gen_range(0..=4)).collect(),
        slack_rhs: rng.gen_range(0..=10),
        y_upper: rng.gen_range(0..=6),
        bricks,
    }
}

/// Cheapest way to put `volume` more onto machines with the given loads,
/// each capped at `cap`. The marginal cost of a machine is 0 until its
/// capacity and `sigma` after, so filling the cheapest segments first is
/// optimal for fractional volume.
fn place_fractional(machines: &[MachineSpec], loads: &[Rational], volume: &Rational, cap: &Rational) -> Option<Rational> {
    // Segments (marginal rate, width, machine).
    let mut segments: Vec<(Rational, Rational, usize)> = Vec::new();
    for (i, (m, l)) in machines.iter().zip(loads).enumerate() {
        let room = cap - l;
        let free = if l < &m.capacity { (&m.capacity - l).min(room.clone()) } else { Rational::zero() };
        segments.push((Rational::zero(), free.clone(), i));
        segments.push((m.overtime_rate.clone(), room - free, i));
    }
    segments.sort_by(|a, b| a.0.cmp(&b.0));
    let mut added = vec![Rational::zero(); machines.len()];
    let mut left = volume.clone();
    for (_, width, i) in &segments {
        let take = width.clone().min(left.clone());
        added[*i] += &take;
        left -= take;
    }
    if left.is_positive() {
        return None;
    }
    Some(total(machines.iter().enumerate().map(|(i, m)| cost(m, &(&loads[i] + &added[i])))))
}

/// Same in whole grains. Each machine's cost is convex in its grain count,
/// so handing out one grain at a time to the cheapest machine is optimal.
fn place_grains(machines: &[MachineSpec], loads: &[Rational], volume: &Rational, cap: &Rational, grain: &Rational) -> Option<Rational> {
    let mut now = loads.to_vec();
    let mut left = volume.clone();
    while left.is_positive() {
        let mut best: Option<(Rational, usize)> = None;
        for (i, m) in machines.iter().enumerate() {
            let next = &now[i] + grain;
            if &next > cap {
                continue;
            }
            let delta = cost(m, &next) - cost(m, &now[i]);
            if best.as_ref().is_none_or(|(d, _)| &delta < d) {
                best = Some((delta, i));
            }
        }
        let (_, i) = best?;
        now[i] += grain;
        left -= grain;
    }
    Some(total(machines.iter().zip(&now).map(|(m, l)| cost(m, l))))
}

/// Optimum of the subproblem over all job placements. Sand is fractional
/// (`quantized = false`) or in whole grains (`quantized = true`).
pub fn aux_optimum(p: &AuxProblem, quantized: bool) -> Option<Rational> {
    let m = p.machines.len();
    let grain = p.machines.last()?.capacity.clone() * p.eps.value();
    let cap = &p.machines[0].capacity * p.eps.inverse_rational();
    let radix = vec![m + 1; p.jobs.len()];
    let mut digits = vec![0usize; p.jobs.len()];
    let mut best: Option<Rational> = None;
    loop {
        let mut loads = vec![Rational::zero(); m];
        let mut unplaced = Rational::zero();
        for (&d, (_, size)) in digits.iter().zip(&p.jobs) {
            if d == m {
                unplaced += size;
            } else {
                loads[d] += size;
            }
        }
        // All sand beyond what the slack absorbs must be placed; placing more never helps.
        let need = (&p.sand + &unplaced - &p.slack).max(Rational::zero());
        if need <= p.sand && loads.iter().all(|l| l <= &cap) {
            let placed = if quantized {
                place_grains(&p.machines, &loads, &need, &cap, &grain)
            } else {
                place_fractional(&p.machines, &loads, &need, &cap)
            };
            if let Some(c) = placed {
                if best.as_ref().is_none_or(|b| &c < b) {
                    best = Some(c);
                }
            }
        }
        if digits.is_empty() || !step(&mut digits, &radix) {
            break;
        }
    }
    best
}

/// A valid subproblem with `eps = 1/2`, the last capacity 1 (grain 1/2) and
/// the first capacity a multiple of 1/4, so the cap `2 c_first` lies on the grain grid.
pub fn random_aux(rng: &mut impl Rng, max_machines: usize, max_jobs: usize, max_dummies: i64) -> AuxProblem {
    let eps = Epsilon::new(2).expect("valid");
    let m = rng.gen_range(1..=max_machines);
    let mut caps: Vec<Rational> = (1..m).map(|_| ratio(rng.gen_range(4..=12), 4)).collect();
    caps.push(int(1));
    caps.sort_by(|a, b| b.cmp(a));
    let rates = [ratio(1, 2), int(1), int(2), int(3)];
    let machines: Vec<MachineSpec> = caps
        .into_iter()
        .map(|c| MachineSpec::with_rate(c, rates.choose(rng).expect("nonempty").clone()))
        .collect();
    let grain = ratio(1, 2);
    let cap = &machines[0].capacity * int(2);
    let top = (&cap / &grain).to_integer().to_i64().expect("small");
    let jobs: Vec<(usize, Rational)> = (0..rng.gen_range(0..=max_jobs))
        .map(|j| (j, &grain * int(rng.gen_range(2..=top.min(8)))))
        .collect();
    let sand = &grain * int(rng.gen_range(0..=max_dummies));
    let slack = &cap * int(rng.gen_range(0..=1));
    AuxProblem {
        block: 0,
        machines,
        jobs,
        sand,
        slack,
        eps,
        total_jobs: 8,
    }
}

/// Optimum of the typed problem: over every set partition of the jobs, each
/// part on its cheapest type.
pub fn typed_optimum(t: &TypedInstance) -> Rational {
    fn part_cost(t: &TypedInstance, load: &Rational) -> Rational {
        t.types.iter().map(|m| cost(m, load)).min().expect("types")
    }
    fn rec(t: &TypedInstance, j: usize, parts: &mut Vec<Rational>, best: &mut Option<Rational>) {
        if j == t.jobs.len() {
            let c = total(parts.iter().map(|l| part_cost(t, l)));
            if best.as_ref().is_none_or(|b| &c < b) {
                *best = Some(c);
            }
            return;
        }
        for k in 0..parts.len() {
            parts[k] += &t.jobs[j];
            rec(t, j + 1, parts, best);
            parts[k] -= &t.jobs[j];
        }
        parts.push(t.jobs[j].clone());
        rec(t, j + 1, parts, best);
        parts.pop();
    }
    let mut best = None;
    rec(t, 0, &mut Vec::new(), &mut best);
    best.unwrap_or_else(Rational::zero)
}

/// `value <= 4 - 2 sqrt 2`, exactly.
pub fn within_ubs_bound(value: &Rational) -> bool {
    let num = value.numer().clone();
    let den = value.denom().clone();
    let lhs: BigInt = &den * 4 - num;
    !lhs.is_negative() && &lhs * &lhs >= &den * &den * 8
}
