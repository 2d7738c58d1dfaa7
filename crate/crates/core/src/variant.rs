//! Machine types instead of machines: any number of copies of each type may
//! be opened, and only opened machines are paid for.
//!
//! After normalizing costs, jobs too large for any capped machine get a
//! machine of their own. The rest becomes a bin packing instance whose bins
//! cost `pi(load)`, the cheapest type for that load; each bin is then mapped
//! back to its cheapest type.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{validate_machines, Epsilon, MachineSpec, ModelError, Violation};
use crate::rational::{format_rational, Rational};

/// Largest item count the exact bin packing engine accepts.
pub const EXACT_ITEM_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VariantError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no machine types")]
    NoTypes,
    #[error("argument {0} outside [0, 1]")]
    Domain(String),
    #[error("{items} items exceed the exact engine limit of {limit}")]
    Budget { items: usize, limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedInstance {
    pub types: Vec<MachineSpec>,
    pub jobs: Vec<Rational>,
}

impl TypedInstance {
    pub fn new(types: Vec<MachineSpec>, jobs: Vec<Rational>) -> Self {
        Self { types, jobs }
    }

    pub fn validate(&self) -> Result<(), VariantError> {
        if self.types.is_empty() {
            return Err(VariantError::NoTypes);
        }
        let mut report = validate_machines(&self.types);
        for (j, p) in self.jobs.iter().enumerate() {
            if p.is_negative() {
                report.violations.push(Violation::NegativeJob { job: j });
            }
        }
        report.into_result()?;
        Ok(())
    }

    /// Largest capacity among the types.
    pub fn max_capacity(&self) -> Rational {
        self.types.iter().map(|t| t.capacity.clone()).max().unwrap_or_else(Rational::zero)
    }
}

/// Both scalings applied by [`normalize_variant`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantScale {
    /// Largest fixed cost; all costs were divided by it.
    pub cost_scale: Rational,
    /// Smallest rate after the first step; sizes were multiplied by it.
    pub size_scale: Rational,
}

impl VariantScale {
    /// Cost in the original units of a cost measured after normalization.
    pub fn restore_cost(&self, cost: &Rational) -> Rational {
        cost * &self.cost_scale
    }

    pub fn restore(&self, typed: &TypedInstance) -> TypedInstance {
        let s = &self.size_scale;
        let k = &self.cost_scale;
        TypedInstance {
            types: typed
                .types
                .iter()
                .map(|t| MachineSpec::new(&t.fixed_cost * k, &t.capacity / s, &t.overtime_rate * s * k))
                .collect(),
            jobs: typed.jobs.iter().map(|p| p / s).collect(),
        }
    }
}

/// Divides costs and rates by the largest fixed cost, then rescales so the
/// smallest rate is 1 (which leaves fixed costs alone).
pub fn normalize_variant(typed: &TypedInstance) -> (TypedInstance, VariantScale) {
    let cost_scale = typed
        .types
        .iter()
        .map(|t| t.fixed_cost.clone())
        .max()
        .unwrap_or_else(Rational::one);
    let first: Vec<MachineSpec> = typed
        .types
        .iter()
        .map(|t| MachineSpec::new(&t.fixed_cost / &cost_scale, t.capacity.clone(), &t.overtime_rate / &cost_scale))
        .collect();
    let size_scale = first
        .iter()
        .map(|t| t.overtime_rate.clone())
        .min()
        .unwrap_or_else(Rational::one);
    let types = first
        .iter()
        .map(|t| MachineSpec::new(t.fixed_cost.clone(), &t.capacity * &size_scale, &t.overtime_rate / &size_scale))
        .collect();
    let jobs = typed.jobs.iter().map(|p| p * &size_scale).collect();
    (TypedInstance { types, jobs }, VariantScale { cost_scale, size_scale })
}

/// Type giving the cheapest machine for `load` (ties to the lowest index), and that cost.
pub fn cheapest_type(types: &[MachineSpec], load: &Rational) -> (usize, Rational) {
    let mut best: Option<(usize, Rational)> = None;
    for (i, t) in types.iter().enumerate() {
        let c = t.cost_unchecked(load);
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((i, c));
        }
    }
    best.expect("at least one type")
}

/// A job with a machine of its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dedicated {
    pub job: usize,
    pub type_index: usize,
    pub cost: Rational,
}

/// Largest load a capped machine may carry, `c_max / eps`.
pub fn load_cap(types: &[MachineSpec], eps: Epsilon) -> Rational {
    let c = types.iter().map(|t| &t.capacity).max().cloned().unwrap_or_else(Rational::zero);
    c * eps.inverse_rational()
}

/// Splits off jobs above the load cap, each on its cheapest type. Returns
/// the remaining job ids (input order) and the dedicated machines.
pub fn dedicate_huge(typed: &TypedInstance, eps: Epsilon) -> (Vec<usize>, Vec<Dedicated>) {
    let cap = load_cap(&typed.types, eps);
    let mut rest = Vec::new();
    let mut dedicated = Vec::new();
    for (j, p) in typed.jobs.iter().enumerate() {
        if p > &cap {
            let (type_index, cost) = cheapest_type(&typed.types, p);
            dedicated.push(Dedicated { job: j, type_index, cost });
        } else {
            rest.push(j);
        }
    }
    (rest, dedicated)
}

/// Bin cost `pi(x) = min_i cost_i(x * c_max / eps)` for `x` in `[0, 1]`.
pub fn pi_eval(types: &[MachineSpec], eps: Epsilon, x: &Rational) -> Result<Rational, VariantError> {
    if x.is_negative() || x > &Rational::one() {
        return Err(VariantError::Domain(format_rational(x)));
    }
    let load = x * load_cap(types, eps);
    Ok(cheapest_type(types, &load).1)
}

/// Largest `x` in `[0, 1]` with `pi(x) <= y`, or `None` when every type
/// costs more than `y` even when empty.
pub fn pi_inverse(types: &[MachineSpec], eps: Epsilon, y: &Rational) -> Option<Rational> {
    let cap = load_cap(types, eps);
    types
        .iter()
        .filter(|t| &t.fixed_cost <= y)
        .map(|t| {
            if &t.cost_unchecked(&cap) <= y {
                Rational::one()
            } else {
                (&t.capacity + (y - &t.fixed_cost) / &t.overtime_rate) / &cap
            }
        })
        .max()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Job ids per resulting machine; dedicated machines come first.
    pub machines: Vec<Vec<usize>>,
    pub dedicated: usize,
    /// Whether the input violated the structure (a job of at least
    /// `c / eps`, or a load above `c / eps`).
    pub modified: bool,
}

/// Restructures one machine of type `machine`: jobs of size at least
/// `c / eps` get machines of their own, and if the rest still exceeds
/// `c / eps` it is packed next-fit (input order) into machines of that load.
pub fn split_machine_load(machine: &MachineSpec, jobs: &[(usize, Rational)], eps: Epsilon) -> Split {
    let cap = &machine.capacity * eps.inverse_rational();
    let total = jobs.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
    let mut machines: Vec<Vec<usize>> = Vec::new();
    let mut rest: Vec<(usize, Rational)> = Vec::new();
    for (j, p) in jobs {
        if p >= &cap {
            machines.push(vec![*j]);
        } else {
            rest.push((*j, p.clone()));
        }
    }
    let dedicated = machines.len();
    let modified = dedicated > 0 || total > cap;
    let rest_total = rest.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
    if rest_total <= cap {
        if !rest.is_empty() {
            machines.push(rest.iter().map(|(j, _)| *j).collect());
        }
    } else {
        let mut open: Vec<usize> = Vec::new();
        let mut load = Rational::zero();
        for (j, p) in rest {
            if &load + &p > cap {
                machines.push(std::mem::take(&mut open));
                load = Rational::zero();
            }
            load += p;
            open.push(j);
        }
        machines.push(open);
    }
    Split {
        machines,
        dedicated,
        modified,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BpucMode {
    /// Optimal partition by dynamic programming over item subsets.
    #[default]
    Exact,
    /// Largest item first, into the bin where the cost grows least.
    Greedy,
}

/// Items in `(0, 1]` packed into unit bins that cost `pi(total)` each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpucInstance {
    pub items: Vec<Rational>,
    pub types: Vec<MachineSpec>,
    pub eps: Epsilon,
}

impl BpucInstance {
    pub fn pi(&self, x: &Rational) -> Rational {
        pi_eval(&self.types, self.eps, x).expect("bin load within [0, 1]")
    }

    pub fn bin_load(&self, bin: &[usize]) -> Rational {
        bin.iter().fold(Rational::zero(), |acc, &k| acc + &self.items[k])
    }

    pub fn cost(&self, bins: &[Vec<usize>]) -> Rational {
        bins.iter().fold(Rational::zero(), |acc, b| acc + self.pi(&self.bin_load(b)))
    }

    /// Whether `bins` partitions the items into bins of load at most 1.
    pub fn check(&self, bins: &[Vec<usize>]) -> bool {
        let mut seen = vec![false; self.items.len()];
        for b in bins {
            for &k in b {
                if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
                    return false;
                }
            }
            if self.bin_load(b) > Rational::one() {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn solve_bpuc(bpuc: &BpucInstance, mode: BpucMode) -> Result<Vec<Vec<usize>>, VariantError> {
    if let Some(p) = bpuc.items.iter().find(|s| !s.is_positive() || *s > &Rational::one()) {
        return Err(VariantError::Domain(format_rational(p)));
    }
    match mode {
        BpucMode::Exact => bpuc_exact(bpuc),
        BpucMode::Greedy => Ok(bpuc_greedy(bpuc)),
    }
}

fn bpuc_exact(bpuc: &BpucInstance) -> Result<Vec<Vec<usize>>, VariantError> {
    let n = bpuc.items.len();
    if n > EXACT_ITEM_LIMIT {
        return Err(VariantError::Budget {
            items: n,
            limit: EXACT_ITEM_LIMIT,
        });
    }
    let full = (1usize << n) - 1;
    let one = Rational::one();
    let mut load = vec![Rational::zero(); full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        load[mask] = &load[mask & (mask - 1)] + &bpuc.items[low];
    }
    let bin_cost: Vec<Option<Rational>> = load.iter().map(|l| (l <= &one).then(|| bpuc.pi(l))).collect();
    let mut best: Vec<Option<Rational>> = vec![None; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = Some(Rational::zero());
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // every sub-mask of `mask` that contains its lowest item
        let mut sub = rest;
        loop {
            let bin = sub | low;
            if let (Some(c), Some(r)) = (&bin_cost[bin], &best[mask ^ bin]) {
                let total = c + r;
                if best[mask].as_ref().is_none_or(|b| &total < b) {
                    best[mask] = Some(total);
                    choice[mask] = bin;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut bins = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let bin = choice[mask];
        bins.push((0..n).filter(|k| bin >> k & 1 == 1).collect());
        mask ^= bin;
    }
    Ok(bins)
}

fn bpuc_greedy(bpuc: &BpucInstance) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..bpuc.items.len()).collect();
    order.sort_by(|&a, &b| bpuc.items[b].cmp(&bpuc.items[a]));
    let one = Rational::one();
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut loads: Vec<Rational> = Vec::new();
    for k in order {
        let s = &bpuc.items[k];
        let mut best: (Option<usize>, Rational) = (None, bpuc.pi(s));
        for (b, l) in loads.iter().enumerate() {
            let next = l + s;
            if next > one {
                continue;
            }
            let delta = bpuc.pi(&next) - bpuc.pi(l);
            if delta <= best.1 && (best.0.is_none() || delta < best.1) {
                best = (Some(b), delta);
            }
        }
        match best.0 {
            Some(b) => {
                loads[b] += s;
                bins[b].push(k);
            }
            None => {
                loads.push(s.clone());
                bins.push(vec![k]);
            }
        }
    }
    bins
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenedMachine {
    pub type_index: usize,
    pub jobs: Vec<usize>,
    pub dedicated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedSolution {
    pub machines: Vec<OpenedMachine>,
    /// Cost in the units of the input.
    pub cost: Rational,
    /// Cost after normalization.
    pub normalized_cost: Rational,
    /// Bin packing cost of the partition plus the dedicated machines, after normalization.
    pub bpuc_cost: Rational,
    pub scale: VariantScale,
}

/// Cost of opened machines on `typed`; each machine pays for its own type.
pub fn typed_cost(typed: &TypedInstance, machines: &[OpenedMachine]) -> Rational {
    machines.iter().fold(Rational::zero(), |acc, m| {
        let load = m.jobs.iter().fold(Rational::zero(), |a, &j| a + &typed.jobs[j]);
        acc + typed.types[m.type_index].cost_unchecked(&load)
    })
}

pub fn prc_solve(typed: &TypedInstance, eps: Epsilon, mode: BpucMode) -> Result<TypedSolution, VariantError> {
    typed.validate()?;
    let (norm, scale) = normalize_variant(typed);
    let (rest, dedicated) = dedicate_huge(&norm, eps);
    let cap = load_cap(&norm.types, eps);
    let (item_jobs, zero_jobs): (Vec<usize>, Vec<usize>) = rest.into_iter().partition(|&j| norm.jobs[j].is_positive());
    let bpuc = BpucInstance {
        items: item_jobs.iter().map(|&j| &norm.jobs[j] / &cap).collect(),
        types: norm.types.clone(),
        eps,
    };
    let bins = solve_bpuc(&bpuc, mode)?;
    let mut bpuc_cost = bpuc.cost(&bins);
    let mut machines: Vec<OpenedMachine> = Vec::new();
    for bin in &bins {
        let load = bin.iter().fold(Rational::zero(), |acc, &k| acc + &norm.jobs[item_jobs[k]]);
        let (type_index, _) = cheapest_type(&norm.types, &load);
        machines.push(OpenedMachine {
            type_index,
            jobs: bin.iter().map(|&k| item_jobs[k]).collect(),
            dedicated: false,
        });
    }
    for d in &dedicated {
        bpuc_cost += &d.cost;
        machines.push(OpenedMachine {
            type_index: d.type_index,
            jobs: vec![d.job],
            dedicated: true,
        });
    }
    if !zero_jobs.is_empty() {
        match machines.first_mut() {
            Some(m) => m.jobs.extend(&zero_jobs),
            None => {
                let (type_index, c) = cheapest_type(&norm.types, &Rational::zero());
                bpuc_cost += c;
                machines.push(OpenedMachine {
                    type_index,
                    jobs: zero_jobs,
                    dedicated: false,
                });
            }
        }
    }
    let normalized_cost = typed_cost(&norm, &machines);
    let cost = typed_cost(typed, &machines);
    Ok(TypedSolution {
        machines,
        cost,
        normalized_cost,
        bpuc_cost,
        scale,
    })
}

/// The bin packing partition of a capped solution: one bin per
/// non-dedicated machine, items indexed like the positive residual jobs.
/// Returns `None` when a non-dedicated machine exceeds the load cap.
pub fn to_bpuc_partition(norm: &TypedInstance, eps: Epsilon, machines: &[OpenedMachine]) -> Option<(BpucInstance, Vec<Vec<usize>>)> {
    let cap = load_cap(&norm.types, eps);
    let mut index = vec![None; norm.jobs.len()];
    let mut items = Vec::new();
    for m in machines.iter().filter(|m| !m.dedicated) {
        for &j in &m.jobs {
            if norm.jobs[j].is_positive() {
                index[j] = Some(items.len());
                items.push(&norm.jobs[j] / &cap);
            }
        }
    }
    let bpuc = BpucInstance {
        items,
        types: norm.types.clone(),
        eps,
    };
    let bins: Vec<Vec<usize>> = machines
        .iter()
        .filter(|m| !m.dedicated)
        .map(|m| m.jobs.iter().filter_map(|&j| index[j]).collect())
        .collect();
    bins.iter().all(|b| bpuc.bin_load(b) <= Rational::one()).then_some((bpuc, bins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn eps2() -> Epsilon {
        Epsilon::new(2).unwrap()
    }

    fn unit() -> MachineSpec {
        MachineSpec::new(int(1), int(1), int(1))
    }

    #[test]
    fn normalization_example() {
        let typed = TypedInstance::new(vec![MachineSpec::new(int(4), int(2), int(2))], vec![int(2)]);
        let (norm, scale) = normalize_variant(&typed);
        assert_eq!(norm.types, vec![unit()]);
        assert_eq!(norm.jobs, vec![int(1)]);
        assert_eq!(scale.cost_scale, int(4));
        assert_eq!(scale.size_scale, ratio(1, 2));
        assert_eq!(scale.restore(&norm), typed);
        let (again, s2) = normalize_variant(&norm);
        assert_eq!(again, norm);
        assert_eq!((s2.cost_scale, s2.size_scale), (int(1), int(1)));
    }

    #[test]
    fn dedication_examples() {
        let typed = TypedInstance::new(vec![unit()], vec![int(3), int(2)]);
        let (rest, ded) = dedicate_huge(&typed, eps2());
        assert_eq!(rest, vec![1]);
        assert_eq!(ded, vec![Dedicated { job: 0, type_index: 0, cost: int(3) }]);
        assert_eq!(cheapest_type(&[unit(), MachineSpec::new(int(4), int(2), int(2))], &int(3)), (0, int(3)));
    }

    #[test]
    fn pi_examples() {
        let t = [unit()];
        assert_eq!(pi_eval(&t, eps2(), &ratio(2, 5)).unwrap(), int(1));
        assert_eq!(pi_eval(&t, eps2(), &int(1)).unwrap(), int(2));
        assert_eq!(pi_inverse(&t, eps2(), &ratio(3, 2)), Some(ratio(3, 4)));
        assert_eq!(pi_inverse(&t, eps2(), &ratio(1, 2)), None);
        assert_eq!(pi_inverse(&t, eps2(), &int(5)), Some(int(1)));
        assert!(matches!(pi_eval(&t, eps2(), &ratio(3, 2)), Err(VariantError::Domain(_))));
    }

    #[test]
    fn split_examples() {
        let s = split_machine_load(&unit(), &[(0, int(3)), (1, ratio(1, 2))], eps2());
        assert_eq!(s.machines, vec![vec![0], vec![1]]);
        assert!(s.modified);
        let s = split_machine_load(&unit(), &[(0, ratio(1, 2))], eps2());
        assert_eq!(s.machines, vec![vec![0]]);
        assert!(!s.modified);
        let five: Vec<_> = (0..5).map(|j| (j, int(1))).collect();
        let s = split_machine_load(&unit(), &five, eps2());
        assert_eq!(s.machines, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(s.dedicated, 0);
    }

    #[test]
    fn bpuc_examples() {
        let b = BpucInstance { items: vec![int(1)], types: vec![unit()], eps: eps2() };
        let bins = solve_bpuc(&b, BpucMode::Exact).unwrap();
        assert_eq!(bins, vec![vec![0]]);
        assert_eq!(b.cost(&bins), int(2));
        let b = BpucInstance {
            items: vec![ratio(3, 5), ratio(3, 5)],
            types: vec![unit()],
            eps: eps2(),
        };
        for mode in [BpucMode::Exact, BpucMode::Greedy] {
            let bins = solve_bpuc(&b, mode).unwrap();
            assert_eq!(bins.len(), 2);
            assert!(b.check(&bins));
            assert_eq!(b.cost(&bins), int(2) * b.pi(&ratio(3, 5)));
        }
    }

    #[test]
    fn prc_examples() {
        let s = prc_solve(&TypedInstance::new(vec![unit()], vec![int(3)]), eps2(), BpucMode::Exact).unwrap();
        assert_eq!(s.cost, int(3));
        assert_eq!(s.machines.len(), 1);
        assert!(s.machines[0].dedicated);
        let empty = prc_solve(&TypedInstance::new(vec![unit()], vec![]), eps2(), BpucMode::Greedy).unwrap();
        assert_eq!(empty.cost, int(0));
        assert!(empty.machines.is_empty());
        let zeros = prc_solve(&TypedInstance::new(vec![unit()], vec![int(0)]), eps2(), BpucMode::Exact).unwrap();
        assert_eq!(zeros.cost, int(1));
        assert_eq!(zeros.bpuc_cost, zeros.normalized_cost);
    }

    #[test]
    fn round_trip_partition() {
        let typed = TypedInstance::new(
            vec![unit(), MachineSpec::new(int(3), int(3), int(1))],
            vec![ratio(1, 2), int(2), ratio(3, 2), int(7)],
        );
        let s = prc_solve(&typed, eps2(), BpucMode::Exact).unwrap();
        assert_eq!(s.bpuc_cost, s.normalized_cost);
        assert_eq!(s.scale.restore_cost(&s.normalized_cost), s.cost);
        let (norm, _) = normalize_variant(&typed);
        let (bpuc, bins) = to_bpuc_partition(&norm, eps2(), &s.machines).unwrap();
        assert!(bpuc.check(&bins));
        let dedicated: Rational = s
            .machines
            .iter()
            .filter(|m| m.dedicated)
            .fold(Rational::zero(), |a, m| a + typed_cost(&norm, std::slice::from_ref(m)));
        assert_eq!(bpuc.cost(&bins) + dedicated, s.normalized_cost);
    }
}
