//! Normalization steps applied before the approximation scheme runs:
//! rescaling so the smallest overtime rate is 1, geometric rounding of job
//! sizes, and sorting machines by capacity.

use num::{Signed, Zero};

use crate::model::{Epsilon, Instance, MachineSpec};
use crate::rational::{pow, Rational};

/// Record of a rate normalization; [`ScaleRecord::restore`] undoes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleRecord {
    /// The smallest overtime rate of the input, which every rate was divided by.
    pub sigma_scale: Rational,
}

impl ScaleRecord {
    pub fn restore(&self, instance: &Instance) -> Instance {
        let s = &self.sigma_scale;
        Instance {
            machines: instance
                .machines
                .iter()
                .map(|m| MachineSpec::new(m.fixed_cost.clone(), &m.capacity / s, &m.overtime_rate * s))
                .collect(),
            jobs: instance.jobs.iter().map(|p| p / s).collect(),
        }
    }
}

/// Rescales so that the smallest overtime rate becomes 1.
///
/// Capacities and job sizes are multiplied by `s = min sigma`, rates divided
/// by it. Fixed costs are untouched and the cost of every assignment is
/// preserved exactly.
pub fn normalize_sigma(instance: &Instance) -> (Instance, ScaleRecord) {
    let scale = instance
        .machines
        .iter()
        .map(|m| &m.overtime_rate)
        .min()
        .cloned()
        .unwrap_or_else(crate::rational::one);
    let scaled = Instance {
        machines: instance
            .machines
            .iter()
            .map(|m| {
                MachineSpec::new(m.fixed_cost.clone(), &m.capacity * &scale, &m.overtime_rate / &scale)
            })
            .collect(),
        jobs: instance.jobs.iter().map(|p| p * &scale).collect(),
    };
    (scaled, ScaleRecord { sigma_scale: scale })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundedJob {
    pub original: Rational,
    /// Magnitude class: `original` lies in `[E^tau, E^(tau+1))`. `None` for
    /// zero-size jobs, which are never rounded.
    pub tau: Option<i64>,
    pub rounded: Rational,
}

/// The unique `tau` with `base^tau <= value < base^(tau+1)`, found by exact
/// comparisons. `value` must be positive and `base > 1`.
pub fn magnitude_class(value: &Rational, base: &Rational) -> i64 {
    debug_assert!(value.is_positive());
    let mut tau = 0i64;
    let mut low = crate::rational::one();
    if value >= &low {
        let mut high = &low * base;
        while value >= &high {
            tau += 1;
            low = high;
            high = &low * base;
        }
    } else {
        while value < &low {
            tau -= 1;
            low = &low / base;
        }
    }
    tau
}

pub fn round_job(size: &Rational, eps: Epsilon) -> RoundedJob {
    if size.is_zero() {
        return RoundedJob {
            original: size.clone(),
            tau: None,
            rounded: size.clone(),
        };
    }
    let base = eps.inverse_rational();
    let tau = magnitude_class(size, &base);
    let grid = pow(&base, tau - 1);
    let rounded = (size / &grid).ceil() * &grid;
    RoundedJob {
        original: size.clone(),
        tau: Some(tau),
        rounded,
    }
}

/// Rounds every job up onto the grid `E^(tau-1)` of its magnitude class.
pub fn round_jobs(instance: &Instance, eps: Epsilon) -> (Instance, Vec<RoundedJob>) {
    let rounded: Vec<RoundedJob> = instance.jobs.iter().map(|p| round_job(p, eps)).collect();
    let inst = Instance {
        machines: instance.machines.clone(),
        jobs: rounded.iter().map(|r| r.rounded.clone()).collect(),
    };
    (inst, rounded)
}

/// `order[k]` is the original index of the machine at sorted position `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    pub order: Vec<usize>,
}

impl Permutation {
    /// Translates a sorted-position machine index back to the original one.
    pub fn original(&self, sorted_index: usize) -> usize {
        self.order[sorted_index]
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(k, &i)| k == i)
    }
}

/// Stable sort by non-increasing capacity.
pub fn sort_machines(instance: &Instance) -> (Instance, Permutation) {
    let mut order: Vec<usize> = (0..instance.machines.len()).collect();
    order.sort_by(|&a, &b| instance.machines[b].capacity.cmp(&instance.machines[a].capacity));
    let inst = Instance {
        machines: order.iter().map(|&i| instance.machines[i].clone()).collect(),
        jobs: instance.jobs.clone(),
    };
    (inst, Permutation { order })
}
