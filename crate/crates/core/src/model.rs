//! Machines, instances, assignments and the piecewise-linear machine cost.
//!
//! A machine has a fixed cost `f`, a standard capacity `c` and an overtime
//! rate `sigma`, tied together by `f = c * sigma`. Loading it with `L` costs
//! `f` while `L <= c` and `f + sigma * (L - c)` beyond that. An empty machine
//! still pays `f`.

use std::fmt;

use num::{Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("negative load {0}")]
    NegativeLoad(String),
    #[error("job {job} is assigned to machine {machine}, but there are only {machines} machines")]
    MachineOutOfRange {
        job: usize,
        machine: usize,
        machines: usize,
    },
    #[error("assignment covers {got} jobs, instance has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("epsilon must be 1/E for an integer E >= 2, got E = {0}")]
    InvalidEpsilon(u64),
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineSpec {
    pub fixed_cost: Rational,
    pub capacity: Rational,
    pub overtime_rate: Rational,
}

impl MachineSpec {
    /// Builds a machine from all three parameters without checking them;
    /// use [`validate_instance`] to audit.
    pub fn new(fixed_cost: Rational, capacity: Rational, overtime_rate: Rational) -> Self {
        Self {
            fixed_cost,
            capacity,
            overtime_rate,
        }
    }

    /// Builds a machine whose fixed cost is `capacity * overtime_rate`.
    pub fn with_rate(capacity: Rational, overtime_rate: Rational) -> Self {
        let fixed_cost = &capacity * &overtime_rate;
        Self::new(fixed_cost, capacity, overtime_rate)
    }

    pub fn cost(&self, load: &Rational) -> Result<Rational, ModelError> {
        machine_cost(self, load)
    }

    /// Cost for a load already known to be nonnegative.
    pub(crate) fn cost_unchecked(&self, load: &Rational) -> Rational {
        if load <= &self.capacity {
            self.fixed_cost.clone()
        } else {
            &self.fixed_cost + &self.overtime_rate * (load - &self.capacity)
        }
    }
}

impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(f={}, c={}, sigma={})",
            self.fixed_cost, self.capacity, self.overtime_rate
        )
    }
}

pub fn machine_cost(machine: &MachineSpec, load: &Rational) -> Result<Rational, ModelError> {
    if load.is_negative() {
        return Err(ModelError::NegativeLoad(format_rational(load)));
    }
    Ok(machine.cost_unchecked(load))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub machines: Vec<MachineSpec>,
    pub jobs: Vec<Rational>,
}

impl Instance {
    pub fn new(machines: Vec<MachineSpec>, jobs: Vec<Rational>) -> Self {
        Self { machines, jobs }
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn total_fixed_cost(&self) -> Rational {
        self.machines
            .iter()
            .fold(Rational::zero(), |acc, m| acc + &m.fixed_cost)
    }

    /// Per-machine loads of an assignment. The assignment must already be
    /// valid for this instance.
    pub fn loads(&self, assignment: &Assignment) -> Result<Vec<Rational>, ModelError> {
        assignment.check(self)?;
        let mut loads = vec![Rational::zero(); self.machines.len()];
        for (job, &machine) in assignment.target.iter().enumerate() {
            loads[machine] += &self.jobs[job];
        }
        Ok(loads)
    }
}

/// Maps each job to a machine index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub target: Vec<usize>,
}

impl Assignment {
    pub fn new(target: Vec<usize>) -> Self {
        Self { target }
    }

    pub fn check(&self, instance: &Instance) -> Result<(), ModelError> {
        if self.target.len() != instance.jobs.len() {
            return Err(ModelError::LengthMismatch {
                expected: instance.jobs.len(),
                got: self.target.len(),
            });
        }
        let machines = instance.machines.len();
        if let Some((job, &machine)) = self
            .target
            .iter()
            .enumerate()
            .find(|(_, &m)| m >= machines)
        {
            return Err(ModelError::MachineOutOfRange {
                job,
                machine,
                machines,
            });
        }
        Ok(())
    }
}

/// Total cost over all machines, empty ones included.
pub fn solution_cost(instance: &Instance, assignment: &Assignment) -> Result<Rational, ModelError> {
    let loads = instance.loads(assignment)?;
    instance
        .machines
        .iter()
        .zip(&loads)
        .map(|(m, load)| machine_cost(m, load))
        .sum()
}

/// The accuracy parameter, stored as its integral inverse `E = 1/eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Epsilon {
    inverse: u64,
}

impl Epsilon {
    pub fn new(inverse: u64) -> Result<Self, ModelError> {
        if inverse < 2 {
            return Err(ModelError::InvalidEpsilon(inverse));
        }
        Ok(Self { inverse })
    }

    /// Accepts a rational `1/E`.
    pub fn from_rational(value: &Rational) -> Result<Self, ModelError> {
        let inv = value.recip();
        if !value.is_positive() || !inv.is_integer() {
            return Err(ModelError::InvalidEpsilon(0));
        }
        let e: u64 = num::ToPrimitive::to_u64(&inv.to_integer()).ok_or(ModelError::InvalidEpsilon(0))?;
        Self::new(e)
    }

    pub fn inverse(&self) -> u64 {
        self.inverse
    }

    pub fn value(&self) -> Rational {
        Rational::new(1.into(), self.inverse.into())
    }

    /// `1/eps` as a rational.
    pub fn inverse_rational(&self) -> Rational {
        Rational::from_integer(self.inverse.into())
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.inverse)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveParameter { machine: usize },
    CostIdentity { machine: usize },
    NegativeJob { job: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveParameter { machine } => {
                write!(f, "machine {machine}: f, c and sigma must be positive")
            }
            Violation::CostIdentity { machine } => {
                write!(f, "machine {machine}: fixed cost differs from capacity * rate")
            }
            Violation::NegativeJob { job } => write!(f, "job {job}: negative size"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), ModelError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(ModelError::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_machines(machines: &[MachineSpec]) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, m) in machines.iter().enumerate() {
        if !(m.fixed_cost.is_positive() && m.capacity.is_positive() && m.overtime_rate.is_positive())
        {
            violations.push(Violation::NonPositiveParameter { machine: i });
        }
        if m.fixed_cost != &m.capacity * &m.overtime_rate {
            violations.push(Violation::CostIdentity { machine: i });
        }
    }
    ValidationReport { violations }
}

pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut report = validate_machines(&instance.machines);
    report.violations.extend(
        instance
            .jobs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_negative())
            .map(|(job, _)| Violation::NegativeJob { job }),
    );
    report
}

/// Which of the classical special cases an instance falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceClass {
    /// Every machine is `(1, 1, 1)`.
    Ebp,
    /// Unequal bin sizes: `sigma = 1` and `f = c` everywhere.
    Ubs,
    General,
}

impl InstanceClass {
    pub fn of(machines: &[MachineSpec]) -> Self {
        let one = crate::rational::one();
        if machines
            .iter()
            .all(|m| m.fixed_cost == one && m.capacity == one && m.overtime_rate == one)
        {
            InstanceClass::Ebp
        } else if machines
            .iter()
            .all(|m| m.overtime_rate == one && m.fixed_cost == m.capacity)
        {
            InstanceClass::Ubs
        } else {
            InstanceClass::General
        }
    }
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceClass::Ebp => "ebp",
            InstanceClass::Ubs => "ubs",
            InstanceClass::General => "general",
        })
    }
}
