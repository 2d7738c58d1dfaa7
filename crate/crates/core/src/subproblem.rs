//! Per-block subproblem: place the block's large jobs and a given amount of
//! sand on the block's machines, leaving at most a slack budget unplaced.
//!
//! Sand comes in equal pieces of size `eps * c_last` (the block's smallest
//! capacity times eps), so it can be treated as extra "dummy" jobs. Every
//! machine carries a configuration (a count per distinct size) whose load is
//! at most `c_first / eps`. The choice of configurations is an n-fold
//! program solved exactly by [`crate::nfold`].

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{Epsilon, MachineSpec};
use crate::nfold::{self, Brick, Column, NfoldError, NfoldProgram, NfoldSolution, SolveOptions};
use crate::rational::{exact_quotient, format_rational, pow, Rational};

pub const DEFAULT_CONFIG_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuxError {
    #[error("subproblem is infeasible")]
    Infeasible,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("more than {0} configurations; use a larger eps or a smaller instance")]
    ConfigBudget(usize),
    #[error("slack-row coefficient does not fit the integer grid: {0}")]
    GridViolation(String),
    #[error(transparent)]
    Nfold(NfoldError),
}

impl From<NfoldError> for AuxError {
    fn from(e: NfoldError) -> Self {
        match e {
            NfoldError::Infeasible => AuxError::Infeasible,
            other => AuxError::Nfold(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxProblem {
    pub block: usize,
    /// Machines of the block, non-increasing capacity.
    pub machines: Vec<MachineSpec>,
    /// Large jobs as `(job id, size)`.
    pub jobs: Vec<(usize, Rational)>,
    /// Total sand `phi`.
    pub sand: Rational,
    /// Slack budget `psi`.
    pub slack: Rational,
    pub eps: Epsilon,
    /// Number of jobs of the whole instance; bounds the unassigned counts.
    pub total_jobs: usize,
}

impl AuxProblem {
    /// Size of one sand piece, `eps * c_last`.
    pub fn grain(&self) -> Rational {
        self.machines.last().map(|m| &m.capacity * self.eps.value()).unwrap_or_else(Rational::zero)
    }

    /// Per-machine load cap and slack granularity, `c_first / eps`.
    pub fn cap(&self) -> Rational {
        self.machines
            .first()
            .map(|m| &m.capacity * self.eps.inverse_rational())
            .unwrap_or_else(Rational::zero)
    }

    pub fn dummy_count(&self) -> Option<i64> {
        exact_quotient(&self.sand, &self.grain()).and_then(|q| q.to_i64())
    }

    /// Checks the grid and size preconditions.
    pub fn validate(&self) -> Result<(), AuxError> {
        let fail = |msg: String| Err(AuxError::Precondition(msg));
        if self.machines.is_empty() {
            return fail("block has no machines".into());
        }
        if self.machines.windows(2).any(|w| w[0].capacity < w[1].capacity) {
            return fail("machines are not sorted by capacity".into());
        }
        let grain = self.grain();
        let cap = self.cap();
        if self.sand.is_negative() || exact_quotient(&self.sand, &grain).is_none() {
            return fail(format!(
                "sand {} is not a multiple of {}",
                format_rational(&self.sand),
                format_rational(&grain)
            ));
        }
        if self.slack.is_negative() || exact_quotient(&self.slack, &cap).is_none() {
            return fail(format!(
                "slack {} is not a multiple of {}",
                format_rational(&self.slack),
                format_rational(&cap)
            ));
        }
        if let Some((id, p)) = self.jobs.iter().find(|(_, p)| p <= &grain || p > &cap) {
            return fail(format!(
                "job {id} of size {} is outside ({}, {}]",
                format_rational(p),
                format_rational(&grain),
                format_rational(&cap)
            ));
        }
        Ok(())
    }
}

/// Distinct sizes of the subproblem (sand pieces included) with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeCatalog {
    /// Ascending distinct sizes.
    pub sizes: Vec<Rational>,
    pub counts: Vec<i64>,
    /// Job ids per size, ascending; empty for the sand size.
    pub members: Vec<Vec<usize>>,
    /// Index of the sand size, if there is any sand.
    pub dummy: Option<usize>,
}

impl SizeCatalog {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

pub fn build_catalog(problem: &AuxProblem) -> Result<SizeCatalog, AuxError> {
    let dummies = problem.dummy_count().ok_or_else(|| {
        AuxError::Precondition(format!(
            "sand {} is not an integral number of pieces",
            format_rational(&problem.sand)
        ))
    })?;
    if dummies < 0 {
        return Err(AuxError::Precondition("negative sand".into()));
    }
    let mut by_size: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    for (id, p) in &problem.jobs {
        by_size.entry(p.clone()).or_default().push(*id);
    }
    let grain = problem.grain();
    if dummies > 0 {
        if by_size.contains_key(&grain) {
            return Err(AuxError::Precondition("a large job has the sand piece size".into()));
        }
        by_size.insert(grain.clone(), Vec::new());
    }
    let mut catalog = SizeCatalog {
        sizes: Vec::new(),
        counts: Vec::new(),
        members: Vec::new(),
        dummy: None,
    };
    for (size, mut ids) in by_size {
        ids.sort_unstable();
        if dummies > 0 && size == grain {
            catalog.dummy = Some(catalog.sizes.len());
            catalog.counts.push(dummies);
        } else {
            catalog.counts.push(ids.len() as i64);
        }
        catalog.sizes.push(size);
        catalog.members.push(ids);
    }
    if let Some(&n) = catalog.counts.iter().max() {
        if n as usize > problem.total_jobs.max(problem.jobs.len()) {
            return Err(AuxError::Precondition(format!(
                "{n} items of one size exceed the job count {}",
                problem.total_jobs
            )));
        }
    }
    Ok(catalog)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub counts: Vec<i64>,
    pub load: Rational,
}

impl Configuration {
    pub fn cost(&self, machine: &MachineSpec) -> Rational {
        machine.cost_unchecked(&self.load)
    }
}

/// Every count vector within the catalog multiplicities whose load is at
/// most `cap`, the empty one first.
pub fn enumerate_configurations(
    catalog: &SizeCatalog,
    cap: &Rational,
    limit: usize,
) -> Result<Vec<Configuration>, AuxError> {
    let k = catalog.len();
    let mut out = Vec::new();
    let mut counts = vec![0i64; k];
    let mut load = Rational::zero();
    loop {
        out.push(Configuration {
            counts: counts.clone(),
            load: load.clone(),
        });
        if out.len() > limit {
            return Err(AuxError::ConfigBudget(limit));
        }
        // Odometer step, first size varying fastest; skip vectors over the cap.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            let next_load = &load + &catalog.sizes[pos];
            if counts[pos] < catalog.counts[pos] && &next_load <= cap {
                counts[pos] += 1;
                load = next_load;
                break;
            }
            load -= &catalog.sizes[pos] * Rational::from_integer(counts[pos].into());
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// Upper bound `(1/eps)^(7/eps)` on constraint-matrix entries for grid-aligned sizes.
pub fn matrix_entry_bound(eps: Epsilon) -> Rational {
    pow(&eps.inverse_rational(), 7 * eps.inverse() as i64)
}

/// Builds the configuration program: one brick per machine, one demand row
/// per size, and a slack row `sum (p / grain) y_p <= psi / grain` scaled by
/// the common denominator so that all coefficients are integers.
pub fn build_program(
    problem: &AuxProblem,
    catalog: &SizeCatalog,
    configurations: &[Configuration],
) -> Result<NfoldProgram, AuxError> {
    let grain = problem.grain();
    let weights: Vec<Rational> = catalog.sizes.iter().map(|p| p / &grain).collect();
    let rhs = &problem.slack / &grain;
    let mut denom = BigInt::one();
    for w in weights.iter().chain(std::iter::once(&rhs)) {
        denom = denom.lcm(w.denom());
    }
    let scale = Rational::from_integer(denom);
    let to_int = |v: &Rational| -> Result<i64, AuxError> {
        let scaled = v * &scale;
        if !scaled.is_integer() {
            return Err(AuxError::GridViolation(format_rational(v)));
        }
        scaled
            .to_integer()
            .to_i64()
            .ok_or_else(|| AuxError::GridViolation(format_rational(&scaled)))
    };
    let slack_weights = weights.iter().map(to_int).collect::<Result<Vec<_>, _>>()?;
    let slack_rhs = to_int(&rhs)?;
    let bricks = problem
        .machines
        .iter()
        .map(|m| Brick {
            columns: configurations
                .iter()
                .map(|c| Column {
                    entries: c.counts.clone(),
                    cost: c.cost(m),
                })
                .collect(),
        })
        .collect();
    Ok(NfoldProgram {
        demands: catalog.counts.clone(),
        slack_weights,
        slack_rhs,
        y_upper: problem.total_jobs as i64,
        bricks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Exact,
    /// Local search started from the first feasible configuration choice.
    Augmentation,
}

#[derive(Clone, Copy, Debug)]
pub struct AuxOptions {
    pub config_limit: usize,
    pub nfold: SolveOptions,
    pub engine: Engine,
}

impl Default for AuxOptions {
    fn default() -> Self {
        Self {
            config_limit: DEFAULT_CONFIG_LIMIT,
            nfold: SolveOptions::default(),
            engine: Engine::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxSolution {
    /// Machine position within the block for each large job, `None` when
    /// left unplaced. Same order as [`AuxProblem::jobs`].
    pub job_targets: Vec<(usize, Option<usize>)>,
    /// Sand volume per machine position.
    pub sand: Vec<Rational>,
    /// Jobs plus sand per machine position.
    pub loads: Vec<Rational>,
    pub cost: Rational,
}

impl AuxSolution {
    pub fn unplaced_job_mass(&self, problem: &AuxProblem) -> Rational {
        self.job_targets
            .iter()
            .zip(&problem.jobs)
            .filter(|((_, t), _)| t.is_none())
            .fold(Rational::zero(), |acc, (_, (_, p))| acc + p)
    }

    pub fn placed_sand(&self) -> Rational {
        self.sand.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Checks both volume inequalities, the load cap, the sand grid and the
    /// recorded cost.
    pub fn check(&self, problem: &AuxProblem) -> Result<(), String> {
        let m = problem.machines.len();
        if self.sand.len() != m || self.loads.len() != m || self.job_targets.len() != problem.jobs.len() {
            return Err("shape mismatch".into());
        }
        let grain = problem.grain();
        let mut loads = self.sand.clone();
        for (v, _) in self.sand.iter().zip(&problem.machines) {
            if v.is_negative() || exact_quotient(v, &grain).is_none() {
                return Err(format!("sand volume {} off the grid", format_rational(v)));
            }
        }
        for ((id, target), (pid, p)) in self.job_targets.iter().zip(&problem.jobs) {
            if id != pid {
                return Err("job order mismatch".into());
            }
            if let Some(i) = target {
                if *i >= m {
                    return Err(format!("job {id} on missing machine {i}"));
                }
                loads[*i] += p;
            }
        }
        if loads != self.loads {
            return Err("recorded loads disagree".into());
        }
        let cap = problem.cap();
        if loads.iter().any(|l| l > &cap) {
            return Err("machine over the load cap".into());
        }
        let placed = self.placed_sand();
        if placed > problem.sand {
            return Err("more sand placed than available".into());
        }
        if &problem.sand - &placed + self.unplaced_job_mass(problem) > problem.slack {
            return Err("unplaced mass exceeds the slack budget".into());
        }
        let cost = problem
            .machines
            .iter()
            .zip(&loads)
            .fold(Rational::zero(), |acc, (mach, l)| acc + mach.cost_unchecked(l));
        if cost != self.cost {
            return Err("recorded cost disagrees".into());
        }
        Ok(())
    }
}

/// Solves the quantized subproblem (optimally with [`Engine::Exact`]).
pub fn solve_aux(problem: &AuxProblem, options: AuxOptions) -> Result<AuxSolution, AuxError> {
    problem.validate()?;
    let catalog = build_catalog(problem)?;
    let configurations = enumerate_configurations(&catalog, &problem.cap(), options.config_limit)?;
    let program = build_program(problem, &catalog, &configurations)?;
    let solution = match options.engine {
        Engine::Exact => nfold::solve_exact(&program, options.nfold)?,
        Engine::Augmentation => {
            let start = nfold::first_feasible(&program)?;
            nfold::solve_augmentation(&program, &start)?
        }
    };
    let decoded = decode(problem, &catalog, &configurations, &solution);
    if let Err(msg) = decoded.check(problem) {
        return Err(AuxError::Nfold(NfoldError::Violated(msg)));
    }
    Ok(decoded)
}

fn decode(
    problem: &AuxProblem,
    catalog: &SizeCatalog,
    configurations: &[Configuration],
    solution: &NfoldSolution,
) -> AuxSolution {
    let grain = problem.grain();
    let mut queues: Vec<std::collections::VecDeque<usize>> =
        catalog.members.iter().map(|ids| ids.iter().copied().collect()).collect();
    let mut target_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut sand = vec![Rational::zero(); problem.machines.len()];
    for (i, &c) in solution.choice.iter().enumerate() {
        let config = &configurations[c];
        for (k, &count) in config.counts.iter().enumerate() {
            if Some(k) == catalog.dummy {
                sand[i] = &grain * Rational::from_integer(count.into());
                continue;
            }
            for _ in 0..count {
                let id = queues[k].pop_front().expect("configuration within catalog counts");
                target_of.insert(id, i);
            }
        }
    }
    let job_targets: Vec<(usize, Option<usize>)> = problem
        .jobs
        .iter()
        .map(|(id, _)| (*id, target_of.get(id).copied()))
        .collect();
    let mut loads = sand.clone();
    for ((_, t), (_, p)) in job_targets.iter().zip(&problem.jobs) {
        if let Some(i) = t {
            loads[*i] += p;
        }
    }
    AuxSolution {
        job_targets,
        sand,
        loads,
        cost: solution.objective.clone(),
    }
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

    fn problem(machines: Vec<MachineSpec>, sizes: &[Rational], sand: Rational, slack: Rational) -> AuxProblem {
        AuxProblem {
            block: 0,
            machines,
            jobs: sizes.iter().cloned().enumerate().collect(),
            sand,
            slack,
            eps: eps2(),
            total_jobs: 8,
        }
    }

    #[test]
    fn catalog_with_sand() {
        // grain = eps * c = 1 with c = 2
        let m = MachineSpec::with_rate(int(2), int(1));
        let p = problem(vec![m], &[int(2), int(3)], int(2), int(0));
        let cat = build_catalog(&p).unwrap();
        assert_eq!(cat.sizes, vec![int(1), int(2), int(3)]);
        assert_eq!(cat.counts, vec![2, 1, 1]);
        assert_eq!(cat.dummy, Some(0));
    }

    #[test]
    fn catalog_without_sand_and_duplicates() {
        let m = MachineSpec::with_rate(int(2), int(1));
        let p = problem(vec![m.clone()], &[int(3), int(2)], int(0), int(0));
        let cat = build_catalog(&p).unwrap();
        assert_eq!(cat.sizes, vec![int(2), int(3)]);
        assert_eq!(cat.dummy, None);
        assert_eq!(cat.members, vec![vec![1], vec![0]]);
        let p = problem(vec![m], &[int(2), int(2)], int(0), int(0));
        assert_eq!(build_catalog(&p).unwrap().counts, vec![2]);
    }

    #[test]
    fn catalog_rejects_fractional_sand() {
        let m = MachineSpec::with_rate(int(2), int(1));
        let p = problem(vec![m], &[], ratio(1, 2), int(0));
        assert!(matches!(build_catalog(&p), Err(AuxError::Precondition(_))));
    }

    fn catalog(sizes: &[i64], counts: &[i64]) -> SizeCatalog {
        SizeCatalog {
            sizes: sizes.iter().map(|&s| int(s)).collect(),
            counts: counts.to_vec(),
            members: vec![Vec::new(); sizes.len()],
            dummy: None,
        }
    }

    #[test]
    fn configuration_examples() {
        let configs = enumerate_configurations(&catalog(&[2], &[1]), &int(2), 100).unwrap();
        let got: Vec<_> = configs.iter().map(|c| (c.counts.clone(), c.load.clone())).collect();
        assert_eq!(got, vec![(vec![0], int(0)), (vec![1], int(2))]);

        let configs = enumerate_configurations(&catalog(&[1, 2], &[2, 1]), &int(2), 100).unwrap();
        let got: Vec<_> = configs.iter().map(|c| c.counts.clone()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![0, 1]]);

        let configs = enumerate_configurations(&catalog(&[3, 5], &[2, 2]), &int(2), 100).unwrap();
        assert_eq!(configs.len(), 1);
        assert!(configs[0].counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn configuration_budget() {
        assert_eq!(
            enumerate_configurations(&catalog(&[1], &[10]), &int(10), 5),
            Err(AuxError::ConfigBudget(5))
        );
    }

    #[test]
    fn forced_single_assignment() {
        // grain 1/2, cap 2, job 1 must go on the machine.
        let p = problem(vec![unit()], &[int(1)], int(0), int(0));
        let cat = build_catalog(&p).unwrap();
        let configs = enumerate_configurations(&cat, &p.cap(), 100).unwrap();
        let prog = build_program(&p, &cat, &configs).unwrap();
        assert_eq!(prog.bricks[0].columns.len(), 2);
        let s = solve_aux(&p, AuxOptions::default()).unwrap();
        assert_eq!(s.job_targets, vec![(0, Some(0))]);
        assert_eq!(s.cost, int(1));
    }

    #[test]
    fn two_unit_jobs_fill_to_cap() {
        let p = problem(vec![unit()], &[int(1), int(1)], int(0), int(0));
        let s = solve_aux(&p, AuxOptions::default()).unwrap();
        assert_eq!(s.cost, int(2));
        assert_eq!(s.loads, vec![int(2)]);
    }

    #[test]
    fn full_slack_leaves_everything() {
        let machines = vec![unit(), unit()];
        // slack must be a multiple of cap = 2
        let p = problem(machines, &[int(1), int(2)], int(1), int(4));
        let s = solve_aux(&p, AuxOptions::default()).unwrap();
        assert_eq!(s.cost, int(2));
        assert!(s.job_targets.iter().all(|(_, t)| t.is_none()));
        assert_eq!(s.placed_sand(), int(0));
    }

    #[test]
    fn infeasible_without_slack() {
        let p = problem(vec![unit()], &[int(2), int(2)], int(0), int(0));
        assert_eq!(solve_aux(&p, AuxOptions::default()), Err(AuxError::Infeasible));
    }

    #[test]
    fn precondition_checks() {
        let p = problem(vec![unit()], &[ratio(1, 2)], int(0), int(0));
        assert!(matches!(solve_aux(&p, AuxOptions::default()), Err(AuxError::Precondition(_))));
        let p = problem(vec![unit()], &[int(1)], int(0), int(1));
        assert!(matches!(solve_aux(&p, AuxOptions::default()), Err(AuxError::Precondition(_))));
    }

    #[test]
    fn sand_is_decoded_as_volume() {
        // two sand pieces of 1/2 must be placed (no slack): one machine takes 1.
        let p = problem(vec![unit()], &[], int(1), int(0));
        let s = solve_aux(&p, AuxOptions::default()).unwrap();
        assert_eq!(s.sand, vec![int(1)]);
        assert_eq!(s.cost, int(1));
        s.check(&p).unwrap();
    }

    #[test]
    fn equal_sizes_decode_lowest_id_first() {
        let machines = vec![MachineSpec::with_rate(int(1), int(1)), MachineSpec::with_rate(int(1), int(3))];
        let p = problem(machines, &[int(1), int(1)], int(0), int(0));
        let s = solve_aux(&p, AuxOptions::default()).unwrap();
        // one job per machine avoids overtime; job 0 goes to machine 0.
        assert_eq!(s.job_targets, vec![(0, Some(0)), (1, Some(1))]);
        assert_eq!(s.cost, int(4));
        s.check(&p).unwrap();
    }

    #[test]
    fn augmentation_engine_is_feasible_and_not_better() {
        let machines = vec![unit(), MachineSpec::with_rate(int(1), int(2))];
        let p = problem(machines, &[int(1), int(2), ratio(3, 2)], int(2), int(4));
        let exact = solve_aux(&p, AuxOptions::default()).unwrap();
        let local = solve_aux(
            &p,
            AuxOptions {
                engine: Engine::Augmentation,
                ..Default::default()
            },
        )
        .unwrap();
        local.check(&p).unwrap();
        assert!(exact.cost <= local.cost);
    }
}
