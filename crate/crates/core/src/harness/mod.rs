//! File formats, instance generation, benchmarking and the command line.

pub mod bench;
pub mod cli;
pub mod files;
pub mod gen;

use std::fmt;

use crate::baselines::{self, BaselineError};
use crate::eptas::{self, DriverError};
use crate::model::{Assignment, Epsilon, Instance};
use crate::nfold::NfoldError;
use crate::rational::Rational;
use crate::subproblem::AuxError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Algo {
    Eptas,
    Greedy,
    Lpt,
    Brute,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Eptas => "eptas",
            Algo::Greedy => "greedy",
            Algo::Lpt => "lpt",
            Algo::Brute => "brute",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    /// A search or enumeration limit was hit.
    Budget(String),
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Budget(m) => write!(f, "budget exceeded: {m}"),
            RunError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<DriverError> for RunError {
    fn from(e: DriverError) -> Self {
        match &e {
            DriverError::Aux {
                source: AuxError::ConfigBudget(_) | AuxError::Nfold(NfoldError::StateBudget(_)),
                ..
            } => RunError::Budget(e.to_string()),
            _ => RunError::Failed(e.to_string()),
        }
    }
}

impl From<BaselineError> for RunError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Budget { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Failed(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub assignment: Assignment,
    pub cost: Rational,
    pub audit: serde_json::Value,
}

/// Runs one algorithm on an instance. `budget` bounds the exhaustive search.
pub fn run_algo(instance: &Instance, algo: Algo, eps: Epsilon, budget: u64) -> Result<Run, RunError> {
    if instance.machines.is_empty() {
        return Err(RunError::Failed("instance has no machines".into()));
    }
    let mut audit = serde_json::json!({ "algo": algo.to_string() });
    let (assignment, cost) = match algo {
        Algo::Eptas => {
            let s = eptas::solve(instance, eps)?;
            audit["epsilon"] = eps.to_string().into();
            audit["eptas"] = serde_json::to_value(&s.audit).expect("serializable audit");
            (s.assignment, s.cost)
        }
        Algo::Greedy => {
            let order: Vec<usize> = (0..instance.jobs.len()).collect();
            let r = baselines::list_scheduling(instance, &order);
            (r.assignment, r.cost)
        }
        Algo::Lpt => {
            let r = baselines::lpt(instance);
            (r.assignment, r.cost)
        }
        Algo::Brute => {
            let r = baselines::brute_force(instance, budget)?;
            audit["nodes"] = r.nodes.into();
            (r.assignment, r.cost)
        }
    };
    Ok(Run { assignment, cost, audit })
}
