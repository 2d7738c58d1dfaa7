//! The approximation scheme end to end.
//!
//! Pipeline: normalize rates, round job sizes, sort machines, delete the
//! cheapest capacity residue class, split the rest into blocks, price a
//! layered graph whose edges are block subproblems, take a shortest path and
//! realize it as an assignment of the original instance.
//!
//! Layer `q >= 1` belongs to block `q - 1` (0-indexed blocks); its nodes are
//! the sand amounts `k * grain` for `k = 0..=n`. Layer 0 holds the mass sent
//! to the designated unit-rate machine `h`: the oversized jobs plus
//! `k * cap` of the first block.

pub mod graph;
pub mod realize;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::baselines;
use crate::model::{solution_cost, validate_instance, Assignment, Epsilon, Instance, ModelError};
use crate::preprocess::{normalize_sigma, round_jobs, sort_machines, Permutation, RoundedJob, ScaleRecord};
use crate::rational::{as_string, Rational};
use crate::shifting::{
    partition_blocks, partition_jobs, select_deletion, BlockPartition, CapacityClassing, JobPartition, ShiftingError,
};
use crate::subproblem::{solve_aux, AuxError, AuxOptions, AuxProblem, AuxSolution};

pub use graph::{shortest_path, LayeredGraph, NoPath, Path};
pub use realize::{realize, take_prefix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Shifting(#[from] ShiftingError),
    #[error("block {block}: {source}")]
    Aux { block: usize, source: AuxError },
}

/// The preprocessed instance and everything derived from it before pricing.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub eps: Epsilon,
    pub original: Instance,
    pub scale: ScaleRecord,
    pub rounded: Vec<RoundedJob>,
    pub perm: Permutation,
    /// Normalized, rounded, sorted instance the scheme works on.
    pub work: Instance,
    pub classing: CapacityClassing,
    /// Sorted positions of the machines that survive deletion.
    pub survivors: Vec<usize>,
    /// Blocks over indices into `survivors`.
    pub blocks: BlockPartition,
    pub parts: JobPartition,
    /// Sorted machine positions of each block.
    pub block_machines: Vec<Vec<usize>>,
    /// Sand grain `eps * c_last` per block.
    pub grains: Vec<Rational>,
    /// Load cap `c_first / eps` per block.
    pub caps: Vec<Rational>,
    pub top_sum: Rational,
    pub small_sums: Vec<Rational>,
}

pub fn prepare(instance: &Instance, eps: Epsilon) -> Result<Prepared, DriverError> {
    validate_instance(instance).into_result()?;
    let (normalized, scale) = normalize_sigma(instance);
    let (rounded_inst, rounded) = round_jobs(&normalized, eps);
    let (work, perm) = sort_machines(&rounded_inst);
    let classing = select_deletion(&work.machines, eps)?;
    let survivors = classing.survivors();
    let caps_all: Vec<Rational> = survivors.iter().map(|&i| work.machines[i].capacity.clone()).collect();
    let blocks = partition_blocks(&caps_all, eps)?;
    let parts = partition_jobs(&work.jobs, &caps_all, &blocks, eps)?;
    let block_machines: Vec<Vec<usize>> = blocks
        .blocks
        .iter()
        .map(|b| b.positions().map(|k| survivors[k]).collect())
        .collect();
    let grains = blocks.blocks.iter().map(|b| &caps_all[b.last] * eps.value()).collect();
    let caps = blocks.blocks.iter().map(|b| &caps_all[b.first] * eps.inverse_rational()).collect();
    let mass = |ids: &[usize]| ids.iter().fold(Rational::zero(), |acc, &j| acc + &work.jobs[j]);
    let top_sum = mass(&parts.top);
    let small_sums = parts.small.iter().map(|s| mass(s)).collect();
    Ok(Prepared {
        eps,
        original: instance.clone(),
        scale,
        rounded,
        perm,
        work,
        classing,
        survivors,
        blocks,
        parts,
        block_machines,
        grains,
        caps,
        top_sum,
        small_sums,
    })
}

/// `unit * min(n, floor(excess / unit))`, or `None` for negative `excess`.
pub fn psi_on_grid(excess: &Rational, unit: &Rational, n: usize) -> Option<Rational> {
    if excess.is_negative() {
        return None;
    }
    let k = (excess / unit).floor().to_integer();
    let k = k.min(n.into());
    Some(unit * Rational::from_integer(k))
}

impl Prepared {
    /// Number of blocks, which is also the index of the top layer.
    pub fn kappa(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.work.jobs.len()
    }

    pub fn layer_nodes(&self, q: usize) -> Vec<Rational> {
        let (base, unit) = if q == 0 {
            (self.top_sum.clone(), &self.caps[0])
        } else {
            (Rational::zero(), &self.grains[q - 1])
        };
        (0..=self.n())
            .map(|k| &base + unit * Rational::from_integer(k.into()))
            .collect()
    }

    /// Index of the source node, the smallest grain multiple covering the
    /// small jobs of the last block.
    pub fn source_index(&self) -> usize {
        let b = self.kappa() - 1;
        let k = (&self.small_sums[b] / &self.grains[b]).ceil().to_integer();
        k.to_usize().expect("source index fits")
    }

    /// Slack of the subproblem on an edge leaving layer `q` towards the node
    /// `phi_prev` of layer `q - 1`.
    pub fn psi_from_phi(&self, q: usize, phi_prev: &Rational) -> Option<Rational> {
        assert!(q >= 1 && q <= self.kappa());
        if q == 1 {
            let psi = phi_prev - &self.top_sum;
            return (!psi.is_negative()).then_some(psi);
        }
        psi_on_grid(&(phi_prev - &self.small_sums[q - 2]), &self.caps[q - 1], self.n())
    }

    pub fn aux_problem(&self, q: usize, phi: &Rational, psi: &Rational) -> AuxProblem {
        let b = q - 1;
        AuxProblem {
            block: b,
            machines: self.block_machines[b].iter().map(|&i| self.work.machines[i].clone()).collect(),
            jobs: self.parts.large[b].iter().map(|&j| (j, self.work.jobs[j].clone())).collect(),
            sand: phi.clone(),
            slack: psi.clone(),
            eps: self.eps,
            total_jobs: self.n(),
        }
    }

    fn original_machine(&self, sorted: usize) -> usize {
        self.perm.original(sorted)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pricing {
    /// Price only the edges the backward relaxation can use: every edge
    /// below the top layer and the edges leaving the source.
    #[default]
    Lazy,
    /// Price every edge of the graph.
    Exhaustive,
}

#[derive(Clone, Copy, Debug)]
pub struct DriverOptions {
    pub pricing: Pricing,
    pub aux: AuxOptions,
    pub parallel: bool,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self {
            pricing: Pricing::Lazy,
            aux: AuxOptions::default(),
            parallel: true,
        }
    }
}

type CacheKey = (usize, Rational, Rational);
type CacheEntry = Result<Arc<AuxSolution>, AuxError>;

/// Memo of block subproblem solutions keyed by `(layer, phi, psi)`.
#[derive(Default)]
pub struct AuxCache {
    map: Mutex<HashMap<CacheKey, CacheEntry>>,
    solves: AtomicUsize,
}

impl AuxCache {
    pub fn get_or_solve(&self, prep: &Prepared, q: usize, phi: &Rational, psi: &Rational, options: AuxOptions) -> CacheEntry {
        let key = (q, phi.clone(), psi.clone());
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let result = solve_aux(&prep.aux_problem(q, phi, psi), options).map(Arc::new);
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.map.lock().unwrap().entry(key).or_insert(result).clone()
    }

    pub fn get(&self, q: usize, phi: &Rational, psi: &Rational) -> Option<CacheEntry> {
        self.map.lock().unwrap().get(&(q, phi.clone(), psi.clone())).cloned()
    }

    /// Number of subproblems actually solved.
    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }
}

/// Builds the layered graph and prices its edges through the cache.
/// Infeasible subproblems leave the edge out.
pub fn build_and_price(prep: &Prepared, options: DriverOptions, cache: &AuxCache) -> Result<LayeredGraph, DriverError> {
    let kappa = prep.kappa();
    let layers: Vec<Vec<Rational>> = (0..=kappa).map(|q| prep.layer_nodes(q)).collect();
    let source = prep.source_index();
    let sink = layers[0].iter().map(|phi| Some(phi.clone())).collect();
    let mut edges = vec![Vec::new()];
    for q in 1..=kappa {
        let width = layers[q].len();
        let from: Vec<usize> = if q == kappa && options.pricing == Pricing::Lazy {
            vec![source]
        } else {
            (0..width).collect()
        };
        let psis: Vec<Option<Rational>> = layers[q - 1].iter().map(|phi| prep.psi_from_phi(q, phi)).collect();
        let mut keys: Vec<(usize, Rational)> = Vec::new();
        for &a in &from {
            for psi in psis.iter().flatten() {
                keys.push((a, psi.clone()));
            }
        }
        keys.sort();
        keys.dedup();
        let price = |(a, psi): &(usize, Rational)| {
            let r = cache.get_or_solve(prep, q, &layers[q][*a], psi, options.aux);
            ((*a, psi.clone()), r)
        };
        let priced: Vec<((usize, Rational), CacheEntry)> = if options.parallel {
            keys.par_iter().map(price).collect()
        } else {
            keys.iter().map(price).collect()
        };
        let mut lengths: HashMap<(usize, Rational), Option<Rational>> = HashMap::new();
        for (key, r) in priced {
            let len = match r {
                Ok(sol) => Some(sol.cost.clone()),
                Err(AuxError::Infeasible) => None,
                Err(source) => return Err(DriverError::Aux { block: q - 1, source }),
            };
            lengths.insert(key, len);
        }
        let mut layer_edges = vec![vec![None; psis.len()]; width];
        for &a in &from {
            for (b, psi) in psis.iter().enumerate() {
                if let Some(psi) = psi {
                    layer_edges[a][b] = lengths[&(a, psi.clone())].clone();
                }
            }
        }
        edges.push(layer_edges);
    }
    Ok(LayeredGraph {
        layers,
        edges,
        sink,
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockAudit {
    /// Original machine indices of the block.
    pub machines: Vec<usize>,
    #[serde(with = "as_string")]
    pub sand: Rational,
    #[serde(with = "as_string")]
    pub slack: Rational,
    #[serde(with = "as_string")]
    pub cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Audit {
    pub epsilon: String,
    /// Set when no path existed and the greedy result was returned instead.
    pub fallback: bool,
    #[serde(with = "as_string")]
    pub sigma_scale: Rational,
    pub t_min: u64,
    /// Original index of the unit-rate machine that takes the leftovers.
    pub h: usize,
    pub deleted: Vec<usize>,
    #[serde(with = "as_string")]
    pub deleted_fixed_cost: Rational,
    pub blocks: Vec<BlockAudit>,
    /// Sand at the path node of each layer, layer 0 first.
    #[serde(with = "as_string::vec")]
    pub path_phi: Vec<Rational>,
    #[serde(with = "as_string")]
    pub path_length: Rational,
    /// Cost of the surviving machines on the rounded instance.
    #[serde(with = "as_string")]
    pub realized_path_cost: Rational,
    /// `realized_path_cost / path_length`.
    pub realization_ratio: f64,
    pub realization_within_bound: bool,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub aux_solves: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizedSolution {
    /// Assignment over the original machine indices.
    pub assignment: Assignment,
    /// Cost on the original instance, deleted machines included.
    pub cost: Rational,
    pub audit: Audit,
}

pub fn solve(instance: &Instance, eps: Epsilon) -> Result<RealizedSolution, DriverError> {
    solve_with(instance, eps, DriverOptions::default())
}

pub fn solve_with(instance: &Instance, eps: Epsilon, options: DriverOptions) -> Result<RealizedSolution, DriverError> {
    let prep = prepare(instance, eps)?;
    let cache = AuxCache::default();
    let graph = build_and_price(&prep, options, &cache)?;
    let deleted: Vec<usize> = prep.classing.deleted.iter().map(|&i| prep.original_machine(i)).collect();
    let deleted_fixed_cost = prep
        .classing
        .deleted
        .iter()
        .fold(Rational::zero(), |acc, &i| acc + &prep.work.machines[i].fixed_cost);
    let mut audit = Audit {
        epsilon: eps.to_string(),
        fallback: false,
        sigma_scale: prep.scale.sigma_scale.clone(),
        t_min: prep.classing.t_min,
        h: prep.original_machine(prep.classing.h),
        deleted,
        deleted_fixed_cost,
        blocks: Vec::new(),
        path_phi: Vec::new(),
        path_length: Rational::zero(),
        realized_path_cost: Rational::zero(),
        realization_ratio: f64::NAN,
        realization_within_bound: false,
        graph_nodes: graph.node_count(),
        graph_edges: graph.edge_count(),
        aux_solves: cache.solves(),
    };
    let path = match shortest_path(&graph) {
        Ok(p) => p,
        Err(NoPath) => {
            let order: Vec<usize> = (0..instance.jobs.len()).collect();
            let fallback = baselines::list_scheduling(instance, &order);
            audit.fallback = true;
            return Ok(RealizedSolution {
                assignment: fallback.assignment,
                cost: fallback.cost,
                audit,
            });
        }
    };
    let kappa = prep.kappa();
    let phi: Vec<Rational> = (0..=kappa).map(|q| graph.layers[q][path.nodes[q]].clone()).collect();
    let mut plan: Vec<Arc<AuxSolution>> = Vec::with_capacity(kappa);
    for q in 1..=kappa {
        let psi = prep.psi_from_phi(q, &phi[q - 1]).expect("path edge has a slack value");
        let sol = cache
            .get(q, &phi[q], &psi)
            .expect("path edge was priced")
            .expect("path edge is feasible");
        audit.blocks.push(BlockAudit {
            machines: prep.block_machines[q - 1].iter().map(|&i| prep.original_machine(i)).collect(),
            sand: phi[q].clone(),
            slack: psi,
            cost: sol.cost.clone(),
        });
        plan.push(sol);
    }
    let refs: Vec<&AuxSolution> = plan.iter().map(|s| s.as_ref()).collect();
    let sorted_targets = realize(&prep, &refs)?;

    let mut loads = vec![Rational::zero(); prep.work.machines.len()];
    for (j, &i) in sorted_targets.iter().enumerate() {
        loads[i] += &prep.work.jobs[j];
    }
    let realized = prep
        .survivors
        .iter()
        .fold(Rational::zero(), |acc, &i| acc + prep.work.machines[i].cost_unchecked(&loads[i]));
    let bound = (Rational::from_integer(1.into()) + eps.value()) * &path.length;
    audit.realization_within_bound = realized <= bound;
    audit.realization_ratio = baselines::ratio_f64(&realized, &path.length).unwrap_or(f64::NAN);
    audit.realized_path_cost = realized;
    audit.path_length = path.length;
    audit.path_phi = phi;

    let target: Vec<usize> = sorted_targets.iter().map(|&i| prep.original_machine(i)).collect();
    let assignment = Assignment::new(target);
    let cost = solution_cost(instance, &assignment)?;
    Ok(RealizedSolution { assignment, cost, audit })
}

/// `(1 + eps)^6 (1 + 3 eps)`, the end-to-end guarantee against an optimum.
pub fn guarantee(eps: Epsilon) -> Rational {
    let one = Rational::from_integer(1.into());
    let e = eps.value();
    let base = &one + &e;
    crate::rational::pow(&base, 6) * (&one + e * Rational::from_integer(3.into()))
}
