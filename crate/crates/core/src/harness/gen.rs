//! Seeded random instances on small rational grids.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, MachineSpec};
use crate::rational::{int, ratio, Rational};
use crate::variant::TypedInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GenClass {
    /// Every machine is (1, 1, 1).
    Ebp,
    /// Rate 1 and fixed cost equal to capacity.
    Ubs,
    General,
    /// Machine types for the variant.
    Typed,
}

const CAPACITIES: [(i64, i64); 8] = [(1, 2), (1, 1), (3, 2), (2, 1), (5, 2), (3, 1), (4, 1), (8, 1)];
const RATES: [(i64, i64); 6] = [(1, 2), (1, 1), (3, 2), (2, 1), (3, 1), (5, 1)];
const JOB_DENOMINATORS: [i64; 4] = [1, 2, 4, 5];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A job size `k / d` with `d` from a small set and value in `(0, max]`.
pub fn grid_job(rng: &mut impl Rng, max: i64) -> Rational {
    let d = *JOB_DENOMINATORS.choose(rng).expect("nonempty");
    ratio(rng.gen_range(1..=max * d), d)
}

pub fn grid_machine(rng: &mut impl Rng, unit_rate: bool) -> MachineSpec {
    let (cn, cd) = *CAPACITIES.choose(rng).expect("nonempty");
    let sigma = if unit_rate {
        int(1)
    } else {
        let (sn, sd) = *RATES.choose(rng).expect("nonempty");
        ratio(sn, sd)
    };
    MachineSpec::with_rate(ratio(cn, cd), sigma)
}

pub fn random_instance(rng: &mut impl Rng, class: GenClass, n: usize, m: usize) -> Instance {
    let machines: Vec<MachineSpec> = (0..m)
        .map(|_| match class {
            GenClass::Ebp => MachineSpec::new(int(1), int(1), int(1)),
            GenClass::Ubs => grid_machine(rng, true),
            GenClass::General | GenClass::Typed => grid_machine(rng, false),
        })
        .collect();
    let max_job = match class {
        GenClass::Ebp => 2,
        _ => 6,
    };
    let jobs = (0..n).map(|_| grid_job(rng, max_job)).collect();
    Instance::new(machines, jobs)
}

pub fn random_typed(rng: &mut impl Rng, n: usize, types: usize) -> TypedInstance {
    let types = (0..types).map(|_| grid_machine(rng, false)).collect();
    let jobs = (0..n).map(|_| grid_job(rng, 12)).collect();
    TypedInstance::new(types, jobs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generated {
    Instance(Instance),
    Typed(TypedInstance),
}

/// The instance for `(seed, n, m, class)`; identical arguments give identical output.
pub fn generate(seed: u64, n: usize, m: usize, class: GenClass) -> Generated {
    let mut r = rng(seed);
    match class {
        GenClass::Typed => Generated::Typed(random_typed(&mut r, n, m)),
        _ => Generated::Instance(random_instance(&mut r, class, n, m)),
    }
}
