//! Generalized bin packing with overtime costs.
//!
//! A machine with fixed cost `f`, capacity `c` and overtime rate `sigma`
//! costs `f` when its load stays within `c` and `f + sigma * (load - c)`
//! otherwise. All arithmetic is exact over big rationals.
//!
//! The approximation scheme lives in [`eptas`]; it is built from
//! [`preprocess`], [`shifting`], [`subproblem`] and [`nfold`]. The
//! baselines in [`baselines`] double as reference solvers, [`variant`]
//! handles the machine-type version, and [`harness`] holds the file formats
//! and the `gebp` command line. See `examples/` for one program per module.

pub mod baselines;
pub mod eptas;
pub mod harness;
pub mod model;
pub mod nfold;
pub mod preprocess;
pub mod rational;
pub mod shifting;
pub mod subproblem;
pub mod variant;
