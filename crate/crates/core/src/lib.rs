//! Bacterial foraging optimization with genetic operators and tabu search
//! for the quadratic assignment problem (QAP) and its multiobjective
//! variant (mQAP).
//!
//! - [`qap`]: instances, permutations and exact/incremental evaluation.
//! - [`io`]: QAPLIB and Knowles-Corne mQAP parsers, front files, CSV reports.
//! - [`variation`]: swap, p/3 and inversion mutation; ULX crossover.
//! - [`tabu`]: tabu search and Pareto local search.
//! - [`bfo`]: the single-objective solver and its stripped baseline.
//! - [`pareto`]: dominance, nondominated sorting, archive, GD, exact fronts.
//! - [`mobfo`]: the multiobjective solver.

pub mod bfo;
pub mod error;
pub mod generate;
pub mod io;
pub mod mobfo;
pub mod pareto;
pub mod qap;
pub mod rng;
pub mod tabu;
pub mod variation;

pub use bfo::{bfo_baseline_solve, bfo_solve, BfoConfig, RunReport};
pub use error::{Error, Result};
pub use mobfo::{mobfo_solve, MobfoConfig, MobfoReport};
pub use pareto::{
    brute_force_front, dominates, fast_nondominated_sort, generational_distance, ParetoArchive,
};
pub use qap::{Cost, Matrix, MqapInstance, ObjectiveVector, Permutation, QapInstance};
pub use rng::RandomSource;
pub use tabu::{pareto_local_search, tabu_improve, TabuParams};
pub use variation::MutationKind;
