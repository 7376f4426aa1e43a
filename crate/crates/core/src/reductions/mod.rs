//! Reductions from permanents, exact cover and counting 3-CNF problems to
//! the circuit problems, with brute-force oracles for each source problem.

pub mod determinant;
pub mod gadgets;
pub mod instances;
pub mod oracles;

pub use determinant::{determinant_circuit, entry_name};
pub use gadgets::{
    ccne3sat_to_countextmon, ccne_c_prime, cexists3sat_to_countmon, countextmon_to_countmon, non_extending_count,
    normalize_counting, perm_to_mlcountmon, perm_to_zmc, x3c_to_zmc, z_cubes, CountExtInstance,
};
pub use instances::{Block, ExactCoverInstance, Literal, NormalizedCnf, SignMatrix, ThreeCnf};
pub use oracles::{count_models, has_exact_cover, leibniz_determinant, model_table, permanent};
