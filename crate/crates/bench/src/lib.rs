//! Fixtures shared by the benchmarks.

use pdhg_core::distributed::{ConsensusProblem, Graph};
use pdhg_core::instances::{consistent_problem, gaussian_map, random_g, GKind};
use pdhg_core::{ConstrainedProblem, ProxFunction, StepSizes, Variant};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Consistent m×n Gaussian problem with an l1 term.
pub fn gaussian_problem(m: usize, n: usize, seed: u64) -> ConstrainedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_map(m, n, &mut rng);
    let g = random_g(GKind::L1, n, &mut rng);
    consistent_problem(a, g, &mut rng).expect("sizes match")
}

pub fn default_steps(p: &ConstrainedProblem, v: Variant) -> StepSizes {
    StepSizes::default_for(v, p.a.norm().value, p.beta()).expect("positive norm")
}

/// Path graph on `nodes` nodes with g_i = ½(x − i)², block dimension `dim`.
pub fn path_consensus(nodes: usize, dim: usize) -> ConsensusProblem {
    let graph = Graph::path(nodes, dim).expect("valid path");
    let local = (0..nodes)
        .map(|i| ProxFunction::quadratic(1.0, vec![i as f64; dim]).expect("rho > 0"))
        .collect();
    ConsensusProblem::new(graph, local).expect("one function per node")
}
