#![allow(dead_code)]

use docalc_core::{CausalGraph, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random semi-Markovian graph on `V0..V{n-1}`, edges respecting index order.
pub fn random_graph(seed: u64, n: usize, p_dir: f64, p_bi: f64) -> CausalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CausalGraph::new();
    for i in 0..n {
        g.add_variable(&format!("V{i}")).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_dir) {
                g.add_directed(i, j).unwrap();
            }
            if rng.gen_bool(p_bi) {
                g.add_bidirected(i, j).unwrap();
            }
        }
    }
    g
}

/// Splits `universe` at random into three disjoint sets.
pub fn random_partition(rng: &mut ChaCha8Rng, universe: VarSet) -> [VarSet; 4] {
    let mut parts = [VarSet::EMPTY; 4];
    for v in universe.iter() {
        parts[rng.gen_range(0..4)].insert(v);
    }
    parts
}
