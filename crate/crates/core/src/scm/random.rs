use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use super::{DiscreteScm, Latent, ScmError};
use crate::graph::{CausalGraph, VarKind};
use crate::varset::VarSet;

const FLOOR: f64 = 1e-6;

fn draw(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    if card == 1 {
        return vec![1.0];
    }
    let d = Dirichlet::new(&vec![1.0f64; card]).expect("dirichlet parameters");
    let mut row: Vec<f64> = d
        .sample(rng)
        .into_iter()
        .map(|p: f64| p.max(FLOOR))
        .collect();
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= s);
    row
}

impl DiscreteScm {
    /// A random model with one binary latent per bidirected edge and every
    /// table row drawn from a flat Dirichlet, floored at 1e-6. `cards` gives
    /// the cardinality of each variable; entries for proxies and indicators
    /// are ignored.
    pub fn random(g: &CausalGraph, cards: &[usize], seed: u64) -> Result<DiscreteScm, ScmError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.len();
        let mut cards: Vec<usize> = (0..n).map(|v| cards.get(v).copied().unwrap_or(2)).collect();
        for v in 0..n {
            match g.kind(v) {
                VarKind::ResponseIndicator => cards[v] = 2,
                VarKind::Proxy => cards[v] = cards[g.true_of(v).unwrap()] + 1,
                VarKind::Substantive if cards[v] < 2 => {
                    return Err(ScmError::Cardinality(g.name(v).to_string()))
                }
                VarKind::Substantive => {}
            }
        }
        let latents: Vec<Latent> = g
            .bidirected_edges()
            .into_iter()
            .map(|(a, b)| Latent {
                name: format!("U_{}_{}", g.name(a), g.name(b)),
                card: 2,
                children: VarSet::singleton(a).with(b),
                probs: draw(&mut rng, 2),
            })
            .collect();
        let mut cpts = vec![Vec::new(); n];
        for v in 0..n {
            if g.kind(v) == VarKind::Proxy {
                continue;
            }
            let observed: usize = g.parents(v).iter().map(|p| cards[p]).product();
            let hidden: usize = latents
                .iter()
                .filter(|l| l.children.contains(v))
                .map(|l| l.card)
                .product();
            for _ in 0..observed * hidden {
                cpts[v].extend(draw(&mut rng, cards[v]));
            }
        }
        DiscreteScm::new(g.clone(), cards, latents, cpts)
    }

    /// Binary model; see [`DiscreteScm::random`].
    pub fn random_binary(g: &CausalGraph, seed: u64) -> DiscreteScm {
        DiscreteScm::random(g, &vec![2; g.len()], seed).expect("binary random model")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> CausalGraph {
        CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y\nW -> X").unwrap()
    }

    #[test]
    fn same_seed_same_model() {
        assert_eq!(
            DiscreteScm::random_binary(&g(), 11),
            DiscreteScm::random_binary(&g(), 11)
        );
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(
            DiscreteScm::random_binary(&g(), 11),
            DiscreteScm::random_binary(&g(), 12)
        );
    }

    #[test]
    fn rows_normalized_and_positive() {
        let m = DiscreteScm::random(&g(), &[3, 2, 4, 2], 5).unwrap();
        for v in 0..4 {
            let card = m.cards()[v];
            for row in m.cpt(v).chunks(card) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&p| p >= FLOOR * 0.5));
            }
        }
        assert_eq!(m.latents().len(), 1);
        assert!((m.joint(&[]).total() - 1.0).abs() < 1e-12);
    }
}
