//! d-separation checked against explicit path enumeration on the graph with
//! every bidirected edge replaced by a latent common parent.

mod common;

use docalc_core::fixtures::{FIG1_GRAPHS, FIG4_GRAPHS, GRAPH_3, MISSING_XYZ};
use docalc_core::graph::GraphView;
use docalc_core::{CausalGraph, VarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Explicit {
    n: usize,
    /// `(from, to)` pairs over observed and latent nodes.
    edges: Vec<(usize, usize)>,
}

impl Explicit {
    fn of(g: &CausalGraph) -> Self {
        let n = g.len();
        let mut edges = g.directed_edges();
        for (k, (a, b)) in g.bidirected_edges().into_iter().enumerate() {
            edges.push((n + k, a));
            edges.push((n + k, b));
        }
        let total = n + g.bidirected_edges().len();
        Explicit { n: total, edges }
    }

    fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend(self.edges.iter().filter(|e| e.0 == u).map(|e| e.1));
            }
        }
        seen
    }

    /// `(neighbour, arrowhead at the neighbour, arrowhead at self)`.
    fn neighbours(&self, v: usize) -> Vec<(usize, bool, bool)> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push((b, true, false));
            } else if b == v {
                out.push((a, false, true));
            }
        }
        out
    }

    fn separated(&self, a: VarSet, b: VarSet, c: VarSet) -> bool {
        let desc: Vec<Vec<bool>> = (0..self.n).map(|v| self.descendants(v)).collect();
        let opens_collider = |v: usize| c.iter().any(|z| desc[v][z]);
        // depth-first over simple paths; `into` is whether the last edge points at `cur`
        fn walk(
            e: &Explicit,
            cur: usize,
            into: bool,
            on_path: &mut Vec<bool>,
            b: VarSet,
            c: VarSet,
            opens: &dyn Fn(usize) -> bool,
        ) -> bool {
            for (next, head_next, head_cur) in e.neighbours(cur) {
                if on_path[next] {
                    continue;
                }
                let collider = into && head_cur;
                let passable = if collider {
                    opens(cur)
                } else {
                    !(cur < 64 && c.contains(cur))
                };
                if !passable {
                    continue;
                }
                if next < 64 && b.contains(next) {
                    return true;
                }
                on_path[next] = true;
                let hit = walk(e, next, head_next, on_path, b, c, opens);
                on_path[next] = false;
                if hit {
                    return true;
                }
            }
            false
        }
        for s in a.iter() {
            let mut on_path = vec![false; self.n];
            on_path[s] = true;
            // the start node is an endpoint, so it is never blocking
            for (next, head_next, _) in self.neighbours(s) {
                if b.contains(next) {
                    return false;
                }
                on_path[next] = true;
                let hit = walk(self, next, head_next, &mut on_path, b, c, &opens_collider);
                on_path[next] = false;
                if hit {
                    return false;
                }
            }
        }
        true
    }
}

fn check(g: &CausalGraph, a: VarSet, b: VarSet, c: VarSet) {
    let fast = GraphView::new(g).d_separated(a, b, c);
    let slow = Explicit::of(g).separated(a, b, c);
    assert_eq!(
        fast,
        slow,
        "{:?} _|_ {:?} | {:?} in\n{}",
        g.names(a),
        g.names(b),
        g.names(c),
        g.to_dsl()
    );
    assert_eq!(fast, GraphView::new(g).d_separated(b, a, c), "symmetry");
}

fn exhaustive_singletons(g: &CausalGraph, max_cond: usize) {
    for x in 0..g.len() {
        for y in 0..g.len() {
            if x == y {
                continue;
            }
            let rest = g.all().without(x).without(y);
            for c in std::iter::once(VarSet::EMPTY).chain(rest.nonempty_subsets()) {
                if c.len() <= max_cond {
                    check(g, VarSet::singleton(x), VarSet::singleton(y), c);
                }
            }
        }
    }
}

#[test]
fn fixture_graphs_agree_with_path_enumeration() {
    for (_, text) in FIG1_GRAPHS {
        exhaustive_singletons(&CausalGraph::parse(text).unwrap(), 8);
    }
    exhaustive_singletons(&CausalGraph::parse(GRAPH_3).unwrap(), 8);
    for (_, text) in FIG4_GRAPHS {
        let g = CausalGraph::parse(text)
            .unwrap()
            .augment_missing(MISSING_XYZ)
            .unwrap();
        exhaustive_singletons(&g, 3);
    }
}

#[test]
fn random_graphs_agree_with_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..500u64 {
        let n = rng.gen_range(2..=7);
        let g = common::random_graph(seed, n, rng.gen_range(0.1..0.7), rng.gen_range(0.0..0.4));
        for _ in 0..20 {
            let [a, b, c, _] = common::random_partition(&mut rng, g.all());
            if a.is_empty() || b.is_empty() {
                continue;
            }
            check(&g, a, b, c);
        }
    }
}

#[test]
fn cut_views_agree_with_materialized_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..300u64 {
        let g = common::random_graph(seed, rng.gen_range(3..=6), 0.45, 0.25);
        let [cut_in, cut_out, _, _] = common::random_partition(&mut rng, g.all());
        let m = g.mutilate(cut_in, cut_out);
        for _ in 0..10 {
            let [a, b, c, _] = common::random_partition(&mut rng, g.all());
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let fast = GraphView::cut(&g, cut_in, cut_out).d_separated(a, b, c);
            assert_eq!(fast, Explicit::of(&m).separated(a, b, c));
        }
    }
}

#[test]
fn oracle_sanity() {
    let g = CausalGraph::parse("X -> Z\nZ -> Y\nX -> W\nY -> W").unwrap();
    let s = |n: &[&str]| g.set_of(n).unwrap();
    let e = Explicit::of(&g);
    assert!(e.separated(s(&["X"]), s(&["Y"]), s(&["Z"])));
    assert!(!e.separated(s(&["X"]), s(&["Y"]), s(&["Z", "W"])));
    assert!(!e.separated(s(&["X"]), s(&["Y"]), VarSet::EMPTY));
    let fd = CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y").unwrap();
    let s = |n: &[&str]| fd.set_of(n).unwrap();
    assert!(!Explicit::of(&fd).separated(s(&["X"]), s(&["Y"]), s(&["Z"])));
    assert!(
        Explicit::of(&fd.mutilate(s(&["X"]), VarSet::EMPTY)).separated(
            s(&["X"]),
            s(&["Y"]),
            s(&["Z"])
        )
    );
}
