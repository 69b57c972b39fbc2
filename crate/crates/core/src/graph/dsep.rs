//! Reachability-based d-separation on (virtually) mutilated graphs.

use super::CausalGraph;
use crate::varset::VarSet;

/// A graph with incoming edges of `cut_in` and outgoing edges of `cut_out`
/// removed, without copying the graph.
#[derive(Clone, Copy)]
pub struct GraphView<'g> {
    g: &'g CausalGraph,
    cut_in: VarSet,
    cut_out: VarSet,
}

impl<'g> GraphView<'g> {
    pub fn new(g: &'g CausalGraph) -> Self {
        GraphView {
            g,
            cut_in: VarSet::EMPTY,
            cut_out: VarSet::EMPTY,
        }
    }

    pub fn cut(g: &'g CausalGraph, cut_in: VarSet, cut_out: VarSet) -> Self {
        GraphView { g, cut_in, cut_out }
    }

    #[inline]
    pub fn parents(&self, v: usize) -> VarSet {
        if self.cut_in.contains(v) {
            VarSet::EMPTY
        } else {
            self.g.parents(v) - self.cut_out
        }
    }

    #[inline]
    pub fn children(&self, v: usize) -> VarSet {
        if self.cut_out.contains(v) {
            VarSet::EMPTY
        } else {
            self.g.children(v) - self.cut_in
        }
    }

    #[inline]
    pub fn spouses(&self, v: usize) -> VarSet {
        if self.cut_in.contains(v) {
            VarSet::EMPTY
        } else {
            self.g.spouses(v) - self.cut_in
        }
    }

    pub fn ancestors(&self, s: VarSet) -> VarSet {
        let mut out = s;
        let mut frontier = s;
        while let Some(v) = frontier.first() {
            frontier.remove(v);
            let new = self.parents(v) - out;
            out = out | new;
            frontier = frontier | new;
        }
        out
    }

    /// Bayes-ball reachability. A bidirected edge `u <-> v` behaves as
    /// `u <- L -> v` with `L` latent: leaving `u` towards `L` is an upward
    /// move and `v` is then entered from a parent.
    pub fn d_separated(&self, a: VarSet, b: VarSet, c: VarSet) -> bool {
        let anc_c = self.ancestors(c);
        // visited[0]: entered from a child (moving up); visited[1]: from a parent.
        let mut up_seen = VarSet::EMPTY;
        let mut down_seen = VarSet::EMPTY;
        let mut up_todo = a;
        let mut down_todo = VarSet::EMPTY;

        loop {
            if let Some(v) = up_todo.first() {
                up_todo.remove(v);
                if up_seen.contains(v) {
                    continue;
                }
                up_seen.insert(v);
                if c.contains(v) {
                    continue;
                }
                if b.contains(v) {
                    return false;
                }
                up_todo = up_todo | (self.parents(v) - up_seen);
                down_todo = down_todo | ((self.children(v) | self.spouses(v)) - down_seen);
            } else if let Some(v) = down_todo.first() {
                down_todo.remove(v);
                if down_seen.contains(v) {
                    continue;
                }
                down_seen.insert(v);
                if !c.contains(v) {
                    if b.contains(v) {
                        return false;
                    }
                    down_todo = down_todo | (self.children(v) - down_seen);
                }
                if anc_c.contains(v) {
                    // collider (or ancestor of one) opened by conditioning
                    up_todo = up_todo | (self.parents(v) - up_seen);
                    down_todo = down_todo | (self.spouses(v) - down_seen);
                }
            } else {
                return true;
            }
        }
    }
}
