//! Semi-Markovian causal graphs.
//!
//! A graph holds observed variables, directed edges and bidirected edges. A
//! bidirected edge stands for an unobserved common parent of its endpoints and
//! is never materialized as a node. Graphs may be augmented with missing-data
//! machinery: response indicators `R_X` and proxies `X*` with `X* = X` when
//! `R_X = 1` and `X* = NA` otherwise.

mod dsep;
mod missing;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::varset::{VarSet, MAX_VARS};

pub use dsep::GraphView;
pub use missing::parse_missing_spec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph exceeds the {MAX_VARS}-variable capacity (variable `{0}` would be number {n})", n = MAX_VARS + 1)]
    Capacity(String),
    #[error("malformed graph statement near `{0}`")]
    Malformed(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("directed edges form a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("malformed missing-data specification near `{0}`")]
    MalformedMissing(String),
    #[error("response indicator `{0}` is mapped more than once")]
    IndicatorMappedTwice(String),
    #[error("variable `{0}` is already covered by a response indicator")]
    TargetMappedTwice(String),
    #[error("`{0}` is a proxy and cannot receive a response indicator")]
    ProxyTarget(String),
    #[error("`{0}` cannot be used as a response indicator")]
    InvalidIndicator(String),
    #[error("proxy `{0}` already exists in the graph")]
    ProxyExists(String),
    #[error("bidirected edge touches augmentation node `{0}`")]
    BidirectedOnProxy(String),
    #[error("d-separation query sets overlap or are empty")]
    OverlappingSets,
}

/// Role of a variable with respect to missing-data augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    Substantive,
    Proxy,
    ResponseIndicator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub index: usize,
    pub name: String,
    pub kind: VarKind,
}

/// Semi-Markovian DAG over at most 64 variables.
#[derive(Clone, PartialEq, Eq)]
pub struct CausalGraph {
    vars: Vec<Variable>,
    parents: Vec<VarSet>,
    children: Vec<VarSet>,
    spouses: Vec<VarSet>,
    /// Response indicator -> the substantive variable it governs.
    missing: BTreeMap<usize, usize>,
    /// Substantive variable -> its proxy.
    proxy_of: BTreeMap<usize, usize>,
}

impl CausalGraph {
    pub fn new() -> Self {
        CausalGraph {
            vars: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            spouses: Vec::new(),
            missing: BTreeMap::new(),
            proxy_of: BTreeMap::new(),
        }
    }

    /// Parses the edge-list DSL, e.g. `"X -> Z\nZ -> Y\nX <-> Y"`.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        parse::parse_graph(text)
    }

    /// Adds a substantive variable, returning its index. Existing names are reused.
    pub fn add_variable(&mut self, name: &str) -> Result<usize, GraphError> {
        if let Some(i) = self.index_of(name) {
            return Ok(i);
        }
        self.push_variable(name, VarKind::Substantive)
    }

    fn push_variable(&mut self, name: &str, kind: VarKind) -> Result<usize, GraphError> {
        if self.index_of(name).is_some() {
            return Err(GraphError::DuplicateVariable(name.to_string()));
        }
        if self.vars.len() >= MAX_VARS {
            return Err(GraphError::Capacity(name.to_string()));
        }
        let index = self.vars.len();
        self.vars.push(Variable {
            index,
            name: name.to_string(),
            kind,
        });
        self.parents.push(VarSet::EMPTY);
        self.children.push(VarSet::EMPTY);
        self.spouses.push(VarSet::EMPTY);
        Ok(index)
    }

    /// Adds `from -> to`. Duplicate edges are ignored; cycles are rejected.
    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        if from == to {
            return Err(GraphError::SelfLoop(self.vars[from].name.clone()));
        }
        if self.parents[to].contains(from) {
            return Ok(());
        }
        if self.ancestors(VarSet::singleton(from)).contains(to) {
            return Err(GraphError::Cycle(self.vars[to].name.clone()));
        }
        self.parents[to].insert(from);
        self.children[from].insert(to);
        Ok(())
    }

    /// Adds `a <-> b`. Duplicates are ignored.
    pub fn add_bidirected(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(self.vars[a].name.clone()));
        }
        for v in [a, b] {
            if self.vars[v].kind == VarKind::Proxy {
                return Err(GraphError::BidirectedOnProxy(self.vars[v].name.clone()));
            }
        }
        self.spouses[a].insert(b);
        self.spouses[b].insert(a);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn all(&self) -> VarSet {
        VarSet::full(self.vars.len())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.vars[index]
    }

    pub fn name(&self, index: usize) -> &str {
        &self.vars[index].name
    }

    pub fn kind(&self, index: usize) -> VarKind {
        self.vars[index].kind
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn parents(&self, v: usize) -> VarSet {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> VarSet {
        self.children[v]
    }

    /// Endpoints sharing a bidirected edge with `v`.
    pub fn spouses(&self, v: usize) -> VarSet {
        self.spouses[v]
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.spouses[a].contains(b)
    }

    /// Directed edges as (parent, child), ordered by parent then child index.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..self.len() {
            for c in self.children[p].iter() {
                out.push((p, c));
            }
        }
        out
    }

    /// Bidirected edges as (a, b) with a < b.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.spouses[a].iter().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn set_of_kind(&self, kind: VarKind) -> VarSet {
        self.vars
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.index)
            .collect()
    }

    pub fn indicators(&self) -> VarSet {
        self.set_of_kind(VarKind::ResponseIndicator)
    }

    pub fn proxies(&self) -> VarSet {
        self.set_of_kind(VarKind::Proxy)
    }

    /// Response indicator -> governed substantive variable.
    pub fn missing_map(&self) -> &BTreeMap<usize, usize> {
        &self.missing
    }

    /// Proxy of a substantive variable, if augmented.
    pub fn proxy_of(&self, substantive: usize) -> Option<usize> {
        self.proxy_of.get(&substantive).copied()
    }

    /// Substantive variable behind a proxy.
    pub fn true_of(&self, proxy: usize) -> Option<usize> {
        self.proxy_of
            .iter()
            .find(|(_, &p)| p == proxy)
            .map(|(&x, _)| x)
    }

    /// Response indicator governing a substantive variable or its proxy.
    pub fn indicator_of(&self, v: usize) -> Option<usize> {
        let x = self.true_of(v).unwrap_or(v);
        self.missing.iter().find(|(_, &t)| t == x).map(|(&r, _)| r)
    }

    /// Reflexive-transitive closure along directed edges towards parents.
    pub fn ancestors(&self, s: VarSet) -> VarSet {
        GraphView::new(self).ancestors(s)
    }

    /// Reflexive-transitive closure along directed edges towards children.
    pub fn descendants(&self, s: VarSet) -> VarSet {
        let mut out = s;
        let mut frontier = s;
        while let Some(v) = frontier.first() {
            frontier.remove(v);
            let new = self.children[v] - out;
            out = out | new;
            frontier = frontier | new;
        }
        out
    }

    /// Copy with directed edges into `cut_incoming` and out of `cut_outgoing`
    /// removed. Bidirected edges touching `cut_incoming` are dropped since they
    /// carry a latent parent; those touching `cut_outgoing` are kept.
    pub fn mutilate(&self, cut_incoming: VarSet, cut_outgoing: VarSet) -> CausalGraph {
        let mut g = self.clone();
        for v in 0..g.len() {
            if cut_incoming.contains(v) {
                for p in g.parents[v].iter() {
                    g.children[p].remove(v);
                }
                g.parents[v] = VarSet::EMPTY;
                for s in g.spouses[v].iter() {
                    g.spouses[s].remove(v);
                }
                g.spouses[v] = VarSet::EMPTY;
            }
        }
        let n = g.len();
        for v in cut_outgoing.iter().filter(|&v| v < n) {
            for c in g.children[v].iter() {
                g.parents[c].remove(v);
            }
            g.children[v] = VarSet::EMPTY;
        }
        g
    }

    /// True iff `a` and `b` are d-separated by `c`. The three sets must be
    /// disjoint and `a`, `b` nonempty.
    pub fn d_separated(&self, a: VarSet, b: VarSet, c: VarSet) -> Result<bool, GraphError> {
        if a.is_empty()
            || b.is_empty()
            || !a.is_disjoint(b)
            || !a.is_disjoint(c)
            || !b.is_disjoint(c)
        {
            return Err(GraphError::OverlappingSets);
        }
        Ok(GraphView::new(self).d_separated(a, b, c))
    }

    /// A topological order of all variables (parents first, ties by index).
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut placed = VarSet::EMPTY;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n)
                .find(|&v| !placed.contains(v) && self.parents[v].is_subset(placed))
                .expect("directed part is acyclic");
            placed.insert(next);
            order.push(next);
        }
        order
    }

    /// Augments the graph with proxies for a spec like `"R_X : X, R_Y : Y"`.
    pub fn augment_missing(&self, spec: &str) -> Result<CausalGraph, GraphError> {
        missing::augment(self, spec)
    }

    /// Renders the graph back into the DSL. Variables are declared first so
    /// that re-parsing preserves index order.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            out.push_str(&v.name);
            out.push('\n');
        }
        for (p, c) in self.directed_edges() {
            out.push_str(&format!("{} -> {}\n", self.name(p), self.name(c)));
        }
        for (a, b) in self.bidirected_edges() {
            out.push_str(&format!("{} <-> {}\n", self.name(a), self.name(b)));
        }
        out
    }

    /// Names of the members of `s`, in index order.
    pub fn names(&self, s: VarSet) -> Vec<&str> {
        s.iter().map(|i| self.name(i)).collect()
    }

    /// Resolves a list of names to a set.
    pub fn set_of(&self, names: &[&str]) -> Result<VarSet, GraphError> {
        names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| GraphError::UnknownVariable(n.to_string()))
            })
            .collect()
    }
}

impl Default for CausalGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CausalGraph")
            .field(
                "variables",
                &self.vars.iter().map(|v| &v.name).collect::<Vec<_>>(),
            )
            .field("directed", &self.directed_edges())
            .field("bidirected", &self.bidirected_edges())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> CausalGraph {
        CausalGraph::parse("X -> Z\nZ -> Y").unwrap()
    }

    fn set(g: &CausalGraph, names: &[&str]) -> VarSet {
        g.set_of(names).unwrap()
    }

    #[test]
    fn ancestors_and_descendants() {
        let g = chain();
        assert_eq!(g.ancestors(set(&g, &["Y"])), set(&g, &["X", "Z", "Y"]));
        assert_eq!(g.descendants(set(&g, &["Y"])), set(&g, &["Y"]));
        assert_eq!(g.descendants(set(&g, &["X"])), g.all());
        assert_eq!(g.ancestors(VarSet::EMPTY), VarSet::EMPTY);
    }

    #[test]
    fn mutilate_incoming_drops_latent_parents() {
        let g = CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y").unwrap();
        let x = g.index_of("X").unwrap();
        let (y, z) = (g.index_of("Y").unwrap(), g.index_of("Z").unwrap());
        let m = g.mutilate(VarSet::singleton(x), VarSet::EMPTY);
        assert!(!m.has_bidirected(x, y));
        assert!(m.has_directed(x, z));
        assert_eq!(g.mutilate(VarSet::EMPTY, VarSet::EMPTY), g);
    }

    #[test]
    fn mutilate_outgoing_only_removes_out_edges() {
        let g = chain();
        let z = g.index_of("Z").unwrap();
        let m = g.mutilate(VarSet::EMPTY, VarSet::singleton(z));
        assert_eq!(m.directed_edges().len(), 1);
        assert!(m.has_directed(g.index_of("X").unwrap(), z));
    }

    #[test]
    fn mutilate_keeps_bidirected_on_outgoing_cut() {
        let g = CausalGraph::parse("X -> Z\nZ -> Y\nZ <-> Y").unwrap();
        let z = g.index_of("Z").unwrap();
        let m = g.mutilate(VarSet::EMPTY, VarSet::singleton(z));
        assert!(m.has_bidirected(z, g.index_of("Y").unwrap()));
    }

    #[test]
    fn d_separation_examples() {
        let g = chain();
        let s = |n: &[&str]| set(&g, n);
        assert!(g.d_separated(s(&["X"]), s(&["Y"]), s(&["Z"])).unwrap());
        assert!(!g.d_separated(s(&["X"]), s(&["Y"]), VarSet::EMPTY).unwrap());

        let fd = CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y").unwrap();
        let s = |n: &[&str]| set(&fd, n);
        assert!(!fd.d_separated(s(&["X"]), s(&["Y"]), s(&["Z"])).unwrap());

        let iso = CausalGraph::parse("W\nX").unwrap();
        let s = |n: &[&str]| set(&iso, n);
        assert!(iso
            .d_separated(s(&["W"]), s(&["X"]), VarSet::EMPTY)
            .unwrap());
    }

    #[test]
    fn d_separation_rejects_overlap() {
        let g = chain();
        let x = set(&g, &["X"]);
        assert_eq!(
            g.d_separated(x, x, VarSet::EMPTY),
            Err(GraphError::OverlappingSets)
        );
        assert_eq!(
            g.d_separated(VarSet::EMPTY, x, VarSet::EMPTY),
            Err(GraphError::OverlappingSets)
        );
        assert_eq!(
            g.d_separated(x, set(&g, &["Y"]), x),
            Err(GraphError::OverlappingSets)
        );
    }

    #[test]
    fn cycle_and_self_loop_rejected() {
        assert!(matches!(
            CausalGraph::parse("X -> Y\nY -> X"),
            Err(GraphError::Cycle(_))
        ));
        assert!(matches!(
            CausalGraph::parse("X -> X"),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            CausalGraph::parse("X <-> X"),
            Err(GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn capacity_is_enforced() {
        let mut g = CausalGraph::new();
        for i in 0..MAX_VARS {
            g.add_variable(&format!("V{i}")).unwrap();
        }
        let err = g.add_variable("extra").unwrap_err();
        assert!(matches!(err, GraphError::Capacity(_)));
        assert!(err.to_string().contains("64"));
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = CausalGraph::parse("Y\nZ -> Y\nX -> Z").unwrap();
        let order = g.topological_order();
        let pos = |n: &str| {
            order
                .iter()
                .position(|&v| v == g.index_of(n).unwrap())
                .unwrap()
        };
        assert!(pos("X") < pos("Z") && pos("Z") < pos("Y"));
    }
}
