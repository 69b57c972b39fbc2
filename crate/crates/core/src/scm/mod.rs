//! Fully specified discrete structural causal models and exact enumeration
//! of symbolic terms, used as ground truth.

pub mod constructions;
mod json;
mod random;
mod verify;
mod witness;

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::{ProbTable, Semantics, TableError};
use crate::graph::{CausalGraph, VarKind};
use crate::term::DistributionTerm;
use crate::varset::VarSet;

pub use json::{CptJson, LatentJson, ScmJson};
pub use verify::{verify_formula, VerifyError, VerifyReport};
pub use witness::{check_witness, WitnessPair, WitnessReport};

const ROW_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScmError {
    #[error("variable `{0}` has no conditional probability table")]
    MissingCpt(String),
    #[error("table for `{name}` has {got} entries, expected {expected}")]
    CptSize {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("a row of the table for `{0}` does not sum to 1")]
    RowNotNormalized(String),
    #[error("negative probability in the table for `{0}`")]
    Negative(String),
    #[error("latent `{latent}` confounds `{a}` and `{b}`, which share no bidirected edge")]
    InconsistentLatent {
        latent: String,
        a: String,
        b: String,
    },
    #[error("latent `{0}` points to a proxy")]
    LatentOnProxy(String),
    #[error("variable `{0}` must be binary")]
    NotBinary(String),
    #[error("cardinality of `{0}` must be at least 1")]
    Cardinality(String),
    #[error("conditioning event has zero probability in {0}")]
    ZeroProbability(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("model does not match the graph: {0}")]
    GraphMismatch(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// An exogenous variable shared by a set of observed children.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent {
    pub name: String,
    pub card: usize,
    pub children: VarSet,
    pub probs: Vec<f64>,
}

/// A discrete SCM over a causal graph. Each observed variable has a table
/// indexed by its observed parents (ascending index), then its latent
/// parents (declaration order), with the variable's own value varying
/// fastest. Proxies are deterministic: `X* = X` when `R_X = 1`, otherwise
/// the extra category `NA` (index `card(X)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    graph: CausalGraph,
    cards: Vec<usize>,
    latents: Vec<Latent>,
    cpts: Vec<Vec<f64>>,
    latent_parents: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl DiscreteScm {
    /// Assembles a model. Proxy tables and cardinalities are derived, so
    /// entries given for proxies are ignored.
    pub fn new(
        graph: CausalGraph,
        cards: Vec<usize>,
        latents: Vec<Latent>,
        mut cpts: Vec<Vec<f64>>,
    ) -> Result<Self, ScmError> {
        let n = graph.len();
        let mut cards = cards;
        cards.resize(n, 2);
        cpts.resize(n, Vec::new());
        for v in 0..n {
            match graph.kind(v) {
                VarKind::ResponseIndicator if cards[v] != 2 => {
                    return Err(ScmError::NotBinary(graph.name(v).to_string()))
                }
                VarKind::Proxy => cards[v] = cards[graph.true_of(v).unwrap()] + 1,
                _ if cards[v] == 0 => return Err(ScmError::Cardinality(graph.name(v).to_string())),
                _ => {}
            }
        }
        for l in &latents {
            let kids: Vec<usize> = l.children.iter().collect();
            for (i, &a) in kids.iter().enumerate() {
                if graph.kind(a) == VarKind::Proxy {
                    return Err(ScmError::LatentOnProxy(l.name.clone()));
                }
                for &b in &kids[i + 1..] {
                    if !graph.has_bidirected(a, b) {
                        return Err(ScmError::InconsistentLatent {
                            latent: l.name.clone(),
                            a: graph.name(a).into(),
                            b: graph.name(b).into(),
                        });
                    }
                }
            }
            check_rows(&l.name, &l.probs, l.card)?;
        }
        let latent_parents: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                (0..latents.len())
                    .filter(|&l| latents[l].children.contains(v))
                    .collect()
            })
            .collect();
        let mut scm = DiscreteScm {
            order: graph.topological_order(),
            graph,
            cards,
            latents,
            cpts,
            latent_parents,
        };
        for v in 0..n {
            if scm.graph.kind(v) == VarKind::Proxy {
                scm.cpts[v] = scm.proxy_table(v);
            }
            let expected = scm.parent_configs(v) * scm.cards[v];
            let name = scm.graph.name(v).to_string();
            if scm.cpts[v].is_empty() {
                return Err(ScmError::MissingCpt(name));
            }
            if scm.cpts[v].len() != expected {
                return Err(ScmError::CptSize {
                    name,
                    expected,
                    got: scm.cpts[v].len(),
                });
            }
            check_rows(&name, &scm.cpts[v], scm.cards[v])?;
        }
        Ok(scm)
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn latents(&self) -> &[Latent] {
        &self.latents
    }

    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    /// Observed parents followed by latent parents, as `(name, card)`.
    pub fn parent_list(&self, v: usize) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = self
            .graph
            .parents(v)
            .iter()
            .map(|p| (self.graph.name(p).to_string(), self.cards[p]))
            .collect();
        out.extend(
            self.latent_parents[v]
                .iter()
                .map(|&l| (self.latents[l].name.clone(), self.latents[l].card)),
        );
        out
    }

    fn parent_configs(&self, v: usize) -> usize {
        self.parent_list(v).iter().map(|(_, c)| c).product()
    }

    fn proxy_table(&self, proxy: usize) -> Vec<f64> {
        let x = self.graph.true_of(proxy).unwrap();
        let r = self.graph.indicator_of(x).unwrap();
        let card = self.cards[proxy];
        let mut out = Vec::new();
        let parents: Vec<usize> = self.graph.parents(proxy).iter().collect();
        let pcards: Vec<usize> = parents.iter().map(|&p| self.cards[p]).collect();
        let configs: usize = pcards.iter().product();
        for cfg in 0..configs {
            let vals = decode(cfg, &pcards);
            let xv = vals[parents.iter().position(|&p| p == x).unwrap()];
            let rv = vals[parents.iter().position(|&p| p == r).unwrap()];
            let value = if rv == 1 { xv } else { card - 1 };
            out.extend((0..card).map(|k| if k == value { 1.0 } else { 0.0 }));
        }
        out
    }

    fn prob(&self, v: usize, assign: &[usize], lat: &[usize], value: usize) -> f64 {
        let mut idx = 0;
        for p in self.graph.parents(v).iter() {
            idx = idx * self.cards[p] + assign[p];
        }
        for &l in &self.latent_parents[v] {
            idx = idx * self.latents[l].card + lat[l];
        }
        self.cpts[v][idx * self.cards[v] + value]
    }

    /// Joint distribution of all observed variables under `do(dos = values)`,
    /// indexed row-major in variable order.
    pub fn joint(&self, intervention: &[(usize, usize)]) -> ProbTable {
        let n = self.graph.len();
        let size: usize = self.cards.iter().product();
        let mut values = vec![0.0; size];
        let lcards: Vec<usize> = self.latents.iter().map(|l| l.card).collect();
        let lconfigs: usize = lcards.iter().product();
        let mut forced = vec![None; n];
        for &(v, x) in intervention {
            forced[v] = Some(x);
        }
        let mut assign = vec![0; n];
        for lc in 0..lconfigs {
            let lat = decode(lc, &lcards);
            let w: f64 = lat
                .iter()
                .enumerate()
                .map(|(l, &u)| self.latents[l].probs[u])
                .product();
            if w == 0.0 {
                continue;
            }
            self.walk(0, &forced, &lat, &mut assign, w, &mut values);
        }
        ProbTable::new((0..n).collect(), self.cards.clone(), values)
            .expect("joint size")
            .with_semantics(Semantics::Joint)
    }

    fn walk(
        &self,
        k: usize,
        forced: &[Option<usize>],
        lat: &[usize],
        assign: &mut [usize],
        p: f64,
        out: &mut [f64],
    ) {
        if k == self.order.len() {
            let mut idx = 0;
            for (v, &a) in assign.iter().enumerate() {
                idx = idx * self.cards[v] + a;
            }
            out[idx] += p;
            return;
        }
        let v = self.order[k];
        if let Some(x) = forced[v] {
            assign[v] = x;
            self.walk(k + 1, forced, lat, assign, p, out);
            return;
        }
        for value in 0..self.cards[v] {
            let q = self.prob(v, assign, lat, value);
            if q == 0.0 {
                continue;
            }
            assign[v] = value;
            self.walk(k + 1, forced, lat, assign, p * q, out);
        }
    }

    /// Exact table of a symbolic term over `left ∪ dos ∪ cond`.
    pub fn enumerate_term(&self, t: &DistributionTerm) -> Result<ProbTable, ScmError> {
        let g = &self.graph;
        let dos: Vec<usize> = t.dos().iter().collect();
        let dcards: Vec<usize> = dos.iter().map(|&d| self.cards[d]).collect();
        let dconfigs: usize = dcards.iter().product();
        let mut cache: HashMap<usize, ProbTable> = HashMap::new();
        for cfg in 0..dconfigs {
            let vals = decode(cfg, &dcards);
            let intervention: Vec<(usize, usize)> = dos.iter().copied().zip(vals).collect();
            let joint = self.joint(&intervention);
            cache.insert(cfg, self.term_from_joint(t, &joint)?);
        }
        let scope = t.scope();
        let vars: Vec<usize> = scope.iter().collect();
        let cards: Vec<usize> = vars.iter().map(|&v| self.cards[v]).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        for flat in 0..size {
            let a = decode(flat, &cards);
            let mut cfg = 0;
            for (&d, &c) in dos.iter().zip(&dcards) {
                cfg = cfg * c + a[vars.iter().position(|&v| v == d).unwrap()];
            }
            let sub = &cache[&cfg];
            let sub_assign: Vec<usize> = sub
                .vars()
                .iter()
                .map(|sv| a[vars.iter().position(|v| v == sv).unwrap()])
                .collect();
            values.push(sub.get(&sub_assign));
        }
        let names = |s: VarSet| g.names(s).into_iter().map(String::from).collect::<Vec<_>>();
        let semantics = if !t.dos().is_empty() {
            Semantics::Interventional(names(t.dos()))
        } else if !t.conditioning().is_empty() {
            Semantics::Conditional(names(t.conditioning()))
        } else {
            Semantics::Joint
        };
        Ok(ProbTable::new(vars, cards, values)?.with_semantics(semantics))
    }

    fn term_from_joint(
        &self,
        t: &DistributionTerm,
        joint: &ProbTable,
    ) -> Result<ProbTable, ScmError> {
        let kept = t.mentioned() - t.dos();
        let marg = joint.sum_out(self.graph.all() - kept);
        let fix = |mut tab: ProbTable| -> Result<ProbTable, ScmError> {
            for v in (tab.scope() & (t.left_fixed() | t.fixed_one())).iter() {
                tab = tab.slice(v, 1)?;
            }
            for v in (tab.scope() & t.fixed_zero()).iter() {
                tab = tab.slice(v, 0)?;
            }
            Ok(tab)
        };
        let num = fix(marg.clone())?;
        if t.conditioning().is_empty() {
            return Ok(num);
        }
        let den = fix(marg.sum_out(t.outcome()))?;
        let mut zeros = 0;
        let out = num.divide(&den, &mut zeros, Some(&self.graph))?;
        if zeros > 0 || den.values().contains(&0.0) {
            return Err(ScmError::ZeroProbability(t.render(&self.graph, "P")));
        }
        Ok(out)
    }
}

fn decode(mut index: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for i in (0..cards.len()).rev() {
        out[i] = index % cards[i];
        index /= cards[i];
    }
    out
}

fn check_rows(name: &str, values: &[f64], card: usize) -> Result<(), ScmError> {
    if card == 0 || !values.len().is_multiple_of(card) {
        return Err(ScmError::CptSize {
            name: name.into(),
            expected: card,
            got: values.len(),
        });
    }
    if values.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(ScmError::Negative(name.into()));
    }
    for row in values.chunks(card) {
        if (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return Err(ScmError::RowNotNormalized(name.into()));
        }
    }
    Ok(())
}

/// Builds models by name, with binary variables by default.
pub struct ScmBuilder {
    graph: CausalGraph,
    cards: Vec<usize>,
    latents: Vec<Latent>,
    cpts: Vec<Vec<f64>>,
}

/// Parent values visible to a table-filling closure, keyed by name.
pub type ParentValues<'a> = HashMap<&'a str, usize>;

impl ScmBuilder {
    pub fn new(graph: CausalGraph) -> Self {
        let n = graph.len();
        ScmBuilder {
            graph,
            cards: vec![2; n],
            latents: Vec::new(),
            cpts: vec![Vec::new(); n],
        }
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn card(mut self, name: &str, card: usize) -> Result<Self, ScmError> {
        let v = self.index(name)?;
        self.cards[v] = card;
        Ok(self)
    }

    fn index(&self, name: &str) -> Result<usize, ScmError> {
        self.graph
            .index_of(name)
            .ok_or_else(|| ScmError::UnknownVariable(name.to_string()))
    }

    /// Binary latent with `P(name = 1) = p1` over the given children.
    pub fn latent(mut self, name: &str, children: &[&str], p1: f64) -> Result<Self, ScmError> {
        let mut kids = VarSet::EMPTY;
        for c in children {
            kids.insert(self.index(c)?);
        }
        self.latents.push(Latent {
            name: name.to_string(),
            card: 2,
            children: kids,
            probs: vec![1.0 - p1, p1],
        });
        Ok(self)
    }

    /// Binary variable with `P(name = 1 | parents) = f(parents)`.
    pub fn binary(self, name: &str, f: impl Fn(&ParentValues) -> f64) -> Result<Self, ScmError> {
        self.table(name, |pv| {
            let p = f(pv);
            vec![1.0 - p, p]
        })
    }

    /// General variable: `f` returns the distribution of `name` given parents.
    pub fn table(
        mut self,
        name: &str,
        f: impl Fn(&ParentValues) -> Vec<f64>,
    ) -> Result<Self, ScmError> {
        let v = self.index(name)?;
        let mut parents: Vec<(String, usize)> = self
            .graph
            .parents(v)
            .iter()
            .map(|p| (self.graph.name(p).to_string(), self.cards[p]))
            .collect();
        parents.extend(
            self.latents
                .iter()
                .filter(|l| l.children.contains(v))
                .map(|l| (l.name.clone(), l.card)),
        );
        let pcards: Vec<usize> = parents.iter().map(|(_, c)| *c).collect();
        let configs: usize = pcards.iter().product();
        let mut values = Vec::with_capacity(configs * self.cards[v]);
        for cfg in 0..configs {
            let vals = decode(cfg, &pcards);
            let pv: ParentValues = parents.iter().map(|(n, _)| n.as_str()).zip(vals).collect();
            let row = f(&pv);
            if row.len() != self.cards[v] {
                return Err(ScmError::CptSize {
                    name: name.into(),
                    expected: self.cards[v],
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        self.cpts[v] = values;
        Ok(self)
    }

    pub fn build(self) -> Result<DiscreteScm, ScmError> {
        DiscreteScm::new(self.graph, self.cards, self.latents, self.cpts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_scm() -> DiscreteScm {
        let g = CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y").unwrap();
        ScmBuilder::new(g)
            .latent("U", &["X", "Y"], 0.3)
            .unwrap()
            .binary("X", |pv| if pv["U"] == 1 { 0.8 } else { 0.2 })
            .unwrap()
            .binary("Z", |pv| if pv["X"] == 1 { 0.9 } else { 0.1 })
            .unwrap()
            .binary("Y", |pv| 0.1 + 0.5 * pv["Z"] as f64 + 0.3 * pv["U"] as f64)
            .unwrap()
            .build()
            .unwrap()
    }

    fn term(s: &str, g: &CausalGraph) -> DistributionTerm {
        DistributionTerm::parse(s, g).unwrap()
    }

    #[test]
    fn joint_normalizes() {
        let m = fd_scm();
        assert!((m.joint(&[]).total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interventional_matches_hand_computation() {
        let m = fd_scm();
        let g = m.graph().clone();
        let t = m.enumerate_term(&term("P(Y|do(X))", &g)).unwrap();
        // P(Y=1|do(X=1)) = sum_u P(u) sum_z P(z|X=1) P(Y=1|z,u)
        let expect = |x: usize| {
            let pz1 = if x == 1 { 0.9 } else { 0.1 };
            let mut s = 0.0;
            for (u, pu) in [(0, 0.7), (1, 0.3)] {
                for (z, pz) in [(0, 1.0 - pz1), (1, pz1)] {
                    s += pu * pz * (0.1 + 0.5 * z as f64 + 0.3 * u as f64);
                }
            }
            s
        };
        assert!((t.get(&[1, 1]) - expect(1)).abs() < 1e-12);
        assert!((t.get(&[0, 1]) - expect(0)).abs() < 1e-12);
        assert!((t.get(&[0, 0]) + t.get(&[0, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_rows_normalize() {
        let m = fd_scm();
        let g = m.graph().clone();
        let t = m.enumerate_term(&term("P(Y|Z,X)", &g)).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert!((t.get(&[x, z, 0]) + t.get(&[x, z, 1]) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn point_mass_model_is_degenerate() {
        let g = CausalGraph::parse("X -> Y").unwrap();
        let m = ScmBuilder::new(g.clone())
            .binary("X", |_| 1.0)
            .unwrap()
            .binary("Y", |pv| pv["X"] as f64)
            .unwrap()
            .build()
            .unwrap();
        let t = m.enumerate_term(&term("P(X,Y)", &g)).unwrap();
        assert_eq!(t.values(), &[0.0, 0.0, 0.0, 1.0]);
        let d = m.enumerate_term(&term("P(Y|do(X))", &g)).unwrap();
        assert_eq!(d.values(), &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            m.enumerate_term(&term("P(Y|X)", &g)),
            Err(ScmError::ZeroProbability(_))
        ));
    }

    #[test]
    fn proxy_consistency() {
        let g = CausalGraph::parse("X -> Y\nX -> R_Y")
            .unwrap()
            .augment_missing("R_X : X, R_Y : Y")
            .unwrap();
        let m = DiscreteScm::random(&g, &vec![2; g.len()], 7).unwrap();
        let xs = g.index_of("X*").unwrap();
        let rx = g.index_of("R_X").unwrap();
        assert_eq!(m.cards()[xs], 3);
        let proxy = m.enumerate_term(&term("P(X*,R_X=1)", &g)).unwrap();
        let truth = m.enumerate_term(&term("P(X,R_X=1)", &g)).unwrap();
        for x in 0..2 {
            assert_eq!(proxy.get(&[x]), truth.get(&[x]));
        }
        let na = m.enumerate_term(&term("P(X*,R_X)", &g)).unwrap();
        assert_eq!(na.vars(), &[rx, xs]);
        assert_eq!(na.get(&[1, 2]), 0.0);
        assert_eq!(na.get(&[0, 0]), 0.0);
    }

    #[test]
    fn latent_must_follow_bidirected_edges() {
        let g = CausalGraph::parse("X -> Y").unwrap();
        let err = ScmBuilder::new(g)
            .latent("U", &["X", "Y"], 0.5)
            .unwrap()
            .build();
        assert!(matches!(err, Err(ScmError::InconsistentLatent { .. })));
    }

    #[test]
    fn rows_must_normalize() {
        let g = CausalGraph::parse("X").unwrap();
        let err = ScmBuilder::new(g)
            .table("X", |_| vec![0.5, 0.6])
            .unwrap()
            .build();
        assert!(matches!(err, Err(ScmError::RowNotNormalized(_))));
    }
}
