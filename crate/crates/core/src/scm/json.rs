//! JSON interchange for models: the base graph in the edge-list DSL, the
//! missing-data map, cardinalities, latents and one table per variable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DiscreteScm, Latent, ScmError};
use crate::graph::{CausalGraph, VarKind};
use crate::varset::VarSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatentJson {
    pub name: String,
    pub children: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CptJson {
    /// Observed parents then latents; the variable's own value varies fastest.
    pub parents: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScmJson {
    pub graph_dsl: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub missing: String,
    pub cardinalities: BTreeMap<String, usize>,
    #[serde(default)]
    pub latents: Vec<LatentJson>,
    pub cpts: BTreeMap<String, CptJson>,
}

/// DSL of the graph without proxies, plus the `R : X` map that restores them.
fn base_graph(g: &CausalGraph) -> (String, String) {
    let mut dsl = String::new();
    let proxies = g.proxies();
    for v in (g.all() - proxies).iter() {
        dsl.push_str(g.name(v));
        dsl.push('\n');
    }
    for (a, b) in g.directed_edges() {
        if !proxies.contains(b) {
            dsl.push_str(&format!("{} -> {}\n", g.name(a), g.name(b)));
        }
    }
    for (a, b) in g.bidirected_edges() {
        dsl.push_str(&format!("{} <-> {}\n", g.name(a), g.name(b)));
    }
    let missing = proxies
        .iter()
        .map(|p| {
            let x = g.true_of(p).unwrap();
            format!("{} : {}", g.name(g.indicator_of(x).unwrap()), g.name(x))
        })
        .collect::<Vec<_>>()
        .join(", ");
    (dsl, missing)
}

fn same_structure(a: &CausalGraph, b: &CausalGraph) -> bool {
    let edges = |g: &CausalGraph| {
        let mut d: Vec<(String, String)> = g
            .directed_edges()
            .into_iter()
            .map(|(x, y)| (g.name(x).to_string(), g.name(y).to_string()))
            .collect();
        d.sort();
        let mut bi: Vec<(String, String)> = g
            .bidirected_edges()
            .into_iter()
            .map(|(x, y)| {
                let (x, y) = (g.name(x).to_string(), g.name(y).to_string());
                if x < y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        bi.sort();
        let mut vars: Vec<(String, VarKind)> = g
            .variables()
            .iter()
            .map(|v| (v.name.clone(), v.kind))
            .collect();
        vars.sort_by(|p, q| p.0.cmp(&q.0));
        (vars, d, bi)
    };
    edges(a) == edges(b)
}

impl DiscreteScm {
    pub fn to_json(&self) -> ScmJson {
        let g = self.graph();
        let (graph_dsl, missing) = base_graph(g);
        let cardinalities = (0..g.len())
            .filter(|&v| g.kind(v) != VarKind::Proxy)
            .map(|v| (g.name(v).to_string(), self.cards()[v]))
            .collect();
        let latents = self
            .latents()
            .iter()
            .map(|l| LatentJson {
                name: l.name.clone(),
                children: g.names(l.children).into_iter().map(String::from).collect(),
                probs: l.probs.clone(),
            })
            .collect();
        let cpts = (0..g.len())
            .filter(|&v| g.kind(v) != VarKind::Proxy)
            .map(|v| {
                let parents = self.parent_list(v).into_iter().map(|(n, _)| n).collect();
                (
                    g.name(v).to_string(),
                    CptJson {
                        parents,
                        values: self.cpt(v).to_vec(),
                    },
                )
            })
            .collect();
        ScmJson {
            graph_dsl,
            missing,
            cardinalities,
            latents,
            cpts,
        }
    }

    /// Rebuilds a model on `g`, which must have the same structure as the
    /// serialized graph. Tables are matched to variables by name.
    pub fn from_json(json: &ScmJson, g: &CausalGraph) -> Result<DiscreteScm, ScmError> {
        let mut own = CausalGraph::parse(&json.graph_dsl)
            .map_err(|e| ScmError::GraphMismatch(e.to_string()))?;
        if !json.missing.trim().is_empty() {
            own = own
                .augment_missing(&json.missing)
                .map_err(|e| ScmError::GraphMismatch(e.to_string()))?;
        }
        if !same_structure(&own, g) {
            return Err(ScmError::GraphMismatch(
                "graph in model file differs from scenario graph".into(),
            ));
        }
        let idx = |n: &str| {
            g.index_of(n)
                .ok_or_else(|| ScmError::UnknownVariable(n.to_string()))
        };
        let mut cards = vec![2; g.len()];
        for (name, &c) in &json.cardinalities {
            cards[idx(name)?] = c;
        }
        let latents = json
            .latents
            .iter()
            .map(|l| {
                let mut children = VarSet::EMPTY;
                for c in &l.children {
                    children.insert(idx(c)?);
                }
                Ok(Latent {
                    name: l.name.clone(),
                    card: l.probs.len(),
                    children,
                    probs: l.probs.clone(),
                })
            })
            .collect::<Result<Vec<_>, ScmError>>()?;
        let mut cpts = vec![Vec::new(); g.len()];
        for (name, cpt) in &json.cpts {
            cpts[idx(name)?] = cpt.values.clone();
        }
        let scm = DiscreteScm::new(g.clone(), cards, latents, cpts)?;
        for (name, cpt) in &json.cpts {
            let v = idx(name)?;
            let expected: Vec<String> = scm.parent_list(v).into_iter().map(|(n, _)| n).collect();
            if g.kind(v) != VarKind::Proxy && expected != cpt.parents {
                return Err(ScmError::GraphMismatch(format!(
                    "table for `{name}` lists parents {:?}, expected {:?}",
                    cpt.parents, expected
                )));
            }
        }
        Ok(scm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_missing_data() {
        let g = CausalGraph::parse("X -> Y\nX <-> Y")
            .unwrap()
            .augment_missing("R_Y : Y, R_X : X")
            .unwrap();
        let m = DiscreteScm::random_binary(&g, 3);
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back: ScmJson = serde_json::from_str(&text).unwrap();
        assert_eq!(DiscreteScm::from_json(&back, &g).unwrap(), m);
    }

    #[test]
    fn mismatched_graph_rejected() {
        let g = CausalGraph::parse("X -> Y").unwrap();
        let m = DiscreteScm::random_binary(&g, 3);
        let other = CausalGraph::parse("Y -> X").unwrap();
        assert!(matches!(
            DiscreteScm::from_json(&m.to_json(), &other),
            Err(ScmError::GraphMismatch(_))
        ));
    }
}
