//! Breadth-first derivation search over do-calculus and probability rules.

mod expr;
pub mod rules;
mod search;

use std::time::Duration;

use serde::Serialize;

use crate::formula::Formula;
use crate::graph::CausalGraph;
use crate::term::{DistributionTerm, QuerySpec};
use crate::varset::VarSet;

pub use rules::Rule;
pub use search::identify;

use expr::{Expr, ExprRef};

/// Resource limits; whichever is hit first ends the search inconclusively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchLimits {
    pub max_terms: usize,
    pub max_time: Duration,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_terms: 2_000_000,
            max_time: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    Terms,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "limit")]
pub enum Verdict {
    Identifiable,
    /// The rule closure was exhausted without reaching the target.
    NotIdentifiable,
    Inconclusive(LimitKind),
}

/// One rule application: `produced` follows from `parents`. `params` holds
/// the moved or summed variables, when the rule has any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub rule: Rule,
    pub parents: Vec<DistributionTerm>,
    pub produced: DistributionTerm,
    pub params: VarSet,
}

impl DerivationStep {
    pub fn render(&self, g: &CausalGraph) -> String {
        let parents: Vec<String> = self.parents.iter().map(|p| p.render(g, "P")).collect();
        let mut s = format!("{} <= {}", self.produced.render(g, "P"), self.rule.label());
        if !self.params.is_empty() {
            s.push_str(&format!(" [{}]", g.names(self.params).join(",")));
        }
        if !parents.is_empty() {
            s.push_str(" from ");
            s.push_str(&parents.join(" and "));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub terms_generated: usize,
    pub steps_applied: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct IdentifyResult {
    pub verdict: Verdict,
    pub formula: Option<Formula>,
    /// Steps leading to the target, parents before children.
    pub trace: Vec<DerivationStep>,
    pub stats: SearchStats,
}

impl IdentifyResult {
    pub fn identifiable(&self) -> bool {
        self.verdict == Verdict::Identifiable
    }
}

/// Rebuilds the formula of the last step's term by replaying the trace.
pub fn reconstruct(trace: &[DerivationStep], g: &CausalGraph) -> Option<Formula> {
    let mut known: Vec<(DistributionTerm, ExprRef)> = Vec::new();
    let lookup = |known: &[(DistributionTerm, ExprRef)], t: &DistributionTerm| {
        known.iter().find(|(k, _)| k == t).map(|(_, e)| e.clone())
    };
    for step in trace {
        let e = if step.rule == Rule::Input {
            std::rc::Rc::new(Expr::Atom(step.produced))
        } else {
            let parents = step
                .parents
                .iter()
                .map(|p| lookup(&known, p).map(|e| (*p, e)))
                .collect::<Option<Vec<_>>>()?;
            search::formula_for(step.rule, step.params, &parents, &step.produced, g)?
        };
        known.push((step.produced, e));
    }
    known.last().map(|(_, e)| e.to_formula())
}

/// Convenience wrapper with default limits.
pub fn identify_default(spec: &QuerySpec) -> IdentifyResult {
    identify(spec, SearchLimits::default())
}
