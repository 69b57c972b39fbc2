use std::rc::Rc;
use std::time::Instant;

use rustc_hash::FxHashMap;

use super::expr::{self, Expr, ExprRef};
use super::rules::{self, Rule};
use super::{DerivationStep, IdentifyResult, LimitKind, SearchLimits, SearchStats, Verdict};
use crate::graph::{CausalGraph, VarKind};
use crate::term::{DistributionTerm, QuerySpec};
use crate::varset::VarSet;

const NONE: u32 = u32::MAX;

struct Record {
    term: DistributionTerm,
    expr: ExprRef,
    rule: Rule,
    parents: [u32; 2],
    params: VarSet,
}

type Context = (VarSet, VarSet, VarSet, VarSet);

fn context(dos: VarSet, cond: VarSet, fixed_one: VarSet, fixed_zero: VarSet) -> Context {
    (dos, cond, fixed_one, fixed_zero)
}

struct Search<'a> {
    g: &'a CausalGraph,
    target: DistributionTerm,
    limits: SearchLimits,
    start: Instant,
    records: Vec<Record>,
    index: FxHashMap<DistributionTerm, u32>,
    by_context: FxHashMap<Context, Vec<u32>>,
    steps: usize,
    found: Option<u32>,
    stop: Option<LimitKind>,
    proxies: VarSet,
    indicators: VarSet,
}

/// Searches for a derivation of `spec.target` from `spec.inputs`.
///
/// Terms are expanded in the order they were first derived. Each expansion
/// applies the unary rules, then pairs the term with every term expanded
/// before it (or itself) under the product and quotient rules. The first
/// derivation of a term is kept; the search stops as soon as the target is
/// derived, when no new term can be derived, or when a limit is hit.
pub fn identify(spec: &QuerySpec, limits: SearchLimits) -> IdentifyResult {
    let g = &spec.graph;
    let mut s = Search {
        g,
        target: spec.target,
        limits,
        start: Instant::now(),
        records: Vec::new(),
        index: FxHashMap::default(),
        by_context: FxHashMap::default(),
        steps: 0,
        found: None,
        stop: None,
        proxies: g.set_of_kind(VarKind::Proxy),
        indicators: g.set_of_kind(VarKind::ResponseIndicator),
    };
    for t in &spec.inputs {
        s.add(*t, Rule::Input, [NONE, NONE], VarSet::EMPTY);
    }
    let mut cursor = 0;
    while s.found.is_none() && s.stop.is_none() && cursor < s.records.len() {
        if s.start.elapsed() > s.limits.max_time {
            s.stop = Some(LimitKind::Time);
            break;
        }
        s.expand(cursor as u32);
        cursor += 1;
    }
    s.finish()
}

/// Formula of a term produced by `rule` from `parents`.
pub(super) fn formula_for(
    rule: Rule,
    params: VarSet,
    parents: &[(DistributionTerm, ExprRef)],
    produced: &DistributionTerm,
    g: &CausalGraph,
) -> Option<ExprRef> {
    let aligned = |t: &DistributionTerm, f: &ExprRef| match &**f {
        Expr::Atom(s) if s.left() == t.left() && s.left_fixed() == t.left_fixed() => Some(*s),
        _ => None,
    };
    Some(match rule {
        Rule::Input => Rc::new(Expr::Atom(*produced)),
        Rule::Marginalize => {
            let (t, f) = &parents[0];
            match aligned(t, f) {
                Some(s) => Rc::new(Expr::Atom(rules::marginalize(&s, params))),
                None => Rc::new(Expr::Sum(params, f.clone())),
            }
        }
        Rule::Condition => {
            let (t, f) = &parents[0];
            match aligned(t, f) {
                Some(s) => Rc::new(Expr::Atom(rules::condition(&s, params))),
                None => Rc::new(Expr::Quotient(
                    f.clone(),
                    Rc::new(Expr::Sum(t.left() - params, f.clone())),
                )),
            }
        }
        Rule::FixIndicator => expr::fix_indicator(&parents[0].1, params.first()?)?,
        Rule::ExchangeProxy => {
            let p = params.first()?;
            let x = g.true_of(p)?;
            expr::exchange_proxy(&parents[0].1, p, x, g.indicator_of(x)?)?
        }
        Rule::DeleteObservation
        | Rule::InsertObservation
        | Rule::ActionToObservation
        | Rule::ObservationToAction
        | Rule::DeleteAction
        | Rule::InsertAction => parents[0].1.clone(),
        Rule::ChainProduct => Rc::new(Expr::Product(vec![
            parents[1].1.clone(),
            parents[0].1.clone(),
        ])),
        Rule::ChainQuotient => Rc::new(Expr::Quotient(parents[0].1.clone(), parents[1].1.clone())),
    })
}

/// Empty set followed by the nonempty subsets of `s`.
fn all_subsets(s: VarSet) -> impl Iterator<Item = VarSet> {
    std::iter::once(VarSet::EMPTY).chain(s.nonempty_subsets())
}

impl<'a> Search<'a> {
    fn add(&mut self, term: DistributionTerm, rule: Rule, parents: [u32; 2], params: VarSet) {
        if self.found.is_some() || self.stop.is_some() {
            return;
        }
        self.steps += 1;
        if !term.is_valid() || self.index.contains_key(&term) {
            return;
        }
        let parent_exprs: Vec<(DistributionTerm, ExprRef)> = parents
            .iter()
            .filter(|&&p| p != NONE)
            .map(|&p| {
                let r = &self.records[p as usize];
                (r.term, r.expr.clone())
            })
            .collect();
        let Some(expr) = formula_for(rule, params, &parent_exprs, &term, self.g) else {
            return;
        };
        let id = self.records.len() as u32;
        self.records.push(Record {
            term,
            expr,
            rule,
            parents,
            params,
        });
        self.index.insert(term, id);
        if term == self.target {
            self.found = Some(id);
        } else if self.records.len() >= self.limits.max_terms {
            self.stop = Some(LimitKind::Terms);
        }
    }

    fn known(&self, t: &DistributionTerm, upto: u32) -> Option<u32> {
        self.index.get(t).copied().filter(|&i| i <= upto)
    }

    /// Variables that may be added to `t` as observations or actions.
    fn insertable(&self, t: &DistributionTerm) -> VarSet {
        let mentioned = t.mentioned();
        let mut out = self.g.all() - mentioned - self.proxies;
        for v in out.iter() {
            if self.g.proxy_of(v).is_some_and(|p| mentioned.contains(p)) {
                out.remove(v);
            }
        }
        out
    }

    fn expand(&mut self, id: u32) {
        let t = self.records[id as usize].term;
        let g = self.g;
        self.by_context
            .entry(context(t.dos(), t.cond(), t.fixed_one(), t.fixed_zero()))
            .or_default()
            .push(id);
        let one = [id, NONE];

        for s in t.left().nonempty_subsets() {
            let m = rules::marginalize(&t, s);
            if !m.outcome().is_empty() {
                self.add(m, Rule::Marginalize, one, s);
            }
        }
        for s in all_subsets(t.left()) {
            if s != t.left() && !(s.is_empty() && t.left_fixed().is_empty()) {
                self.add(rules::condition(&t, s), Rule::Condition, one, s);
            }
        }
        for r in ((t.left() | t.cond()) & self.indicators).iter() {
            self.add(
                rules::fix_indicator(&t, r),
                Rule::FixIndicator,
                one,
                VarSet::singleton(r),
            );
        }
        for p in ((t.left() | t.cond()) & self.proxies).iter() {
            let x = g.true_of(p).expect("proxy has a true variable");
            let r = g.indicator_of(x).expect("proxy has an indicator");
            let fixed = if t.left().contains(p) {
                t.fixed_one() | t.left_fixed()
            } else {
                t.fixed_one()
            };
            if fixed.contains(r) && !t.mentioned().contains(x) {
                self.add(
                    rules::exchange(&t, p, x),
                    Rule::ExchangeProxy,
                    one,
                    VarSet::singleton(p),
                );
            }
        }
        for s in t.conditioning().nonempty_subsets() {
            if rules::rule1_holds(g, &t, s) {
                self.add(
                    rules::delete_observation(&t, s),
                    Rule::DeleteObservation,
                    one,
                    s,
                );
            }
        }
        let free = self.insertable(&t);
        for s in free.nonempty_subsets() {
            let big = t.with_cond(t.cond() | s);
            if rules::rule1_holds(g, &big, s) {
                self.add(big, Rule::InsertObservation, one, s);
            }
        }
        for s in t.dos().nonempty_subsets() {
            if rules::rule2_holds(g, &t, s) {
                self.add(
                    rules::action_to_observation(&t, s),
                    Rule::ActionToObservation,
                    one,
                    s,
                );
            }
        }
        for s in (t.cond() - self.indicators).nonempty_subsets() {
            let big = rules::observation_to_action(&t, s);
            if rules::rule2_holds(g, &big, s) {
                self.add(big, Rule::ObservationToAction, one, s);
            }
        }
        for s in t.dos().nonempty_subsets() {
            if rules::rule3_holds(g, &t, s) {
                self.add(t.with_dos(t.dos() - s), Rule::DeleteAction, one, s);
            }
        }
        for s in (free - self.indicators).nonempty_subsets() {
            let big = t.with_dos(t.dos() | s);
            if rules::rule3_holds(g, &big, s) {
                self.add(big, Rule::InsertAction, one, s);
            }
        }
        self.pair(id, t);
    }

    fn pair(&mut self, id: u32, t: DistributionTerm) {
        // t as P(A | do(B), D, C): look up P(D | do(B), C)
        for d in (t.cond() | t.fixed_one()).nonempty_subsets() {
            let d_sym = d & t.cond();
            let d_fix = d & t.fixed_one();
            let t2 = t
                .with_left(d_sym, d_fix)
                .with_cond(t.cond() - d_sym)
                .with_fixed(t.fixed_one() - d_fix, t.fixed_zero());
            if let Some(j) = self.known(&t2, id) {
                if let Some(p) = rules::product_compose(&t, &t2) {
                    self.add(p, Rule::ChainProduct, [id, j], VarSet::EMPTY);
                }
            }
        }
        // t as P(D | do(B), C): every expanded P(A | do(B), D, C)
        let key = context(
            t.dos(),
            t.cond() | t.left(),
            t.fixed_one() | t.left_fixed(),
            t.fixed_zero(),
        );
        if let Some(list) = self.by_context.get(&key).cloned() {
            for j in list {
                let t1 = self.records[j as usize].term;
                if let Some(p) = rules::product_compose(&t1, &t) {
                    self.add(p, Rule::ChainProduct, [j, id], VarSet::EMPTY);
                }
            }
        }
        // t as the joint P(A, D | ...), with the first factor carrying a fixed indicator
        for l1 in t.left_fixed().nonempty_subsets() {
            for a1 in all_subsets(t.left()) {
                let (a2, l2) = (t.left() - a1, t.left_fixed() - l1);
                if (a2 | l2).is_empty() {
                    continue;
                }
                let t1 = t
                    .with_left(a1, l1)
                    .with_cond(t.cond() | a2)
                    .with_fixed(t.fixed_one() | l2, t.fixed_zero());
                if let Some(j) = self.known(&t1, id) {
                    let t2 = t.with_left(a2, l2);
                    self.add(t2, Rule::ChainQuotient, [id, j], VarSet::EMPTY);
                }
            }
        }
        // t as the first factor: look up the joint
        if !t.left_fixed().is_empty() {
            for a2 in all_subsets(t.cond()) {
                for l2 in all_subsets(t.fixed_one()) {
                    if (a2 | l2).is_empty() {
                        continue;
                    }
                    let joint = t
                        .with_left(t.left() | a2, t.left_fixed() | l2)
                        .with_cond(t.cond() - a2)
                        .with_fixed(t.fixed_one() - l2, t.fixed_zero());
                    if let Some(j) = self.known(&joint, id) {
                        let t2 = joint.with_left(a2, l2);
                        self.add(t2, Rule::ChainQuotient, [j, id], VarSet::EMPTY);
                    }
                }
            }
        }
    }

    fn finish(self) -> IdentifyResult {
        let stats = SearchStats {
            terms_generated: self.records.len(),
            steps_applied: self.steps,
            wall_time: self.start.elapsed().as_secs_f64(),
        };
        let Some(found) = self.found else {
            let verdict = match self.stop {
                Some(kind) => Verdict::Inconclusive(kind),
                None => Verdict::NotIdentifiable,
            };
            return IdentifyResult {
                verdict,
                formula: None,
                trace: Vec::new(),
                stats,
            };
        };
        let mut needed = vec![false; self.records.len()];
        let mut stack = vec![found];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut needed[i as usize], true) {
                continue;
            }
            stack.extend(
                self.records[i as usize]
                    .parents
                    .iter()
                    .filter(|&&p| p != NONE),
            );
        }
        let trace = (0..self.records.len())
            .filter(|&i| needed[i])
            .map(|i| {
                let r = &self.records[i];
                DerivationStep {
                    rule: r.rule,
                    parents: r
                        .parents
                        .iter()
                        .filter(|&&p| p != NONE)
                        .map(|&p| self.records[p as usize].term)
                        .collect(),
                    produced: r.term,
                    params: r.params,
                }
            })
            .collect();
        IdentifyResult {
            verdict: Verdict::Identifiable,
            formula: Some(self.records[found as usize].expr.to_formula()),
            trace,
            stats,
        }
    }
}
