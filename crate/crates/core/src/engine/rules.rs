//! Applicability of the three do-calculus rules and the probability rules,
//! stated on terms. Every check takes the form of the term that carries the
//! moved set `s`, so insertion and deletion share one test.

use serde::Serialize;

use crate::graph::{CausalGraph, GraphView};
use crate::term::DistributionTerm;
use crate::varset::VarSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Input,
    Marginalize,
    Condition,
    FixIndicator,
    ExchangeProxy,
    /// Rule 1, observation removed.
    DeleteObservation,
    /// Rule 1, observation added.
    InsertObservation,
    /// Rule 2, `do(S)` replaced by conditioning on `S`.
    ActionToObservation,
    /// Rule 2, conditioning on `S` replaced by `do(S)`.
    ObservationToAction,
    /// Rule 3, `do(S)` removed.
    DeleteAction,
    /// Rule 3, `do(S)` added.
    InsertAction,
    /// `P(A|D,C) P(D|C) = P(A,D|C)`.
    ChainProduct,
    /// `P(A,D|C) / P(A|D,C) = P(D|C)`.
    ChainQuotient,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Input => "input",
            Rule::Marginalize => "marginalize",
            Rule::Condition => "condition",
            Rule::FixIndicator => "fix indicator",
            Rule::ExchangeProxy => "exchange proxy",
            Rule::DeleteObservation => "rule 1 (delete observation)",
            Rule::InsertObservation => "rule 1 (insert observation)",
            Rule::ActionToObservation => "rule 2 (action to observation)",
            Rule::ObservationToAction => "rule 2 (observation to action)",
            Rule::DeleteAction => "rule 3 (delete action)",
            Rule::InsertAction => "rule 3 (insert action)",
            Rule::ChainProduct => "product",
            Rule::ChainQuotient => "quotient",
        }
    }
}

fn separated(
    g: &CausalGraph,
    cut_in: VarSet,
    cut_out: VarSet,
    a: VarSet,
    b: VarSet,
    c: VarSet,
) -> bool {
    GraphView::cut(g, cut_in, cut_out).d_separated(a, b, c)
}

/// Rule 1 on `t` with `s ⊆ conditioning(t)`:
/// outcome ⊥ s | dos ∪ (conditioning \ s) in the graph without arrows into dos.
pub fn rule1_holds(g: &CausalGraph, t: &DistributionTerm, s: VarSet) -> bool {
    debug_assert!(s.is_subset(t.conditioning()));
    separated(
        g,
        t.dos(),
        VarSet::EMPTY,
        t.outcome(),
        s,
        t.dos() | (t.conditioning() - s),
    )
}

/// Rule 2 on `t` with `s ⊆ dos(t)`: outcome ⊥ s | (dos \ s) ∪ conditioning
/// in the graph without arrows into `dos \ s` and out of `s`.
pub fn rule2_holds(g: &CausalGraph, t: &DistributionTerm, s: VarSet) -> bool {
    debug_assert!(s.is_subset(t.dos()));
    let rest = t.dos() - s;
    separated(g, rest, s, t.outcome(), s, rest | t.conditioning())
}

/// Rule 3 on `t` with `s ⊆ dos(t)`: outcome ⊥ s | (dos \ s) ∪ conditioning
/// in the graph without arrows into `dos \ s` and into the members of `s`
/// that are not ancestors of the conditioning set there.
pub fn rule3_holds(g: &CausalGraph, t: &DistributionTerm, s: VarSet) -> bool {
    debug_assert!(s.is_subset(t.dos()));
    let rest = t.dos() - s;
    let anc = GraphView::cut(g, rest, VarSet::EMPTY).ancestors(t.conditioning());
    let s_c = s - anc;
    separated(
        g,
        rest | s_c,
        VarSet::EMPTY,
        t.outcome(),
        s,
        rest | t.conditioning(),
    )
}

/// `t` with `s` moved from `dos` to the symbolic conditioning set.
pub fn action_to_observation(t: &DistributionTerm, s: VarSet) -> DistributionTerm {
    t.with_dos(t.dos() - s).with_cond(t.cond() | s)
}

/// `t` with symbolic conditioning variables `s` moved into `dos`.
pub fn observation_to_action(t: &DistributionTerm, s: VarSet) -> DistributionTerm {
    t.with_cond(t.cond() - s).with_dos(t.dos() | s)
}

/// `t` with `s` removed from every conditioning role.
pub fn delete_observation(t: &DistributionTerm, s: VarSet) -> DistributionTerm {
    t.with_cond(t.cond() - s)
        .with_fixed(t.fixed_one() - s, t.fixed_zero() - s)
}

/// Sums the symbolic left variables `s` out of `t`.
pub fn marginalize(t: &DistributionTerm, s: VarSet) -> DistributionTerm {
    t.with_left(t.left() - s, t.left_fixed())
}

/// Conditions `t` on symbolic left variables `s` and on every left
/// indicator fixed at 1.
pub fn condition(t: &DistributionTerm, s: VarSet) -> DistributionTerm {
    t.with_left(t.left() - s, VarSet::EMPTY)
        .with_cond(t.cond() | s)
        .with_fixed(t.fixed_one() | t.left_fixed(), t.fixed_zero())
}

/// Fixes the symbolic indicator `r` (on either side) at 1.
pub fn fix_indicator(t: &DistributionTerm, r: usize) -> DistributionTerm {
    if t.left().contains(r) {
        t.with_left(t.left().without(r), t.left_fixed().with(r))
    } else {
        t.with_cond(t.cond().without(r))
            .with_fixed(t.fixed_one().with(r), t.fixed_zero())
    }
}

/// Replaces `from` by `to` in the symbolic roles of `t`.
pub fn exchange(t: &DistributionTerm, from: usize, to: usize) -> DistributionTerm {
    if t.left().contains(from) {
        t.with_left(t.left().without(from).with(to), t.left_fixed())
    } else {
        t.with_cond(t.cond().without(from).with(to))
    }
}

/// Chain rule: from `P(A | do(B), D, C)` and `P(D | do(B), C)` (with
/// indicator roles carried along) builds `P(A, D | do(B), C)`.
pub fn product_compose(t1: &DistributionTerm, t2: &DistributionTerm) -> Option<DistributionTerm> {
    if t1.dos() != t2.dos()
        || t1.fixed_zero() != t2.fixed_zero()
        || t1.cond() != t2.cond() | t2.left()
        || t1.fixed_one() != t2.fixed_one() | t2.left_fixed()
    {
        return None;
    }
    DistributionTerm::new(
        t1.left() | t2.left(),
        t1.left_fixed() | t2.left_fixed(),
        t1.dos(),
        t2.cond(),
        t2.fixed_one(),
        t2.fixed_zero(),
    )
    .ok()
}

/// Splits `P(A, D | do(B), C)` into `P(A | do(B), D, C)` and `P(D | do(B), C)`,
/// where `d` holds the symbolic and fixed parts of `D`.
pub fn product_decompose(
    t: &DistributionTerm,
    d: VarSet,
) -> Option<(DistributionTerm, DistributionTerm)> {
    let d_sym = d & t.left();
    let d_fix = d & t.left_fixed();
    if d_sym | d_fix != d || d.is_empty() || d == t.outcome() {
        return None;
    }
    let first = t
        .with_left(t.left() - d_sym, t.left_fixed() - d_fix)
        .with_cond(t.cond() | d_sym)
        .with_fixed(t.fixed_one() | d_fix, t.fixed_zero());
    let second = t.with_left(d_sym, d_fix);
    Some((first, second))
}
