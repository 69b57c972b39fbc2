//! Numeric evaluation of formulas on discrete tables.

use std::collections::HashMap;

use thiserror::Error;

use super::table::{ProbTable, Semantics, TableError};
use super::Formula;
use crate::graph::CausalGraph;
use crate::term::DistributionTerm;
use crate::varset::VarSet;

pub type Bindings = HashMap<DistributionTerm, ProbTable>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no table bound for atom {0}")]
    Unbound(String),
    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub table: ProbTable,
    /// Number of `0/0` entries that were evaluated as 0.
    pub zero_over_zero: usize,
}

/// Evaluates `f` and aligns the result to `query_scope`. Variables of the
/// query that the formula does not mention are broadcast; free variables of
/// the formula outside the query must be irrelevant (constant along them).
pub fn evaluate(
    f: &Formula,
    bindings: &Bindings,
    query_scope: VarSet,
    cards: &[usize],
    g: &CausalGraph,
) -> Result<Evaluation, EvalError> {
    let mut zeros = 0;
    let mut t = eval_node(f, bindings, g, &mut zeros)?;
    for extra in (t.scope() - query_scope).iter() {
        let spread = t.variation_along(extra);
        if spread > 1e-9 {
            return Err(EvalError::ScopeMismatch(format!(
                "result depends on `{}` which is not in the query (spread {spread:e})",
                g.name(extra)
            )));
        }
        t = t.slice(extra, 0)?;
    }
    let missing = query_scope - t.scope();
    if !missing.is_empty() {
        t = t.expand(query_scope, cards)?;
    }
    Ok(Evaluation {
        table: t,
        zero_over_zero: zeros,
    })
}

fn eval_node(
    f: &Formula,
    bindings: &Bindings,
    g: &CausalGraph,
    zeros: &mut usize,
) -> Result<ProbTable, EvalError> {
    match f {
        Formula::Atom(t) => {
            let table = bindings
                .get(t)
                .ok_or_else(|| EvalError::Unbound(t.render(g, "p")))?;
            if table.scope() != t.scope() {
                return Err(EvalError::ScopeMismatch(format!(
                    "table for {} covers {:?}",
                    t.render(g, "p"),
                    g.names(table.scope())
                )));
            }
            Ok(table.clone())
        }
        Formula::Sum(over, body) => Ok(eval_node(body, bindings, g, zeros)?.sum_out(*over)),
        Formula::Product(fs) => {
            let mut acc = ProbTable::scalar(1.0);
            for f in fs {
                acc = acc.product(&eval_node(f, bindings, g, zeros)?)?;
            }
            Ok(acc)
        }
        Formula::Quotient(n, d) => {
            let n = eval_node(n, bindings, g, zeros)?;
            let d = eval_node(d, bindings, g, zeros)?;
            Ok(n.divide(&d, zeros, Some(g))?)
        }
    }
}

/// Tables for every atom of `f`, each computed from the input tables alone.
pub fn bind_atoms(
    f: &Formula,
    inputs: &[(DistributionTerm, ProbTable)],
    g: &CausalGraph,
) -> Result<Bindings, EvalError> {
    f.atoms()
        .into_iter()
        .map(|a| derive_binding(&a, inputs, g).map(|t| (a, t)))
        .collect()
}

/// Computes the table of `atom` from the first input it can be read off:
/// by marginalizing, conditioning, slicing indicators at their fixed values
/// and reading a proxy `X*` as `X` where `R_X = 1`.
pub fn derive_binding(
    atom: &DistributionTerm,
    inputs: &[(DistributionTerm, ProbTable)],
    g: &CausalGraph,
) -> Result<ProbTable, EvalError> {
    for (u, table) in inputs {
        if let Some(result) = derive_from(atom, u, table, g) {
            return result;
        }
    }
    Err(EvalError::Unbound(atom.render(g, "p")))
}

fn derive_from(
    atom: &DistributionTerm,
    u: &DistributionTerm,
    table: &ProbTable,
    g: &CausalGraph,
) -> Option<Result<ProbTable, EvalError>> {
    let left_one = atom.fixed_one() | atom.left_fixed();
    let umention = u.mentioned();
    let mut renames: Vec<(usize, usize)> = Vec::new();
    let mut image = VarSet::EMPTY;
    // X may be read from X* only on the event R_X = 1, and a conditioning
    // X needs that event in the conditioning set as well
    let map = |s: VarSet,
               on_one: VarSet,
               renames: &mut Vec<(usize, usize)>,
               image: &mut VarSet|
     -> Option<VarSet> {
        let mut out = VarSet::EMPTY;
        for v in s.iter() {
            let w = if umention.contains(v) {
                v
            } else {
                let p = g.proxy_of(v)?;
                let r = g.indicator_of(v)?;
                if !umention.contains(p) || !on_one.contains(r) {
                    return None;
                }
                renames.push((p, v));
                p
            };
            if image.contains(w) {
                return None;
            }
            image.insert(w);
            out.insert(w);
        }
        Some(out)
    };
    let m_left = map(atom.left(), left_one, &mut renames, &mut image)?;
    let m_lf = map(atom.left_fixed(), left_one, &mut renames, &mut image)?;
    let m_dos = map(atom.dos(), VarSet::EMPTY, &mut renames, &mut image)?;
    let m_cond = map(atom.cond(), atom.fixed_one(), &mut renames, &mut image)?;
    let m_f1 = map(atom.fixed_one(), atom.fixed_one(), &mut renames, &mut image)?;
    let m_f0 = map(
        atom.fixed_zero(),
        atom.fixed_one(),
        &mut renames,
        &mut image,
    )?;
    if m_dos != u.dos()
        || !u.fixed_one().is_subset(m_f1)
        || !u.fixed_zero().is_subset(m_f0)
        || !u.left_fixed().is_subset(m_lf | m_f1)
        || !u.cond().is_subset(m_cond | m_f1 | m_f0)
    {
        return None;
    }
    let cond_all = m_cond | m_f1 | m_f0;
    let given = cond_all - (u.cond() | u.fixed_one() | u.fixed_zero() | u.left_fixed());
    let num_vars = m_left | (m_lf - u.left_fixed()) | given;
    if !num_vars.is_subset(u.left()) {
        return None;
    }
    let needs_den = !given.is_empty() || !(u.left_fixed() & m_f1).is_empty();
    if needs_den && !(u.left_fixed() & m_lf).is_empty() {
        return None;
    }
    Some(compute(
        atom,
        u,
        table,
        g,
        num_vars,
        needs_den.then_some(given),
        m_lf | m_f1,
        m_f0,
        &renames,
    ))
}

#[allow(clippy::too_many_arguments)]
fn compute(
    atom: &DistributionTerm,
    u: &DistributionTerm,
    table: &ProbTable,
    g: &CausalGraph,
    num_vars: VarSet,
    den_vars: Option<VarSet>,
    at_one: VarSet,
    at_zero: VarSet,
    renames: &[(usize, usize)],
) -> Result<ProbTable, EvalError> {
    let reduce = |keep: VarSet| -> Result<ProbTable, EvalError> {
        let mut t = table.sum_out(u.left() - keep);
        for v in (t.scope() & at_one).iter() {
            t = t.slice(v, 1)?;
        }
        for v in (t.scope() & at_zero).iter() {
            t = t.slice(v, 0)?;
        }
        for &(p, v) in renames {
            if t.scope().contains(p) {
                let card = t.card_of(p).unwrap() - 1;
                t = t.truncate_and_rename(p, card, v)?;
            }
        }
        Ok(t)
    };
    let mut out = reduce(num_vars)?;
    if let Some(d) = den_vars {
        let den = reduce(d)?;
        let mut zeros = 0;
        out = out.divide(&den, &mut zeros, Some(g))?;
    }
    if out.scope() != atom.scope() {
        return Err(EvalError::ScopeMismatch(format!(
            "derived table for {} covers {:?}",
            atom.render(g, "p"),
            g.names(out.scope())
        )));
    }
    let names = |s: VarSet| g.names(s).into_iter().map(String::from).collect::<Vec<_>>();
    let semantics = if !atom.dos().is_empty() {
        Semantics::Interventional(names(atom.dos()))
    } else if !atom.conditioning().is_empty() {
        Semantics::Conditional(names(atom.conditioning()))
    } else {
        Semantics::Joint
    };
    Ok(out.with_semantics(semantics))
}
