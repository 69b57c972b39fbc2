//! Formulas with shared subtrees, built during search and converted to
//! [`Formula`] once a derivation is found.

use std::rc::Rc;

use rustc_hash::FxHashMap;

use crate::formula::Formula;
use crate::graph::CausalGraph;
use crate::term::DistributionTerm;
use crate::varset::VarSet;

#[derive(Debug, PartialEq, Eq, Hash)]
pub(crate) enum Expr {
    Atom(DistributionTerm),
    Sum(VarSet, Rc<Expr>),
    Product(Vec<Rc<Expr>>),
    Quotient(Rc<Expr>, Rc<Expr>),
}

pub(crate) type ExprRef = Rc<Expr>;

impl Expr {
    pub(crate) fn to_formula(&self) -> Formula {
        match self {
            Expr::Atom(t) => Formula::Atom(*t),
            Expr::Sum(s, b) => Formula::Sum(*s, Box::new(b.to_formula())),
            Expr::Product(fs) => Formula::Product(fs.iter().map(|f| f.to_formula()).collect()),
            Expr::Quotient(n, d) => Formula::quotient(n.to_formula(), d.to_formula()),
        }
    }

    #[cfg(test)]
    pub(crate) fn from_formula(f: &Formula) -> ExprRef {
        Rc::new(match f {
            Formula::Atom(t) => Expr::Atom(*t),
            Formula::Sum(s, b) => Expr::Sum(*s, Expr::from_formula(b)),
            Formula::Product(fs) => Expr::Product(fs.iter().map(Expr::from_formula).collect()),
            Formula::Quotient(n, d) => Expr::Quotient(Expr::from_formula(n), Expr::from_formula(d)),
        })
    }
}

/// Rewrites every free occurrence of atoms through `f`, which returns
/// `Ok(None)` to keep an atom and `Err(())` to abort. Shared subtrees are
/// visited once per binding context.
fn rewrite_atoms(
    e: &ExprRef,
    bound: VarSet,
    f: &impl Fn(&DistributionTerm, VarSet) -> Result<Option<DistributionTerm>, ()>,
    memo: &mut FxHashMap<(usize, u64), ExprRef>,
) -> Result<ExprRef, ()> {
    let key = (Rc::as_ptr(e) as usize, bound.bits());
    if let Some(done) = memo.get(&key) {
        return Ok(done.clone());
    }
    let out = match &**e {
        Expr::Atom(a) => match f(a, bound)? {
            Some(b) => Rc::new(Expr::Atom(b)),
            None => e.clone(),
        },
        Expr::Sum(s, b) => {
            let nb = rewrite_atoms(b, bound | *s, f, memo)?;
            if Rc::ptr_eq(&nb, b) {
                e.clone()
            } else {
                Rc::new(Expr::Sum(*s, nb))
            }
        }
        Expr::Product(fs) => {
            let nfs = fs
                .iter()
                .map(|x| rewrite_atoms(x, bound, f, memo))
                .collect::<Result<Vec<_>, _>>()?;
            if nfs.iter().zip(fs).all(|(a, b)| Rc::ptr_eq(a, b)) {
                e.clone()
            } else {
                Rc::new(Expr::Product(nfs))
            }
        }
        Expr::Quotient(n, d) => {
            let nn = rewrite_atoms(n, bound, f, memo)?;
            let nd = rewrite_atoms(d, bound, f, memo)?;
            if Rc::ptr_eq(&nn, n) && Rc::ptr_eq(&nd, d) {
                e.clone()
            } else {
                Rc::new(Expr::Quotient(nn, nd))
            }
        }
    };
    memo.insert(key, out.clone());
    Ok(out)
}

/// Sets the free indicator `r` to 1 inside every atom that mentions it.
pub(crate) fn fix_indicator(e: &ExprRef, r: usize) -> Option<ExprRef> {
    let f = |a: &DistributionTerm, bound: VarSet| {
        if bound.contains(r) {
            return Ok(None);
        }
        if a.left().contains(r) {
            Ok(Some(
                a.with_left(a.left().without(r), a.left_fixed().with(r)),
            ))
        } else if a.cond().contains(r) {
            Ok(Some(
                a.with_cond(a.cond().without(r))
                    .with_fixed(a.fixed_one().with(r), a.fixed_zero()),
            ))
        } else if a.dos().contains(r) {
            Err(())
        } else {
            Ok(None)
        }
    };
    rewrite_atoms(e, VarSet::EMPTY, &f, &mut FxHashMap::default()).ok()
}

/// Reads the free proxy `p` as its true variable `x`. Within an atom,
/// `X* = x` is the event `X = x, R_X = 1`, so the indicator is added when
/// the atom does not already fix it.
pub(crate) fn exchange_proxy(e: &ExprRef, p: usize, x: usize, r: usize) -> Option<ExprRef> {
    let f = |a: &DistributionTerm, bound: VarSet| {
        if bound.contains(p) || !a.mentioned().contains(p) {
            return Ok(None);
        }
        if a.mentioned().contains(x) || bound.contains(x) {
            return Err(());
        }
        // P(.. | X* = x) is not P(.. | X = x) when R_X = 1 sits on the left
        if a.cond().contains(p) && a.left_fixed().contains(r) {
            return Err(());
        }
        let fixed = (a.fixed_one() | a.left_fixed()).contains(r);
        if !fixed && a.mentioned().contains(r) {
            return Err(());
        }
        let out = if a.left().contains(p) {
            let lf = if fixed {
                a.left_fixed()
            } else {
                a.left_fixed().with(r)
            };
            a.with_left(a.left().without(p).with(x), lf)
        } else if a.cond().contains(p) {
            let f1 = if fixed {
                a.fixed_one()
            } else {
                a.fixed_one().with(r)
            };
            a.with_cond(a.cond().without(p).with(x))
                .with_fixed(f1, a.fixed_zero())
        } else {
            return Err(());
        };
        Ok(Some(out))
    };
    rewrite_atoms(e, VarSet::EMPTY, &f, &mut FxHashMap::default()).ok()
}

/// Renders with shared subtrees expanded.
#[allow(dead_code)]
pub(crate) fn render(e: &Expr, g: &CausalGraph) -> String {
    e.to_formula().render(g)
}
