//! Identifying formulas as expression trees over distribution terms.

mod eval;
mod table;

use thiserror::Error;

use crate::graph::CausalGraph;
use crate::term::{DistributionTerm, TermError};
use crate::varset::VarSet;

pub use eval::{bind_atoms, derive_binding, evaluate, Bindings, EvalError, Evaluation};
pub use table::{ProbTable, ProbTableJson, Semantics, TableError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(DistributionTerm),
    Sum(VarSet, Box<Formula>),
    Product(Vec<Formula>),
    Quotient(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("malformed formula near `{0}`")]
    Syntax(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("substitution would capture bound variable `{0}`")]
    Capture(String),
    #[error("summed variable `{0}` does not occur free in the body")]
    VacuousSum(String),
}

impl Formula {
    pub fn atom(t: DistributionTerm) -> Self {
        Formula::Atom(t)
    }

    /// `sum_{over} body`; an empty `over` returns the body itself.
    pub fn sum(over: VarSet, body: Formula) -> Self {
        if over.is_empty() {
            body
        } else {
            Formula::Sum(over, Box::new(body))
        }
    }

    pub fn product(factors: Vec<Formula>) -> Self {
        Formula::Product(factors)
    }

    pub fn quotient(num: Formula, den: Formula) -> Self {
        Formula::Quotient(Box::new(num), Box::new(den))
    }

    pub fn free_variables(&self) -> VarSet {
        match self {
            Formula::Atom(t) => t.scope(),
            Formula::Sum(over, body) => body.free_variables() - *over,
            Formula::Product(fs) => fs
                .iter()
                .fold(VarSet::EMPTY, |acc, f| acc | f.free_variables()),
            Formula::Quotient(n, d) => n.free_variables() | d.free_variables(),
        }
    }

    /// Distinct atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<DistributionTerm> {
        fn walk(f: &Formula, out: &mut Vec<DistributionTerm>) {
            match f {
                Formula::Atom(t) => {
                    if !out.contains(t) {
                        out.push(*t)
                    }
                }
                Formula::Sum(_, b) => walk(b, out),
                Formula::Product(fs) => fs.iter().for_each(|f| walk(f, out)),
                Formula::Quotient(n, d) => {
                    walk(n, out);
                    walk(d, out)
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Checks that every summed variable occurs free in its body.
    pub fn validate(&self, g: &CausalGraph) -> Result<(), FormulaError> {
        match self {
            Formula::Atom(_) => Ok(()),
            Formula::Sum(over, body) => {
                let vacuous = *over - body.free_variables();
                if let Some(v) = vacuous.first() {
                    return Err(FormulaError::VacuousSum(g.name(v).to_string()));
                }
                body.validate(g)
            }
            Formula::Product(fs) => fs.iter().try_for_each(|f| f.validate(g)),
            Formula::Quotient(n, d) => {
                n.validate(g)?;
                d.validate(g)
            }
        }
    }

    /// Replaces every occurrence of the atom `term` with `replacement`.
    /// Fails if a free variable of the replacement would become bound.
    pub fn substitute_atom(
        &self,
        term: &DistributionTerm,
        replacement: &Formula,
        g: &CausalGraph,
    ) -> Result<Formula, FormulaError> {
        let free = replacement.free_variables();
        self.substitute_under(term, replacement, free, VarSet::EMPTY, g)
    }

    fn substitute_under(
        &self,
        term: &DistributionTerm,
        replacement: &Formula,
        free: VarSet,
        bound: VarSet,
        g: &CausalGraph,
    ) -> Result<Formula, FormulaError> {
        Ok(match self {
            Formula::Atom(t) if t == term => {
                let captured = (free & bound) - t.scope();
                if let Some(v) = captured.first() {
                    return Err(FormulaError::Capture(g.name(v).to_string()));
                }
                replacement.clone()
            }
            Formula::Atom(t) => Formula::Atom(*t),
            Formula::Sum(over, body) => Formula::Sum(
                *over,
                Box::new(body.substitute_under(term, replacement, free, bound | *over, g)?),
            ),
            Formula::Product(fs) => Formula::Product(
                fs.iter()
                    .map(|f| f.substitute_under(term, replacement, free, bound, g))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Quotient(n, d) => Formula::quotient(
                n.substitute_under(term, replacement, free, bound, g)?,
                d.substitute_under(term, replacement, free, bound, g)?,
            ),
        })
    }

    /// Bracketed text form, e.g. `[sum_{Z} [p(Z|X)*p(Y|do(Z))]]`.
    pub fn render(&self, g: &CausalGraph) -> String {
        let mut out = String::new();
        self.render_into(g, &mut out);
        out
    }

    fn render_into(&self, g: &CausalGraph, out: &mut String) {
        match self {
            Formula::Atom(t) => out.push_str(&t.render(g, "p")),
            Formula::Sum(over, body) => {
                out.push_str("[sum_{");
                out.push_str(&g.names(*over).join(","));
                out.push_str("} ");
                body.render_into(g, out);
                out.push(']');
            }
            Formula::Product(fs) => {
                out.push('[');
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push('*');
                    }
                    f.render_into(g, out);
                }
                out.push(']');
            }
            Formula::Quotient(n, d) => {
                out.push('[');
                n.render_into(g, out);
                out.push('/');
                d.render_into(g, out);
                out.push(']');
            }
        }
    }

    /// Parses the bracketed text form produced by [`Formula::render`].
    pub fn parse(text: &str, g: &CausalGraph) -> Result<Formula, FormulaError> {
        let mut p = Parser {
            s: text.trim(),
            pos: 0,
            g,
        };
        let f = p.formula()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(FormulaError::Syntax(p.rest().to_string()));
        }
        Ok(f)
    }
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
    g: &'a CausalGraph,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn error(&self) -> FormulaError {
        let r = self.rest();
        FormulaError::Syntax(r.chars().take(24).collect())
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        if self.eat("[sum_{") {
            let close = self.rest().find('}').ok_or_else(|| self.error())?;
            let names = &self.rest()[..close];
            let mut over = VarSet::EMPTY;
            for n in names.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                let v = self
                    .g
                    .index_of(n)
                    .ok_or_else(|| TermError::UnknownVariable(n.to_string()))?;
                over.insert(v);
            }
            self.pos += close + 1;
            let body = self.formula()?;
            if !self.eat("]") {
                return Err(self.error());
            }
            return Ok(Formula::Sum(over, Box::new(body)));
        }
        if self.eat("[") {
            let first = self.formula()?;
            if self.eat("/") {
                let den = self.formula()?;
                if !self.eat("]") {
                    return Err(self.error());
                }
                return Ok(Formula::quotient(first, den));
            }
            let mut factors = vec![first];
            while self.eat("*") {
                factors.push(self.formula()?);
            }
            if !self.eat("]") {
                return Err(self.error());
            }
            return Ok(Formula::Product(factors));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let r = self.rest();
        if !(r.starts_with("p(") || r.starts_with("P(")) {
            return Err(self.error());
        }
        let mut depth = 0usize;
        let mut end = None;
        for (i, c) in r.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| self.error())?;
        let t = DistributionTerm::parse(&r[..end], self.g)?;
        self.pos += end;
        Ok(Formula::Atom(t))
    }
}
