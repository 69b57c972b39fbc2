//! Symbolic distribution terms `P(A, R=1 | do(B), C, R'=1)` and their syntax.

use std::hash::{Hash, Hasher};

use rustc_hash::FxHasher;
use thiserror::Error;

use crate::graph::{CausalGraph, GraphError, VarKind};
use crate::varset::VarSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("malformed distribution term `{0}`")]
    Syntax(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` appears in more than one role")]
    RoleConflict(String),
    #[error("distribution term has an empty left-hand side")]
    EmptyLeft,
    #[error("value binding on `{0}`: only response indicators may be fixed")]
    ValueOnNonIndicator(String),
    #[error("unsupported value binding `{0}`")]
    UnsupportedValue(String),
    #[error("proxy `{0}` cannot be intervened on")]
    InterventionOnProxy(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A symbolic distribution. Role sets are pairwise disjoint bitmasks, so two
/// terms are equal exactly when they denote the same distribution up to
/// ordering of variables.
///
/// `left_fixed` holds response indicators that appear jointly at value 1,
/// as in `P(X, Y, R_X = 1)`; `fixed_one`/`fixed_zero` hold indicators
/// conditioned on a value, as in `P(Z | X, R_Z = 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DistributionTerm {
    left: VarSet,
    left_fixed: VarSet,
    dos: VarSet,
    cond: VarSet,
    fixed_one: VarSet,
    fixed_zero: VarSet,
}

impl DistributionTerm {
    /// Builds a term, checking role disjointness and a nonempty left side.
    pub fn new(
        left: VarSet,
        left_fixed: VarSet,
        dos: VarSet,
        cond: VarSet,
        fixed_one: VarSet,
        fixed_zero: VarSet,
    ) -> Result<Self, TermError> {
        let t = DistributionTerm {
            left,
            left_fixed,
            dos,
            cond,
            fixed_one,
            fixed_zero,
        };
        if (left | left_fixed).is_empty() {
            return Err(TermError::EmptyLeft);
        }
        let sets = [left, left_fixed, dos, cond, fixed_one, fixed_zero];
        let mut seen = VarSet::EMPTY;
        for s in sets {
            if !seen.is_disjoint(s) {
                let v = (seen & s).first().unwrap();
                return Err(TermError::RoleConflict(format!("#{v}")));
            }
            seen = seen | s;
        }
        Ok(t)
    }

    /// `P(left | do(dos), cond)` with no value bindings.
    pub fn simple(left: VarSet, dos: VarSet, cond: VarSet) -> Result<Self, TermError> {
        Self::new(left, VarSet::EMPTY, dos, cond, VarSet::EMPTY, VarSet::EMPTY)
    }

    pub fn is_valid(&self) -> bool {
        Self::new(
            self.left,
            self.left_fixed,
            self.dos,
            self.cond,
            self.fixed_one,
            self.fixed_zero,
        )
        .is_ok()
    }

    pub fn left(&self) -> VarSet {
        self.left
    }
    pub fn left_fixed(&self) -> VarSet {
        self.left_fixed
    }
    pub fn dos(&self) -> VarSet {
        self.dos
    }
    pub fn cond(&self) -> VarSet {
        self.cond
    }
    pub fn fixed_one(&self) -> VarSet {
        self.fixed_one
    }
    pub fn fixed_zero(&self) -> VarSet {
        self.fixed_zero
    }

    /// Everything the left side asserts about: symbolic and value-fixed.
    pub fn outcome(&self) -> VarSet {
        self.left | self.left_fixed
    }

    /// Everything conditioned on, symbolically or by value.
    pub fn conditioning(&self) -> VarSet {
        self.cond | self.fixed_one | self.fixed_zero
    }

    /// Variables the term is a function of (value-fixed ones are constants).
    pub fn scope(&self) -> VarSet {
        self.left | self.dos | self.cond
    }

    /// Every variable mentioned in any role.
    pub fn mentioned(&self) -> VarSet {
        self.left | self.left_fixed | self.dos | self.cond | self.fixed_one | self.fixed_zero
    }

    /// Canonical form and a hash that depends only on the six role sets.
    pub fn canonicalize(&self) -> (DistributionTerm, u64) {
        (*self, self.stable_hash())
    }

    pub fn stable_hash(&self) -> u64 {
        let mut h = FxHasher::default();
        for s in [
            self.left,
            self.left_fixed,
            self.dos,
            self.cond,
            self.fixed_one,
            self.fixed_zero,
        ] {
            s.bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn with_left(mut self, left: VarSet, left_fixed: VarSet) -> Self {
        self.left = left;
        self.left_fixed = left_fixed;
        self
    }

    pub fn with_dos(mut self, dos: VarSet) -> Self {
        self.dos = dos;
        self
    }

    pub fn with_cond(mut self, cond: VarSet) -> Self {
        self.cond = cond;
        self
    }

    pub fn with_fixed(mut self, fixed_one: VarSet, fixed_zero: VarSet) -> Self {
        self.fixed_one = fixed_one;
        self.fixed_zero = fixed_zero;
        self
    }

    /// Parses `P(Y | do(X), Z, R_Z=1)`; `p(...)` is accepted too.
    pub fn parse(text: &str, g: &CausalGraph) -> Result<Self, TermError> {
        parse_term(text, g)
    }

    /// Renders with the given head, e.g. `"P"` or `"p"`. Variables are listed in
    /// index order; `do(...)` first on the right, then symbolic conditions,
    /// then value bindings.
    pub fn render(&self, g: &CausalGraph, head: &str) -> String {
        let mut left: Vec<String> = g.names(self.left).into_iter().map(str::to_string).collect();
        left.extend(self.left_fixed.iter().map(|v| format!("{}=1", g.name(v))));
        let mut right: Vec<String> = Vec::new();
        if !self.dos.is_empty() {
            right.push(format!("do({})", g.names(self.dos).join(",")));
        }
        right.extend(g.names(self.cond).into_iter().map(str::to_string));
        right.extend(self.fixed_one.iter().map(|v| format!("{}=1", g.name(v))));
        right.extend(self.fixed_zero.iter().map(|v| format!("{}=0", g.name(v))));
        if right.is_empty() {
            format!("{head}({})", left.join(","))
        } else {
            format!("{head}({}|{})", left.join(","), right.join(","))
        }
    }
}

fn split_top_level(s: &str) -> Result<Vec<&str>, TermError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(TermError::Syntax(s.to_string()));
                }
            }
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(TermError::Syntax(s.to_string()));
    }
    out.push(s[start..].trim());
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    let body = s.strip_suffix('*').unwrap_or(s);
    let mut chars = body.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Roles<'g> {
    g: &'g CausalGraph,
    assigned: VarSet,
    sets: [VarSet; 6],
}

const LEFT: usize = 0;
const LEFT_FIXED: usize = 1;
const DOS: usize = 2;
const COND: usize = 3;
const FIXED_ONE: usize = 4;
const FIXED_ZERO: usize = 5;

impl Roles<'_> {
    fn lookup(&self, name: &str) -> Result<usize, TermError> {
        if !is_ident(name) {
            return Err(TermError::Syntax(name.to_string()));
        }
        self.g
            .index_of(name)
            .ok_or_else(|| TermError::UnknownVariable(name.to_string()))
    }

    fn assign(&mut self, v: usize, role: usize) -> Result<(), TermError> {
        if self.sets[role].contains(v) {
            return Ok(());
        }
        if self.assigned.contains(v) {
            return Err(TermError::RoleConflict(self.g.name(v).to_string()));
        }
        if role == DOS && self.g.kind(v) == VarKind::Proxy {
            return Err(TermError::InterventionOnProxy(self.g.name(v).to_string()));
        }
        self.assigned.insert(v);
        self.sets[role].insert(v);
        Ok(())
    }

    fn item(&mut self, item: &str, on_left: bool) -> Result<(), TermError> {
        let compact: String = item.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(TermError::Syntax(item.to_string()));
        }
        if let Some(inner) = compact
            .strip_prefix("do(")
            .and_then(|r| r.strip_suffix(')'))
        {
            if on_left {
                return Err(TermError::Syntax(item.to_string()));
            }
            for name in inner.split(',') {
                let v = self.lookup(name)?;
                self.assign(v, DOS)?;
            }
            return Ok(());
        }
        if let Some((name, value)) = compact.split_once('=') {
            let v = self.lookup(name)?;
            if self.g.kind(v) != VarKind::ResponseIndicator {
                return Err(TermError::ValueOnNonIndicator(name.to_string()));
            }
            let role = match (value, on_left) {
                ("1", true) => LEFT_FIXED,
                ("1", false) => FIXED_ONE,
                ("0", false) => FIXED_ZERO,
                _ => return Err(TermError::UnsupportedValue(compact.clone())),
            };
            return self.assign(v, role);
        }
        let v = self.lookup(&compact)?;
        self.assign(v, if on_left { LEFT } else { COND })
    }
}

fn parse_term(text: &str, g: &CausalGraph) -> Result<DistributionTerm, TermError> {
    let t = text.trim();
    let body = t
        .strip_prefix("P(")
        .or_else(|| t.strip_prefix("p("))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| TermError::Syntax(text.to_string()))?;
    let (lhs, rhs) = match body.split_once('|') {
        Some((l, r)) => (l, Some(r)),
        None => (body, None),
    };
    if lhs.trim().is_empty() {
        return Err(TermError::EmptyLeft);
    }
    let mut roles = Roles {
        g,
        assigned: VarSet::EMPTY,
        sets: [VarSet::EMPTY; 6],
    };
    for item in split_top_level(lhs)? {
        roles.item(item, true)?;
    }
    if let Some(rhs) = rhs {
        for item in split_top_level(rhs)? {
            roles.item(item, false)?;
        }
    }
    let [left, left_fixed, dos, cond, fixed_one, fixed_zero] = roles.sets;
    DistributionTerm::new(left, left_fixed, dos, cond, fixed_one, fixed_zero)
}

/// An identification problem: a target term, the available input terms, and
/// the graph they live on.
#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub target: DistributionTerm,
    pub inputs: Vec<DistributionTerm>,
    pub graph: CausalGraph,
}

impl QuerySpec {
    pub fn new(
        graph: CausalGraph,
        inputs: Vec<DistributionTerm>,
        target: DistributionTerm,
    ) -> Self {
        QuerySpec {
            target,
            inputs,
            graph,
        }
    }

    /// Parses a problem from its textual parts. `data` holds one term per line.
    pub fn parse(
        graph: &str,
        missing: Option<&str>,
        data: &str,
        query: &str,
    ) -> Result<Self, TermError> {
        let mut g = CausalGraph::parse(graph)?;
        if let Some(spec) = missing {
            g = g.augment_missing(spec)?;
        }
        let inputs = data
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| DistributionTerm::parse(l, &g))
            .collect::<Result<Vec<_>, _>>()?;
        let target = DistributionTerm::parse(query, &g)?;
        Ok(QuerySpec {
            target,
            inputs,
            graph: g,
        })
    }

    /// Queries that condition on a response-indicator value are accepted but
    /// have not been exercised against known results.
    pub fn is_experimental(&self) -> bool {
        !(self.target.fixed_one() | self.target.fixed_zero() | self.target.left_fixed()).is_empty()
            || !(self.target.conditioning() & self.graph.indicators()).is_empty()
    }
}
