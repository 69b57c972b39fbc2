//! Dense discrete probability tables with the handful of operations needed to
//! evaluate identifying formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CausalGraph;
use crate::varset::VarSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("cardinality mismatch on variable #{var}: {left} vs {right}")]
    Cardinality {
        var: usize,
        left: usize,
        right: usize,
    },
    #[error("value count {got} does not match scope size {expected}")]
    Size { expected: usize, got: usize },
    #[error("division of {numerator} by zero at assignment {assignment:?}")]
    DivisionByZero {
        numerator: f64,
        assignment: Vec<(String, usize)>,
    },
    #[error("unknown variable `{0}` in table")]
    UnknownVariable(String),
    #[error("variable #{0} is not in the table scope")]
    NotInScope(usize),
}

/// How a table should be read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "on")]
pub enum Semantics {
    /// A joint distribution (possibly with fixed indicators, so it may be sub-normalized).
    #[default]
    Joint,
    /// A conditional distribution given the listed variables.
    Conditional(Vec<String>),
    /// An interventional distribution under `do(...)` of the listed variables.
    Interventional(Vec<String>),
    /// An intermediate product with no distributional reading.
    Factor,
}

/// A table over variables sorted by graph index, stored row-major with the
/// last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
    pub semantics: Semantics,
}

/// JSON interchange form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbTableJson {
    pub variables: Vec<String>,
    pub cardinalities: Vec<usize>,
    pub semantics: Semantics,
    pub values: Vec<f64>,
}

impl ProbTable {
    /// Builds a table; `vars` need not be sorted, values follow its order.
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self, TableError> {
        let size: usize = cards.iter().product();
        if size != values.len() || vars.len() != cards.len() {
            return Err(TableError::Size {
                expected: size,
                got: values.len(),
            });
        }
        let t = ProbTable {
            vars,
            cards,
            values,
            semantics: Semantics::Factor,
        };
        let mut order = t.vars.clone();
        order.sort_unstable();
        Ok(t.reorder(&order))
    }

    pub fn scalar(value: f64) -> Self {
        ProbTable {
            vars: vec![],
            cards: vec![],
            values: vec![value],
            semantics: Semantics::Factor,
        }
    }

    /// Constant table over the given scope.
    pub fn constant(scope: VarSet, cards: &[usize], value: f64) -> Self {
        let vars: Vec<usize> = scope.iter().collect();
        let c: Vec<usize> = vars.iter().map(|&v| cards[v]).collect();
        let size = c.iter().product();
        ProbTable {
            vars,
            cards: c,
            values: vec![value; size],
            semantics: Semantics::Factor,
        }
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scope(&self) -> VarSet {
        self.vars.iter().copied().collect()
    }

    pub fn card_of(&self, var: usize) -> Option<usize> {
        self.vars
            .iter()
            .position(|&v| v == var)
            .map(|i| self.cards[i])
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Value at a full assignment given in scope order.
    pub fn get(&self, assignment: &[usize]) -> f64 {
        let strides = self.strides();
        let idx: usize = assignment.iter().zip(&strides).map(|(a, s)| a * s).sum();
        self.values[idx]
    }

    /// Decodes a flat index into an assignment in scope order.
    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for i in (0..self.vars.len()).rev() {
            out[i] = index % self.cards[i];
            index /= self.cards[i];
        }
        out
    }

    /// Table with the same contents laid out in a different variable order.
    fn reorder(&self, order: &[usize]) -> ProbTable {
        if order == self.vars.as_slice() {
            return self.clone();
        }
        let pos: Vec<usize> = order
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).unwrap())
            .collect();
        let cards: Vec<usize> = pos.iter().map(|&p| self.cards[p]).collect();
        let strides = self.strides();
        let size = self.values.len();
        let mut values = vec![0.0; size];
        let mut a = vec![0usize; order.len()];
        for (out, slot) in values.iter_mut().enumerate() {
            let mut idx = out;
            for i in (0..order.len()).rev() {
                a[i] = idx % cards[i];
                idx /= cards[i];
            }
            let src: usize = a.iter().zip(&pos).map(|(v, &p)| v * strides[p]).sum();
            *slot = self.values[src];
        }
        ProbTable {
            vars: order.to_vec(),
            cards,
            values,
            semantics: self.semantics.clone(),
        }
    }

    fn merged_scope(&self, other: &ProbTable) -> Result<(Vec<usize>, Vec<usize>), TableError> {
        let mut vars: Vec<usize> = self.vars.clone();
        for &v in &other.vars {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        let mut cards = Vec::with_capacity(vars.len());
        for &v in &vars {
            match (self.card_of(v), other.card_of(v)) {
                (Some(a), Some(b)) if a != b => {
                    return Err(TableError::Cardinality {
                        var: v,
                        left: a,
                        right: b,
                    })
                }
                (Some(a), _) | (None, Some(a)) => cards.push(a),
                (None, None) => unreachable!(),
            }
        }
        Ok((vars, cards))
    }

    /// Pointwise combination over the union scope.
    fn combine(
        &self,
        other: &ProbTable,
        mut op: impl FnMut(f64, f64, &dyn Fn() -> Vec<usize>) -> Result<f64, TableError>,
    ) -> Result<(ProbTable, Vec<usize>), TableError> {
        let (vars, cards) = self.merged_scope(other)?;
        let size: usize = cards.iter().product();
        let sa = self.strides();
        let sb = other.strides();
        let map_a: Vec<Option<usize>> = vars
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v))
            .collect();
        let map_b: Vec<Option<usize>> = vars
            .iter()
            .map(|v| other.vars.iter().position(|w| w == v))
            .collect();
        let mut values = Vec::with_capacity(size);
        let mut a = vec![0usize; vars.len()];
        for flat in 0..size {
            let mut idx = flat;
            for i in (0..vars.len()).rev() {
                a[i] = idx % cards[i];
                idx /= cards[i];
            }
            let ia: usize = (0..vars.len())
                .filter_map(|i| map_a[i].map(|p| a[i] * sa[p]))
                .sum();
            let ib: usize = (0..vars.len())
                .filter_map(|i| map_b[i].map(|p| a[i] * sb[p]))
                .sum();
            let snapshot = a.clone();
            values.push(op(self.values[ia], other.values[ib], &move || {
                snapshot.clone()
            })?);
        }
        Ok((
            ProbTable {
                vars: vars.clone(),
                cards,
                values,
                semantics: Semantics::Factor,
            },
            vars,
        ))
    }

    pub fn product(&self, other: &ProbTable) -> Result<ProbTable, TableError> {
        Ok(self.combine(other, |a, b, _| Ok(a * b))?.0)
    }

    /// Pointwise quotient. `0/0` yields 0 and is counted in `zero_over_zero`;
    /// a nonzero numerator over zero is an error.
    pub fn divide(
        &self,
        other: &ProbTable,
        zero_over_zero: &mut usize,
        g: Option<&CausalGraph>,
    ) -> Result<ProbTable, TableError> {
        const EPS: f64 = 1e-15;
        let (vars, cards) = self.merged_scope(other)?;
        let mut zeros = 0usize;
        let (t, _) = self.combine(other, |a, b, assignment| {
            if b.abs() <= EPS {
                if a.abs() <= EPS {
                    zeros += 1;
                    Ok(0.0)
                } else {
                    let assignment = assignment()
                        .into_iter()
                        .zip(&vars)
                        .map(|(val, &v)| {
                            (g.map_or(format!("#{v}"), |g| g.name(v).to_string()), val)
                        })
                        .collect();
                    Err(TableError::DivisionByZero {
                        numerator: a,
                        assignment,
                    })
                }
            } else {
                Ok(a / b)
            }
        })?;
        debug_assert_eq!(t.cards, cards);
        *zero_over_zero += zeros;
        Ok(t)
    }

    /// Sums out every variable in `out`.
    pub fn sum_out(&self, out: VarSet) -> ProbTable {
        let keep: Vec<usize> = self
            .vars
            .iter()
            .copied()
            .filter(|v| !out.contains(*v))
            .collect();
        if keep.len() == self.vars.len() {
            return self.clone();
        }
        let keep_pos: Vec<usize> = keep
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).unwrap())
            .collect();
        let cards: Vec<usize> = keep_pos.iter().map(|&p| self.cards[p]).collect();
        let mut kstrides = vec![1; keep.len()];
        for i in (0..keep.len().saturating_sub(1)).rev() {
            kstrides[i] = kstrides[i + 1] * cards[i + 1];
        }
        let mut values = vec![0.0; cards.iter().product()];
        for (flat, &v) in self.values.iter().enumerate() {
            let a = self.assignment(flat);
            let idx: usize = keep_pos.iter().zip(&kstrides).map(|(&p, s)| a[p] * s).sum();
            values[idx] += v;
        }
        ProbTable {
            vars: keep,
            cards,
            values,
            semantics: Semantics::Factor,
        }
    }

    /// Restricts `var` to `value`, dropping it from the scope.
    pub fn slice(&self, var: usize, value: usize) -> Result<ProbTable, TableError> {
        let p = self
            .vars
            .iter()
            .position(|&v| v == var)
            .ok_or(TableError::NotInScope(var))?;
        let vars: Vec<usize> = self.vars.iter().copied().filter(|&v| v != var).collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != p)
            .map(|(_, &c)| c)
            .collect();
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|(flat, _)| self.assignment(*flat)[p] == value)
            .map(|(_, &v)| v)
            .collect();
        Ok(ProbTable {
            vars,
            cards,
            values,
            semantics: self.semantics.clone(),
        })
    }

    /// Keeps only the first `card` values of `var` and renames it to `to`.
    pub fn truncate_and_rename(
        &self,
        var: usize,
        card: usize,
        to: usize,
    ) -> Result<ProbTable, TableError> {
        let p = self
            .vars
            .iter()
            .position(|&v| v == var)
            .ok_or(TableError::NotInScope(var))?;
        let mut vars = self.vars.clone();
        vars[p] = to;
        let mut cards = self.cards.clone();
        cards[p] = card;
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|(flat, _)| self.assignment(*flat)[p] < card)
            .map(|(_, &v)| v)
            .collect();
        let t = ProbTable {
            vars,
            cards,
            values,
            semantics: self.semantics.clone(),
        };
        let mut order = t.vars.clone();
        order.sort_unstable();
        Ok(t.reorder(&order))
    }

    /// Broadcasts to a larger scope (the table is constant along new variables).
    pub fn expand(&self, scope: VarSet, cards: &[usize]) -> Result<ProbTable, TableError> {
        let ones = ProbTable::constant(scope - self.scope(), cards, 1.0);
        let mut t = self.product(&ones)?;
        t.semantics = self.semantics.clone();
        Ok(t)
    }

    /// Largest spread of values along `var`, over all other assignments.
    pub fn variation_along(&self, var: usize) -> f64 {
        let Some(p) = self.vars.iter().position(|&v| v == var) else {
            return 0.0;
        };
        let strides = self.strides();
        let mut worst: f64 = 0.0;
        for (flat, &v) in self.values.iter().enumerate() {
            let a = self.assignment(flat);
            if a[p] == 0 {
                for k in 1..self.cards[p] {
                    worst = worst.max((self.values[flat + k * strides[p]] - v).abs());
                }
            }
        }
        worst
    }

    /// Maximum absolute entrywise difference; scopes must match.
    pub fn max_abs_diff(&self, other: &ProbTable) -> Result<f64, TableError> {
        let (d, _) = self.combine(other, |a, b, _| Ok((a - b).abs()))?;
        Ok(d.values.iter().fold(0.0, |m, &v| m.max(v)))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_json(&self, g: &CausalGraph) -> ProbTableJson {
        ProbTableJson {
            variables: self.vars.iter().map(|&v| g.name(v).to_string()).collect(),
            cardinalities: self.cards.clone(),
            semantics: self.semantics.clone(),
            values: self.values.clone(),
        }
    }

    pub fn from_json(json: &ProbTableJson, g: &CausalGraph) -> Result<ProbTable, TableError> {
        let vars = json
            .variables
            .iter()
            .map(|n| {
                g.index_of(n)
                    .ok_or_else(|| TableError::UnknownVariable(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = ProbTable::new(vars, json.cardinalities.clone(), json.values.clone())?;
        Ok(t.with_semantics(json.semantics.clone()))
    }
}
