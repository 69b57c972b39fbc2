use super::{DiscreteScm, ScmError};
use crate::formula::{bind_atoms, evaluate, EvalError, Formula, ProbTable};
use crate::term::QuerySpec;

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub max_abs_diff: f64,
    pub zero_over_zero: usize,
    pub evaluated: ProbTable,
    pub truth: ProbTable,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluates `f` on input tables enumerated from `m` and compares the result
/// with the exact target.
pub fn verify_formula(
    f: &Formula,
    spec: &QuerySpec,
    m: &DiscreteScm,
) -> Result<VerifyReport, VerifyError> {
    let inputs = spec
        .inputs
        .iter()
        .map(|t| m.enumerate_term(t).map(|tab| (*t, tab)))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings = bind_atoms(f, &inputs, &spec.graph)?;
    let ev = evaluate(f, &bindings, spec.target.scope(), m.cards(), &spec.graph)?;
    let truth = m.enumerate_term(&spec.target)?;
    let max_abs_diff = ev.table.max_abs_diff(&truth).map_err(ScmError::from)?;
    Ok(VerifyReport {
        max_abs_diff,
        zero_over_zero: ev.zero_over_zero,
        evaluated: ev.table,
        truth,
    })
}
