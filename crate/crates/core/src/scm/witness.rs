use super::{DiscreteScm, ScmError};
use crate::term::DistributionTerm;

/// Two models that should agree on every input but disagree on the target.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub m1: DiscreteScm,
    pub m2: DiscreteScm,
    pub inputs: Vec<DistributionTerm>,
    pub target: DistributionTerm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    pub inputs_agree: bool,
    pub target_differs: bool,
    pub max_input_diff: f64,
    pub target_diff: f64,
}

impl WitnessReport {
    /// Whether the pair proves non-identifiability at the given tolerances.
    pub fn proves(&self, input_tol: f64, target_gap: f64) -> bool {
        self.max_input_diff <= input_tol && self.target_diff > target_gap
    }
}

/// Compares the two models on every input and on the target.
pub fn check_witness(w: &WitnessPair, tol: f64) -> Result<WitnessReport, ScmError> {
    let mut max_input_diff: f64 = 0.0;
    for t in &w.inputs {
        let a = w.m1.enumerate_term(t)?;
        let b = w.m2.enumerate_term(t)?;
        max_input_diff = max_input_diff.max(a.max_abs_diff(&b)?);
    }
    let a = w.m1.enumerate_term(&w.target)?;
    let b = w.m2.enumerate_term(&w.target)?;
    let target_diff = a.max_abs_diff(&b)?;
    Ok(WitnessReport {
        inputs_agree: max_input_diff <= tol,
        target_differs: target_diff > tol,
        max_input_diff,
        target_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CausalGraph;

    #[test]
    fn identical_models_do_not_witness() {
        let g = CausalGraph::parse("X -> Z\nZ -> Y\nX <-> Y").unwrap();
        let m = DiscreteScm::random_binary(&g, 1);
        let w = WitnessPair {
            m1: m.clone(),
            m2: m,
            inputs: vec![DistributionTerm::parse("P(X,Z,Y)", &g).unwrap()],
            target: DistributionTerm::parse("P(Y|do(X))", &g).unwrap(),
        };
        let r = check_witness(&w, 1e-12).unwrap();
        assert!(r.inputs_agree);
        assert!(!r.target_differs);
        assert_eq!(r.target_diff, 0.0);
    }
}
