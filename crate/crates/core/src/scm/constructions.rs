//! Hand-built pairs of binary models over the front-door variants that agree
//! on given inputs but disagree on `P(Y|do(X))`, and the XOR model in which
//! a chain of experiments is misleading.
//!
//! Each construction names the pair of variables sharing the confounder `U`.
//! On a concrete graph `U` is either a latent on a bidirected edge or the
//! observed covariate `W` when `W` points into both variables. Variables a
//! construction does not mention get `P(V = 1) = 1/2` in both models.

use rand::Rng;

use super::witness::{check_witness, WitnessPair, WitnessReport};
use super::{DiscreteScm, ParentValues, ScmBuilder, ScmError};
use crate::graph::{CausalGraph, VarKind};
use crate::term::QuerySpec;

/// Free parameters of the symbolic constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

impl Params {
    pub const DEFAULT: Params = Params {
        p: 0.25,
        q: 0.75,
        a: 0.9,
        b: 0.1,
    };

    /// Parameters far enough from the degenerate cases `p = 1/2`, `q = 1/2`
    /// and `a = b` for the target gap to exceed 1e-3.
    pub fn is_separated(&self) -> bool {
        let inside = |x: f64| (0.02..=0.98).contains(&x);
        [self.p, self.q, self.a, self.b].into_iter().all(inside)
            && (self.p - 0.5).abs() >= 0.1
            && (self.q - 0.5).abs() >= 0.1
            && (self.a - self.b).abs() >= 0.2
    }

    /// Rejection sample of separated parameters.
    pub fn random(rng: &mut impl Rng) -> Params {
        loop {
            let mut u = || rng.gen_range(0.02..=0.98);
            let c = Params {
                p: u(),
                q: u(),
                a: u(),
                b: u(),
            };
            if c.is_separated() {
                return c;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// `U` on `X, Z`; `P(X, Z)`, `P(X, Z, Y)` and `P(Y|do(Z))` agree.
    CauseMediator,
    /// `U` on `Z, Y`; `P(X, Z)`, `P(Z|do(X))` and `P(Y|do(Z))` agree.
    MediatorOutcome,
    /// Fixed numbers, `U` on `X, Y`; `P(Z, Y)`, `P(X, Y)`, `P(X, Z)` and
    /// `P(Z|do(X))` agree.
    CauseOutcome,
    /// Fixed numbers, `U` on `Z, Y`, meant to match `P(Z, Y)` and `P(Z|do(X))`.
    /// The stated numbers do not give matching inputs.
    MediatorOutcomeFixed,
    /// Latents on `X, Z` and `X, Y` with an independent observed `W`.
    TwoConfounders,
    /// No latents; `W` drives both `X` and `Z`.
    Covariate,
    /// Fixed numbers, `U` on `Z, Y`: the XOR model against fair independent
    /// coins; `P(Z, Y)`, `P(Z|do(X))` and `P(Y|do(Z))` agree.
    XorChain,
    /// Fixed numbers, latents on `X, Y` and `Z, Y`; `P(X, Z, Y)` agrees while
    /// `Y` equals `X` through the mediator in one model and through the
    /// latent in the other.
    XorBow,
}

/// How the confounder of a construction is realized on a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Confounder {
    Latent,
    Observed(String),
}

impl Confounder {
    fn name(&self) -> &str {
        match self {
            Confounder::Latent => "U",
            Confounder::Observed(w) => w,
        }
    }
}

type Pair = (DiscreteScm, DiscreteScm);

impl Construction {
    pub const ALL: [Construction; 8] = [
        Construction::CauseMediator,
        Construction::MediatorOutcome,
        Construction::CauseOutcome,
        Construction::MediatorOutcomeFixed,
        Construction::TwoConfounders,
        Construction::Covariate,
        Construction::XorChain,
        Construction::XorBow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::CauseMediator => "cause-mediator",
            Construction::MediatorOutcome => "mediator-outcome",
            Construction::CauseOutcome => "cause-outcome (fixed)",
            Construction::MediatorOutcomeFixed => "mediator-outcome (fixed)",
            Construction::TwoConfounders => "two-confounders",
            Construction::Covariate => "covariate",
            Construction::XorChain => "xor-chain (fixed)",
            Construction::XorBow => "xor-bow (fixed)",
        }
    }

    /// Whether the construction depends on [`Params`].
    pub fn is_symbolic(self) -> bool {
        !matches!(
            self,
            Construction::CauseOutcome
                | Construction::MediatorOutcomeFixed
                | Construction::XorChain
                | Construction::XorBow
        )
    }

    fn confounded_pair(self) -> Option<(&'static str, &'static str)> {
        match self {
            Construction::CauseMediator => Some(("X", "Z")),
            Construction::MediatorOutcome
            | Construction::MediatorOutcomeFixed
            | Construction::XorChain => Some(("Z", "Y")),
            Construction::CauseOutcome => Some(("X", "Y")),
            Construction::TwoConfounders | Construction::Covariate | Construction::XorBow => None,
        }
    }

    /// Ways to realize the confounder on `g`.
    pub fn confounders(self, g: &CausalGraph) -> Vec<Confounder> {
        let idx = |n: &str| g.index_of(n);
        let mut out = Vec::new();
        match self.confounded_pair() {
            Some((a, b)) => {
                let (Some(ia), Some(ib)) = (idx(a), idx(b)) else {
                    return out;
                };
                if g.has_bidirected(ia, ib) {
                    out.push(Confounder::Latent);
                }
                if let Some(w) = idx("W") {
                    if g.has_directed(w, ia) && g.has_directed(w, ib) {
                        out.push(Confounder::Observed("W".into()));
                    }
                }
            }
            None => {
                let (x, z, y, w) = (idx("X"), idx("Z"), idx("Y"), idx("W"));
                match self {
                    Construction::TwoConfounders => {
                        if matches!((x, z, y), (Some(x), Some(z), Some(y)) if g.has_bidirected(x, z) && g.has_bidirected(x, y))
                        {
                            out.push(Confounder::Latent);
                        }
                    }
                    Construction::XorBow => {
                        if matches!((x, z, y), (Some(x), Some(z), Some(y)) if g.has_bidirected(x, y) && g.has_bidirected(z, y))
                        {
                            out.push(Confounder::Latent);
                        }
                    }
                    _ => {
                        if matches!((w, x, z), (Some(w), Some(x), Some(z)) if g.has_directed(w, x) && g.has_directed(w, z))
                        {
                            out.push(Confounder::Observed("W".into()));
                        }
                    }
                }
            }
        }
        out
    }

    /// The two models on `g`.
    pub fn build(self, g: &CausalGraph, c: &Confounder, k: Params) -> Result<Pair, ScmError> {
        let u = c.name().to_string();
        let uv = move |pv: &ParentValues| pv[u.as_str()] == 1;
        let Params { p, q, a, b } = k;
        let with_u = |prior: f64| -> Result<(ScmBuilder, Vec<&'static str>), ScmError> {
            let bld = ScmBuilder::new(g.clone());
            Ok(match (c, self.confounded_pair()) {
                (Confounder::Latent, Some((x, y))) => (bld.latent("U", &[x, y], prior)?, vec![]),
                (Confounder::Observed(_), _) => (bld.binary("W", |_| prior)?, vec!["W"]),
                _ => (bld, vec![]),
            })
        };
        match self {
            Construction::CauseMediator => {
                let z = |pv: &ParentValues| match (pv["X"], uv(pv)) {
                    (0, _) => 0.5,
                    (_, true) => q,
                    (_, false) => 1.0 - q,
                };
                let y = |pv: &ParentValues| if pv["Z"] == 1 { a } else { b };
                let (b1, s1) = with_u(0.5)?;
                let m1 = b1
                    .binary("X", |pv| if uv(pv) { p } else { 1.0 - p })?
                    .binary("Z", z)?
                    .binary("Y", y)?;
                let (b2, s2) = with_u(p)?;
                let m2 = b2.binary("X", |_| 0.5)?.binary("Z", z)?.binary("Y", y)?;
                Ok((finish(m1, &s1)?, finish(m2, &s2)?))
            }
            Construction::MediatorOutcome => {
                let (b1, s1) = with_u(0.5)?;
                let m1 = b1
                    .binary("X", |_| 0.5)?
                    .binary("Z", |pv| if uv(pv) { p } else { 1.0 - p })?
                    .binary("Y", |pv| match (pv["Z"], uv(pv)) {
                        (0, _) => 0.5,
                        (_, true) => a,
                        (_, false) => b,
                    })?;
                let (b2, s2) = with_u(p)?;
                let m2 = b2
                    .binary("X", |_| 0.5)?
                    .binary("Z", |_| 0.5)?
                    .binary("Y", |pv| if pv["Z"] == 0 { 0.5 } else { (a + b) / 2.0 })?;
                Ok((finish(m1, &s1)?, finish(m2, &s2)?))
            }
            Construction::CauseOutcome => {
                let shared = |bld: ScmBuilder| -> Result<ScmBuilder, ScmError> {
                    bld.binary("X", |pv| if uv(pv) { 0.5 } else { 0.25 })?
                        .binary("Z", |pv| if pv["X"] == 1 { 0.75 } else { 0.25 })
                };
                let (b1, s1) = with_u(0.5)?;
                let m1 = shared(b1)?.binary("Y", |pv| match (pv["Z"], uv(pv)) {
                    (1, true) => 0.8,
                    (1, false) => 0.7,
                    (_, true) => 0.65,
                    (_, false) => 0.05,
                })?;
                let (b2, s2) = with_u(0.5)?;
                let m2 = shared(b2)?.binary("Y", |pv| match (pv["Z"], uv(pv)) {
                    (1, true) => 0.95,
                    (1, false) => 0.5,
                    (_, true) => 0.4,
                    (_, false) => 0.25,
                })?;
                Ok((finish(m1, &s1)?, finish(m2, &s2)?))
            }
            Construction::MediatorOutcomeFixed => {
                let y = |pv: &ParentValues| match (pv["Z"], uv(pv)) {
                    (1, true) => 0.2,
                    (1, false) => 0.3,
                    (_, true) => 0.3,
                    (_, false) => 0.35,
                };
                let (b1, s1) = with_u(0.5)?;
                let m1 = b1
                    .binary("X", |_| 0.4)?
                    .binary("Z", |pv| match (pv["X"], uv(pv)) {
                        (1, true) => 0.4,
                        (1, false) => 0.35,
                        (_, true) => 0.3,
                        (_, false) => 0.4,
                    })?
                    .binary("Y", y)?;
                let (b2, s2) = with_u(0.5)?;
                let m2 = b2
                    .binary("X", |_| 0.4)?
                    .binary("Z", |pv| match (pv["X"], uv(pv)) {
                        (1, true) => 0.1,
                        (1, false) => 0.35,
                        (_, true) => 0.5,
                        (_, false) => 0.2,
                    })?
                    .binary("Y", y)?;
                Ok((finish(m1, &s1)?, finish(m2, &s2)?))
            }
            Construction::TwoConfounders => {
                let u1 = |pv: &ParentValues| pv["U1"] == 1;
                let z = move |pv: &ParentValues| match (pv["X"], u1(pv)) {
                    (0, _) => 0.5,
                    (_, true) => q,
                    (_, false) => 1.0 - q,
                };
                let y = |pv: &ParentValues| if pv["Z"] == 1 { a } else { b };
                let model = |prior1: f64,
                             x: &dyn Fn(&ParentValues) -> f64|
                 -> Result<DiscreteScm, ScmError> {
                    let bld = ScmBuilder::new(g.clone())
                        .latent("U1", &["X", "Z"], prior1)?
                        .latent("U2", &["X", "Y"], 0.5)?
                        .binary("X", x)?
                        .binary("Z", z)?
                        .binary("Y", y)?;
                    finish(bld, &[])
                };
                Ok((
                    model(0.5, &|pv| if u1(pv) { p } else { 1.0 - p })?,
                    model(p, &|_| 0.5)?,
                ))
            }
            Construction::Covariate => {
                let z = |pv: &ParentValues| match (pv["X"], pv["W"]) {
                    (0, _) => 0.5,
                    (_, 1) => q,
                    (_, _) => 1.0 - q,
                };
                let y = |pv: &ParentValues| if pv["Z"] == 1 { a } else { b };
                let model =
                    |w: f64, x: &dyn Fn(&ParentValues) -> f64| -> Result<DiscreteScm, ScmError> {
                        let bld = ScmBuilder::new(g.clone())
                            .binary("W", |_| w)?
                            .binary("X", x)?
                            .binary("Z", z)?
                            .binary("Y", y)?;
                        finish(bld, &["W"])
                    };
                Ok((
                    model(0.5, &|pv| if pv["W"] == 1 { p } else { 1.0 - p })?,
                    model(p, &|_| 0.5)?,
                ))
            }
            Construction::XorChain => {
                let (b1, s1) = with_u(0.5)?;
                let xor = |a: bool, b: bool| if a != b { 1.0 } else { 0.0 };
                let m1 = b1
                    .binary("X", |_| 0.5)?
                    .binary("Z", |pv| xor(pv["X"] == 1, uv(pv)))?
                    .binary("Y", |pv| xor(pv["Z"] == 1, uv(pv)))?;
                let (b2, s2) = with_u(0.5)?;
                let m2 = b2
                    .binary("X", |_| 0.5)?
                    .binary("Z", |_| 0.5)?
                    .binary("Y", |_| 0.5)?;
                Ok((finish(m1, &s1)?, finish(m2, &s2)?))
            }
            Construction::XorBow => {
                let model = |x: &dyn Fn(&ParentValues) -> f64, y: &dyn Fn(&ParentValues) -> f64| {
                    let bld = ScmBuilder::new(g.clone())
                        .latent("U1", &["X", "Y"], 0.5)?
                        .latent("U2", &["Z", "Y"], 0.5)?
                        .binary("X", x)?
                        .binary("Z", |pv| (pv["X"] ^ pv["U2"]) as f64)?
                        .binary("Y", y)?;
                    finish(bld, &[])
                };
                Ok((
                    model(&|_| 0.5, &|pv| (pv["Z"] ^ pv["U2"]) as f64)?,
                    model(&|pv| pv["U1"] as f64, &|pv| pv["U1"] as f64)?,
                ))
            }
        }
    }
}

/// Gives every observed variable not yet assigned `P(V = 1) = 1/2`.
fn finish(mut bld: ScmBuilder, assigned: &[&str]) -> Result<DiscreteScm, ScmError> {
    let g = bld.graph().clone();
    for v in 0..g.len() {
        let name = g.name(v);
        if g.kind(v) == VarKind::Substantive
            && !["X", "Z", "Y"].contains(&name)
            && !assigned.contains(&name)
        {
            bld = bld.binary(name, |_| 0.5)?;
        }
    }
    bld.build()
}

/// A construction that proves a cell, with its comparison report.
#[derive(Debug, Clone)]
pub struct Coverage {
    pub construction: Construction,
    pub confounder: Confounder,
    pub report: WitnessReport,
}

/// Tries every construction on the graph of `spec` and returns the first
/// whose models agree on all inputs within `input_tol` and differ on the
/// target by more than `gap`.
pub fn find_witness(
    spec: &QuerySpec,
    k: Params,
    input_tol: f64,
    gap: f64,
) -> Result<Option<Coverage>, ScmError> {
    for c in Construction::ALL {
        for conf in c.confounders(&spec.graph) {
            let (m1, m2) = c.build(&spec.graph, &conf, k)?;
            let w = WitnessPair {
                m1,
                m2,
                inputs: spec.inputs.clone(),
                target: spec.target,
            };
            let report = check_witness(&w, input_tol)?;
            if report.proves(input_tol, gap) {
                return Ok(Some(Coverage {
                    construction: c,
                    confounder: conf,
                    report,
                }));
            }
        }
    }
    Ok(None)
}

/// `Z = X xor U`, `Y = Z xor U` with a fair latent `U` on `Z <-> Y` and a
/// fair `X`.
pub fn xor_model(g: &CausalGraph) -> Result<DiscreteScm, ScmError> {
    let bld = ScmBuilder::new(g.clone())
        .latent("U", &["Z", "Y"], 0.5)?
        .binary("X", |_| 0.5)?
        .binary("Z", |pv| (pv["X"] ^ pv["U"]) as f64)?
        .binary("Y", |pv| (pv["Z"] ^ pv["U"]) as f64)?;
    finish(bld, &[])
}
