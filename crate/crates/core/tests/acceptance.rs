//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use docalc_core::fixtures::{self, FIG1_GRAPHS, FIG2_FORMULA, FIG3_REFERENCE, TABLE1_EXPECTED};
use docalc_core::scm::constructions::{find_witness, xor_model, Confounder, Construction, Params};
use docalc_core::scm::{check_witness, verify_formula, WitnessPair};
use docalc_core::{
    identify, DiscreteScm, DistributionTerm, Formula, QuerySpec, SearchLimits, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest accepted per-entry error of an emitted formula.
const FORMULA_TOL: f64 = 1e-9;
/// Inputs of a witness pair must agree this closely.
const WITNESS_INPUT_TOL: f64 = 1e-12;
/// Targets of a witness pair must differ by more than this.
const WITNESS_GAP: f64 = 1e-3;
const MODELS_PER_CELL: u64 = 100;
const PARAM_DRAWS: usize = 50;
const GRID_SECONDS: f64 = 60.0;
const SOUNDNESS_SECONDS: f64 = 300.0;
const EXACT: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn spec_of(s: &docalc_core::scenario::Scenario) -> QuerySpec {
    s.to_spec().expect("built-in scenario parses")
}

fn grid() -> Outcome {
    let start = Instant::now();
    let mut wrong = Vec::new();
    for (row, expected) in TABLE1_EXPECTED.iter().enumerate() {
        for (g, &expect) in expected.iter().enumerate() {
            let r = identify(
                &spec_of(&fixtures::table1_scenario(row, g)),
                SearchLimits::default(),
            );
            let want = if expect {
                Verdict::Identifiable
            } else {
                Verdict::NotIdentifiable
            };
            if r.verdict != want {
                wrong.push(format!("r{}{} {:?}", row + 1, FIG1_GRAPHS[g].0, r.verdict));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{} of 63 cells match, {secs:.2} s (limit {GRID_SECONDS} s)",
        63 - wrong.len()
    );
    if wrong.is_empty() && secs < GRID_SECONDS {
        Ok(detail)
    } else {
        Err(format!("{detail}; wrong: {}", wrong.join(", ")))
    }
}

fn front_door() -> Outcome {
    let spec = spec_of(&fixtures::fig2_scenario());
    let r = identify(&spec, SearchLimits::default());
    let got = r.formula.map(|f| f.render(&spec.graph)).unwrap_or_default();
    if r.verdict == Verdict::Identifiable && got == FIG2_FORMULA {
        Ok(format!("identifiable, formula {got}"))
    } else {
        Err(format!("{:?}, formula `{got}`", r.verdict))
    }
}

/// Worst error of the emitted formula over `MODELS_PER_CELL` random binary models.
fn worst_error(spec: &QuerySpec) -> Result<(f64, usize), String> {
    let r = identify(spec, SearchLimits::default());
    let f = r
        .formula
        .ok_or_else(|| format!("not identified: {:?}", r.verdict))?;
    let mut worst = 0.0f64;
    let mut zeros = 0;
    for seed in 0..MODELS_PER_CELL {
        let m = DiscreteScm::random_binary(&spec.graph, seed);
        let rep = verify_formula(&f, spec, &m).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_abs_diff);
        zeros += rep.zero_over_zero;
    }
    Ok((worst, zeros))
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<(String, QuerySpec)> = Vec::new();
    for (row, expected) in TABLE1_EXPECTED.iter().enumerate() {
        for (g, &expect) in expected.iter().enumerate() {
            if expect {
                cases.push((
                    format!("r{}{}", row + 1, FIG1_GRAPHS[g].0),
                    spec_of(&fixtures::table1_scenario(row, g)),
                ));
            }
        }
    }
    cases.push(("salt".into(), spec_of(&fixtures::fig3_scenario())));
    for (g, rows) in fixtures::FIG4_EXPECTED.iter().enumerate() {
        for (row, &expect) in rows.iter().enumerate() {
            if expect {
                cases.push((
                    format!("fig4{}-r{}", fixtures::FIG4_GRAPHS[g].0, row + 1),
                    spec_of(&fixtures::fig4_scenario(g, row)),
                ));
            }
        }
    }
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (name, spec) in &cases {
        match worst_error(spec) {
            Ok((w, _)) if w <= FORMULA_TOL => worst = worst.max(w),
            Ok((w, _)) => bad.push(format!("{name} error {w:e}")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{} scenarios x {MODELS_PER_CELL} models, worst error {worst:.1e} (tol {FORMULA_TOL:e}), {secs:.1} s",
        cases.len()
    );
    if bad.is_empty() && secs < SOUNDNESS_SECONDS {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", bad.join("; ")))
    }
}

/// Stated model pairs for the negative cells: source row, then each
/// construction with the graphs it is meant for.
const PROOFS: &[(usize, &[(Construction, &str)])] = &[
    (
        1,
        &[
            (Construction::CauseMediator, "bcfg"),
            (Construction::MediatorOutcome, "de"),
        ],
    ),
    (2, &[(Construction::MediatorOutcome, "defg")]),
    (
        3,
        &[
            (Construction::CauseOutcome, "acefg"),
            (Construction::MediatorOutcomeFixed, "d"),
        ],
    ),
    (4, &[(Construction::CauseOutcome, "acefg")]),
    (
        6,
        &[
            (Construction::CauseMediator, "bc"),
            (Construction::MediatorOutcome, "de"),
            (Construction::TwoConfounders, "g"),
        ],
    ),
    (
        7,
        &[
            (Construction::MediatorOutcome, "de"),
            (Construction::Covariate, "fg"),
        ],
    ),
    (8, &[(Construction::MediatorOutcome, "de")]),
];

fn proves(c: Construction, spec: &QuerySpec, k: Params) -> Result<bool, String> {
    for conf in c.confounders(&spec.graph) {
        if proves_with(c, &conf, spec, k)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn proves_with(
    c: Construction,
    conf: &Confounder,
    spec: &QuerySpec,
    k: Params,
) -> Result<bool, String> {
    let (m1, m2) = c.build(&spec.graph, conf, k).map_err(|e| e.to_string())?;
    let w = WitnessPair {
        m1,
        m2,
        inputs: spec.inputs.clone(),
        target: spec.target,
    };
    let rep = check_witness(&w, WITNESS_INPUT_TOL).map_err(|e| e.to_string())?;
    Ok(rep.proves(WITNESS_INPUT_TOL, WITNESS_GAP))
}

fn why_not(c: Construction, spec: &QuerySpec) -> Result<String, String> {
    let mut out = Vec::new();
    for conf in c.confounders(&spec.graph) {
        let (m1, m2) = c
            .build(&spec.graph, &conf, Params::DEFAULT)
            .map_err(|e| e.to_string())?;
        let w = WitnessPair {
            m1,
            m2,
            inputs: spec.inputs.clone(),
            target: spec.target,
        };
        let rep = check_witness(&w, WITNESS_INPUT_TOL).map_err(|e| e.to_string())?;
        out.push(format!(
            "inputs differ by {:.4}, targets by {:.4}",
            rep.max_input_diff, rep.target_diff
        ));
    }
    Ok(if out.is_empty() {
        "no confounder realization on this graph".into()
    } else {
        out.join(", ")
    })
}

fn value_at(m: &DiscreteScm, term: &str, assignment: &[(&str, usize)]) -> f64 {
    let g = m.graph();
    let t = m
        .enumerate_term(&DistributionTerm::parse(term, g).unwrap())
        .unwrap();
    let mut a = vec![0; t.vars().len()];
    for (name, v) in assignment {
        let i = g.index_of(name).unwrap();
        a[t.vars().iter().position(|&u| u == i).unwrap()] = *v;
    }
    t.get(&a)
}

fn fixed_numbers() -> Vec<String> {
    let spec = spec_of(&fixtures::table1_scenario(3, 0));
    let (m1, m2) = Construction::CauseOutcome
        .build(&spec.graph, &Confounder::Latent, Params::DEFAULT)
        .unwrap();
    let mut bad = Vec::new();
    let mut want = |what: &str, got: f64, expect: f64| {
        if (got - expect).abs() > EXACT {
            bad.push(format!("{what} = {got} (expected {expect})"));
        }
    };
    for (i, m) in [&m1, &m2].into_iter().enumerate() {
        want(
            &format!("P{}(Y=1,Z=1)", i + 1),
            value_at(m, "P(Z,Y)", &[("Z", 1), ("Y", 1)]),
            53.0 / 160.0,
        );
        want(
            &format!("P{}(X=1,Y=1)", i + 1),
            value_at(m, "P(X,Y)", &[("X", 1), ("Y", 1)]),
            33.0 / 128.0,
        );
    }
    want(
        "P1(Y=1|do(X=1))",
        value_at(&m1, "P(Y|do(X))", &[("X", 1), ("Y", 1)]),
        13.0 / 20.0,
    );
    want(
        "P2(Y=1|do(X=1))",
        value_at(&m2, "P(Y|do(X))", &[("X", 1), ("Y", 1)]),
        5.0 / 8.0,
    );
    bad
}

fn witnesses() -> Outcome {
    let mut failed = Vec::new();
    let mut pairs = 0;
    let mut draws = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (row, items) in PROOFS {
        for (c, graphs) in *items {
            for gname in graphs.chars() {
                let g = FIG1_GRAPHS
                    .iter()
                    .position(|(n, _)| n.starts_with(gname))
                    .unwrap();
                assert!(
                    !TABLE1_EXPECTED[*row][g],
                    "proof listed for a positive cell"
                );
                let spec = spec_of(&fixtures::table1_scenario(*row, g));
                let cell = format!("{} on r{}{gname}", c.name(), row + 1);
                pairs += 1;
                if !proves(*c, &spec, Params::DEFAULT)? {
                    failed.push(format!("{cell} ({})", why_not(*c, &spec)?));
                    continue;
                }
                if c.is_symbolic() {
                    for _ in 0..PARAM_DRAWS {
                        draws += 1;
                        let k = Params::random(&mut rng);
                        if !proves(*c, &spec, k)? {
                            failed.push(format!("{cell} at {k:?}"));
                        }
                    }
                }
            }
        }
    }
    let numbers = fixed_numbers();
    let detail = format!(
        "{} of {pairs} stated pairs prove their cell, {draws} random parameter draws, fixed numbers {}",
        pairs - failed.iter().filter(|f| !f.contains(" at ")).count(),
        if numbers.is_empty() { "match" } else { "differ" }
    );
    if failed.is_empty() && numbers.is_empty() {
        Ok(detail)
    } else {
        Err(format!(
            "{detail}; failing: {}",
            failed
                .into_iter()
                .chain(numbers)
                .collect::<Vec<_>>()
                .join("; ")
        ))
    }
}

/// Not a criterion: how many negative cells some built-in construction proves.
fn coverage() -> String {
    let mut total = 0;
    let mut proved = 0;
    for (row, expected) in TABLE1_EXPECTED.iter().enumerate() {
        for (g, &expect) in expected.iter().enumerate() {
            if !expect {
                total += 1;
                let spec = spec_of(&fixtures::table1_scenario(row, g));
                if find_witness(&spec, Params::DEFAULT, WITNESS_INPUT_TOL, WITNESS_GAP)
                    .unwrap()
                    .is_some()
                {
                    proved += 1;
                }
            }
        }
    }
    format!("{proved} of {total} negative cells proved by a built-in model pair")
}

fn xor() -> Outcome {
    let spec = spec_of(&fixtures::table1_scenario(2, 3));
    let m = xor_model(&spec.graph).map_err(|e| e.to_string())?;
    let uniform = |t: &str| {
        let tab = m
            .enumerate_term(&DistributionTerm::parse(t, &spec.graph).unwrap())
            .unwrap();
        tab.values().iter().all(|v| (v - 0.5).abs() <= EXACT)
    };
    let target = m.enumerate_term(&spec.target).unwrap();
    let deterministic = target
        .values()
        .iter()
        .all(|v| v.abs() <= EXACT || (v - 1.0).abs() <= EXACT);
    let verdict = identify(&spec, SearchLimits::default()).verdict;
    let chain = Formula::parse("[sum_{Z} [p(Z|do(X))*p(Y|do(Z))]]", &spec.graph).unwrap();
    let chain_err = verify_formula(&chain, &spec, &m)
        .map_err(|e| e.to_string())?
        .max_abs_diff;
    let detail = format!(
        "P(Z|do(X)) uniform {}, P(Y|do(Z)) uniform {}, P(Y|do(X)) deterministic {deterministic}, verdict {verdict:?}, chained experiments off by {chain_err}",
        uniform("P(Z|do(X))"),
        uniform("P(Y|do(Z))")
    );
    if uniform("P(Z|do(X))")
        && uniform("P(Y|do(Z))")
        && deterministic
        && verdict == Verdict::NotIdentifiable
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn missing_data() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (g, row) in [(0, 0), (1, 1), (1, 2)] {
        let name = format!("fig4{}-r{}", fixtures::FIG4_GRAPHS[g].0, row + 1);
        match worst_error(&spec_of(&fixtures::fig4_scenario(g, row))) {
            Ok((w, z)) => {
                ok &= w <= FORMULA_TOL && z == 0;
                parts.push(format!("{name} {w:.1e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let detail = format!(
        "{}, {MODELS_PER_CELL} models each (tol {FORMULA_TOL:e})",
        parts.join(", ")
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn salt_reference() -> Outcome {
    let spec = spec_of(&fixtures::fig3_scenario());
    let emitted = identify(&spec, SearchLimits::default())
        .formula
        .ok_or("salt intake not identified")?;
    let reference = Formula::parse(FIG3_REFERENCE, &spec.graph).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for seed in 0..MODELS_PER_CELL {
        let m = DiscreteScm::random_binary(&spec.graph, seed);
        let a = verify_formula(&emitted, &spec, &m)
            .map_err(|e| e.to_string())?
            .evaluated;
        let b = verify_formula(&reference, &spec, &m)
            .map_err(|e| e.to_string())?
            .evaluated;
        worst = worst.max(a.max_abs_diff(&b).map_err(|e| e.to_string())?);
    }
    let detail = format!(
        "emitted {} vs reference, {MODELS_PER_CELL} models, worst difference {worst:.1e} (tol {FORMULA_TOL:e})",
        emitted.render(&spec.graph)
    );
    if worst <= FORMULA_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("source combinations on the front-door variants", grid),
        ("front-door formula", front_door),
        ("soundness on random models", soundness),
        ("non-identifiability witnesses", witnesses),
        ("XOR chain of experiments", xor),
        ("missing-data formulas", missing_data),
        ("salt intake reference formula", salt_reference),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("criterion {} PASS {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("criterion {} FAIL {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "criterion 8 OUT OF SCOPE regression and weighted estimates need the original survey data"
    );
    println!("note: {}", coverage());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
