//! Built-in scenario suites: the seven front-door variants with nine data
//! source combinations, the salt intake model, and the two missing-data
//! designs. Graph texts are kept verbatim, duplicate edges included.

use crate::scenario::Scenario;

pub const QUERY: &str = "P(Y|do(X))";

pub const GRAPH_1A: &str = "X -> Z\nZ -> Y\nZ -> Y\nX <-> Y";
pub const GRAPH_1B: &str = "X -> Z\nZ -> Y\nX <-> Z";
pub const GRAPH_1C: &str = "X -> Z\nZ -> Y\nX <-> Y\nX <-> Z";
pub const GRAPH_1D: &str = "X -> Z\nZ -> Y\nZ <-> Y";
pub const GRAPH_1E: &str = "X -> Z\nZ -> Y\nZ <-> Y\nX <-> Y";
pub const GRAPH_1F: &str = "X -> Z\nZ -> Y\nW -> X\nW -> Z\nW -> Y\nX <-> Y";
pub const GRAPH_1G: &str = "X -> Z\nZ -> Y\nW -> X\nW -> Z\nW -> Y\nX <-> Y\nX <-> Z";

pub const FIG1_GRAPHS: [(&str, &str); 7] = [
    ("a", GRAPH_1A),
    ("b", GRAPH_1B),
    ("c", GRAPH_1C),
    ("d", GRAPH_1D),
    ("e", GRAPH_1E),
    ("f", GRAPH_1F),
    ("g", GRAPH_1G),
];

pub const TABLE1_SOURCES: [&[&str]; 9] = [
    &["P(X,Y,Z)"],
    &["P(X,Z)", "P(Y|do(Z))"],
    &["P(Z|do(X))", "P(Y|do(Z))"],
    &["P(Z,Y)", "P(Z|do(X))"],
    &["P(X,Z)", "P(X,Y)", "P(Z,Y)", "P(Z|do(X))"],
    &["P(X,Y,Z,W)"],
    &["P(X,Z,W)", "P(Y|do(Z),W)"],
    &["P(Z|do(X),W)", "P(Y|do(Z),W)"],
    &["P(Z|do(X),W)", "P(Y|do(Z),W)", "P(W)"],
];

/// Expected verdicts, `TABLE1_EXPECTED[row][graph]`.
pub const TABLE1_EXPECTED: [[bool; 7]; 9] = {
    const T: bool = true;
    const F: bool = false;
    [
        [T, F, F, T, F, F, F],
        [T, F, F, F, F, F, F],
        [T, T, T, F, F, F, F],
        [F, T, F, F, F, F, F],
        [F, T, F, T, F, F, F],
        [T, F, F, T, F, T, F],
        [T, F, F, F, F, T, F],
        [T, T, T, F, F, F, F],
        [T, T, T, F, F, T, T],
    ]
};

/// Graph text for `graph` with an isolated `W` declared when the sources
/// mention `W` and the graph does not.
pub fn graph_with_sources(graph: &str, sources: &[&str]) -> String {
    let has_w = |s: &str| {
        s.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .any(|t| t == "W")
    };
    if sources.iter().any(|s| has_w(s)) && !has_w(graph) {
        format!("{graph}\nW")
    } else {
        graph.to_string()
    }
}

/// Scenario for one Table 1 cell, with rows and graphs counted from 0.
pub fn table1_scenario(row: usize, graph: usize) -> Scenario {
    let (name, text) = FIG1_GRAPHS[graph];
    let sources = TABLE1_SOURCES[row];
    Scenario::new(&graph_with_sources(text, sources), sources, QUERY).with_label(&format!(
        "table1-r{}-{}",
        row + 1,
        name
    ))
}

pub const FIG2_GRAPH: &str = "X -> Z\nZ -> Y\nX <-> Y";
pub const FIG2_SOURCES: [&str; 2] = ["P(Y | do(Z))", "P(X,Z)"];
pub const FIG2_FORMULA: &str = "[sum_{Z} [p(Z|X)*p(Y|do(Z))]]";

pub fn fig2_scenario() -> Scenario {
    Scenario::new(FIG2_GRAPH, &FIG2_SOURCES, "P(Y | do(X))").with_label("front-door")
}

/// The salt intake model. The latent link of the pre-mediator confounders
/// is `H <-> W`, as drawn.
pub const GRAPH_3: &str =
    "X -> Z\nZ -> Y\nW -> X\nW -> Z\nW -> Y\nH -> X\nH -> Z\nX <-> Y\nH <-> W";
pub const FIG3_SOURCES: [&str; 2] = ["P(X,Z,H,W)", "P(Y|do(Z),W)"];
/// Reference formula for the salt intake model.
pub const FIG3_REFERENCE: &str = "[sum_{Z,W,H} [p(H,W)*p(Z|X,H,W)*p(Y|do(Z),W)]]";

pub fn fig3_scenario() -> Scenario {
    Scenario::new(GRAPH_3, &FIG3_SOURCES, QUERY).with_label("salt-intake")
}

pub const GRAPH_4A: &str =
    "X -> Z\nZ -> Y\nZ -> Y\nX <-> Y\nX -> R_Z\nY -> R_Z\nR_X <-> R_Z\nR_X <-> R_Y\nR_Z <-> R_Y";
pub const GRAPH_4B: &str =
    "X -> Z\nZ -> Y\nZ -> Y\nX <-> Y\nY -> R_Y\nR_Y -> R_X\nR_Y -> R_Z\nR_X <-> R_Z\nR_X <-> R_Y\nR_Z <-> R_Y";
pub const FIG4_GRAPHS: [(&str, &str); 2] = [("a", GRAPH_4A), ("b", GRAPH_4B)];
pub const MISSING_XYZ: &str = "R_X : X, R_Y : Y, R_Z : Z";
pub const FIG4_SOURCES: [&[&str]; 3] = [
    &["P(X*,Y*,Z*,R_X,R_Y,R_Z)"],
    &["P(X*,Y*,Z*,R_X,R_Y,R_Z)", "P(Y)"],
    &["P(X*,Y*,Z*,R_X,R_Y,R_Z)", "P(R_Y|Y)"],
];
/// Expected verdicts, `FIG4_EXPECTED[graph][source row]`.
pub const FIG4_EXPECTED: [[bool; 3]; 2] = [[true, true, true], [false, true, true]];

pub fn fig4_scenario(graph: usize, row: usize) -> Scenario {
    let (name, text) = FIG4_GRAPHS[graph];
    Scenario::new(text, FIG4_SOURCES[row], QUERY)
        .with_missing(MISSING_XYZ)
        .with_label(&format!("fig4{}-r{}", name, row + 1))
}

/// A named scenario with its expected verdict, when one is known.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub suite: &'static str,
    pub row: String,
    pub column: String,
    pub scenario: Scenario,
    pub expect: Option<bool>,
}

/// Every built-in scenario, grouped by suite.
pub fn all_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (row, expected) in TABLE1_EXPECTED.iter().enumerate() {
        for (g, (name, _)) in FIG1_GRAPHS.iter().enumerate() {
            out.push(Fixture {
                suite: "table1",
                row: (row + 1).to_string(),
                column: name.to_string(),
                scenario: table1_scenario(row, g),
                expect: Some(expected[g]),
            });
        }
    }
    for (g, (name, _)) in FIG4_GRAPHS.iter().enumerate() {
        for (row, &expect) in FIG4_EXPECTED[g].iter().enumerate() {
            out.push(Fixture {
                suite: "fig4",
                row: (row + 1).to_string(),
                column: name.to_string(),
                scenario: fig4_scenario(g, row),
                expect: Some(expect),
            });
        }
    }
    out.push(Fixture {
        suite: "examples",
        row: "1".into(),
        column: "front-door".into(),
        scenario: fig2_scenario(),
        expect: Some(true),
    });
    out.push(Fixture {
        suite: "examples",
        row: "1".into(),
        column: "salt-intake".into(),
        scenario: fig3_scenario(),
        expect: Some(true),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;

    #[test]
    fn every_fixture_parses() {
        for f in all_fixtures() {
            let spec = f
                .scenario
                .to_spec()
                .unwrap_or_else(|e| panic!("{}: {e}", f.scenario.label.clone().unwrap()));
            assert!(!spec.inputs.is_empty());
        }
    }

    #[test]
    fn isolated_w_is_added_for_w_sources_only() {
        let s = table1_scenario(5, 0).to_spec().unwrap();
        let w = s.graph.index_of("W").unwrap();
        assert!(
            s.graph.parents(w).is_empty()
                && s.graph.children(w).is_empty()
                && s.graph.spouses(w).is_empty()
        );
        assert!(table1_scenario(0, 0)
            .to_spec()
            .unwrap()
            .graph
            .index_of("W")
            .is_none());
        assert_eq!(table1_scenario(5, 5).to_spec().unwrap().graph.len(), 4);
    }

    #[test]
    fn salt_graph_shape() {
        let g = fig3_scenario().to_spec().unwrap().graph;
        assert_eq!(
            (
                g.len(),
                g.directed_edges().len(),
                g.bidirected_edges().len()
            ),
            (5, 7, 2)
        );
        Formula::parse(FIG3_REFERENCE, &g)
            .unwrap()
            .validate(&g)
            .unwrap();
    }

    #[test]
    fn missing_graphs_have_nine_variables() {
        for g in 0..2 {
            assert_eq!(fig4_scenario(g, 0).to_spec().unwrap().graph.len(), 9);
        }
    }
}
