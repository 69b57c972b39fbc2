//! Edge-list DSL: statements `A -> B`, `A <-> B` or a bare `A` (declaration),
//! separated by whitespace or newlines. Chains such as `A -> B -> C` are
//! accepted and expand to consecutive edges.

use super::{CausalGraph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    Directed,
    Bidirected,
}

fn lex(text: &str) -> Result<Vec<Token<'_>>, GraphError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() || c == b';' {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            out.push(Token::Ident(&text[start..i]));
        } else if text[i..].starts_with("<->") {
            out.push(Token::Bidirected);
            i += 3;
        } else if text[i..].starts_with("->") {
            out.push(Token::Directed);
            i += 2;
        } else {
            let end = text[i..]
                .find(char::is_whitespace)
                .map_or(text.len(), |e| i + e);
            return Err(GraphError::Malformed(text[i..end].to_string()));
        }
    }
    Ok(out)
}

pub(super) fn parse_graph(text: &str) -> Result<CausalGraph, GraphError> {
    let tokens = lex(text)?;
    let mut g = CausalGraph::new();
    let mut i = 0;
    while i < tokens.len() {
        let Token::Ident(first) = tokens[i] else {
            return Err(GraphError::Malformed(describe(&tokens[i])));
        };
        let mut from = g.add_variable(first)?;
        i += 1;
        while i < tokens.len() && !matches!(tokens[i], Token::Ident(_)) {
            let arrow = tokens[i].clone();
            let Some(Token::Ident(next)) = tokens.get(i + 1) else {
                return Err(GraphError::Malformed(format!(
                    "{} {}",
                    first,
                    describe(&arrow)
                )));
            };
            let to = g.add_variable(next)?;
            match arrow {
                Token::Directed => g.add_directed(from, to)?,
                Token::Bidirected => g.add_bidirected(from, to)?,
                Token::Ident(_) => unreachable!(),
            }
            from = to;
            i += 2;
        }
    }
    Ok(g)
}

fn describe(t: &Token<'_>) -> String {
    match t {
        Token::Ident(s) => s.to_string(),
        Token::Directed => "->".into(),
        Token::Bidirected => "<->".into(),
    }
}
