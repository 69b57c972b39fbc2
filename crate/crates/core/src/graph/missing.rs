//! Missing-data augmentation: for each `R : X` pair a proxy `X*` is created
//! with parents exactly `{X, R}` and no children.

use super::{CausalGraph, GraphError, VarKind};

/// Parses `"R_X : X, R_Y : Y"` into name pairs. Empty input yields no pairs.
pub fn parse_missing_spec(spec: &str) -> Result<Vec<(String, String)>, GraphError> {
    let mut pairs = Vec::new();
    for item in spec.split([',', '\n']) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (r, x) = item
            .split_once(':')
            .ok_or_else(|| GraphError::MalformedMissing(item.to_string()))?;
        let (r, x) = (r.trim(), x.trim());
        if !is_ident(r) || !is_ident(x) {
            return Err(GraphError::MalformedMissing(item.to_string()));
        }
        pairs.push((r.to_string(), x.to_string()));
    }
    Ok(pairs)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    let body = s.strip_suffix('*').unwrap_or(s);
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && body.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(super) fn augment(g: &CausalGraph, spec: &str) -> Result<CausalGraph, GraphError> {
    let pairs = parse_missing_spec(spec)?;
    let mut out = g.clone();
    for (r_name, x_name) in pairs {
        let x = out
            .index_of(&x_name)
            .ok_or_else(|| GraphError::UnknownVariable(x_name.clone()))?;
        if out.kind(x) == VarKind::Proxy || x_name.ends_with('*') {
            return Err(GraphError::ProxyTarget(x_name));
        }
        if out.kind(x) == VarKind::ResponseIndicator {
            return Err(GraphError::InvalidIndicator(x_name));
        }
        let r = match out.index_of(&r_name) {
            Some(r) => r,
            None => out.push_variable(&r_name, VarKind::Substantive)?,
        };
        if r == x || r_name.ends_with('*') || out.kind(r) == VarKind::Proxy {
            return Err(GraphError::InvalidIndicator(r_name));
        }
        if out.missing.contains_key(&r) {
            return Err(GraphError::IndicatorMappedTwice(r_name));
        }
        if out.missing.values().any(|&t| t == x) || out.missing.contains_key(&x) {
            return Err(GraphError::TargetMappedTwice(x_name));
        }
        if out.missing.values().any(|&t| t == r) {
            return Err(GraphError::InvalidIndicator(r_name));
        }
        let proxy_name = format!("{x_name}*");
        if out.index_of(&proxy_name).is_some() {
            return Err(GraphError::ProxyExists(proxy_name));
        }
        out.vars[r].kind = VarKind::ResponseIndicator;
        let proxy = out.push_variable(&proxy_name, VarKind::Proxy)?;
        out.add_directed(x, proxy)?;
        out.add_directed(r, proxy)?;
        out.missing.insert(r, x);
        out.proxy_of.insert(x, proxy);
    }
    Ok(out)
}
