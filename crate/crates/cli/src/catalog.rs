//! Scenarios shipped with the tool.

use crate::scenario::{Scenario, SchemaError};

/// `(id, file contents)` of the bundled scenarios.
pub const BUNDLED: [(&str, &str); 9] = [
    (
        "classical-linear",
        include_str!("../scenarios/classical-linear.json"),
    ),
    (
        "quantum-linear",
        include_str!("../scenarios/quantum-linear.json"),
    ),
    ("mass-linear", include_str!("../scenarios/mass-linear.json")),
    ("guedes", include_str!("../scenarios/guedes.json")),
    (
        "caldirola-kanai",
        include_str!("../scenarios/caldirola-kanai.json"),
    ),
    (
        "inverse-square",
        include_str!("../scenarios/inverse-square.json"),
    ),
    ("paul-trap", include_str!("../scenarios/paul-trap.json")),
    ("damped-ck", include_str!("../scenarios/damped-ck.json")),
    (
        "forced-oscillator",
        include_str!("../scenarios/forced-oscillator.json"),
    ),
];

/// JSON schema of the scenario format.
pub const SCENARIO_SCHEMA: &str = include_str!("../scenario.schema.json");

pub fn ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

/// Source text of a bundled scenario.
pub fn source(id: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(k, _)| *k == id).map(|(_, s)| *s)
}

/// Parses a bundled scenario.
pub fn load(id: &str) -> Result<Scenario, SchemaError> {
    let text =
        source(id).ok_or_else(|| SchemaError::new("", format!("unknown scenario `{id}`")))?;
    Scenario::from_json(text)
}

/// All bundled scenarios, parsed.
pub fn all() -> Vec<Scenario> {
    ids()
        .map(|id| load(id).expect("bundled scenarios are valid"))
        .collect()
}

/// One line per bundled scenario: id and title.
pub fn list_text() -> String {
    let mut out = String::new();
    for s in all() {
        out.push_str(&format!("{:<20} {}\n", s.id, s.title));
    }
    out
}

/// Multi-line description of a bundled scenario.
pub fn describe_text(id: &str) -> Result<String, SchemaError> {
    let s = load(id)?;
    let mut out = format!("{}: {}\n\n{}\n\n", s.id, s.title, s.description);
    let algebra = match &s.algebra {
        crate::scenario::AlgebraRef::Builtin(name) => name.clone(),
        crate::scenario::AlgebraRef::Inline(_) => "inline".to_string(),
    };
    out.push_str(&format!("algebra:    {algebra}\n"));
    out.push_str(&format!("ordering:   {:?}\n", s.ordering));
    out.push_str(&format!("span:       [{}, {}]\n", s.span[0], s.span[1]));
    if !s.parameters.is_empty() {
        out.push_str("parameters:\n");
        for (k, v) in &s.parameters {
            out.push_str(&format!("  {k} = {v}\n"));
        }
    }
    if let Some(o) = &s.oracle {
        out.push_str(&format!("oracle:     {}\n", o.id()));
    }
    let checks: Vec<&str> = s.checks.iter().map(|c| c.name()).collect();
    out.push_str(&format!("checks:     {}\n", checks.join(", ")));
    Ok(out)
}
