//! TOML model files.
//!
//! Two mutually exclusive layouts are accepted. A builtin reference:
//!
//! ```toml
//! builtin = "aniso-qah"
//!
//! [params]       # optional, defaults shown
//! a1 = 1.0
//! a2 = 3.0
//! m = 1.0
//! ```
//!
//! or an explicit term list, one `[[term]]` table per harmonic:
//!
//! ```toml
//! [[term]]
//! trig = "sin"       # "sin" or "cos"
//! nx = 1
//! ny = 0
//! amplitude = 1.0
//! component = 1      # Pauli component 1, 2, or 3
//! ```

use std::path::Path;

use serde::Deserialize;

use super::{BlochModel, FourierTerm, TrigKind};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    builtin: Option<String>,
    params: Option<ParamTable>,
    #[serde(default, rename = "term")]
    terms: Vec<TermRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamTable {
    a1: Option<f64>,
    a2: Option<f64>,
    m: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRow {
    trig: String,
    nx: i32,
    ny: i32,
    amplitude: f64,
    component: usize,
}

/// Parse a model description in the TOML layout above.
pub fn parse_model(text: &str) -> Result<BlochModel> {
    let doc: ModelDoc =
        toml::from_str(text).map_err(|e| Error::ModelFile(format!("parse error: {e}")))?;

    match (&doc.builtin, doc.terms.is_empty()) {
        (Some(name), true) => builtin(name, doc.params.as_ref()),
        (None, false) => {
            if doc.params.is_some() {
                return Err(Error::ModelFile(
                    "params table is only valid together with a builtin name".into(),
                ));
            }
            from_rows(&doc.terms)
        }
        (Some(_), false) => Err(Error::ModelFile(
            "give either a builtin name or a term list, not both".into(),
        )),
        (None, true) => Err(Error::ModelFile(
            "model file needs a builtin name or at least one [[term]] table".into(),
        )),
    }
}

/// Read and parse a model file from disk.
pub fn load_model(path: impl AsRef<Path>) -> Result<BlochModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::ModelFile(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_model(&text)
}

fn builtin(name: &str, params: Option<&ParamTable>) -> Result<BlochModel> {
    match name {
        "aniso-qah" => {
            let a1 = params.and_then(|p| p.a1).unwrap_or(1.0);
            let a2 = params.and_then(|p| p.a2).unwrap_or(3.0);
            let m = params.and_then(|p| p.m).unwrap_or(1.0);
            for (label, v) in [("a1", a1), ("a2", a2), ("m", m)] {
                if !v.is_finite() {
                    return Err(Error::ModelFile(format!("parameter {label} must be finite")));
                }
            }
            Ok(BlochModel::aniso_qah(a1, a2, m))
        }
        other => Err(Error::ModelFile(format!("unknown builtin model \"{other}\""))),
    }
}

fn from_rows(rows: &[TermRow]) -> Result<BlochModel> {
    let mut terms = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let kind = match row.trig.as_str() {
            "sin" => TrigKind::Sin,
            "cos" => TrigKind::Cos,
            other => {
                return Err(Error::ModelFile(format!(
                    "term {}: trig must be \"sin\" or \"cos\", got \"{other}\"",
                    i + 1
                )))
            }
        };
        if !(1..=3).contains(&row.component) {
            return Err(Error::ModelFile(format!(
                "term {}: component must be 1, 2, or 3, got {}",
                i + 1,
                row.component
            )));
        }
        if !row.amplitude.is_finite() {
            return Err(Error::ModelFile(format!("term {}: amplitude must be finite", i + 1)));
        }
        terms.push(FourierTerm {
            kind,
            nx: row.nx,
            ny: row.ny,
            amplitude: row.amplitude,
            component: row.component,
        });
    }
    BlochModel::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::KPoint;

    const EXPLICIT: &str = r#"
[[term]]
trig = "sin"
nx = 1
ny = 0
amplitude = 1.0
component = 1

[[term]]
trig = "sin"
nx = 0
ny = 1
amplitude = 3.0
component = 2

[[term]]
trig = "cos"
nx = 0
ny = 0
amplitude = 1.0
component = 3

[[term]]
trig = "cos"
nx = 1
ny = 0
amplitude = -1.0
component = 3

[[term]]
trig = "cos"
nx = 0
ny = 1
amplitude = -1.0
component = 3
"#;

    #[test]
    fn builtin_with_default_params() {
        let m = parse_model("builtin = \"aniso-qah\"").unwrap();
        let d = m.d_vector(KPoint::new(0.5, -0.9)).unwrap();
        let reference = BlochModel::aniso_qah_default()
            .d_vector(KPoint::new(0.5, -0.9))
            .unwrap();
        assert_eq!(d, reference);
    }

    #[test]
    fn builtin_with_overridden_params() {
        let text = "builtin = \"aniso-qah\"\n[params]\na2 = 5.0\n";
        let m = parse_model(text).unwrap();
        let d = m.d_vector(KPoint::new(0.0, std::f64::consts::PI / 2.0)).unwrap();
        assert!((d.y - 5.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_terms_reproduce_the_builtin() {
        let explicit = parse_model(EXPLICIT).unwrap();
        let builtin = BlochModel::aniso_qah_default();
        for &(x, y) in &[(0.0, 0.0), (1.1, -2.3), (-3.0, 0.4), (2.2, 2.9)] {
            let k = KPoint::new(x, y);
            let diff = explicit.hamiltonian(k).max_abs_diff(&builtin.hamiltonian(k));
            assert_eq!(diff, 0.0);
        }
    }

    #[test]
    fn term_errors_cite_the_row() {
        let text = r#"
[[term]]
trig = "sin"
nx = 1
ny = 0
amplitude = 1.0
component = 1

[[term]]
trig = "sin"
nx = 0
ny = 1
amplitude = 1.0
component = 4
"#;
        match parse_model(text) {
            Err(Error::ModelFile(msg)) => {
                assert!(msg.contains("term 2"), "message was: {msg}");
                assert!(msg.contains("component"), "message was: {msg}");
            }
            other => panic!("expected ModelFile error, got {other:?}"),
        }

        let bad_trig = "[[term]]\ntrig = \"tan\"\nnx = 0\nny = 0\namplitude = 1.0\ncomponent = 1\n";
        match parse_model(bad_trig) {
            Err(Error::ModelFile(msg)) => assert!(msg.contains("term 1"), "message was: {msg}"),
            other => panic!("expected ModelFile error, got {other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        match parse_model("") {
            Err(Error::ModelFile(msg)) => assert!(msg.contains("builtin")),
            other => panic!("expected ModelFile error, got {other:?}"),
        }
        let both = format!("builtin = \"aniso-qah\"\n{EXPLICIT}");
        match parse_model(&both) {
            Err(Error::ModelFile(msg)) => assert!(msg.contains("not both")),
            other => panic!("expected ModelFile error, got {other:?}"),
        }
        match parse_model("builtin = \"mystery\"") {
            Err(Error::ModelFile(msg)) => assert!(msg.contains("mystery")),
            other => panic!("expected ModelFile error, got {other:?}"),
        }
    }

    #[test]
    fn load_reports_missing_file() {
        match load_model("/nonexistent/model.toml") {
            Err(Error::ModelFile(msg)) => assert!(msg.contains("cannot read")),
            other => panic!("expected ModelFile error, got {other:?}"),
        }
    }
}
