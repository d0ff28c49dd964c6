//! Result rendering: JSON envelopes and fixed-schema CSV.
//!
//! CSV schemas are part of the interface and stay stable:
//!
//! * reports — header `name,value,tolerance`; integers plain, reals in
//!   scientific notation with 12 significant digits.
//! * phase profiles — header `k,phi_u`; both columns in radians, scientific
//!   notation with 12 significant digits.
//!
//! Rendered bytes are deterministic for fixed results; the JSON envelope's
//! `wall_time_s` field is the single exception.

use std::io::{self, Write as _};
use std::path::Path;

use uhlmann::{InvariantReport, InvariantValue};

use crate::config::OutputFormat;
use crate::runner::ResultEnvelope;

pub fn render(envelope: &ResultEnvelope, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => render_json(envelope),
        OutputFormat::Csv => match &envelope.profile {
            Some(profile) => profile_csv(&profile.rows),
            None => reports_csv(&envelope.reports),
        },
    }
}

pub fn render_json(envelope: &ResultEnvelope) -> String {
    let mut text = serde_json::to_string_pretty(envelope)
        .expect("result envelopes always serialize");
    text.push('\n');
    text
}

pub fn reports_csv(reports: &[InvariantReport]) -> String {
    let mut out = String::from("name,value,tolerance\n");
    for report in reports {
        out.push_str(&format!(
            "{},{},{}\n",
            csv_field(&report.name.to_string()),
            format_value(&report.value),
            format_real(report.tolerance)
        ));
    }
    out
}

pub fn profile_csv(rows: &[[f64; 2]]) -> String {
    let mut out = String::from("k,phi_u\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", format_real(row[0]), format_real(row[1])));
    }
    out
}

pub fn format_value(value: &InvariantValue) -> String {
    match value {
        InvariantValue::Integer(i) => i.to_string(),
        InvariantValue::Real(r) => format_real(*r),
    }
}

fn format_real(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Write to the given path, or to stdout when no path is set.
pub fn write_out(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use uhlmann::{GridMeta, InvariantName};

    fn report(name: InvariantName, value: InvariantValue) -> InvariantReport {
        InvariantReport { name, value, grid: GridMeta::default(), tolerance: 2.5e-15 }
    }

    #[test]
    fn report_rows_follow_the_schema() {
        let csv = reports_csv(&[report(
            InvariantName::ChernPure,
            InvariantValue::Integer(-1),
        )]);
        assert_eq!(csv, "name,value,tolerance\nchern_pure,-1,2.50000000000e-15\n");
    }

    #[test]
    fn names_with_commas_are_quoted() {
        let csv = reports_csv(&[report(
            InvariantName::ChernMixed { level: 1, count: 1 },
            InvariantValue::Integer(1),
        )]);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("\"chern_mixed(level=1,n=1)\","), "{row}");
    }

    #[test]
    fn profile_rows_carry_twelve_significant_digits() {
        let csv = profile_csv(&[[-std::f64::consts::PI, 0.5]]);
        assert_eq!(csv, "k,phi_u\n-3.14159265359e0,5.00000000000e-1\n");
    }
}
