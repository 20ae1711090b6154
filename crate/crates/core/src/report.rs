//! Machine-readable output: JSON with 17 significant digits and stable key
//! order, CSV tables, and the metadata block carried by every document.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::observables::{AtomPreset, ResonanceWeight, CONSTANTS_VERSION};
use crate::selfenergy::RetardedForm;

pub const SCHEMA_VERSION: &str = "1";

/// Shipped JSON schema for report documents.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Formats a float with 17 significant digits; non-finite values as "NaN",
/// "inf" or "-inf" (CSV only; JSON emits null).
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct PreciseFormatter;

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact serialization with 17-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// A column of a CSV table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => format_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn to_value(&self) -> Value {
        match self {
            Cell::Real(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Rectangular table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as objects keyed by column name.
    pub fn to_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert(c.clone(), v.to_value());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Settings echoed into every document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFlags {
    pub weight: ResonanceWeight,
    pub form: RetardedForm,
    pub preset_name: String,
    pub preset: AtomPreset,
    pub extra: Vec<(String, Value)>,
}

pub const NOTE_C_ORDERING: &str = "normalization polynomial is C0 + C1 u + C2 u^2; the solved triple is (C0, C1, C2) = (-7/2, 8, -29/6); the commonly quoted assignment of 8 and -29/6 to C1 and C2 is swapped relative to the one that zeroes the series";
pub const NOTE_RATIO_SIGN: &str = "ratio_signed = Delta_final / Lamb_reference is negative: Delta_final > 0 while the Lamb reference carries the sign of its negative log bracket; ratio_magnitude is the quantity quoted as approximately 0.055";
pub const NOTE_JUMP_FORM: &str = "half-jump retarded form uses (u^2-1)^3/(4u^4) on the log and step terms, which matches the numerical central splitting; full-jump uses /(2u^4) and has twice the imaginary part";
pub const NOTE_GAMMA_EXACT: &str = "gamma_exact / gamma_leading = (1+du/2)^3/(1+du)^p with p the denominator power, which is below 1; the expected window (0, 5 du) for its excess is not met";
pub const NOTE_WW_GRID: &str = "mode grid, flat couplings, bandwidth, mode count and step size of the decay simulation are this implementation's own discretization choices";
pub const NOTE_Z_SHIFT: &str = "near threshold Re Z rests on the cancellation 1/3 + C0 + C1 + C2 = 0, resolved only to double precision; when z_shift_resolved is false, delta_final (low-order coefficients set exactly to zero) is the resolved shift";
pub const NOTE_DURATION: &str = "z_numerical is compared with the closed form at the effective duration Int g^2 dx / c, which includes the ramps";

fn denominator_note(weight: ResonanceWeight) -> String {
    format!(
        "resonance weight {} gives a rate denominator (1 + du)^{}; inverse-u gives power 5, unity gives power 4",
        weight.as_str(),
        weight.denominator_power()
    )
}

pub fn metadata(flags: &RunFlags) -> Value {
    let mut m = Map::new();
    m.insert("constants_version".into(), json!(CONSTANTS_VERSION));
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("preset_name".into(), json!(flags.preset_name));
    m.insert(
        "preset".into(),
        serde_json::to_value(flags.preset).expect("preset serializes"),
    );
    m.insert("resonance_weight".into(), json!(flags.weight.as_str()));
    m.insert(
        "denominator_power".into(),
        json!(flags.weight.denominator_power()),
    );
    m.insert("retarded_form".into(), json!(flags.form.as_str()));
    let notes = json!({
        "c_ordering": NOTE_C_ORDERING,
        "denominator_power": denominator_note(flags.weight),
        "gamma_exact": NOTE_GAMMA_EXACT,
        "jump_form": NOTE_JUMP_FORM,
        "ratio_sign": NOTE_RATIO_SIGN,
        "wavepacket_duration": NOTE_DURATION,
        "ww_grid": NOTE_WW_GRID,
        "z_shift": NOTE_Z_SHIFT,
    });
    m.insert("notes".into(), notes);
    let mut extra = Map::new();
    for (k, v) in &flags.extra {
        extra.insert(k.clone(), v.clone());
    }
    m.insert("flags".into(), Value::Object(extra));
    Value::Object(m)
}

/// Full JSON document for a command.
pub fn document(command: &str, flags: &RunFlags, results: Value) -> Value {
    json!({
        "command": command,
        "metadata": metadata(flags),
        "results": results,
    })
}

/// CSV output: metadata as leading comment lines, then the table.
pub fn csv_document(command: &str, flags: &RunFlags, table: &Table) -> String {
    let meta = to_json_string(&metadata(flags)).expect("metadata serializes");
    let mut out = format!("# command: {command}\n# metadata: {}", meta);
    out.push_str(&table.to_csv());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json_string(&json!({"a": 0.1, "b": 1.0, "c": f64::NAN, "d": 6.26e8})).unwrap();
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":1.0000000000000000e0,\"c\":null,\"d\":6.2600000000000000e8}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap(), 0.1);
        assert_eq!(back["d"].as_f64().unwrap(), 6.26e8);
    }

    #[test]
    fn roundtrip_exact() {
        for x in [
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02214076e23,
            -1.2345678901234567e-300,
        ] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_rows_and_quoting() {
        let mut t = Table::new(&["x", "label", "ok"]);
        t.push(vec![
            Cell::Real(0.5),
            Cell::Text("a,b".into()),
            Cell::Bool(true),
        ]);
        t.push(vec![
            Cell::Real(f64::INFINITY),
            Cell::Text("c".into()),
            Cell::Bool(false),
        ]);
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "x,label,ok\n5.0000000000000000e-1,\"a,b\",true\ninf,c,false\n"
        );
        assert_eq!(t.to_value().as_array().unwrap().len(), 2);
    }

    #[test]
    fn schema_parses() {
        let v: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        assert!(v.get("properties").is_some());
    }
}
