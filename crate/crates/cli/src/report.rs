//! JSON report: sorted keys, floats in round-trip scientific notation.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

/// Writes every float as `{:.16e}`, which round-trips any f64.
struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub results: Value,
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert("config".into(), self.config.clone());
        m.insert("results".into(), self.results.clone());
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        if let Some(t) = self.wall_time_seconds {
            m.insert("wall_time_seconds".into(), Value::from(t));
        }
        Value::Object(m)
    }
}

/// Serialises with sorted keys (serde_json maps are BTreeMaps) and a
/// trailing newline.
pub fn emit_report(report: &RunReport) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    report.to_value().serialize(&mut ser).expect("in-memory JSON");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_exact() {
        let r = RunReport {
            command: "x".into(),
            seed: 3,
            config: json!({"b": 1, "a": 0.1}),
            results: json!({"z": [1.0, 2], "y": null}),
            wall_time_seconds: None,
        };
        let s = emit_report(&r);
        assert_eq!(
            s,
            "{\"command\":\"x\",\"config\":{\"a\":1.0000000000000001e-1,\"b\":1},\
             \"results\":{\"y\":null,\"z\":[1.0000000000000000e0,2]},\"seed\":3,\"version\":\"0.1.0\"}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["config"]["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn timing_only_when_recorded() {
        let mut r = RunReport {
            command: "x".into(),
            seed: 0,
            config: json!({}),
            results: json!({}),
            wall_time_seconds: None,
        };
        assert!(!emit_report(&r).contains("wall_time"));
        r.wall_time_seconds = Some(0.5);
        assert!(emit_report(&r).contains("\"wall_time_seconds\":5.0000000000000000e-1"));
    }
}
