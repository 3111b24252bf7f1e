//! Report assembly and JSON / CSV output.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

/// One flat row; `op` names the operation that produced its numbers.
pub type Record = Map<String, Value>;

/// Starts a record tagged with its producing operation and seed.
pub fn record(op: &str, seed: Option<u64>, fields: Value) -> Record {
    let mut r = Map::new();
    r.insert("op".into(), Value::from(op));
    r.insert("seed".into(), seed.map_or(Value::Null, Value::from));
    if let Value::Object(m) = fields {
        r.extend(m);
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Wall-clock data, kept apart from the replayable part of the report.
#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub passed: bool,
    pub records: Vec<Record>,
    pub timing: Timing,
}

impl Report {
    pub fn write(&self, format: Format, w: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, self)?;
                writeln!(w)
            }
            Format::Csv => write_csv(&self.records, w),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// Flat projection: columns in first-appearance order, nested values as JSON text.
fn write_csv(records: &[Record], w: &mut dyn Write) -> std::io::Result<()> {
    let mut columns: Vec<&str> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !columns.contains(&k.as_str()) {
                columns.push(k);
            }
        }
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&columns)?;
    for r in records {
        out.write_record(columns.iter().map(|c| r.get(*c).map(cell).unwrap_or_default()))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_unions_columns() {
        let rows = vec![record("a", Some(1), json!({"x": 1.5})), record("b", None, json!({"y": [1, 2]}))];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "op,seed,x,y\na,1,1.5,\nb,,,\"[1,2]\"\n");
    }
}
