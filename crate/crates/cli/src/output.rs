use crate::args::{Format, OutputArgs};
use p3tau::{Complex64, Error};
use serde_json::{json, Map, Value};
use std::io::Write;

pub fn cx(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn error_value(e: &Error) -> Value {
    json!({"kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e)})
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

/// What a command produced, before formatting.
pub enum Body {
    /// Rendered as nested JSON or as flattened key,re,im CSV rows.
    Record(Value),
    /// Command-specific CSV text, JSON alongside.
    Table { json: Value, csv: String },
    /// One record per row in CSV.
    Rows(Value, Vec<Value>),
}

pub fn envelope(command: &str, input: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("p3tau"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("input".into(), input);
    m
}

/// Flattens nested JSON into (key, re, im) rows; {"re", "im"} objects
/// become one row.
pub fn flatten(prefix: &str, v: &Value, rows: &mut Vec<[String; 3]>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) if o.len() == 2 && o.contains_key("re") && o.contains_key("im") => {
            rows.push([prefix.to_string(), scalar(&o["re"]), scalar(&o["im"])]);
        }
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        _ => rows.push([prefix.to_string(), scalar(v), String::new()]),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(record: &Value, body: &Body, format: Format) -> std::io::Result<String> {
    match (format, body) {
        (Format::Json, _) => {
            let mut s = serde_json::to_string_pretty(record)?;
            s.push('\n');
            Ok(s)
        }
        (Format::Csv, Body::Table { csv, .. }) => Ok(csv.clone()),
        (Format::Csv, Body::Record(_)) => {
            let mut rows = Vec::new();
            flatten("", record, &mut rows);
            let rows: Vec<Vec<String>> = rows.into_iter().map(Vec::from).collect();
            csv_text(&["key".into(), "re".into(), "im".into()], &rows)
        }
        (Format::Csv, Body::Rows(_, points)) => {
            let mut header: Vec<String> = Vec::new();
            let mut flat = Vec::new();
            for p in points {
                let mut rows = Vec::new();
                flatten("", p, &mut rows);
                let mut cells = Map::new();
                for [k, re, im] in rows {
                    if im.is_empty() {
                        cells.insert(k, Value::String(re));
                    } else {
                        cells.insert(format!("{k}.re"), Value::String(re));
                        cells.insert(format!("{k}.im"), Value::String(im));
                    }
                }
                for k in cells.keys() {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
                flat.push(cells);
            }
            let rows: Vec<Vec<String>> = flat
                .iter()
                .map(|c| header.iter().map(|k| c.get(k).map(scalar).unwrap_or_default()).collect())
                .collect();
            csv_text(&header, &rows)
        }
    }
}

pub fn write(out: &OutputArgs, text: &str) -> std::io::Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()
        }
    }
}
