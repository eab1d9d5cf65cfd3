//! Serialization of result documents to CSV and JSON.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use pdld::Table;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// One run's output: a metadata block, the primary table, and supplementary
/// tables that only the JSON form carries.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub meta: Map<String, Value>,
    pub table: Table,
    pub extra: Vec<Table>,
}

/// Shortest decimal that parses back to the same `f64`; `inf`, `-inf`, `NaN`
/// for non-finite values.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn number(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format_f64(x)),
    }
}

pub fn table_json(t: &Table) -> Value {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| {
            let obj: Map<String, Value> = t
                .columns
                .iter()
                .cloned()
                .zip(r.iter().map(|&x| number(x)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    json!({ "title": t.title, "meta": t.meta, "columns": t.columns, "rows": rows })
}

pub fn render_json(doc: &Document) -> String {
    let mut meta = doc.meta.clone();
    for (k, v) in &doc.table.meta {
        meta.entry(k.clone())
            .or_insert_with(|| Value::String(v.clone()));
    }
    let mut out = Map::new();
    out.insert("meta".into(), Value::Object(meta));
    out.insert("title".into(), Value::String(doc.table.title.clone()));
    let body = table_json(&doc.table);
    out.insert("columns".into(), body["columns"].clone());
    out.insert("rows".into(), body["rows"].clone());
    if !doc.extra.is_empty() {
        out.insert(
            "tables".into(),
            Value::Array(doc.extra.iter().map(table_json).collect()),
        );
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(out)).expect("json values serialize");
    s.push('\n');
    s
}

fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Metadata as `# key: value` comment lines, then the header and rows.
pub fn render_csv(doc: &Document) -> io::Result<String> {
    let mut head = String::new();
    let mut meta: Vec<(String, String)> = doc
        .meta
        .iter()
        .map(|(k, v)| (k.clone(), meta_text(v)))
        .collect();
    meta.extend(doc.table.meta.iter().map(|(k, v)| (k.clone(), v.clone())));
    for (k, v) in meta {
        let _ = writeln!(head, "# {k}: {}", v.replace('\n', " "));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&doc.table.columns)?;
    for row in &doc.table.rows {
        w.write_record(row.iter().map(|&x| format_f64(x)))?;
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    head.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(head)
}

pub fn render(doc: &Document, format: Format) -> io::Result<String> {
    match format {
        Format::Json => Ok(render_json(doc)),
        Format::Csv => render_csv(doc),
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
