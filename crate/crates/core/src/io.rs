//! Graph files and result tables.
//!
//! A graph file is TOML with three sections:
//!
//! ```toml
//! [vertices]
//! white = 1
//! black = 1
//!
//! [[edges]]
//! white = 0
//! black = 0
//! weight = 1.0
//! sign = 1
//! dx = 0
//! dy = 0
//!
//! [faces]
//! walks = [[0, 2, 1, 0, 2, 1]]
//! ```
//!
//! Each face walk lists edge indices counterclockwise, starting with an edge
//! traversed from white to black.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::dimer::{honeycomb_1x1, honeycomb_nm, validate_graph, Edge, HoneycombWeights, PeriodicBipartiteGraph};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Option<Spanned<Vertices>>,
    edges: Option<Vec<Spanned<EdgeSpec>>>,
    faces: Option<Spanned<Faces>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Vertices {
    white: usize,
    black: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    white: usize,
    black: usize,
    weight: f64,
    #[serde(default = "plus_one")]
    sign: i8,
    #[serde(default)]
    dx: i64,
    #[serde(default)]
    dy: i64,
}

fn plus_one() -> i8 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Faces {
    walks: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFile {
    n: usize,
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
    Error::Parse {
        line,
        message: e.message().trim().to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses and validates a graph description.
pub fn parse_graph(text: &str) -> Result<PeriodicBipartiteGraph> {
    let file: GraphFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let end = line_of(text, text.len());
    let missing = |name: &str| Error::Parse {
        line: end,
        message: format!("missing section [{name}]"),
    };
    let vertices = file.vertices.ok_or_else(|| missing("vertices"))?;
    let edge_specs = file.edges.ok_or_else(|| missing("edges"))?;
    let faces = file.faces.ok_or_else(|| missing("faces"))?;
    let (nw, nb) = (vertices.get_ref().white, vertices.get_ref().black);
    let mut edges = Vec::with_capacity(edge_specs.len());
    for spec in &edge_specs {
        let line = line_of(text, spec.span().start);
        let e = spec.get_ref();
        let bad = |message: String| Error::Parse { line, message };
        if e.white >= nw || e.black >= nb {
            return Err(bad(format!(
                "edge ({}, {}) references a missing vertex",
                e.white, e.black
            )));
        }
        if !(e.weight.is_finite() && e.weight >= 0.0) {
            return Err(bad(format!("weight {} must be finite and nonnegative", e.weight)));
        }
        if e.sign != 1 && e.sign != -1 {
            return Err(bad(format!("sign {} must be 1 or -1", e.sign)));
        }
        edges.push(Edge {
            white: e.white,
            black: e.black,
            weight: e.weight,
            sign: e.sign,
            offset: (e.dx, e.dy),
        });
    }
    let walks = faces.get_ref().walks.clone();
    if let Some(k) = walks.iter().flatten().find(|&&k| k >= edges.len()) {
        return Err(Error::Parse {
            line: line_of(text, faces.span().start),
            message: format!("face walk uses edge {k}, but only {} edges are listed", edges.len()),
        });
    }
    let g = PeriodicBipartiteGraph::new(nw, nb, edges, walks)?;
    validate_graph(&g).map_err(|d| Error::Invalid(d.to_string()))?;
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<PeriodicBipartiteGraph> {
    parse_graph(&read_text(path)?)
}

pub fn parse_weights(text: &str) -> Result<HoneycombWeights> {
    let f: WeightFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let w = HoneycombWeights {
        n: f.n,
        m: f.m,
        a: f.a,
        b: f.b,
        c: f.c,
    };
    w.validate()?;
    Ok(w)
}

pub fn load_weights(path: &Path) -> Result<HoneycombWeights> {
    parse_weights(&read_text(path)?)
}

/// A built-in graph: `honeycomb:1x1` or `honeycomb:NxM:weightfile`.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Honeycomb1x1,
    HoneycombNm {
        n: usize,
        m: usize,
        weights: std::path::PathBuf,
    },
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let usage = || {
            Error::domain(format!(
                "unknown builtin '{s}' (expected honeycomb:1x1 or honeycomb:NxM:weightfile)"
            ))
        };
        match parts.as_slice() {
            ["honeycomb", "1x1"] => Ok(Builtin::Honeycomb1x1),
            ["honeycomb", dims, file] => {
                let (n, m) = dims.split_once('x').ok_or_else(usage)?;
                let n: usize = n.parse().map_err(|_| usage())?;
                let m: usize = m.parse().map_err(|_| usage())?;
                Ok(Builtin::HoneycombNm {
                    n,
                    m,
                    weights: file.into(),
                })
            }
            _ => Err(usage()),
        }
    }
}

impl Builtin {
    /// Honeycomb weights, loading the weight file if there is one.
    pub fn weights(&self) -> Result<HoneycombWeights> {
        match self {
            Builtin::Honeycomb1x1 => Ok(HoneycombWeights::uniform(1, 1, 1.0, 1.0, 1.0)),
            Builtin::HoneycombNm { n, m, weights } => {
                let w = load_weights(weights)?;
                if (w.n, w.m) != (*n, *m) {
                    return Err(Error::domain(format!(
                        "weight file {} describes a {}x{} domain, not {n}x{m}",
                        weights.display(),
                        w.n,
                        w.m
                    )));
                }
                Ok(w)
            }
        }
    }

    pub fn graph(&self) -> Result<PeriodicBipartiteGraph> {
        match self {
            Builtin::Honeycomb1x1 => honeycomb_1x1(1.0, 1.0, 1.0),
            Builtin::HoneycombNm { .. } => honeycomb_nm(&self.weights()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Text(v.to_string())
    }
}

/// Reals are written with 17 significant digits, which round-trips binary64.
fn format_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => f.write_str(&format_real(*v)),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Value {
    fn parse(field: &str) -> Value {
        if let Ok(i) = field.parse::<i64>() {
            return Value::Int(i);
        }
        match field {
            "NaN" => return Value::Real(f64::NAN),
            "inf" => return Value::Real(f64::INFINITY),
            "-inf" => return Value::Real(f64::NEG_INFINITY),
            _ => {}
        }
        if field.contains(['e', 'E', '.']) {
            if let Ok(x) = field.parse::<f64>() {
                return Value::Real(x);
            }
        }
        Value::Text(field.to_string())
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => (*v).into(),
            Value::Real(v) if v.is_finite() => serde_json::Number::from_f64(*v).map(Into::into).unwrap_or_default(),
            Value::Real(v) => format_real(*v).into(),
            Value::Text(s) => s.clone().into(),
        }
    }

    fn from_json(v: &serde_json::Value) -> Result<Value> {
        Ok(match v {
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Value::Int(i),
                _ => Value::Real(
                    n.as_f64()
                        .ok_or_else(|| Error::invalid(format!("number {n} out of range")))?,
                ),
            },
            serde_json::Value::String(s) => match s.as_str() {
                "NaN" | "inf" | "-inf" => Value::parse(s),
                _ => Value::Text(s.clone()),
            },
            serde_json::Value::Bool(b) => Value::Text(b.to_string()),
            other => return Err(Error::invalid(format!("unsupported table cell {other}"))),
        })
    }
}

/// A homogeneous table of results.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::domain(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let fail = |e: csv::Error| Error::invalid(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv encoding: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Value::to_json))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("tables serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    pub fn from_csv(text: &str) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let mut table = Table::new(header.iter());
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: k + 2,
                message: e.to_string(),
            })?;
            table.push(rec.iter().map(Value::parse).collect())?;
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Table> {
        let v: Vec<serde_json::Map<String, serde_json::Value>> =
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
        let mut table = Table::new(
            v.first()
                .map(|o| o.keys().cloned().collect::<Vec<_>>())
                .unwrap_or_default(),
        );
        for obj in &v {
            let keys: Vec<&String> = obj.keys().collect();
            if keys.len() != table.columns.len() || keys.iter().zip(&table.columns).any(|(a, b)| *a != b) {
                return Err(Error::invalid("rows of a JSON table must share their keys"));
            }
            table.push(obj.values().map(Value::from_json).collect::<Result<_>>()?)?;
        }
        Ok(table)
    }
}

/// Writes a table to `path`, or to standard output when `path` is `None`.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    let text = table.render(format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Graph file text for `g`, readable by [`parse_graph`].
pub fn graph_to_toml(g: &PeriodicBipartiteGraph) -> String {
    let mut s = format!("[vertices]\nwhite = {}\nblack = {}\n", g.white_count(), g.black_count());
    for e in g.edges() {
        let _ = write!(
            s,
            "\n[[edges]]\nwhite = {}\nblack = {}\nweight = {:?}\nsign = {}\ndx = {}\ndy = {}\n",
            e.white, e.black, e.weight, e.sign, e.offset.0, e.offset.1
        );
    }
    let walks: Vec<String> = g
        .faces()
        .iter()
        .map(|f| format!("[{}]", f.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    let _ = write!(s, "\n[faces]\nwalks = [{}]\n", walks.join(", "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_text_round_trips() {
        let g = honeycomb_nm(&HoneycombWeights::uniform(2, 3, 1.5, 0.25, 1.0)).unwrap();
        let back = parse_graph(&graph_to_toml(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn missing_faces_are_named() {
        let text = "[vertices]\nwhite = 1\nblack = 1\n\n[[edges]]\nwhite = 0\nblack = 0\nweight = 1.0\n";
        let err = parse_graph(text).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("[faces]"), "{err}");
    }

    #[test]
    fn bad_edge_reports_its_line() {
        let text = "[vertices]\nwhite = 1\nblack = 1\n\n[[edges]]\nwhite = 0\nblack = 3\nweight = 1.0\n\n[faces]\nwalks = []\n";
        match parse_graph(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            e => panic!("{e}"),
        }
        let text = "[vertices]\nwhite = 1\nblack = one\n";
        match parse_graph(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["x", "value"]);
        assert_eq!(t.to_csv().unwrap(), "x,value\n");
        assert_eq!(t.to_json(), "[]\n");
    }

    #[test]
    fn builtin_names() {
        assert_eq!("honeycomb:1x1".parse::<Builtin>().unwrap(), Builtin::Honeycomb1x1);
        assert_eq!(
            "honeycomb:3x2:w.toml".parse::<Builtin>().unwrap(),
            Builtin::HoneycombNm {
                n: 3,
                m: 2,
                weights: "w.toml".into()
            }
        );
        assert!("square:1x1".parse::<Builtin>().is_err());
        assert!("honeycomb:3by2:w.toml".parse::<Builtin>().is_err());
    }
}
