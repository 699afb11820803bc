//! Deterministic CSV / JSON emission. Every float is written with 17
//! significant digits in exponent form.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn complex_vec(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Bool(bool),
}

/// Rows of a sweep plus `# key=value` metadata.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Output {
    Table(Table),
    Record(Value),
}

struct Fmt17<'a>(PrettyFormatter<'a>);

impl Formatter for Fmt17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17(PrettyFormatter::new()));
    v.serialize(&mut ser).expect("serializing a Value into memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Scalar metadata value as it appears after `# key=`.
fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_f64(x),
            _ => n.to_string(),
        },
        Value::Object(m) if m.len() == 2 && m.contains_key("re") && m.contains_key("im") => {
            let part = |k: &str| m[k].as_f64().map(fmt_f64).unwrap_or_else(|| m[k].to_string());
            format!(
                "{}{}{}i",
                part("re"),
                if m["im"].as_f64().is_some_and(|x| x.is_sign_negative()) {
                    ""
                } else {
                    "+"
                },
                part("im")
            )
        }
        other => other.to_string(),
    }
}

/// Flattens nested objects / arrays into dotted keys.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        other => out.push((prefix.to_string(), other.clone())),
    }
}

fn check_finite(v: &Value) -> Result<(), CliError> {
    let mut flat = Vec::new();
    flatten("", v, &mut flat);
    for (k, x) in flat {
        if x.is_null() {
            return Err(CliError::Numerical(format!("non-finite value for {k}")));
        }
    }
    Ok(())
}

pub fn render(out: &Output, format: Format) -> Result<String, CliError> {
    match (out, format) {
        (Output::Table(t), Format::Csv) => {
            let mut s = String::new();
            for (k, v) in &t.meta {
                s.push_str(&format!("# {k}={}\n", meta_text(v)));
            }
            s.push_str(&t.columns.join(","));
            s.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Num(x) if x.is_finite() => Ok(fmt_f64(*x)),
                        Cell::Num(x) => Err(CliError::Numerical(format!("non-finite value {x} in output"))),
                        Cell::Bool(b) => Ok(b.to_string()),
                    })
                    .collect::<Result<_, _>>()?;
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            Ok(s)
        }
        (Output::Table(t), Format::Json) => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (name, c) in t.columns.iter().zip(r) {
                        m.insert(
                            name.clone(),
                            match c {
                                Cell::Num(x) => json!(x),
                                Cell::Bool(b) => json!(b),
                            },
                        );
                    }
                    Value::Object(m)
                })
                .collect();
            let meta: Map<String, Value> = t.meta.iter().cloned().collect();
            let v = json!({ "metadata": meta, "columns": t.columns, "rows": rows });
            check_finite(&v)?;
            Ok(to_json_string(&v))
        }
        (Output::Record(v), Format::Json) => {
            check_finite(v)?;
            Ok(to_json_string(v))
        }
        (Output::Record(v), Format::Csv) => {
            check_finite(v)?;
            let mut flat = Vec::new();
            flatten("", v, &mut flat);
            let mut s = String::from("key,value\n");
            for (k, x) in flat {
                s.push_str(&format!("{k},{}\n", meta_text(&x)));
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(10.0), "1.0000000000000000e1");
        assert_eq!(fmt_f64(-0.15), "-1.4999999999999999e-1");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_floats_use_the_same_format() {
        let s = to_json_string(&json!({ "a": 0.5, "n": 3 }));
        assert!(s.contains("5.0000000000000000e-1") && s.contains("\"n\": 3"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], json!(0.5));
    }

    #[test]
    fn records_flatten_for_csv() {
        let v = json!({ "ep": { "omega": complex(Complex64::new(1.0, -2.0)) }, "steps": [1, 2] });
        let s = render(&Output::Record(v), Format::Csv).unwrap();
        assert!(s.contains("ep.omega.re,1.0000000000000000e0"));
        assert!(s.contains("steps.1,2"));
    }

    #[test]
    fn nan_is_rejected() {
        let t = Table {
            meta: vec![],
            columns: vec!["x".into()],
            rows: vec![vec![Cell::Num(f64::NAN)]],
        };
        assert!(render(&Output::Table(t.clone()), Format::Csv).is_err());
        assert!(render(&Output::Table(t), Format::Json).is_err());
    }
}
