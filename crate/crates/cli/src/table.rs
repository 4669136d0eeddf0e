//! Column-oriented result tables and their CSV / JSON renderings.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Format with 12 significant digits, dropping trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{rounded:.decimals$}");
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => {
                let v: f64 = fmt_num(*x).parse().expect("formatted number parses");
                serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
            }
            Cell::Num(x) => Value::String(fmt_num(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(t) => Value::String(t.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    names: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(names: &[&str]) -> Self {
        Self { metadata: Vec::new(), names: names.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    /// Appends a row; every column gets exactly one cell.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.names.len(), "row width must match the column count");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric values of a column, skipping empty cells.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .unwrap_or_default()
            .into_iter()
            .filter_map(|c| match c {
                Cell::Num(x) => Some(*x),
                Cell::Int(i) => Some(*i as f64),
                _ => None,
            })
            .collect()
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Metadata as `# key: value` lines, then a header and one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for (i, line) in v.lines().enumerate() {
                if i == 0 {
                    out.push_str(&format!("# {k}: {line}\n"));
                } else {
                    out.push_str(&format!("#   {line}\n"));
                }
            }
        }
        out.push_str(&self.names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            let parsed = serde_json::from_str::<Value>(v).unwrap_or_else(|_| Value::String(v.clone()));
            meta.insert(k.clone(), parsed);
        }
        let mut cols = Map::new();
        for (i, name) in self.names.iter().enumerate() {
            cols.insert(name.clone(), Value::Array(self.rows.iter().map(|r| r[i].json()).collect()));
        }
        let mut top = Map::new();
        top.insert("metadata".into(), Value::Object(meta));
        top.insert("columns".into(), Value::Object(cols));
        Value::Object(top)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(4.0 / 9.0), "0.444444444444");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(123_456_789.123_456_79), "123456789.123");
        assert_eq!(fmt_num(1.0e-7 / 3.0), "3.33333333333e-8");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.meta("config", "{\"x\": 1}");
        t.push(vec![1.5.into(), Cell::Empty]);
        t.push(vec![2usize.into(), "z".into()]);
        assert_eq!(t.to_csv(), "# config: {\"x\": 1}\na,b\n1.5,\n2,z\n");
        assert_eq!(t.numbers("a"), [1.5, 2.0]);
        let j = t.to_json_value();
        assert_eq!(j["metadata"]["config"]["x"], 1);
        assert_eq!(j["columns"]["b"][0], Value::Null);
    }
}
