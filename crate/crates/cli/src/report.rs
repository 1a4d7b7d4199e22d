//! Deterministic JSON report assembly.
//!
//! Floats are serialized with 17 significant digits so values round-trip
//! bit-exactly and reports are byte-identical across runs. Keys are emitted
//! in sorted order. JSON has no infinity; infinite results are encoded as
//! the string `"infinite"`.

use serde_json::{Map, Number, Value};

/// A finite f64 as a JSON number with 17 significant digits.
pub fn float(x: f64) -> Value {
    debug_assert!(x.is_finite(), "reports never contain non-finite numbers");
    let formatted = format!("{x:.16e}");
    Value::Number(
        formatted
            .parse::<Number>()
            .expect("formatted float is a valid JSON number"),
    )
}

pub fn float_array(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| float(v)).collect())
}

pub fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| float_array(r)).collect())
}

pub fn weighted_side(side: &[(usize, f64)]) -> Value {
    Value::Array(
        side.iter()
            .map(|&(i, w)| Value::Array(vec![Value::from(i), float(w)]))
            .collect(),
    )
}

pub fn index_array<const N: usize>(indices: [usize; N]) -> Value {
    Value::Array(indices.iter().map(|&i| Value::from(i)).collect())
}

pub struct Report {
    map: Map<String, Value>,
}

impl Report {
    pub fn new(command: &[String]) -> Self {
        let mut map = Map::new();
        map.insert(
            "command".into(),
            Value::Array(command.iter().map(|s| Value::from(s.as_str())).collect()),
        );
        map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Report { map }
    }

    pub fn digest(mut self, hex: &str) -> Self {
        self.map.insert("digest".into(), Value::from(hex));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.map.insert("seed".into(), Value::from(seed));
        self
    }

    /// Extra top-level field; `generate` reports put `labels` and `matrix`
    /// here so their output doubles as an input document.
    pub fn top(mut self, key: &str, value: Value) -> Self {
        self.map.insert(key.into(), value);
        self
    }

    pub fn results(mut self, value: Value) -> Self {
        self.map.insert("results".into(), value);
        self
    }

    pub fn render(self) -> String {
        let mut text = serde_json::to_string_pretty(&Value::Object(self.map))
            .expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}
