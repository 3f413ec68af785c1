//! CSV result files: `#` metadata lines, a header row, LF endings and
//! shortest round-trip number formatting.

use crate::scalar::Cx;
use std::fmt::Write as _;

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub struct Table {
    text: String,
}

impl Table {
    /// Starts a table with `# key: value` metadata lines.
    pub fn new(meta: &[(&str, String)], header: &[String]) -> Self {
        let mut text = String::new();
        for (k, v) in meta {
            let _ = writeln!(text, "# {k}: {v}");
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Table { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn cx_fields(z: Cx<f64>) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -157.91367041742973, 1e-7, 3.0e20, 0.1, -2.5e-300, 1.0 / 3.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(1e-7), "1e-7");
    }
}
