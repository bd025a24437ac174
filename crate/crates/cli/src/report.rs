//! `key = value` report grouped in `[section]` blocks.
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`, so reports are exact and byte-stable.

use std::fmt::Write;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: Vec<(String, Vec<(String, String)>)>,
}

pub fn format_array(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

impl Report {
    fn entries(&mut self, name: &str) -> &mut Vec<(String, String)> {
        let pos = match self.sections.iter().position(|(n, _)| n == name) {
            Some(p) => p,
            None => {
                self.sections.push((name.to_string(), Vec::new()));
                self.sections.len() - 1
            }
        };
        &mut self.sections[pos].1
    }

    pub fn section(&mut self, name: &str, entries: Vec<(String, f64)>) {
        let e = self.entries(name);
        e.extend(entries.into_iter().map(|(k, v)| (k, v.to_string())));
    }

    pub fn text(&mut self, name: &str, key: &str, value: &str) {
        self.entries(name).push((key.to_string(), value.to_string()));
    }

    /// Names of entries whose numeric value is not finite.
    pub fn non_finite(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|(s, e)| e.iter().map(move |(k, v)| (s, k, v)))
            .filter(|(_, _, v)| matches!(v.as_str(), "NaN" | "inf" | "-inf"))
            .map(|(s, k, _)| format!("[{s}] {k}"))
            .collect()
    }

    #[cfg(test)]
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)
            .and_then(|(_, e)| e.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_lookup() {
        let mut r = Report::default();
        r.section("derived", vec![("A1".into(), 4.0), ("B2".into(), -1.0)]);
        r.section("resultants", vec![("q".into(), 0.1)]);
        r.text("derived", "note", "x");
        assert_eq!(r.render(), "[derived]\nA1 = 4\nB2 = -1\nnote = x\n\n[resultants]\nq = 0.1\n");
        assert_eq!(r.get("derived", "B2"), Some("-1"));
        assert!(r.non_finite().is_empty());
        r.section("resultants", vec![("bad".into(), f64::NAN)]);
        assert_eq!(r.non_finite(), vec!["[resultants] bad".to_string()]);
    }

    #[test]
    fn values_roundtrip() {
        let v = 0.1 + 0.2;
        let mut r = Report::default();
        r.section("a", vec![("v".into(), v)]);
        assert_eq!(r.get("a", "v").unwrap().parse::<f64>().unwrap(), v);
        assert_eq!(format_array(&[-1.0, 0.5]), "[-1, 0.5]");
    }
}
