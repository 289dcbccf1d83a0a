//! CSV tables plus a `key=value` summary, written into the output directory.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

/// Shortest string that parses back to the same f64.
pub fn num(x: f64) -> String {
    // -0.0 prints as 0.0
    format!("{:?}", if x == 0.0 { 0.0 } else { x })
}

pub fn re_im(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: Vec<(String, String)>,
    /// Additional verbatim files (name, contents).
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Report {
    pub fn new() -> Self {
        Self { pass: true, ..Default::default() }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    /// Records a named check; any failing check fails the run.
    pub fn check(&mut self, key: &str, ok: bool) {
        self.pass &= ok;
        self.note(key, if ok { "pass" } else { "fail" });
    }

    pub fn summary_text(&self, head: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in head.iter().chain(&self.summary) {
            out.push_str(&format!("{k}={}\n", v.replace('\n', " ")));
        }
        out.push_str(&format!("status={}\n", if self.pass { "pass" } else { "fail" }));
        out
    }

    pub fn write(&self, dir: &Path, head: &[(String, String)]) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for t in &self.tables {
            let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", t.name)))?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        for (name, body) in &self.files {
            fs::write(dir.join(name), body)?;
        }
        fs::write(dir.join("summary.txt"), self.summary_text(head))
    }
}
