//! CSV output: header row, 12 significant digits, flags as 0/1.

use std::io::Write;
use std::path::Path;

/// A named-column dataset written as one CSV file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FigureDataset {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FigureDataset {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        FigureDataset {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.headers.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let c = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c].as_str()).collect())
    }

    pub fn write(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> csv::Result<()> {
        self.write(std::fs::File::create(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }
}

/// Rounds to 12 significant digits and prints the shortest decimal form.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round trip");
    rounded.to_string()
}

pub fn fmt_flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}
