//! Report rows rendered either for people or as `key=value` lines.

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// One `key=value` record per line.
    Kv,
}

struct Row {
    key: String,
    value: String,
    text: String,
}

/// Both renderings come from the same rows.
#[derive(Default)]
pub struct Report {
    rows: Vec<Row>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// A row shown as `label = value`.
    pub fn field(&mut self, key: &str, label: &str, value: impl ToString) {
        let value = value.to_string();
        let text = format!("{} = {}", label, value);
        self.rows.push(Row { key: key.into(), value, text });
    }

    /// A row with free-form human text.
    pub fn line(&mut self, key: &str, value: impl ToString, text: impl ToString) {
        self.rows.push(Row { key: key.into(), value: value.to_string(), text: text.to_string() });
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for r in &self.rows {
            match format {
                Format::Human => out.push_str(&r.text),
                Format::Kv => {
                    out.push_str(&r.key);
                    out.push('=');
                    out.push_str(&r.value);
                }
            }
            out.push('\n');
        }
        out
    }
}
