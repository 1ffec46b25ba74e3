use std::fmt::Display;

/// Human-readable lines followed by a stable `key=value` block.
#[derive(Debug, Default)]
pub struct Report {
    text: Vec<String>,
    keys: Vec<(String, String)>,
    /// A structure or tree file produced by the command, kept apart from
    /// the report.
    pub payload: Option<String>,
}

impl Report {
    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn key(&mut self, k: &str, v: impl Display) {
        self.keys.push((k.to_string(), v.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.text {
            out.push_str("# ");
            out.push_str(l);
            out.push('\n');
        }
        out.push('\n');
        for (k, v) in &self.keys {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

pub fn join<T: Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}
