//! Structured key-value echo of the resolved run configuration. Every
//! subcommand drops one of these next to its outputs so a run can be
//! reproduced from the directory alone.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crda::CrdaError;

pub struct Echo {
    entries: Vec<(String, String)>,
}

impl Echo {
    pub fn new(command: &str) -> Self {
        let mut e = Self {
            entries: Vec::new(),
        };
        e.push("command", command);
        e.push("version", env!("CARGO_PKG_VERSION"));
        e
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_opt(&mut self, key: &str, value: Option<impl ToString>) -> &mut Self {
        if let Some(v) = value {
            self.push(key, v);
        }
        self
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CrdaError> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        for (key, value) in &self.entries {
            writeln!(w, "{key} = {value}")?;
        }
        w.flush()?;
        Ok(())
    }
}
