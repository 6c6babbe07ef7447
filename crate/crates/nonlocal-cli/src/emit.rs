//! Output emission: deterministic CSV/JSON data files plus a plain-text run
//! log (the only place wall-clock information is allowed).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct Emitter {
    dir: PathBuf,
    log: String,
}

impl Emitter {
    pub fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Emitter {
            dir,
            log: String::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.log, "{}", line.as_ref());
        println!("{}", line.as_ref());
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let body = serde_json::to_string_pretty(value)? + "\n";
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.log(format!("wrote {}", path.display()));
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.log(format!("wrote {}", path.display()));
        Ok(())
    }

    /// Flush the run log (wall-clock lines included); call last.
    pub fn finish(self) -> Result<()> {
        std::fs::write(self.dir.join("run.log"), self.log)?;
        Ok(())
    }
}

/// CSV of (point, value) rows with 17-significant-digit floats.
pub fn samples_csv(samples: &[nonlocal_core::Sample]) -> String {
    let n = samples.iter().map(|s| s.point.len()).max().unwrap_or(1);
    let mut out = String::new();
    for a in 1..=n {
        let _ = write!(out, "point_{a},");
    }
    out.push_str("value\n");
    for s in samples {
        for a in 0..n {
            let c = s.point.get(a).copied().unwrap_or(0.0);
            let _ = write!(out, "{},", nonlocal_core::gridfn::fmt_f64(c));
        }
        let _ = writeln!(out, "{}", nonlocal_core::gridfn::fmt_f64(s.value));
    }
    out
}
