use crate::config::CliError;
use crate::Common;
use serde_json::Value;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A per-class or per-index table, written as CSV.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
    /// Named two-column series for `--gnuplot`.
    pub plots: Vec<(&'static str, Vec<(f64, f64)>)>,
    /// Named assertions evaluated for `--check`.
    pub checks: Vec<(String, bool)>,
    /// `form` uses --out for the q-expansion itself.
    pub json_to_stdout: bool,
}

impl Output {
    pub fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push((name.into(), ok));
    }
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn write_csv(path: &Path, t: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    w.write_record(&t.headers)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in &t.rows {
        w.write_record(r)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_dat(path: &Path, pts: &[(f64, f64)]) -> Result<(), CliError> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for (a, b) in pts {
        writeln!(f, "{a} {b}")?;
    }
    f.flush()?;
    Ok(())
}

pub fn emit(out: &Output, c: &Common) -> Result<(), CliError> {
    let mut json = out.json.clone();
    if let Value::Object(map) = &mut json {
        let checks: Vec<Value> = out
            .checks
            .iter()
            .map(|(n, ok)| serde_json::json!({ "name": n, "pass": ok }))
            .collect();
        map.insert("checks".into(), Value::Array(checks));
    }
    let text =
        serde_json::to_string_pretty(&json).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    match (&c.out, out.json_to_stdout) {
        (Some(path), false) => {
            fs::write(path, &text)?;
            if let Some(t) = &out.table {
                write_csv(&sibling(path, "csv"), t)?;
            }
            if c.gnuplot {
                for (name, pts) in &out.plots {
                    write_dat(&sibling(path, &format!("{name}.dat")), pts)?;
                }
            }
        }
        (path, _) => {
            print!("{text}");
            if c.gnuplot {
                let base = path.clone().unwrap_or_else(|| PathBuf::from("hiw"));
                for (name, pts) in &out.plots {
                    write_dat(&sibling(&base, &format!("{name}.dat")), pts)?;
                }
            }
        }
    }
    if c.check {
        for (name, ok) in &out.checks {
            if !ok {
                eprintln!("hiw: check failed: {name}");
            }
        }
    }
    Ok(())
}
