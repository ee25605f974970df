use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::sweep::{SweepResult, SweepRow};
use crate::analysis::ErrorValue;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "sweep_var,value,scheme,trials,seed,a_R,a_T,eps_empirical,eps_theory";

/// Writes the CSV body. Floats use Rust's shortest round-trip formatting.
pub fn write_csv<W: Write>(result: &SweepResult, mut w: W) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut rows: Vec<&SweepRow> = result.rows.iter().collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.scheme.cmp(&b.scheme)));
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.var, r.value, r.scheme, r.trials, r.seed, r.a_r, r.a_t, r.eps_empirical, r.eps_theory
        )?;
    }
    Ok(())
}

pub fn to_csv_string(result: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

/// Path of the companion metadata file: `<csv>.meta`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes the CSV and a `.meta` file holding the resolved base config.
/// Nothing is written for an empty result.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let text = to_csv_string(result)?;
    fs::write(path, text)?;
    let first = &result.rows[0];
    let meta = format!(
        "# sweep {} over {} points, {} trials per point\n{}",
        first.var,
        result.rows.iter().map(|r| r.value.to_bits()).collect::<std::collections::BTreeSet<_>>().len(),
        first.trials,
        result.base.to_toml_string()
    );
    fs::write(meta_path(path), meta)?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing CSV header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 9 {
                return Err(err("expected 9 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            Ok(SweepRow {
                var: f[0].parse()?,
                value: num(f[1])?,
                scheme: f[2].parse()?,
                trials: f[3].parse().map_err(|_| err("bad trial count"))?,
                seed: f[4].parse().map_err(|_| err("bad seed"))?,
                a_r: num(f[5])?,
                a_t: num(f[6])?,
                eps_empirical: num(f[7])?,
                eps_theory: if f[8] == "inf" {
                    ErrorValue::Infinite
                } else {
                    ErrorValue::Finite(num(f[8])?)
                },
            })
        })
        .collect()
}
