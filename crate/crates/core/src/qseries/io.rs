//! The `QEXP v1` text format.
//!
//! ```text
//! QEXP v1
//! weight 25/2 level 4 char trivial trunc 1000
//! 1 1
//! 2 -22
//! ...
//! ```
//!
//! Indices are strictly increasing; a missing index means a zero
//! coefficient. The writer emits every index 1..=X (and 0 only when
//! nonzero), so written files have no gaps and round-trip byte for byte.

use super::{CharacterTag, QSeries, Weight};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt::Write as _;
use std::path::Path;

const MAGIC: &str = "QEXP v1";

/// A parsed file plus the number of indices in 1..=X it did not list.
#[derive(Clone, Debug)]
pub struct QexpFile {
    pub series: QSeries,
    pub gaps: u64,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

pub fn format_qexp(s: &QSeries) -> Result<String> {
    let twice = s.weight().twice();
    if twice % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "QEXP files hold half-integral weights, not {twice}/2"
        )));
    }
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(
        out,
        "weight {}/2 level {} char {} trunc {}",
        twice,
        s.level(),
        s.character(),
        s.truncation()
    );
    let coeffs = s.coeffs_bigint();
    for (n, c) in coeffs.iter().enumerate() {
        if n == 0 && c.is_zero() {
            continue;
        }
        let _ = writeln!(out, "{n} {c}");
    }
    Ok(out)
}

pub fn parse_qexp(text: &str) -> Result<QexpFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((i, other)) => return parse_err(i, format!("expected `{MAGIC}`, found `{other}`")),
        None => return parse_err(1, "empty file"),
    }
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 2,
        msg: "missing header line".into(),
    })?;
    let (twice, level, character, trunc) = parse_header(hline, header)?;
    let x = trunc as usize;
    let mut coeffs = vec![BigInt::zero(); x + 1];
    let mut last: Option<u64> = None;
    let mut listed = 0u64;
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(n), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
            return parse_err(i, "expected `<n> <c(n)>`");
        };
        let n: u64 = n
            .parse()
            .or_else(|_| parse_err(i, format!("bad index `{n}`")))?;
        let c: BigInt = c
            .parse()
            .or_else(|_| parse_err(i, format!("non-integer coefficient `{c}`")))?;
        if last.is_some_and(|l| n <= l) {
            return parse_err(i, format!("index {n} is not strictly increasing"));
        }
        if n > trunc {
            return parse_err(i, format!("index {n} exceeds trunc {trunc}"));
        }
        last = Some(n);
        if n >= 1 {
            listed += 1;
        }
        coeffs[n as usize] = c;
    }
    let series = QSeries::from_bigint(Weight::from_twice(twice), level, character, coeffs)
        .map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })?;
    Ok(QexpFile {
        series,
        gaps: trunc - listed,
    })
}

fn parse_header(line: usize, header: &str) -> Result<(u32, u64, CharacterTag, u64)> {
    let f: Vec<&str> = header.split_whitespace().collect();
    let ["weight", w, "level", l, "char", c, "trunc", t] = f.as_slice() else {
        return parse_err(
            line,
            "expected `weight <2k>/2 level <L> char <tag> trunc <X>`",
        );
    };
    let twice: u32 = w
        .strip_suffix("/2")
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Parse {
            line,
            msg: format!("bad weight `{w}`"),
        })?;
    if twice % 2 == 0 {
        return parse_err(
            line,
            format!("weight {twice}/2 is not half-integral (two_k must be odd)"),
        );
    }
    let level: u64 = l.parse().ok().filter(|&l| l > 0).ok_or(Error::Parse {
        line,
        msg: format!("bad level `{l}`"),
    })?;
    let character: CharacterTag = c.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad character tag `{c}`"),
    })?;
    let trunc: u64 = t.parse().ok().filter(|&t| t > 0).ok_or(Error::Parse {
        line,
        msg: format!("bad trunc `{t}`"),
    })?;
    Ok((twice, level, character, trunc))
}

pub fn write_qexp(s: &QSeries, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_qexp(s)?)?;
    Ok(())
}

pub fn read_qexp(path: impl AsRef<Path>) -> Result<QexpFile> {
    parse_qexp(&std::fs::read_to_string(path)?)
}
