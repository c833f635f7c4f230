use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::convergence::SequencePrefix;
use crate::error::{usage, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One value per line, or `t,value` pairs with an optional header.
    Csv,
    /// One JSON number per line.
    Jsonl,
}

impl Format {
    /// Guesses from the file extension; anything but `.jsonl` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(usage(format!("unknown input format {other:?}"))),
        }
    }
}

pub fn load_sequence(path: &Path, format: Format) -> Result<SequencePrefix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut values = Vec::new();
    let mut paired: Option<bool> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match format {
            Format::Jsonl => {
                let v: f64 = serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
                values.push(v);
            }
            Format::Csv => {
                if values.is_empty() && paired.is_none() && line.eq_ignore_ascii_case("t,value") {
                    paired = Some(true);
                    continue;
                }
                let is_pair = line.contains(',');
                match paired {
                    None => paired = Some(is_pair),
                    Some(p) if p != is_pair => {
                        return Err(parse_err(line_no, "mixed single values and t,value pairs".into()));
                    }
                    _ => {}
                }
                if is_pair {
                    let (t, v) = line.split_once(',').expect("checked for a comma");
                    let t: usize = t
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad index {:?}", t.trim())))?;
                    let expected = values.len() + 1;
                    if t > expected {
                        return Err(Error::IndexGap {
                            path: path.to_path_buf(),
                            missing: expected,
                        });
                    }
                    if t < expected {
                        return Err(parse_err(line_no, format!("index {t} repeated or out of order")));
                    }
                    values.push(parse_value(v).map_err(|m| parse_err(line_no, m))?);
                } else {
                    values.push(parse_value(line).map_err(|m| parse_err(line_no, m))?);
                }
            }
        }
        if !values.last().is_some_and(|v| v.is_finite()) {
            return Err(parse_err(line_no, "value is not finite".into()));
        }
    }
    if values.is_empty() {
        return Err(parse_err(0, "no values".into()));
    }
    SequencePrefix::new(values)
}

fn parse_value(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad value {:?}", s.trim()))
}

/// Writes `t,value` rows with a header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_sequence_csv(x: &SequencePrefix, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "t,value")?;
    for (i, v) in x.values().iter().enumerate() {
        writeln!(out, "{},{}", i + 1, v)?;
    }
    Ok(())
}
