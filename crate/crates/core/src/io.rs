//! Line-oriented realization files.
//!
//! ```text
//! window 0 0 44 44
//! label strauss
//! seed 17
//! 1.25 3.5
//! ...
//! ```
//!
//! Coordinates are written in shortest round-trip decimal form, so a
//! write/read cycle reproduces every point bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Realization, Window};

pub fn format_realization(r: &Realization) -> String {
    let w = &r.window;
    let mut out = String::with_capacity(32 * (r.points.len() + 3));
    let _ = writeln!(out, "window {:?} {:?} {:?} {:?}", w.xmin, w.ymin, w.xmax, w.ymax);
    if let Some(label) = &r.label {
        let _ = writeln!(out, "label {label}");
    }
    let _ = writeln!(out, "seed {}", r.seed);
    for p in &r.points {
        let _ = writeln!(out, "{:?} {:?}", p.x, p.y);
    }
    out
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

pub fn parse_realization(text: &str) -> Result<Realization> {
    let mut window = None;
    let mut label = None;
    let mut seed = 0u64;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks[0] {
            "window" => {
                if toks.len() != 5 {
                    return Err(Error::Parse {
                        line,
                        message: "window needs 4 values".into(),
                    });
                }
                let v: Vec<f64> = toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, line))
                    .collect::<Result<_>>()?;
                window = Some(Window::new(v[0], v[1], v[2], v[3]).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?);
            }
            "label" => {
                label = Some(toks[1..].join(" "));
            }
            "seed" => {
                seed = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: "seed needs an unsigned integer".into(),
                    })?;
            }
            _ => {
                if window.is_none() {
                    return Err(Error::Parse {
                        line,
                        message: "point before window header".into(),
                    });
                }
                if toks.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: "expected `x y`".into(),
                    });
                }
                points.push(Point2::new(parse_f64(toks[0], line)?, parse_f64(toks[1], line)?));
            }
        }
    }
    let window = window.ok_or(Error::Parse {
        line: 0,
        message: "missing window header".into(),
    })?;
    if let Some(p) = points.iter().find(|p| !window.contains(p)) {
        return Err(Error::Parse {
            line: 0,
            message: format!("point ({}, {}) outside window", p.x, p.y),
        });
    }
    Ok(Realization {
        points,
        window,
        label,
        seed,
    })
}

pub fn write_realization(path: &Path, r: &Realization) -> Result<()> {
    fs::write(path, format_realization(r))?;
    Ok(())
}

pub fn read_realization(path: &Path) -> Result<Realization> {
    parse_realization(&fs::read_to_string(path)?)
}

/// Write a batch as `dir/<label>/<label>_<index>.txt`.
pub fn write_batch(dir: &Path, label: &str, batch: &[Realization]) -> Result<Vec<PathBuf>> {
    let sub = dir.join(label);
    fs::create_dir_all(&sub)?;
    batch
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let path = sub.join(format!("{label}_{i:05}.txt"));
            write_realization(&path, r)?;
            Ok(path)
        })
        .collect()
}

/// Read every `*.txt` realization below `dir` (one subdirectory per label),
/// in sorted path order. Files without a `label` line take the name of
/// their directory.
pub fn read_batch(dir: &Path) -> Result<Vec<Realization>> {
    let mut files = Vec::new();
    collect_txt(dir, &mut files)?;
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let mut r = read_realization(&path)?;
            if r.label.is_none() {
                r.label = path
                    .parent()
                    .and_then(|p| p.file_name())
                    .map(|s| s.to_string_lossy().into_owned());
            }
            Ok(r)
        })
        .collect()
}

fn collect_txt(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_txt(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "txt") {
            out.push(path);
        }
    }
    Ok(())
}
