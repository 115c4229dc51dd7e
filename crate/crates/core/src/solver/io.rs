//! Line-oriented text format for conic programs.
//!
//! ```text
//! conic-program 1
//! blocks 3
//! free 1
//! nonneg 2
//! psd 2
//! size <rows> <cols>
//! offset <value>
//! c <col> <value>
//! b <row> <value>
//! a <row> <col> <value>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Only nonzero
//! entries of `c`, `b` and `A` are written; values use Rust's shortest
//! round-trip formatting, so dump followed by load is exact.

use std::fmt::Write as _;

use super::sparse::CsrMatrix;
use super::{Cone, ConicProgram};
use crate::error::{Error, Result};

pub fn dump(p: &ConicProgram) -> String {
    let mut s = String::new();
    writeln!(s, "conic-program 1").unwrap();
    writeln!(s, "blocks {}", p.cones.len()).unwrap();
    for cone in &p.cones {
        match cone {
            Cone::Free(n) => writeln!(s, "free {n}"),
            Cone::NonNeg(n) => writeln!(s, "nonneg {n}"),
            Cone::Psd(n) => writeln!(s, "psd {n}"),
        }
        .unwrap();
    }
    writeln!(s, "size {} {}", p.num_rows(), p.num_vars()).unwrap();
    writeln!(s, "offset {}", p.offset).unwrap();
    for (i, v) in p.c.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        writeln!(s, "c {i} {v}").unwrap();
    }
    for (i, v) in p.b.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        writeln!(s, "b {i} {v}").unwrap();
    }
    for (r, c, v) in p.a.triplets() {
        writeln!(s, "a {r} {c} {v}").unwrap();
    }
    s
}

pub fn load(text: &str) -> Result<ConicProgram> {
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("unexpected end of input, expected {what}")));
    let (ln, header) = next("header")?;
    if header != "conic-program 1" {
        return Err(err(ln, "expected header `conic-program 1`"));
    }
    let (ln, l) = next("block count")?;
    let nblocks: usize = field(l, "blocks", 1, ln)?[0].parse().map_err(|_| err(ln, "bad block count"))?;
    let mut cones = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let (ln, l) = next("block")?;
        let mut it = l.split_whitespace();
        let kind = it.next().unwrap_or("");
        let n: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| err(ln, "bad block size"))?;
        cones.push(match kind {
            "free" => Cone::Free(n),
            "nonneg" => Cone::NonNeg(n),
            "psd" => Cone::Psd(n),
            _ => return Err(err(ln, "unknown block kind")),
        });
    }
    let (ln, l) = next("size")?;
    let f = field(l, "size", 2, ln)?;
    let rows: usize = f[0].parse().map_err(|_| err(ln, "bad row count"))?;
    let cols: usize = f[1].parse().map_err(|_| err(ln, "bad column count"))?;
    let (ln, l) = next("offset")?;
    let offset: f64 = field(l, "offset", 1, ln)?[0].parse().map_err(|_| err(ln, "bad offset"))?;

    let mut c = vec![0.0; cols];
    let mut b = vec![0.0; rows];
    let mut trip = Vec::new();
    for (ln, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let idx = |k: usize, bound: usize| -> Result<usize> {
            let v: usize = parts.get(k).and_then(|x| x.parse().ok()).ok_or_else(|| err(ln, "bad index"))?;
            if v >= bound {
                return Err(err(ln, "index out of range"));
            }
            Ok(v)
        };
        let val = |k: usize| -> Result<f64> {
            parts.get(k).and_then(|x| x.parse().ok()).ok_or_else(|| err(ln, "bad value"))
        };
        match (parts.first().copied(), parts.len()) {
            (Some("c"), 3) => c[idx(1, cols)?] = val(2)?,
            (Some("b"), 3) => b[idx(1, rows)?] = val(2)?,
            (Some("a"), 4) => trip.push((idx(1, rows)?, idx(2, cols)?, val(3)?)),
            _ => return Err(err(ln, "expected `c i v`, `b i v` or `a i j v`")),
        }
    }
    let p = ConicProgram { c, a: CsrMatrix::from_triplets(rows, cols, &trip), b, cones, offset };
    p.validate()?;
    Ok(p)
}

fn field<'a>(line: &'a str, key: &str, count: usize, ln: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.first() != Some(&key) || parts.len() != count + 1 {
        return Err(Error::Parse { line: ln, msg: format!("expected `{key}` with {count} field(s)") });
    }
    Ok(parts[1..].to_vec())
}
