//! Plain-text edge lists: a header line `n m`, then `m` lines `tail head`
//! with 0-based labels. Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::Digraph;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn two_numbers(line_no: usize, text: &str) -> Result<(u64, u64)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<u64> {
        let tok = it.next().ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
        tok.parse::<u64>().map_err(|_| parse_err(line_no, format!("invalid {what} '{tok}'")))
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if let Some(extra) = it.next() {
        return Err(parse_err(line_no, format!("unexpected trailing field '{extra}'")));
    }
    Ok((a, b))
}

pub fn parse_edge_list(text: &str) -> Result<Digraph> {
    read_edge_list(text.as_bytes())
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Digraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (a, b) = two_numbers(line_no, t)?;
        let Some((n, m)) = header else {
            if a > u32::MAX as u64 {
                return Err(parse_err(line_no, format!("vertex count {a} too large")));
            }
            if b > a * a.saturating_sub(1) {
                return Err(parse_err(line_no, format!("{b} arcs cannot fit on {a} vertices")));
            }
            header = Some((a as usize, b as usize));
            arcs.reserve(b as usize);
            continue;
        };
        if arcs.len() == m {
            return Err(parse_err(line_no, format!("more than the declared {m} arcs")));
        }
        if a >= n as u64 || b >= n as u64 {
            return Err(parse_err(line_no, format!("arc ({a},{b}) has a vertex outside [0,{n})")));
        }
        if a == b {
            return Err(parse_err(line_no, format!("loop at vertex {a}")));
        }
        let arc = (a as u32, b as u32);
        if !seen.insert(arc) {
            return Err(parse_err(line_no, format!("duplicate arc ({a},{b})")));
        }
        arcs.push(arc);
    }
    let (n, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing 'n m' header"))?;
    if arcs.len() != m {
        return Err(parse_err(last_line, format!("header declares {m} arcs but {} were given", arcs.len())));
    }
    Ok(Digraph::from_arcs_unchecked(n, arcs))
}

pub fn write_edge_list<W: Write>(mut w: W, g: &Digraph) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.n(), g.m())?;
    for &(t, h) in g.arcs() {
        writeln!(w, "{t} {h}")?;
    }
    Ok(())
}
