//! Line-oriented graph text format.
//!
//! ```text
//! # pdag n=3
//! v 0 G1
//! 0 > 1
//! 1 - 2
//! ```
//!
//! The header is mandatory. `v <id> <name>` lines attach names (all or none);
//! edge endpoints may be ids or names. Other lines starting with `#` are
//! comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Pdag;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("pdag")?.trim();
    rest.strip_prefix("n=")?.trim().parse().ok()
}

pub fn parse_graph(text: &str) -> Result<Pdag> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (line_no, n) = loop {
        match lines.next() {
            None => return Err(parse_err(1, "missing `# pdag n=<n>` header")),
            Some((_, "")) => continue,
            Some((no, l)) => match parse_header(l) {
                Some(n) => break (no, n),
                None => return Err(parse_err(no, format!("bad header {l:?}"))),
            },
        }
    };
    let mut names: Vec<Option<String>> = vec![None; n];
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, String, char, String)> = Vec::new();
    for (no, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = l.split_whitespace().collect();
        match tokens.as_slice() {
            ["v", id, name] => {
                let id: usize = id.parse().map_err(|_| parse_err(no, format!("bad vertex id {id:?}")))?;
                if id >= n {
                    return Err(parse_err(no, format!("vertex id {id} out of range for n={n}")));
                }
                if names[id].is_some() {
                    return Err(parse_err(no, format!("vertex {id} named twice")));
                }
                if by_name.insert(name.to_string(), id).is_some() {
                    return Err(parse_err(no, format!("duplicate name {name:?}")));
                }
                names[id] = Some(name.to_string());
            }
            [u, op @ (">" | "-"), v] => {
                edges.push((no, u.to_string(), op.chars().next().unwrap(), v.to_string()));
            }
            _ => return Err(parse_err(no, format!("unrecognised record {l:?}"))),
        }
    }
    let resolve = |no: usize, tok: &str| -> Result<usize> {
        if let Some(&id) = by_name.get(tok) {
            return Ok(id);
        }
        match tok.parse::<usize>() {
            Ok(id) if id < n => Ok(id),
            Ok(id) => Err(parse_err(no, format!("vertex id {id} out of range for n={n}"))),
            Err(_) => Err(parse_err(no, format!("unknown vertex {tok:?}"))),
        }
    };
    let mut b = Pdag::builder(n);
    for (no, u, op, v) in &edges {
        let (u, v) = (resolve(*no, u)?, resolve(*no, v)?);
        let r = if *op == '>' { b.directed(u, v) } else { b.undirected(u, v) };
        r.map_err(|e| parse_err(*no, e.to_string()))?;
    }
    let named = names.iter().filter(|x| x.is_some()).count();
    if named == n && n > 0 {
        b.names(names.into_iter().map(Option::unwrap).collect())?;
    } else if named > 0 {
        return Err(parse_err(line_no, format!("only {named} of {n} vertices are named")));
    }
    Ok(b.build())
}

/// Text form; pairs in ascending order, endpoints always written as ids.
pub fn write_graph(g: &Pdag) -> Result<String> {
    let mut out = format!("# pdag n={}\n", g.order());
    if let Some(names) = g.names() {
        for (i, name) in names.iter().enumerate() {
            let bad = name.is_empty()
                || name.chars().any(char::is_whitespace)
                || name.starts_with('#')
                || name.parse::<usize>().is_ok()
                || name == ">"
                || name == "-";
            if bad {
                return Err(Error::InvalidParameter(format!("vertex name {name:?} cannot be written")));
            }
            writeln!(out, "v {i} {name}").unwrap();
        }
    }
    for u in 0..g.order() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if v < u {
                continue;
            }
            if g.is_undirected(u, v) {
                writeln!(out, "{u} - {v}").unwrap();
            } else if g.has_arrow(u, v) {
                writeln!(out, "{u} > {v}").unwrap();
            } else {
                writeln!(out, "{v} > {u}").unwrap();
            }
        }
    }
    Ok(out)
}

pub fn read_graph(path: &Path) -> Result<Pdag> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text)
}

pub fn write_graph_file(g: &Pdag, path: &Path) -> Result<()> {
    std::fs::write(path, write_graph(g)?).map_err(|e| Error::io(path, e))
}
