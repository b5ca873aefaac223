//! DREAM3 gold-standard ingestion: tab-separated `source target flag` lines,
//! flag 1 meaning a directed regulatory edge.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Pdag;

/// Names are interned in order of first appearance, including flag-0 lines.
/// The network must be acyclic.
pub fn parse_dream3(text: &str) -> Result<Pdag> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut flags: BTreeMap<(usize, usize), (bool, usize)> = BTreeMap::new();
    let mut intern = |name: &str| -> usize {
        if let Some(&id) = ids.get(name) {
            return id;
        }
        ids.insert(name.to_string(), names.len());
        names.push(name.to_string());
        names.len() - 1
    };
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [src, dst, flag] = fields.as_slice() else {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        };
        let (src, dst, flag) = (src.trim(), dst.trim(), flag.trim());
        if src.is_empty() || dst.is_empty() {
            return Err(Error::Parse { line: no, msg: "empty gene name".into() });
        }
        let on = match flag {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("flag must be 0 or 1, found {other:?}"),
                })
            }
        };
        if src == dst {
            return Err(Error::Parse { line: no, msg: format!("self loop on {src}") });
        }
        let (u, v) = (intern(src), intern(dst));
        if let Some(&(prev, prev_line)) = flags.get(&(u, v)) {
            if prev != on {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("{src} -> {dst} contradicts line {prev_line}"),
                });
            }
        }
        flags.insert((u, v), (on, no));
    }
    let mut b = Pdag::builder(names.len());
    for (&(u, v), &(on, no)) in &flags {
        if !on {
            continue;
        }
        if let Some(&(true, other)) = flags.get(&(v, u)) {
            return Err(Error::Parse {
                line: no.max(other),
                msg: format!("both {0} -> {1} and {1} -> {0} present", names[u], names[v]),
            });
        }
        b.directed(u, v)?;
    }
    b.names(names)?;
    let g = b.build();
    g.require_dag()?;
    Ok(g)
}

pub fn ingest_dream3(path: &Path) -> Result<Pdag> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dream3(&text)
}
