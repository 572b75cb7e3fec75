//! Whitespace-separated edge lists with arbitrary string vertex ids.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub graph: Graph,
    /// External id of each vertex index.
    pub ids: Vec<String>,
    /// Node and edge counts announced by a `# Nodes: N Edges: M` header, if any.
    pub declared: Option<(usize, usize)>,
    /// Non-comment lines read, before dropping duplicates and self-loops.
    pub lines: usize,
}

impl EdgeList {
    pub fn index_of(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }
}

fn declared_counts(comment: &str) -> Option<(usize, usize)> {
    let mut nodes = None;
    let mut edges = None;
    let mut tokens = comment.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.trim_end_matches(':') {
            "Nodes" => nodes = tokens.next().and_then(|t| t.parse().ok()),
            "Edges" => edges = tokens.next().and_then(|t| t.parse().ok()),
            _ => {}
        }
    }
    Some((nodes?, edges?))
}

pub fn parse_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<EdgeList> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut declared = None;
    let mut lines = 0;
    let mut intern = |tok: &str| -> usize {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        ids.push(tok.to_string());
        index.insert(tok.to_string(), ids.len() - 1);
        ids.len() - 1
    };
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            declared = declared.or_else(|| declared_counts(comment));
            continue;
        }
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => {
                let (u, v) = (intern(a), intern(b));
                edges.push((u, v));
                lines += 1;
            }
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: no + 1,
                    message: format!("expected two vertex ids, found `{line}`"),
                })
            }
        }
    }
    let graph = Graph::build(ids.len(), edges)?;
    Ok(EdgeList {
        graph,
        ids,
        declared,
        lines,
    })
}

pub fn ingest_edge_list(path: &Path) -> Result<EdgeList> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), path)
}
