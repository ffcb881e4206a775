//! Line-oriented genealogy dump.
//!
//! One line per node in id order: `id, generation, op_kind, parent_ids...`
//!
//! ```text
//! 0, 0, genesis
//! 1, 0, genesis
//! 2, 1, mutation, 0
//! 3, 1, recombination, 0, 1
//! ```

use std::io::{self, BufRead, Write};

use gendiv_core::{GenealogyGraph, NodeId, OpKind};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn write_log<W: Write>(graph: &GenealogyGraph, mut out: W) -> io::Result<()> {
    for id in graph.node_ids() {
        let generation = graph.birth_generation(id).expect("id comes from the graph");
        let op = graph.op_kind(id).expect("id comes from the graph");
        write!(out, "{id}, {generation}, {op}")?;
        for p in graph.parents(id).expect("id comes from the graph") {
            write!(out, ", {p}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Rebuilds a graph from a log written by [`write_log`].
pub fn read_log<R: BufRead>(input: R) -> Result<GenealogyGraph, LogError> {
    let mut graph = GenealogyGraph::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| LogError::Parse {
            line: i + 1,
            message,
        };
        let mut fields = line.split(',').map(str::trim);
        let mut int = |what: &str| -> Result<u32, LogError> {
            let f = fields
                .next()
                .ok_or_else(|| err(format!("missing {what}")))?;
            f.parse().map_err(|_| err(format!("bad {what} `{f}`")))
        };
        let id = int("id")?;
        let generation = int("generation")?;
        let op: OpKind = fields
            .next()
            .ok_or_else(|| err("missing op_kind".into()))?
            .parse()
            .map_err(|e| err(format!("{e}")))?;
        let parents = fields
            .map(|f| {
                f.parse()
                    .map(NodeId::new)
                    .map_err(|_| err(format!("bad parent id `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if id as usize != graph.len() {
            return Err(err(format!("expected id {}, found {id}", graph.len())));
        }
        graph
            .record_birth(&parents, op, generation)
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(graph)
}
