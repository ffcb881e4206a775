//! Ancestry graph over every individual created during a run.
//!
//! Nodes are appended in birth order, so a child's id is always larger than
//! its parents' ids and the graph is acyclic by construction. Each node
//! remembers which operator produced it: genesis (no parents, e.g. the initial
//! population or a random immigrant), mutation (one parent) or recombination
//! (two parents).
//!
//! Distances follow the edges downwards, from ancestor to descendant:
//!
//! - [`GenealogyGraph::adist`]: fewest variation steps from an ancestor to a
//!   descendant, `None` (infinite) if the first node is not an ancestor.
//! - [`GenealogyGraph::latest_common_ancestor`]: the shared ancestor closest to
//!   either individual.
//! - [`GenealogyGraph::earliest_ancestor`]: the ancestor farthest away, which
//!   measures an individual's evolutionary age.
//! - [`GenealogyGraph::gdist`]: closeness of the latest common ancestor divided
//!   by the older individual's age; `1` for unrelated individuals.
//!
//! Ties in every argmin/argmax are resolved towards the smaller [`NodeId`].

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Identifier of an individual, assigned at birth in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub const fn new(raw: u32) -> Self {
        NodeId(raw)
    }

    pub const fn get(self) -> u32 {
        self.0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The operator that produced a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Genesis,
    Mutation,
    Recombination,
}

impl OpKind {
    pub const fn arity(self) -> usize {
        match self {
            OpKind::Genesis => 0,
            OpKind::Mutation => 1,
            OpKind::Recombination => 2,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            OpKind::Genesis => "genesis",
            OpKind::Mutation => "mutation",
            OpKind::Recombination => "recombination",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genesis" => Ok(OpKind::Genesis),
            "mutation" => Ok(OpKind::Mutation),
            "recombination" => Ok(OpKind::Recombination),
            _ => Err(Error::invalid(
                "op_kind",
                alloc::format!("unknown operator `{s}`"),
            )),
        }
    }
}

#[derive(Clone, Debug)]
struct NodeRecord {
    parents: Vec<NodeId>,
    op: OpKind,
    generation: u32,
}

/// Append-only DAG of births. Never shrinks during a run.
#[derive(Clone, Debug, Default)]
pub struct GenealogyGraph {
    nodes: Vec<NodeRecord>,
    children: Vec<Vec<NodeId>>,
}

impl GenealogyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn node_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Appends a node produced by `op` from `parents` during `generation`.
    ///
    /// Parents must already exist, be distinct, and match the operator's arity.
    pub fn record_birth(
        &mut self,
        parents: &[NodeId],
        op: OpKind,
        generation: u32,
    ) -> Result<NodeId> {
        if parents.len() != op.arity() {
            return Err(Error::Arity {
                op,
                expected: op.arity(),
                got: parents.len(),
            });
        }
        for &p in parents {
            self.check(p)?;
        }
        if op == OpKind::Recombination && parents[0] == parents[1] {
            return Err(Error::invalid(
                "parents",
                "recombination needs two distinct parents",
            ));
        }
        let id = u32::try_from(self.nodes.len())
            .map(NodeId)
            .map_err(|_| Error::invalid("graph", "node id space exhausted"))?;
        for &p in parents {
            self.children[p.index()].push(id);
        }
        self.nodes.push(NodeRecord {
            parents: parents.to_vec(),
            op,
            generation,
        });
        self.children.push(Vec::new());
        Ok(id)
    }

    pub fn parents(&self, id: NodeId) -> Result<&[NodeId]> {
        Ok(&self.record(id)?.parents)
    }

    pub fn children(&self, id: NodeId) -> Result<&[NodeId]> {
        self.check(id)?;
        Ok(&self.children[id.index()])
    }

    pub fn op_kind(&self, id: NodeId) -> Result<OpKind> {
        Ok(self.record(id)?.op)
    }

    pub fn birth_generation(&self, id: NodeId) -> Result<u32> {
        Ok(self.record(id)?.generation)
    }

    fn record(&self, id: NodeId) -> Result<&NodeRecord> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    fn check(&self, id: NodeId) -> Result<()> {
        self.record(id).map(|_| ())
    }

    /// Every ancestor of `x` (including `x` at distance 0) with its ancestral
    /// distance, found by reverse breadth-first search.
    pub fn ancestry(&self, x: NodeId) -> Result<Ancestry> {
        self.check(x)?;
        let mut seen: BTreeMap<NodeId, u32> = BTreeMap::new();
        let mut queue = VecDeque::new();
        seen.insert(x, 0);
        queue.push_back((x, 0u32));
        while let Some((node, d)) = queue.pop_front() {
            for &p in &self.nodes[node.index()].parents {
                if let alloc::collections::btree_map::Entry::Vacant(e) = seen.entry(p) {
                    e.insert(d + 1);
                    queue.push_back((p, d + 1));
                }
            }
        }
        Ok(Ancestry {
            node: x,
            entries: seen.into_iter().collect(),
        })
    }

    /// Fewest recorded variation steps leading from `from` down to `to`.
    /// `None` means infinite: `from` is not an ancestor of `to`.
    pub fn adist(&self, from: NodeId, to: NodeId) -> Result<Option<u32>> {
        self.check(from)?;
        self.check(to)?;
        if from > to {
            return Ok(None);
        }
        // Any path from `from` to `to` only visits ids in [from, to].
        let offset = from.index();
        let mut dist = alloc::vec![u32::MAX; to.index() - offset + 1];
        let mut queue = VecDeque::new();
        dist[to.index() - offset] = 0;
        queue.push_back(to);
        while let Some(node) = queue.pop_front() {
            let d = dist[node.index() - offset];
            if node == from {
                return Ok(Some(d));
            }
            for &p in &self.nodes[node.index()].parents {
                if p < from {
                    continue;
                }
                let slot = &mut dist[p.index() - offset];
                if *slot == u32::MAX {
                    *slot = d + 1;
                    queue.push_back(p);
                }
            }
        }
        Ok(None)
    }

    /// Common ancestor minimizing the smaller of its two ancestral distances,
    /// or `None` if the two ancestries are disjoint.
    pub fn latest_common_ancestor(&self, x1: NodeId, x2: NodeId) -> Result<Option<NodeId>> {
        let a = self.ancestry(x1)?;
        let b = self.ancestry(x2)?;
        Ok(a.latest_common(&b).map(|(id, _)| id))
    }

    /// Ancestor with the largest ancestral distance to `x`; `x` itself for a genesis node.
    pub fn earliest_ancestor(&self, x: NodeId) -> Result<NodeId> {
        Ok(self.ancestry(x)?.earliest().0)
    }

    /// Normalized genealogical distance in `[0, 1]`.
    pub fn gdist(&self, x1: NodeId, x2: NodeId) -> Result<f64> {
        let a = self.ancestry(x1)?;
        let b = self.ancestry(x2)?;
        Ok(Ancestry::gdist(&a, &b))
    }

    /// Shortest path between `x1` and `x2` when every recorded operator
    /// application counts as one undirected edge. `None` if disconnected.
    pub fn edist_oracle(&self, x1: NodeId, x2: NodeId) -> Result<Option<u32>> {
        self.check(x1)?;
        self.check(x2)?;
        let mut dist = alloc::vec![u32::MAX; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[x1.index()] = 0;
        queue.push_back(x1);
        while let Some(node) = queue.pop_front() {
            let d = dist[node.index()];
            if node == x2 {
                return Ok(Some(d));
            }
            let neighbours = self.nodes[node.index()]
                .parents
                .iter()
                .chain(&self.children[node.index()]);
            for &n in neighbours {
                if dist[n.index()] == u32::MAX {
                    dist[n.index()] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        Ok(None)
    }
}

/// The ancestor set of one node with ancestral distances, sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ancestry {
    node: NodeId,
    entries: Vec<(NodeId, u32)>,
}

impl Ancestry {
    /// Builds a child's ancestry from its parents' ancestries. Gives the same
    /// result as [`GenealogyGraph::ancestry`], in time linear in the parents' sizes.
    pub fn from_parents(child: NodeId, parents: &[&Ancestry]) -> Self {
        let mut entries: Vec<(NodeId, u32)> = match parents {
            [] => Vec::new(),
            [only] => only.entries.iter().map(|&(id, d)| (id, d + 1)).collect(),
            [first, rest @ ..] => {
                let mut acc: Vec<(NodeId, u32)> =
                    first.entries.iter().map(|&(id, d)| (id, d + 1)).collect();
                for p in rest {
                    acc = merge_min(&acc, p.entries.iter().map(|&(id, d)| (id, d + 1)));
                }
                acc
            }
        };
        debug_assert!(entries.last().is_none_or(|&(id, _)| id < child));
        entries.push((child, 0));
        Ancestry {
            node: child,
            entries,
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    /// Number of ancestors, counting the node itself.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// `adist(ancestor, self.node())`, `None` if not an ancestor.
    pub fn distance_from(&self, ancestor: NodeId) -> Option<u32> {
        self.entries
            .binary_search_by_key(&ancestor, |&(id, _)| id)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Earliest ancestor and its distance.
    pub fn earliest(&self) -> (NodeId, u32) {
        // Entries are in ascending id order; strict comparison keeps the smallest id on ties.
        let mut best = self.entries[0];
        for &(id, d) in &self.entries[1..] {
            if d > best.1 {
                best = (id, d);
            }
        }
        best
    }

    /// Evolutionary age: distance to the earliest ancestor.
    pub fn depth(&self) -> u32 {
        self.earliest().1
    }

    /// Latest common ancestor of the two nodes and `min(adist(L, x1), adist(L, x2))`.
    pub fn latest_common(&self, other: &Ancestry) -> Option<(NodeId, u32)> {
        let mut best: Option<(NodeId, u32)> = None;
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, da) = self.entries[i];
            let (b, db) = other.entries[j];
            match a.cmp(&b) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    let d = da.min(db);
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((a, d));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        best
    }

    /// Genealogical distance between the two owning nodes.
    ///
    /// `0` for the same node, `1` without a common ancestor, otherwise the
    /// distance to the latest common ancestor over the larger of the two ages.
    pub fn gdist(a: &Ancestry, b: &Ancestry) -> f64 {
        if a.node == b.node {
            return 0.0;
        }
        match a.latest_common(b) {
            None => 1.0,
            Some((_, closeness)) => {
                let age = a.depth().max(b.depth());
                if age == 0 {
                    0.0
                } else {
                    closeness as f64 / age as f64
                }
            }
        }
    }
}

fn merge_min(
    left: &[(NodeId, u32)],
    right: impl Iterator<Item = (NodeId, u32)>,
) -> Vec<(NodeId, u32)> {
    let mut out = Vec::with_capacity(left.len());
    let mut left = left.iter().copied().peekable();
    let mut right = right.peekable();
    loop {
        let next = match (left.peek(), right.peek()) {
            (None, None) => break,
            (Some(_), None) => left.next(),
            (None, Some(_)) => right.next(),
            (Some(&(a, da)), Some(&(b, db))) => match a.cmp(&b) {
                core::cmp::Ordering::Less => left.next(),
                core::cmp::Ordering::Greater => right.next(),
                core::cmp::Ordering::Equal => {
                    left.next();
                    right.next();
                    Some((a, da.min(db)))
                }
            },
        };
        out.extend(next);
    }
    out
}

/// Memoized ancestries for the nodes currently being compared.
///
/// A missing entry is derived from the parents' entries when those are cached
/// and by breadth-first search otherwise. Caching never changes results.
#[derive(Clone, Debug, Default)]
pub struct AncestryCache {
    map: BTreeMap<NodeId, Ancestry>,
}

impl AncestryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&mut self, graph: &GenealogyGraph, x: NodeId) -> Result<&Ancestry> {
        self.ensure(graph, x)?;
        Ok(&self.map[&x])
    }

    pub fn gdist(&mut self, graph: &GenealogyGraph, x1: NodeId, x2: NodeId) -> Result<f64> {
        self.ensure(graph, x1)?;
        self.ensure(graph, x2)?;
        Ok(Ancestry::gdist(&self.map[&x1], &self.map[&x2]))
    }

    /// Drops every entry whose node fails `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(NodeId) -> bool) {
        self.map.retain(|&id, _| keep(id));
    }

    fn ensure(&mut self, graph: &GenealogyGraph, x: NodeId) -> Result<()> {
        if self.map.contains_key(&x) {
            return Ok(());
        }
        let parents = graph.parents(x)?;
        let ancestry = if parents.iter().all(|p| self.map.contains_key(p)) {
            let refs: Vec<&Ancestry> = parents.iter().map(|p| &self.map[p]).collect();
            Ancestry::from_parents(x, &refs)
        } else {
            graph.ancestry(x)?
        };
        self.map.insert(x, ancestry);
        Ok(())
    }
}
