//! Brute-force reference answers for genealogy queries.
//!
//! All-pairs shortest paths by Floyd-Warshall over the directed parent->child
//! edges and over their undirected view. Every query is then answered by
//! scanning all nodes, with no search from the query nodes at all.

#![allow(dead_code)]

use gendiv_core::{GenealogyGraph, NodeId, OpKind};
use rand::Rng;

pub const INF: u32 = u32::MAX;

pub struct Oracle {
    n: usize,
    directed: Vec<u32>,
    undirected: Vec<u32>,
}

impl Oracle {
    pub fn new(graph: &GenealogyGraph) -> Self {
        let n = graph.len();
        let mut directed = vec![INF; n * n];
        let mut undirected = vec![INF; n * n];
        for i in 0..n {
            directed[i * n + i] = 0;
            undirected[i * n + i] = 0;
        }
        for child in graph.node_ids() {
            let c = child.get() as usize;
            for p in graph.parents(child).unwrap() {
                let p = p.get() as usize;
                directed[p * n + c] = 1;
                undirected[p * n + c] = 1;
                undirected[c * n + p] = 1;
            }
        }
        for m in [&mut directed, &mut undirected] {
            for k in 0..n {
                for i in 0..n {
                    let ik = m[i * n + k];
                    if ik == INF {
                        continue;
                    }
                    for j in 0..n {
                        let kj = m[k * n + j];
                        if kj != INF && ik + kj < m[i * n + j] {
                            m[i * n + j] = ik + kj;
                        }
                    }
                }
            }
        }
        Oracle {
            n,
            directed,
            undirected,
        }
    }

    fn d(&self, from: usize, to: usize) -> u32 {
        self.directed[from * self.n + to]
    }

    pub fn adist(&self, from: NodeId, to: NodeId) -> Option<u32> {
        Some(self.d(from.get() as usize, to.get() as usize)).filter(|&d| d != INF)
    }

    pub fn edist(&self, a: NodeId, b: NodeId) -> Option<u32> {
        Some(self.undirected[a.get() as usize * self.n + b.get() as usize]).filter(|&d| d != INF)
    }

    /// Common ancestor minimizing min(adist(a, x1), adist(a, x2)); smallest id on ties.
    pub fn lca(&self, x1: NodeId, x2: NodeId) -> Option<(NodeId, u32)> {
        let (x1, x2) = (x1.get() as usize, x2.get() as usize);
        let mut best: Option<(NodeId, u32)> = None;
        for a in 0..self.n {
            let (d1, d2) = (self.d(a, x1), self.d(a, x2));
            if d1 == INF || d2 == INF {
                continue;
            }
            let v = d1.min(d2);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((NodeId::new(a as u32), v));
            }
        }
        best
    }

    /// Ancestor maximizing adist(a, x); smallest id on ties.
    pub fn earliest(&self, x: NodeId) -> (NodeId, u32) {
        let x = x.get() as usize;
        let mut best = (NodeId::new(x as u32), 0);
        for a in 0..self.n {
            let d = self.d(a, x);
            if d != INF && (d > best.1 || (d == best.1 && (a as u32) < best.0.get())) {
                best = (NodeId::new(a as u32), d);
            }
        }
        best
    }

    pub fn gdist(&self, x1: NodeId, x2: NodeId) -> f64 {
        if x1 == x2 {
            return 0.0;
        }
        match self.lca(x1, x2) {
            None => 1.0,
            Some((_, m)) => {
                let age = self.earliest(x1).1.max(self.earliest(x2).1);
                if age == 0 {
                    0.0
                } else {
                    m as f64 / age as f64
                }
            }
        }
    }
}

/// Random genealogy of `n` births mixing genesis, mutation and recombination.
pub fn random_dag<R: Rng>(n: usize, rng: &mut R) -> GenealogyGraph {
    let mut g = GenealogyGraph::new();
    for i in 0..n {
        let roll: f64 = rng.random();
        let generation = i as u32 / 5;
        if i == 0 || roll < 0.2 {
            g.record_birth(&[], OpKind::Genesis, generation).unwrap();
        } else if i == 1 || roll < 0.55 {
            let p = NodeId::new(rng.random_range(0..i as u32));
            g.record_birth(&[p], OpKind::Mutation, generation).unwrap();
        } else {
            let a = rng.random_range(0..i as u32);
            let mut b = rng.random_range(0..i as u32 - 1);
            if b >= a {
                b += 1;
            }
            g.record_birth(
                &[NodeId::new(a), NodeId::new(b)],
                OpKind::Recombination,
                generation,
            )
            .unwrap();
        }
    }
    g
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
